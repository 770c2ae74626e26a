"""Recursive descent parser for definitions and query expressions.

Operator precedence, tightest first: `~`, `&`, `(+)`, `|`; parentheses
override and are kept as structural nesting.  Definitions are terminated by
`.`.  The directive `%instances.` switches to instance definitions,
`%control.` to expansion-control lines, `%types.` back to type definitions.
"""
from __future__ import annotations

from . import ast, lexer
from .errors import ParseError
from .lexer import Token

RESERVED_NAMES = frozenset({"top", "bottom", "symbol", "string", "number"})
PREDEFINED_NAMES = frozenset({"list", "null-list", "cons"})

_CONTROL_KEYS = {
    "expand-always": 1,
    "expand-never": 1,
    "expand-path": 1,
    "depth": 2,
    "max-path-length": 1,
    "mode": 1,
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.mode = "types"

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != lexer.EOF:
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, got {tok.kind!r} ({tok.value!r})",
                tok.line, tok.column)
        return self.advance()

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    # -- items -------------------------------------------------------------

    def parse_items(self) -> list[ast.DefinitionAst]:
        items: list[ast.DefinitionAst] = []
        while self.peek().kind != lexer.EOF:
            item = self.parse_item()
            if item is not None:
                items.append(item)
        return items

    def parse_item(self) -> ast.DefinitionAst | None:
        tok = self.peek()
        if tok.kind == lexer.DIRECTIVE:
            self.advance()
            self.expect(lexer.DOT)
            if tok.value not in ("types", "instances", "control"):
                raise ParseError(f"unknown directive %{tok.value}", tok.line, tok.column)
            self.mode = tok.value
            return None
        if self.mode == "control":
            return self.parse_control_line()
        if tok.kind != lexer.IDENT:
            raise self.fail(f"expected a definition, got {tok.kind!r}")
        if tok.value == "sort" and self.peek(1).kind == lexer.IDENT:
            return self.parse_sort_definition()
        if tok.value == "bottom" and self.peek(1).kind == lexer.EQUALS:
            return self.parse_incompatibility()
        return self.parse_named_definition()

    def parse_control_line(self) -> ast.ControlSetting:
        key_tok = self.expect(lexer.IDENT)
        key = key_tok.value
        if key not in _CONTROL_KEYS:
            raise ParseError(f"unknown control setting {key!r}",
                             key_tok.line, key_tok.column)
        args = []
        for _ in range(_CONTROL_KEYS[key]):
            tok = self.peek()
            if tok.kind not in (lexer.IDENT, lexer.NUMBER, lexer.STRING):
                raise self.fail(f"expected an argument for {key!r}")
            self.advance()
            args.append(str(tok.value))
        self.expect(lexer.DOT)
        return ast.ControlSetting(key, tuple(args))

    def parse_sort_definition(self) -> ast.TypeDef:
        self.advance()  # 'sort'
        name = self.expect(lexer.IDENT).value
        if self.peek().kind == lexer.DOT:
            self.advance()
            return ast.TypeDef(name, "sort", ast.TypeName("top"))
        self.expect(lexer.DEFINE)
        body = self.parse_expr()
        self.expect(lexer.DOT)
        return ast.TypeDef(name, "sort", body)

    def parse_incompatibility(self) -> ast.IncompatibilityDecl:
        self.advance()  # 'bottom'
        self.expect(lexer.EQUALS)
        members = [self.expect(lexer.IDENT).value]
        while self.peek().kind == lexer.AMP:
            self.advance()
            members.append(self.expect(lexer.IDENT).value)
        self.expect(lexer.DOT)
        if len(members) < 2:
            raise self.fail("an incompatibility declaration needs at least 2 types")
        return ast.IncompatibilityDecl(tuple(members))

    def parse_named_definition(self) -> ast.DefinitionAst:
        name_tok = self.expect(lexer.IDENT)
        name = name_tok.value
        nxt = self.peek()
        if nxt.kind == lexer.LPAREN:
            return self.parse_template_def(name, name_tok)
        if nxt.kind == lexer.PARTITION:
            return self.parse_partition(name)
        self.expect(lexer.DEFINE)
        body = self.parse_expr()
        self.expect(lexer.DOT)
        if self.mode == "instances":
            return ast.InstanceDef(name, body)
        return ast.TypeDef(name, "avm", body)

    def parse_template_def(self, name: str, name_tok: Token) -> ast.TemplateDef:
        self.expect(lexer.LPAREN)
        params = []
        if self.peek().kind != lexer.RPAREN:
            params.append(self.expect(lexer.IDENT).value)
            while self.peek().kind == lexer.COMMA:
                self.advance()
                params.append(self.expect(lexer.IDENT).value)
        self.expect(lexer.RPAREN)
        if len(set(params)) != len(params):
            raise ParseError(f"template {name!r} has duplicate parameters",
                             name_tok.line, name_tok.column)
        self.expect(lexer.DEFINE)
        body = self.parse_expr()
        self.expect(lexer.DOT)
        return ast.TemplateDef(name, tuple(params), body)

    def parse_partition(self, supertype: str) -> ast.PartitionDecl:
        self.expect(lexer.PARTITION)
        members = [self.expect(lexer.IDENT).value]
        while self.peek().kind == lexer.BAR:
            self.advance()
            members.append(self.expect(lexer.IDENT).value)
        self.expect(lexer.DOT)
        if len(members) < 2:
            raise self.fail("a partition needs at least 2 members")
        if len(set(members)) != len(members):
            raise self.fail("partition members must be pairwise distinct")
        return ast.PartitionDecl(supertype, tuple(members))

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> ast.TypeExpr:
        return self.parse_disj()

    def parse_disj(self) -> ast.TypeExpr:
        items = [self.parse_xor()]
        while self.peek().kind == lexer.BAR:
            self.advance()
            items.append(self.parse_xor())
        if len(items) == 1:
            return items[0]
        expr = ast.Disj(tuple(items))
        self._reject_corefs_under(expr, "'|'")
        return expr

    def parse_xor(self) -> ast.TypeExpr:
        expr = self.parse_conj()
        while self.peek().kind == lexer.XOR:
            tok = self.advance()
            right = self.parse_conj()
            expr = ast.Xor(expr, right)
            self._reject_corefs_under(expr, "'(+)'", tok)
        return expr

    def parse_conj(self) -> ast.TypeExpr:
        items = [self.parse_neg()]
        while self.peek().kind == lexer.AMP:
            self.advance()
            items.append(self.parse_neg())
        if len(items) == 1:
            return items[0]
        return ast.Conj(tuple(items))

    def parse_neg(self) -> ast.TypeExpr:
        if self.peek().kind == lexer.TILDE:
            tok = self.advance()
            operand = self.parse_neg()
            self._check_negatable(operand, tok)
            return ast.Neg(operand)
        return self.parse_primary()

    def _check_negatable(self, operand: ast.TypeExpr, tok: Token):
        for sub in ast.walk(operand):
            if isinstance(sub, ast.TemplateCall):
                continue  # re-checked after template expansion
            if isinstance(sub, (ast.FeatureTerm, ast.ListTerm)):
                raise ParseError(
                    "negation is restricted to type symbols; feature terms "
                    "cannot be negated", tok.line, tok.column)
            if isinstance(sub, (ast.Atom, ast.Coref)):
                raise ParseError(
                    "negation is restricted to type symbols", tok.line, tok.column)

    def _reject_corefs_under(self, expr: ast.TypeExpr, op: str, tok: Token | None = None):
        for sub in ast.walk(expr):
            if isinstance(sub, ast.Coref):
                line = tok.line if tok else None
                col = tok.column if tok else None
                raise ParseError(
                    f"coreference tags may not occur under {op}: disjunctive "
                    "sharing is not supported", line, col)

    def parse_primary(self) -> ast.TypeExpr:
        tok = self.peek()
        if tok.kind == lexer.LPAREN:
            self.advance()
            expr = self.parse_expr()
            self.expect(lexer.RPAREN)
            return expr
        if tok.kind == lexer.LBRACK:
            return self.parse_feature_term()
        if tok.kind == lexer.LANGLE:
            return self.parse_list_term()
        if tok.kind == lexer.COREF:
            self.advance()
            return ast.Coref(tok.value)
        if tok.kind == lexer.NUMBER:
            self.advance()
            return ast.Atom("number", tok.value)
        if tok.kind == lexer.STRING:
            self.advance()
            return ast.Atom("string", tok.value)
        if tok.kind == lexer.AT:
            return self.parse_template_call()
        if tok.kind == lexer.IDENT:
            self.advance()
            return ast.TypeName(tok.value)
        raise self.fail(
            f"expected a type expression, got {tok.kind!r} ({tok.value!r})")

    def parse_feature_term(self) -> ast.FeatureTerm:
        open_tok = self.expect(lexer.LBRACK)
        pairs: list[tuple[str, ast.TypeExpr]] = []
        seen: set[str] = set()
        if self.peek().kind != lexer.RBRACK:
            while True:
                attr_tok = self.expect(lexer.IDENT)
                attr = attr_tok.value
                if attr in seen:
                    raise ParseError(f"duplicate attribute {attr}",
                                     attr_tok.line, attr_tok.column)
                seen.add(attr)
                value = self.parse_expr()
                pairs.append((attr, value))
                if self.peek().kind != lexer.COMMA:
                    break
                self.advance()
        self.expect(lexer.RBRACK)
        del open_tok
        return ast.FeatureTerm(tuple(pairs))

    def parse_list_term(self) -> ast.ListTerm:
        self.expect(lexer.LANGLE)
        elements: list[ast.TypeExpr] = []
        tail: ast.TypeExpr | None = None
        if self.peek().kind != lexer.RANGLE:
            elements.append(self.parse_expr())
            while self.peek().kind == lexer.COMMA:
                self.advance()
                elements.append(self.parse_expr())
            if self.peek().kind == lexer.DOT:
                self.advance()
                tail = self.parse_expr()
        self.expect(lexer.RANGLE)
        return ast.ListTerm(tuple(elements), tail)

    def parse_template_call(self) -> ast.TemplateCall:
        self.expect(lexer.AT)
        name = self.expect(lexer.IDENT).value
        args: list[ast.TypeExpr] = []
        if self.peek().kind == lexer.LPAREN:
            self.advance()
            if self.peek().kind != lexer.RPAREN:
                args.append(self.parse_expr())
                while self.peek().kind == lexer.COMMA:
                    self.advance()
                    args.append(self.parse_expr())
            self.expect(lexer.RPAREN)
        return ast.TemplateCall(name, tuple(args))


def parse_definitions(tokens: list[Token]) -> list[ast.DefinitionAst]:
    """Parse a token stream into top-level definitions."""
    return _Parser(tokens).parse_items()


def parse_expression(tokens: list[Token]) -> ast.TypeExpr:
    """Parse a single type expression (no trailing `.` required)."""
    p = _Parser(tokens)
    expr = p.parse_expr()
    trailing = p.peek()
    if trailing.kind == lexer.DOT:
        p.advance()
        trailing = p.peek()
    if trailing.kind != lexer.EOF:
        raise ParseError(f"unexpected {trailing.kind!r} after expression",
                         trailing.line, trailing.column)
    return expr


def parse_text(source: str) -> list[ast.DefinitionAst]:
    """Tokenize and parse grammar text."""
    return parse_definitions(lexer.tokenize(source))
