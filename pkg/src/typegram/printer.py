"""Rendering of expressions, normal forms and feature structures.

AST printing round-trips: parsing the output of print_expr yields a
structurally equal tree, so parenthesization follows the parser's
precedence exactly.
"""
from __future__ import annotations

from . import ast

# precedence levels, loosest first
_DISJ, _XOR, _CONJ, _NEG, _PRIMARY = 0, 1, 2, 3, 4


def print_atom(kind: str, value) -> str:
    if kind == "string":
        escaped = str(value).replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if kind == "number":
        if isinstance(value, float) and value.is_integer():
            return str(int(value))
        return str(value)
    return str(value)


def _print_ast(expr: ast.TypeExpr, level: int) -> str:
    if isinstance(expr, ast.TypeName):
        return expr.name
    if isinstance(expr, ast.Atom):
        return print_atom(expr.kind, expr.value)
    if isinstance(expr, ast.Coref):
        return f"#{expr.tag}"
    if isinstance(expr, ast.FeatureTerm):
        inner = ", ".join(f"{a} {_print_ast(v, _DISJ)}" for a, v in expr.pairs)
        return f"[{inner}]"
    if isinstance(expr, ast.ListTerm):
        if not expr.elements and expr.tail is None:
            return "< >"
        parts = ", ".join(_print_ast(e, _DISJ) for e in expr.elements)
        if expr.tail is not None:
            return f"< {parts} . {_print_ast(expr.tail, _DISJ)} >"
        return f"< {parts} >"
    if isinstance(expr, ast.Conj):
        text = " & ".join(_print_ast(e, _CONJ + 1) for e in expr.items)
        return _wrap(text, _CONJ, level)
    if isinstance(expr, ast.Disj):
        text = " | ".join(_print_ast(e, _DISJ + 1) for e in expr.items)
        return _wrap(text, _DISJ, level)
    if isinstance(expr, ast.Xor):
        left = _print_ast(expr.left, _XOR + 1)
        right = _print_ast(expr.right, _XOR + 1)
        return _wrap(f"{left} (+) {right}", _XOR, level)
    if isinstance(expr, ast.Neg):
        return f"~{_print_ast(expr.item, _NEG)}"
    if isinstance(expr, ast.TemplateCall):
        if not expr.args:
            return f"@{expr.name}"
        args = ", ".join(_print_ast(a, _DISJ) for a in expr.args)
        return f"@{expr.name}({args})"
    raise TypeError(f"cannot print {expr!r}")


def _wrap(text: str, own_level: int, required: int) -> str:
    return f"({text})" if own_level < required else text


def print_definition(defn: ast.DefinitionAst) -> str:
    if isinstance(defn, ast.TypeDef):
        head = f"sort {defn.name}" if defn.kind == "sort" else defn.name
        return f"{head} := {_print_ast(defn.body, _DISJ)}."
    if isinstance(defn, ast.InstanceDef):
        return f"{defn.name} := {_print_ast(defn.body, _DISJ)}."
    if isinstance(defn, ast.TemplateDef):
        params = ", ".join(defn.params)
        return f"{defn.name}({params}) := {_print_ast(defn.body, _DISJ)}."
    if isinstance(defn, ast.IncompatibilityDecl):
        return "bottom = " + " & ".join(defn.members) + "."
    if isinstance(defn, ast.PartitionDecl):
        return f"{defn.supertype} :< " + " | ".join(defn.members) + "."
    if isinstance(defn, ast.ControlSetting):
        return f"{defn.key} " + " ".join(defn.args) + "."
    raise TypeError(f"cannot print {defn!r}")


def print_expr(x) -> str:
    """Render an AST expression, normal form, verdict or feature structure."""
    from . import simplify
    if isinstance(x, (simplify.TypeLit, simplify.AtomLit, simplify.FsLit,
                      simplify.And, simplify.Or)) or x is simplify.TRUE \
            or x is simplify.FALSE:
        return simplify.print_nf(x)
    from . import fs
    if isinstance(x, fs.FeatureStructure) or x is fs.BOTTOM:
        return fs.render_avm(x)
    return _print_ast(x, _DISJ)
