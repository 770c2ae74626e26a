"""Tokenizer for grammar files and query expressions.

`;` starts a comment to end of line.  Identifiers may contain digits,
hyphens, underscores and primes (`3rd`, `null-list`, `y'` are all single
symbols); a token of digits alone (optionally with one decimal point) is a
number.  `(+)` is the exclusive-or operator.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError

# token kinds
IDENT = "ident"
NUMBER = "number"
STRING = "string"
COREF = "coref"
DIRECTIVE = "directive"  # %name
DEFINE = ":="
PARTITION = ":<"
EQUALS = "="
AMP = "&"
BAR = "|"
TILDE = "~"
XOR = "(+)"
LPAREN = "("
RPAREN = ")"
LBRACK = "["
RBRACK = "]"
LANGLE = "<"
RANGLE = ">"
COMMA = ","
DOT = "."
AT = "@"
EOF = "eof"

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789")
_IDENT_CONT = _IDENT_START | set("-'!?")
_SINGLE = {
    "&": AMP, "|": BAR, "~": TILDE, ")": RPAREN, "[": LBRACK, "]": RBRACK,
    "<": LANGLE, ">": RANGLE, ",": COMMA, ".": DOT, "@": AT, "=": EQUALS,
}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    column: int

    def __repr__(self):
        return f"Token({self.kind!r}, {self.value!r})"


def tokenize(source: str) -> list[Token]:
    """Convert source text to a token list ending with an EOF token."""
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def err(msg, l=None, c=None):
        raise LexError(msg, l or line, c or col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and source[j] != '"':
                if source[j] == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    buf.append({"n": "\n", "t": "\t"}.get(esc, esc))
                    j += 2
                elif source[j] == "\n":
                    err("unterminated string", start_line, start_col)
                else:
                    buf.append(source[j])
                    j += 1
            if j >= n:
                err("unterminated string", start_line, start_col)
            tokens.append(Token(STRING, "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == "#":
            j = i + 1
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            if j == i + 1:
                err("expected tag name after '#'")
            tokens.append(Token(COREF, source[i + 1:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == "%":
            j = i + 1
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            if j == i + 1:
                err("expected directive name after '%'")
            tokens.append(Token(DIRECTIVE, source[i + 1:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == ":":
            nxt = source[i + 1] if i + 1 < n else ""
            if nxt == "=":
                tokens.append(Token(DEFINE, ":=", start_line, start_col))
                i += 2
                col += 2
                continue
            if nxt == "<":
                tokens.append(Token(PARTITION, ":<", start_line, start_col))
                i += 2
                col += 2
                continue
            err("stray ':'")
        if ch == "(":
            if source[i + 1:i + 3] == "+)":
                tokens.append(Token(XOR, "(+)", start_line, start_col))
                i += 3
                col += 3
                continue
            tokens.append(Token(LPAREN, "(", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            # a digit run flowing into identifier characters is a symbol (3rd)
            if j < n and source[j] in _IDENT_CONT:
                j = i
                while j < n and source[j] in _IDENT_CONT:
                    j += 1
                tokens.append(Token(IDENT, source[i:j], start_line, start_col))
            else:
                text = source[i:j]
                value = float(text) if "." in text else int(text)
                tokens.append(Token(NUMBER, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            tokens.append(Token(IDENT, source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue
        err(f"illegal character {ch!r}")
    tokens.append(Token(EOF, None, line, col))
    return tokens
