"""Abstract syntax for the definition language.

Expression nodes are immutable and hashable; n-ary connectives keep their
parse-time nesting (parentheses are structural), the simplifier is the one
place that canonicalizes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

TypeExpr = Union[
    "TypeName", "Atom", "Coref", "FeatureTerm", "ListTerm",
    "Conj", "Disj", "Xor", "Neg", "TemplateCall",
]


@dataclass(frozen=True)
class TypeName:
    name: str


@dataclass(frozen=True)
class Atom:
    """Leaf constant. kind is one of 'symbol', 'string', 'number'."""

    kind: str
    value: object


@dataclass(frozen=True)
class Coref:
    tag: str


@dataclass(frozen=True)
class FeatureTerm:
    """Attribute/value pairs; attribute names are pairwise distinct."""

    pairs: tuple[tuple[str, TypeExpr], ...]

    def attributes(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.pairs)


@dataclass(frozen=True)
class ListTerm:
    """Surface list `< e1, e2 . tail >`; desugars to FIRST/REST chains."""

    elements: tuple[TypeExpr, ...]
    tail: TypeExpr | None = None


@dataclass(frozen=True)
class Conj:
    items: tuple[TypeExpr, ...]


@dataclass(frozen=True)
class Disj:
    items: tuple[TypeExpr, ...]


@dataclass(frozen=True)
class Xor:
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class Neg:
    item: TypeExpr


@dataclass(frozen=True)
class TemplateCall:
    name: str
    args: tuple[TypeExpr, ...]


# ---------------------------------------------------------------------------
# Top-level definitions


@dataclass(frozen=True)
class TypeDef:
    name: str
    kind: str  # 'avm' | 'sort'
    body: TypeExpr


@dataclass(frozen=True)
class InstanceDef:
    name: str
    body: TypeExpr


@dataclass(frozen=True)
class TemplateDef:
    name: str
    params: tuple[str, ...]
    body: TypeExpr


@dataclass(frozen=True)
class IncompatibilityDecl:
    members: tuple[str, ...]


@dataclass(frozen=True)
class PartitionDecl:
    supertype: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class ControlSetting:
    """One line of a `%control.` section, e.g. ('expand-never', ('daughters',))."""

    key: str
    args: tuple[str, ...]


DefinitionAst = Union[
    TypeDef, InstanceDef, TemplateDef, IncompatibilityDecl, PartitionDecl,
    ControlSetting,
]


def walk(expr: TypeExpr):
    """Yield expr and all subexpressions, preorder."""
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, (Conj, Disj)):
            stack.extend(e.items)
        elif isinstance(e, Xor):
            stack.append(e.left)
            stack.append(e.right)
        elif isinstance(e, Neg):
            stack.append(e.item)
        elif isinstance(e, FeatureTerm):
            stack.extend(v for _, v in e.pairs)
        elif isinstance(e, ListTerm):
            stack.extend(e.elements)
            if e.tail is not None:
                stack.append(e.tail)
        elif isinstance(e, TemplateCall):
            stack.extend(e.args)
