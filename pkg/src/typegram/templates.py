"""Parameterized template (macro) expansion over definition bodies."""
from __future__ import annotations

from dataclasses import replace

from . import ast
from .errors import TemplateError


def _collect_tags(expr: ast.TypeExpr, into: set[str]):
    for sub in ast.walk(expr):
        if isinstance(sub, ast.Coref):
            into.add(sub.tag)


def _rename_tags(expr: ast.TypeExpr, renaming: dict[str, str]) -> ast.TypeExpr:
    if isinstance(expr, ast.Coref):
        return ast.Coref(renaming.get(expr.tag, expr.tag))
    return _rebuild(expr, lambda e: _rename_tags(e, renaming))


def _substitute(expr: ast.TypeExpr, env: dict[str, ast.TypeExpr]) -> ast.TypeExpr:
    if isinstance(expr, ast.TypeName) and expr.name in env:
        return env[expr.name]
    return _rebuild(expr, lambda e: _substitute(e, env))


def _rebuild(expr: ast.TypeExpr, f) -> ast.TypeExpr:
    if isinstance(expr, ast.Conj):
        return ast.Conj(tuple(f(e) for e in expr.items))
    if isinstance(expr, ast.Disj):
        return ast.Disj(tuple(f(e) for e in expr.items))
    if isinstance(expr, ast.Xor):
        return ast.Xor(f(expr.left), f(expr.right))
    if isinstance(expr, ast.Neg):
        return ast.Neg(f(expr.item))
    if isinstance(expr, ast.FeatureTerm):
        return ast.FeatureTerm(tuple((a, f(v)) for a, v in expr.pairs))
    if isinstance(expr, ast.ListTerm):
        tail = f(expr.tail) if expr.tail is not None else None
        return ast.ListTerm(tuple(f(e) for e in expr.elements), tail)
    if isinstance(expr, ast.TemplateCall):
        return ast.TemplateCall(expr.name, tuple(f(a) for a in expr.args))
    return expr


def expand_templates(defn: ast.DefinitionAst,
                     templates: dict[str, ast.TemplateDef]) -> ast.DefinitionAst:
    """Replace every template call in a definition body by its instantiation.

    Coreference tags inside a template body are renamed fresh per
    instantiation, so repeated calls cannot capture each other or the
    caller's tags.
    """
    if not isinstance(defn, (ast.TypeDef, ast.InstanceDef)):
        return defn
    used_tags: set[str] = set()
    _collect_tags(defn.body, used_tags)
    counter = [0]

    def fresh(tag: str) -> str:
        while True:
            counter[0] += 1
            candidate = f"{tag}_{counter[0]}"
            if candidate not in used_tags:
                used_tags.add(candidate)
                return candidate

    def expand(expr: ast.TypeExpr, active: tuple[str, ...]) -> ast.TypeExpr:
        if isinstance(expr, ast.TemplateCall):
            tpl = templates.get(expr.name)
            if tpl is None:
                raise TemplateError(f"unknown template @{expr.name}")
            if expr.name in active:
                chain = " -> ".join(active + (expr.name,))
                raise TemplateError(f"recursive template expansion: {chain}")
            if len(expr.args) != len(tpl.params):
                raise TemplateError(
                    f"template @{expr.name} takes {len(tpl.params)} argument(s), "
                    f"got {len(expr.args)}")
            args = tuple(expand(a, active) for a in expr.args)
            body_tags: set[str] = set()
            _collect_tags(tpl.body, body_tags)
            renaming = {t: fresh(t) for t in sorted(body_tags)}
            body = _rename_tags(tpl.body, renaming)
            body = _substitute(body, dict(zip(tpl.params, args)))
            return expand(body, active + (expr.name,))
        return _rebuild(expr, lambda e: expand(e, active))

    new_body = expand(defn.body, ())
    _validate(new_body)
    return replace(defn, body=new_body)


def _validate(expr: ast.TypeExpr):
    """Re-check surface restrictions that a template body could smuggle in."""
    for sub in ast.walk(expr):
        if isinstance(sub, ast.Neg):
            for inner in ast.walk(sub.item):
                if isinstance(inner, (ast.FeatureTerm, ast.ListTerm, ast.Atom,
                                      ast.Coref)):
                    raise TemplateError(
                        "negation is restricted to type symbols")
        if isinstance(sub, (ast.Disj, ast.Xor)):
            for inner in ast.walk(sub):
                if isinstance(inner, ast.Coref):
                    raise TemplateError(
                        "coreference tags may not occur under '|' or '(+)'")
