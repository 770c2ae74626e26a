"""Symbolic simplifier: sorted CNF/DNF normal forms over type expressions.

Normal forms are unique modulo nothing: commutation and reassociation are
erased by a total order on terms, so one representative stands for a whole
equivalence class.  That makes memoization a dictionary lookup on the
printed, sorted input form.

Reduction rules are hard-wired: double negation, De Morgan, distribution
toward the target form, idempotence, identity, annihilation, complement and
absorption.  When a hierarchy is supplied, subsumption and declared
incompatibilities reduce further (a & b => a when a is below b, and so on).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key

from . import ast, printer
from .errors import FormTooLarge


class _Top:
    __slots__ = ()

    def __repr__(self):
        return "TRUE"


class _Bot:
    __slots__ = ()

    def __repr__(self):
        return "FALSE"


TRUE = _Top()
FALSE = _Bot()


@dataclass(frozen=True)
class TypeLit:
    name: str
    negated: bool = False


@dataclass(frozen=True)
class AtomLit:
    kind: str  # 'symbol' | 'string' | 'number'
    value: object


class FsLit:
    """Opaque feature-term literal; identity is its canonical printed form."""

    __slots__ = ("payload", "_key")

    def __init__(self, payload):
        self.payload = payload
        self._key = None

    @property
    def key(self) -> str:
        if self._key is None:
            self._key = printer.print_expr(self.payload)
        return self._key

    def __eq__(self, other):
        return isinstance(other, FsLit) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"FsLit({self.key})"


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


_NF_TYPES = (_Top, _Bot, TypeLit, AtomLit, FsLit, And, Or)


def is_literal_nf(x) -> bool:
    return isinstance(x, (TypeLit, AtomLit, FsLit)) or x is TRUE or x is FALSE


# ---------------------------------------------------------------------------
# Total order on normal-form terms


def _category(x) -> int:
    if x is FALSE:
        return 0
    if x is TRUE:
        return 1
    if isinstance(x, TypeLit):
        return 3 if x.negated else 2
    if isinstance(x, FsLit):
        return 4
    if isinstance(x, And):
        return 5
    if isinstance(x, Or):
        return 6
    if isinstance(x, AtomLit):
        return {"symbol": 7, "string": 8, "number": 9}[x.kind]
    raise TypeError(f"not a normal-form term: {x!r}")


def compare_nf(x, y) -> int:
    """Total order on normal-form terms: negative, zero or positive.

    Category ranks: type < negated type < feature term < conjunction <
    disjunction < symbol < string < number; within a category names and
    strings compare lexicographically, numbers numerically, sequences
    element-wise with the shorter one first on a tied prefix.
    """
    cx, cy = _category(x), _category(y)
    if cx != cy:
        return -1 if cx < cy else 1
    if isinstance(x, TypeLit):
        return _cmp(x.name, y.name)
    if isinstance(x, AtomLit):
        return _cmp(x.value, y.value)
    if isinstance(x, FsLit):
        return _cmp(x.key, y.key)
    if isinstance(x, (And, Or)):
        for a, b in zip(x.items, y.items):
            c = compare_nf(a, b)
            if c != 0:
                return c
        return _cmp(len(x.items), len(y.items))
    return 0


def _cmp(a, b) -> int:
    return -1 if a < b else (1 if a > b else 0)


_SORT_KEY = cmp_to_key(compare_nf)


def literal_count(x) -> int:
    if isinstance(x, (And, Or)):
        return sum(literal_count(i) for i in x.items)
    return 1


# ---------------------------------------------------------------------------
# Printing


def print_nf(x) -> str:
    if x is TRUE:
        return "top"
    if x is FALSE:
        return "bottom"
    if isinstance(x, TypeLit):
        return ("~" if x.negated else "") + x.name
    if isinstance(x, AtomLit):
        return printer.print_atom(x.kind, x.value)
    if isinstance(x, FsLit):
        return x.key
    if isinstance(x, And):
        parts = []
        for i in x.items:
            text = print_nf(i)
            parts.append(f"({text})" if isinstance(i, Or) else text)
        return " & ".join(parts)
    if isinstance(x, Or):
        return " | ".join(print_nf(i) for i in x.items)
    raise TypeError(f"cannot print {x!r}")


# ---------------------------------------------------------------------------
# Hierarchy interface used by semantic rules (duck-typed; see hierarchy.py)
#
#   kind_of(name)                  -> 'avm'|'sort'|'builtin'|'intermediate'|None
#   nf_subsumes(a, b)              -> bool, both names with entries
#   incompatible_subset(names)     -> bool, any declared/propagated set inside
#   atom_in_type(kind, value, t)   -> bool, atom's built-in type below t


class _Ctx:
    __slots__ = ("hier", "budget", "count")

    def __init__(self, hier, budget):
        self.hier = hier
        self.budget = budget
        self.count = 0

    def spend(self, n):
        self.count += n
        if self.count > self.budget:
            raise FormTooLarge(
                f"normal form exceeds the literal budget ({self.budget})")

    def kind(self, name):
        return self.hier.kind_of(name) if self.hier is not None else None

    def below(self, a, b) -> bool:
        return self.hier is not None and self.hier.nf_subsumes(b, a)

    def incompatible(self, names) -> bool:
        return self.hier is not None and self.hier.incompatible_subset(frozenset(names))

    def atom_in(self, lit: AtomLit, t: str) -> bool:
        return self.hier is not None and self.hier.atom_in_type(lit.kind, lit.value, t)


# ---------------------------------------------------------------------------
# Core rewriting.  A "matrix" is a list of frozensets of literals:
# in CNF a conjunction of disjunctive clauses, in DNF a disjunction of
# conjunctive terms.  None stands for the annihilating whole form
# (FALSE in CNF, also FALSE in DNF -- empty matrix is the neutral one).


def _lit_resolvable(ctx, lit) -> bool:
    return isinstance(lit, TypeLit) and ctx.kind(lit.name) is not None


def _reduce_conj_pair(ctx, x, y):
    """Return 'left', 'right', 'false' or None (keep both) for x & y."""
    if x == y:
        return "left"
    if isinstance(x, TypeLit) and isinstance(y, TypeLit) and x.name == y.name:
        return "false"  # complement pair
    tx, ty = _lit_resolvable(ctx, x), _lit_resolvable(ctx, y)
    if isinstance(x, TypeLit) and isinstance(y, TypeLit) and tx and ty:
        if not x.negated and not y.negated:
            if ctx.below(x.name, y.name):
                return "left"
            if ctx.below(y.name, x.name):
                return "right"
            return None
        if x.negated and y.negated:
            if ctx.below(x.name, y.name):
                return "right"  # ~x & ~y = ~y when x is below y
            if ctx.below(y.name, x.name):
                return "left"
            return None
        pos, neg, pos_side = (x, y, "left") if y.negated else (y, x, "right")
        if ctx.below(pos.name, neg.name):
            return "false"
        if ctx.incompatible({pos.name, neg.name}):
            return pos_side
        return None
    if isinstance(x, AtomLit) and isinstance(y, AtomLit):
        return "left" if _atoms_equal(x, y) else "false"
    for atom, t, atom_side in ((x, y, "left"), (y, x, "right")):
        if isinstance(atom, AtomLit) and isinstance(t, TypeLit) \
                and _lit_resolvable(ctx, t):
            kind = ctx.kind(t.name)
            inside = kind in ("sort", "builtin", "top") and ctx.atom_in(atom, t.name)
            if t.negated:
                return "false" if inside else atom_side
            if kind in ("sort", "builtin", "top"):
                return atom_side if inside else "false"
            return "false"  # structured types contain no atoms
    return None


def _reduce_disj_pair(ctx, x, y):
    """Return 'left', 'right', 'true' or None (keep both) for x | y."""
    if x == y:
        return "left"
    if isinstance(x, TypeLit) and isinstance(y, TypeLit) and x.name == y.name:
        return "true"  # complement pair
    tx, ty = _lit_resolvable(ctx, x), _lit_resolvable(ctx, y)
    if isinstance(x, TypeLit) and isinstance(y, TypeLit) and tx and ty:
        if not x.negated and not y.negated:
            if ctx.below(x.name, y.name):
                return "right"  # x | y = y when x below y
            if ctx.below(y.name, x.name):
                return "left"
            return None
        if x.negated and y.negated:
            if ctx.incompatible({x.name, y.name}):
                return "true"
            if ctx.below(x.name, y.name):
                return "left"  # ~x is the larger set
            if ctx.below(y.name, x.name):
                return "right"
            return None
        pos, neg, neg_side = (x, y, "right") if y.negated else (y, x, "left")
        if ctx.below(neg.name, pos.name):
            return "true"
        if ctx.incompatible({pos.name, neg.name}):
            return neg_side
        return None
    for atom, t, t_side in ((x, y, "right"), (y, x, "left")):
        if isinstance(atom, AtomLit) and isinstance(t, TypeLit) \
                and _lit_resolvable(ctx, t):
            kind = ctx.kind(t.name)
            inside = kind in ("sort", "builtin", "top") and ctx.atom_in(atom, t.name)
            if t.negated:
                if not inside:
                    return t_side  # the atom lies in the complement
                return None
            if inside:
                return t_side
            return None
    return None


def _atoms_equal(x: AtomLit, y: AtomLit) -> bool:
    return x.kind == y.kind and x.value == y.value


def _reduce_group(ctx, lits, pair_rule, absorb):
    """Apply a pairwise rule over a literal set until fixpoint.

    absorb is 'false' or 'true': the annihilator returned by the rule.
    Returns (literals, annihilated: bool).
    """
    items = list(dict.fromkeys(lits))
    changed = True
    while changed:
        changed = False
        n = len(items)
        for i in range(n):
            if changed:
                break
            for j in range(i + 1, n):
                verdict = pair_rule(ctx, items[i], items[j])
                if verdict is None:
                    continue
                if verdict == absorb:
                    return [], True
                if verdict == "left":
                    del items[j]
                else:
                    del items[i]
                changed = True
                break
    return items, False


def _check_incompatible_set(ctx, lits) -> bool:
    names = frozenset(l.name for l in lits
                      if isinstance(l, TypeLit) and not l.negated)
    return bool(names) and ctx.incompatible(names)


def _make_clause(ctx, lits):
    """Disjunctive clause for CNF; None when the clause is trivially true."""
    items, annihilated = _reduce_group(ctx, lits, _reduce_disj_pair, "true")
    return None if annihilated else frozenset(items)


def _make_term(ctx, lits):
    """Conjunctive term for DNF; None when the term is trivially false."""
    items, annihilated = _reduce_group(ctx, lits, _reduce_conj_pair, "false")
    if annihilated or _check_incompatible_set(ctx, items):
        return None
    return frozenset(items)


def _absorb(groups: list[frozenset]) -> list[frozenset]:
    """Drop any group that is a superset of another (absorption)."""
    kept: list[frozenset] = []
    groups = sorted(set(groups), key=len)
    for g in groups:
        if not any(k <= g for k in kept):
            kept.append(g)
    return kept


def _cnf_postprocess(ctx, clauses):
    """Unit-literal reasoning across clauses; returns clauses or None (FALSE)."""
    clauses = _absorb(clauses)
    units = [next(iter(c)) for c in clauses if len(c) == 1]
    if units:
        reduced, annihilated = _reduce_group(ctx, units, _reduce_conj_pair, "false")
        if annihilated or _check_incompatible_set(ctx, reduced):
            return None
        if set(reduced) != set(units):
            dropped = set(units) - set(reduced)
            clauses = [c for c in clauses
                       if not (len(c) == 1 and next(iter(c)) in dropped)]
            for lit in reduced:
                if not any(len(c) == 1 and next(iter(c)) == lit for c in clauses):
                    clauses.append(frozenset([lit]))
        # a unit that entails some literal of a longer clause satisfies it
        unit_lits = [next(iter(c)) for c in clauses if len(c) == 1]
        survivors = []
        for c in clauses:
            if len(c) > 1 and any(
                    _entails(ctx, u, lit) for u in unit_lits for lit in c):
                continue
            survivors.append(c)
        clauses = survivors
    return _absorb(clauses)


def _dnf_postprocess(ctx, terms):
    """Unit-term reasoning across terms; returns terms or None (FALSE)."""
    terms = _absorb(terms)
    units = [next(iter(t)) for t in terms if len(t) == 1]
    if units:
        reduced, annihilated = _reduce_group(ctx, units, _reduce_disj_pair, "true")
        if annihilated:
            return "true"
        if set(reduced) != set(units):
            dropped = set(units) - set(reduced)
            terms = [t for t in terms
                     if not (len(t) == 1 and next(iter(t)) in dropped)]
            for lit in reduced:
                if not any(len(t) == 1 and next(iter(t)) == lit for t in terms):
                    terms.append(frozenset([lit]))
        unit_lits = [next(iter(t)) for t in terms if len(t) == 1]
        survivors = []
        for t in terms:
            if len(t) > 1 and any(
                    _entails(ctx, lit, u) for u in unit_lits for lit in t):
                continue
            survivors.append(t)
        terms = survivors
    return _absorb(terms)


def _entails(ctx, a, b) -> bool:
    """True when literal a entails literal b (soundly, may underapproximate)."""
    if a == b:
        return True
    if isinstance(a, TypeLit) and isinstance(b, TypeLit) \
            and _lit_resolvable(ctx, a) and _lit_resolvable(ctx, b):
        if not a.negated and not b.negated:
            return ctx.below(a.name, b.name)
        if a.negated and b.negated:
            return ctx.below(b.name, a.name)
        if not a.negated and b.negated:
            return ctx.incompatible({a.name, b.name})
    if isinstance(a, AtomLit) and isinstance(b, TypeLit) and not b.negated \
            and _lit_resolvable(ctx, b):
        return ctx.kind(b.name) in ("sort", "builtin", "top") \
            and ctx.atom_in(a, b.name)
    return False


def _matrix_and(ctx, target, matrices):
    if target == "cnf":
        clauses = []
        for m in matrices:
            if m is None:
                return None
            clauses.extend(m)
        ctx.spend(sum(len(c) for c in clauses))
        result = _cnf_postprocess(ctx, clauses)
        return result
    # DNF: distribute conjunction over terms
    acc = [frozenset()]
    for m in matrices:
        if m is None:
            return None
        if not m:
            continue  # TRUE is neutral for conjunction
        new_acc = []
        for t1 in acc:
            for t2 in m:
                ctx.spend(len(t1) + len(t2))
                merged = _make_term(ctx, t1 | t2)
                if merged is not None:
                    new_acc.append(merged)
        if not new_acc:
            return None
        acc = _absorb(new_acc)
    if any(len(t) == 0 for t in acc):
        return []
    result = _dnf_postprocess(ctx, acc)
    return [] if result == "true" else result


def _matrix_or(ctx, target, matrices):
    if target == "dnf":
        terms = []
        empty = False
        for m in matrices:
            if m is None:
                continue
            if not m:
                # an empty DNF matrix is TRUE; the disjunction is TRUE
                empty = True
                break
            terms.extend(m)
        if empty:
            return "true"
        if not terms:
            return None
        ctx.spend(sum(len(t) for t in terms))
        result = _dnf_postprocess(ctx, terms)
        return result
    # CNF: distribute disjunction over clauses
    if all(m is None for m in matrices):
        return None
    acc: list[frozenset] = [frozenset()]
    for m in matrices:
        if m is None:
            continue  # x | FALSE = x
        if not m:
            return []  # x | TRUE = TRUE
        new_acc = []
        for c1 in acc:
            for c2 in m:
                ctx.spend(len(c1) + len(c2))
                merged = _make_clause(ctx, c1 | c2)
                if merged is not None:
                    new_acc.append(merged)
        if not new_acc:
            return []  # every combined clause was trivially true
        acc = _absorb(new_acc)
    if any(len(c) == 0 for c in acc):
        return None
    return _cnf_postprocess(ctx, acc)


def _norm(ctx, expr, target: str):
    """Recursive normalization of an AST or NF tree to a matrix."""
    # normal-form inputs re-enter the pipeline unchanged
    if expr is TRUE:
        return []
    if expr is FALSE:
        return None
    if isinstance(expr, (TypeLit, AtomLit, FsLit)):
        return [frozenset([expr])]
    if isinstance(expr, And):
        return _matrix_and(ctx, target, [_norm(ctx, i, target) for i in expr.items])
    if isinstance(expr, Or):
        m = _matrix_or(ctx, target, [_norm(ctx, i, target) for i in expr.items])
        return [] if m == "true" else m
    # AST inputs
    if isinstance(expr, ast.TypeName):
        if expr.name == "top":
            return []
        if expr.name == "bottom":
            return None
        return [frozenset([TypeLit(expr.name)])]
    if isinstance(expr, ast.Atom):
        return [frozenset([AtomLit(expr.kind, expr.value)])]
    if isinstance(expr, (ast.FeatureTerm, ast.ListTerm)):
        return [frozenset([FsLit(expr)])]
    if isinstance(expr, ast.Coref):
        raise TypeError("coreference tags have no normal form; "
                        "they are resolved during structure building")
    if isinstance(expr, ast.Conj):
        return _matrix_and(ctx, target, [_norm(ctx, i, target) for i in expr.items])
    if isinstance(expr, ast.Disj):
        m = _matrix_or(ctx, target, [_norm(ctx, i, target) for i in expr.items])
        return [] if m == "true" else m
    if isinstance(expr, ast.Xor):
        a, b = expr.left, expr.right
        rewritten = ast.Disj((
            ast.Conj((a, ast.Neg(b))),
            ast.Conj((ast.Neg(a), b)),
        ))
        return _norm(ctx, rewritten, target)
    if isinstance(expr, ast.Neg):
        return _norm_neg(ctx, expr.item, target)
    if isinstance(expr, ast.TemplateCall):
        raise TypeError("template calls must be expanded before normalization")
    raise TypeError(f"cannot normalize {expr!r}")


def _norm_neg(ctx, expr, target: str):
    if isinstance(expr, ast.TypeName):
        if expr.name == "top":
            return None
        if expr.name == "bottom":
            return []
        return [frozenset([TypeLit(expr.name, negated=True)])]
    if isinstance(expr, TypeLit):
        if expr.negated:
            return [frozenset([TypeLit(expr.name)])]
        return [frozenset([TypeLit(expr.name, negated=True)])]
    if expr is TRUE:
        return None
    if expr is FALSE:
        return []
    if isinstance(expr, ast.Neg):
        return _norm(ctx, expr.item, target)
    if isinstance(expr, (ast.Conj, And)):
        items = expr.items
        return _norm(ctx, ast.Disj(tuple(ast.Neg(i) for i in items)), target)
    if isinstance(expr, (ast.Disj, Or)):
        items = expr.items
        return _norm(ctx, ast.Conj(tuple(ast.Neg(i) for i in items)), target)
    if isinstance(expr, ast.Xor):
        # ~(a xor b) = (a & b) | (~a & ~b)
        a, b = expr.left, expr.right
        rewritten = ast.Disj((
            ast.Conj((a, b)),
            ast.Conj((ast.Neg(a), ast.Neg(b))),
        ))
        return _norm(ctx, rewritten, target)
    raise TypeError("negation is restricted to type symbols")


def _matrix_to_nf(matrix, target: str):
    if matrix is None:
        return FALSE
    if not matrix:
        return TRUE
    if any(len(g) == 0 for g in matrix):
        return FALSE if target == "cnf" else TRUE
    groups = []
    for lits in matrix:
        ordered = tuple(sorted(lits, key=_SORT_KEY))
        if len(ordered) == 1:
            groups.append(ordered[0])
        elif target == "cnf":
            groups.append(Or(ordered))
        else:
            groups.append(And(ordered))
    groups.sort(key=_SORT_KEY)
    if len(groups) == 1:
        return groups[0]
    return And(tuple(groups)) if target == "cnf" else Or(tuple(groups))


def normalize(expr, target: str = "cnf", hierarchy=None,
              budget: int = 10_000):
    """Rewrite a type expression to its unique sorted normal form."""
    if target not in ("cnf", "dnf"):
        raise ValueError(f"unknown target form {target!r}")
    ctx = _Ctx(hierarchy, budget)
    return _matrix_to_nf(_norm(ctx, expr, target), target)


# ---------------------------------------------------------------------------
# Memoization


@dataclass
class MemoTable:
    """Cache of simplified forms keyed by the sorted printed input form."""

    table: dict = field(default_factory=dict)
    hits: int = 0
    entries_proper: int = 0
    hit_counts: dict = field(default_factory=dict)

    @property
    def entries(self) -> int:
        return len(self.table)

    def clear(self):
        self.table.clear()
        self.hit_counts.clear()
        self.hits = 0
        self.entries_proper = 0

    def stats(self) -> dict:
        histogram: dict[int, int] = {}
        for count in self.hit_counts.values():
            histogram[count] = histogram.get(count, 0) + 1
        proper_pct = (100.0 * self.entries_proper / self.entries
                      if self.entries else 0.0)
        return {
            "entries": self.entries,
            "hits": self.hits,
            "proper_entries": self.entries_proper,
            "proper_pct": proper_pct,
            "reuse_histogram": dict(sorted(histogram.items())),
        }


def memo_key(expr, target: str) -> str:
    """Canonical key: the input expression printed with sorted operands."""
    return f"{target}:{_key(expr)}"


def _key(expr) -> str:
    if isinstance(expr, (ast.Conj, And)):
        return "(& " + " ".join(sorted(_key(i) for i in expr.items)) + ")"
    if isinstance(expr, (ast.Disj, Or)):
        return "(| " + " ".join(sorted(_key(i) for i in expr.items)) + ")"
    if isinstance(expr, ast.Xor):
        return "(+ " + " ".join(sorted((_key(expr.left), _key(expr.right)))) + ")"
    if isinstance(expr, ast.Neg):
        return "(~ " + _key(expr.item) + ")"
    if isinstance(expr, ast.TypeName):
        return expr.name
    if isinstance(expr, ast.Atom):
        return printer.print_atom(expr.kind, expr.value)
    if isinstance(expr, (ast.FeatureTerm, ast.ListTerm)):
        return printer.print_expr(expr)
    if isinstance(expr, ast.Coref):
        return "#" + expr.tag
    if isinstance(expr, TypeLit):
        return ("~" if expr.negated else "") + expr.name
    if isinstance(expr, AtomLit):
        return printer.print_atom(expr.kind, expr.value)
    if isinstance(expr, FsLit):
        return expr.key
    if expr is TRUE:
        return "top"
    if expr is FALSE:
        return "bottom"
    raise TypeError(f"cannot key {expr!r}")


def _ast_literal_count(expr) -> int:
    if isinstance(expr, (ast.Conj, ast.Disj)):
        return sum(_ast_literal_count(i) for i in expr.items)
    if isinstance(expr, (And, Or)):
        return sum(_ast_literal_count(i) for i in expr.items)
    if isinstance(expr, ast.Xor):
        return _ast_literal_count(expr.left) + _ast_literal_count(expr.right)
    if isinstance(expr, ast.Neg):
        return _ast_literal_count(expr.item)
    return 1


def _is_input_literal(expr) -> bool:
    if isinstance(expr, (ast.TypeName, ast.Atom, ast.FeatureTerm, ast.ListTerm,
                         TypeLit, AtomLit, FsLit)):
        return True
    if expr is TRUE or expr is FALSE:
        return True
    if isinstance(expr, ast.Neg):
        return _is_input_literal(expr.item)
    return False


def simplify(expr, target: str = "cnf", hierarchy=None,
             memo: MemoTable | None = None, budget: int = 10_000):
    """normalize() with reuse of previously computed results.

    Literals are not memoized.  Subexpressions consult the table on the way
    down, so partial results of earlier queries are reused as well.
    """
    if memo is None or _is_input_literal(expr):
        return normalize(expr, target, hierarchy, budget)
    key = memo_key(expr, target)
    cached = memo.table.get(key)
    if cached is not None:
        memo.hits += 1
        memo.hit_counts[key] = memo.hit_counts.get(key, 0) + 1
        return cached
    if isinstance(expr, (ast.Conj, ast.Disj)):
        parts = tuple(simplify(i, target, hierarchy, memo, budget)
                      for i in expr.items)
        combined = And(parts) if isinstance(expr, ast.Conj) else Or(parts)
        result = normalize(combined, target, hierarchy, budget)
    elif isinstance(expr, (And, Or)):
        parts = tuple(simplify(i, target, hierarchy, memo, budget)
                      for i in expr.items)
        combined = And(parts) if isinstance(expr, And) else Or(parts)
        result = normalize(combined, target, hierarchy, budget)
    else:
        result = normalize(expr, target, hierarchy, budget)
    memo.table[key] = result
    memo.hit_counts.setdefault(key, 0)
    if literal_count(result) < _ast_literal_count(expr):
        memo.entries_proper += 1
    return result
