"""Type hierarchy: bit-set encoded subsumption order plus typed GLB/LUB.

Every type carries a code whose set bits are its reflexive-transitive lower
set, so subsumption is bit inclusion and GLB/LUB are bit AND/OR followed by
decoding.  Complex definitions are decomposed into intermediate types (named
like |u&v| and |~b|) so each entry is either a pure conjunction or a
disjunction of type symbols.  avm types live in an open world (unknown GLBs
stay symbolic conjunctions), sorts in a closed one.

Incompatibility declarations are propagated downward at definition time to
subtypes and disjunction alternatives, so the full induced family of bottom
sets is materialized and conjunction checks are subset lookups.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import ast, printer, simplify
from .errors import GrammarError
from .simplify import And, AtomLit, FALSE, FsLit, Or, TRUE, TypeLit

BUILTIN_KINDS = ("symbol", "string", "number")
RESERVED = frozenset({"top", "bottom", *BUILTIN_KINDS})
PREDEFINED = frozenset({"list", "null-list", "cons"})

FEATURE_UNIFY = "feature-unify"
SKIP_FEATURE_UNIFY = "skip-feature-unify"
FAIL = "fail"

_IN_PROGRESS = object()


@dataclass(frozen=True)
class GlbVerdict:
    """Outcome of the typed GLB: a result expression plus an action telling
    the feature-structure layer whether feature unification is still needed.
    """

    result: object  # normal-form expression; FALSE on failure
    action: str  # FEATURE_UNIFY | SKIP_FEATURE_UNIFY | FAIL

    def failed(self) -> bool:
        return self.action == FAIL


@dataclass
class HierarchyEntry:
    type_id: int
    name: str
    kind: str  # 'top' | 'avm' | 'sort' | 'builtin' | 'atom' | 'intermediate'
    code: int = 0
    skeleton: tuple = ()  # unexpanded feature-constraint parts (AST nodes)
    conj_parents: set = field(default_factory=set)
    disj_alternatives: set = field(default_factory=set)
    incompatible_with: set = field(default_factory=set)  # declared sets (ids)
    recursive: bool = False
    defined: bool = False

    def sort_like(self) -> bool:
        return self.kind in ("sort", "builtin")

    def avm_like(self) -> bool:
        return self.kind in ("avm", "intermediate")


class Hierarchy:
    def __init__(self, encoding: str = "transitive-closure"):
        if encoding not in ("transitive-closure", "compact"):
            raise ValueError(f"unknown encoding method {encoding!r}")
        self.encoding = encoding
        self.entries: list[HierarchyEntry] = []
        self.ids: dict[str, int] = {}
        self.definitions: dict[str, ast.TypeDef] = {}
        self.definition_order: list[str] = []
        self.declared_incompat: list[frozenset[int]] = []
        self.materialized: set[frozenset[int]] = set()
        self.generation = 0
        self.frozen = False
        self._rev_conj: dict[int, set[int]] = {}
        self._rev_disj: dict[int, set[int]] = {}
        self._conj_members: dict[int, frozenset[int]] = {}
        self._code_index: dict[int, int] | None = None
        self._compact_dirty = True
        self._skeleton_cache: dict[int, object] = {}
        self._expansion_cache: dict[int, object] = {}
        self._verify_guard: set[frozenset[int]] = set()
        self._recursive_cache = None
        self._bootstrap()

    # -- bootstrap ----------------------------------------------------------

    def _bootstrap(self):
        top = self._new_entry("top", "top", defined=True)
        assert top == 0
        for name in BUILTIN_KINDS:
            self._new_entry(name, "builtin", defined=True)
        self._new_entry("list", "avm", defined=True)
        self._new_entry("null-list", "sort", defined=True)
        self._new_entry("cons", "avm", defined=True)
        self.declare_partition("list", ("null-list", "cons"))

    # -- entry plumbing -------------------------------------------------------

    def _new_entry(self, name: str, kind: str, defined: bool = False) -> int:
        tid = len(self.entries)
        entry = HierarchyEntry(tid, name, kind, defined=defined)
        entry.code = 1 << tid
        self.entries.append(entry)
        self.ids[name] = tid
        self._touch()
        return tid

    def ensure(self, name: str, kind: str = "avm") -> int:
        """Id for a name, auto-creating an undefined placeholder entry."""
        tid = self.ids.get(name)
        if tid is not None:
            return tid
        if name == "bottom":
            raise GrammarError("'bottom' is not a type name")
        return self._new_entry(name, kind)

    def entry(self, name: str) -> HierarchyEntry | None:
        tid = self.ids.get(name)
        return self.entries[tid] if tid is not None else None

    def name_of(self, tid: int) -> str:
        return self.entries[tid].name

    def undefined_names(self) -> list[str]:
        return sorted(e.name for e in self.entries
                      if not e.defined and e.kind != "intermediate")

    def size(self) -> int:
        return len(self.entries)

    def _touch(self):
        self.generation += 1
        self._code_index = None
        self._compact_dirty = True
        self._skeleton_cache.clear()
        self._expansion_cache.clear()
        self._recursive_cache = None

    # -- subsumption graph ----------------------------------------------------

    def _up_neighbors(self, tid: int) -> set[int]:
        up = set(self.entries[tid].conj_parents)
        up |= self._rev_disj.get(tid, set())
        return up

    def _down_neighbors(self, tid: int) -> set[int]:
        down = set(self._rev_conj.get(tid, set()))
        down |= self.entries[tid].disj_alternatives
        return down

    def _reaches_up(self, start: int, goal: int) -> bool:
        seen = {start}
        stack = [start]
        while stack:
            t = stack.pop()
            if t == goal:
                return True
            for u in self._up_neighbors(t):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return False

    def _add_edge(self, lower: int, upper: int, conj: bool):
        """Record lower below upper through a conjunction or disjunction link."""
        if lower == upper or self._reaches_up(upper, lower):
            kind = "conjunctive inheritance" if conj else "subsumption"
            raise GrammarError(
                f"cyclic {kind}: {self.name_of(lower)} and {self.name_of(upper)}")
        if conj:
            self.entries[lower].conj_parents.add(upper)
            self._rev_conj.setdefault(upper, set()).add(lower)
        else:
            self.entries[upper].disj_alternatives.add(lower)
            self._rev_disj.setdefault(lower, set()).add(upper)
        if self.encoding == "transitive-closure":
            self._propagate_code(lower, upper)
        self._touch()
        self._propagate_incompat_edge(lower, upper)

    def _propagate_code(self, lower: int, upper: int):
        addition = self.entries[lower].code
        stack = [upper]
        while stack:
            t = stack.pop()
            entry = self.entries[t]
            if entry.code | addition == entry.code:
                continue
            entry.code |= addition
            stack.extend(self._up_neighbors(t))

    # -- codes ------------------------------------------------------------

    def _recompute_codes_tc(self):
        for e in self.entries:
            e.code = 1 << e.type_id
        for tid in self._topo_children_first():
            e = self.entries[tid]
            for child in self._down_neighbors(tid):
                e.code |= self.entries[child].code

    def _topo_children_first(self) -> list[int]:
        pending = {e.type_id: set(self._down_neighbors(e.type_id))
                   for e in self.entries}
        queue = [t for t, kids in pending.items() if not kids]
        done: set[int] = set()
        result: list[int] = []
        while queue:
            t = queue.pop()
            if t in done:
                continue
            done.add(t)
            result.append(t)
            for up in self._up_neighbors(t):
                pending[up].discard(t)
                if not pending[up]:
                    queue.append(up)
        if len(result) != len(self.entries):
            raise GrammarError("subsumption graph contains a cycle")
        return result

    def _recompute_codes_compact(self):
        # verified compact encoding: genes for narrow entries, then repair
        # until bit inclusion coincides with the true order
        order = self._topo_children_first()
        truth: dict[int, int] = {}
        for tid in order:
            mask = 1 << tid
            for child in self._down_neighbors(tid):
                mask |= truth[child]
            truth[tid] = mask
        genes = {t for t in order
                 if t != 0 and len(self._down_neighbors(t)) < 2}
        while True:
            gene_bit = {}
            next_bit = 0
            for t in sorted(genes):
                gene_bit[t] = 1 << next_bit
                next_bit += 1
            codes: dict[int, int] = {}
            for tid in order:
                c = gene_bit.get(tid, 0)
                for child in self._down_neighbors(tid):
                    c |= codes[child]
                codes[tid] = c
            offender = None
            non_top = [t for t in order if t != 0]
            for s in non_top:
                for t in non_top:
                    if s == t:
                        continue
                    below = truth[s] & ~truth[t] == 0
                    encoded = codes[s] & ~codes[t] == 0
                    if encoded and not below:
                        offender = s
                        break
                    if below and not encoded:  # pragma: no cover - repair net
                        offender = t
                        break
                if offender is not None:
                    break
            if offender is None:
                for tid in order:
                    if tid == 0:
                        continue
                    self.entries[tid].code = codes[tid]
                self.entries[0].code = (1 << (next_bit + 1)) - 1
                return
            genes.add(offender)

    def _fresh_codes(self):
        if self.encoding == "compact":
            if self._compact_dirty:
                self._recompute_codes_compact()
                self._compact_dirty = False
                self._code_index = None
        return None

    def code_of(self, tid: int) -> int:
        self._fresh_codes()
        if tid == 0 and self.encoding == "transitive-closure":
            return (1 << len(self.entries)) - 1  # top covers everything
        return self.entries[tid].code

    def _codes_snapshot(self) -> dict[int, int]:
        return {e.type_id: self.code_of(e.type_id) for e in self.entries}

    def subsumes_ids(self, a: int, b: int) -> bool:
        """True when a subsumes b, that is b lies below a."""
        cb, ca = self.code_of(b), self.code_of(a)
        return cb & ~ca == 0

    def subsumes(self, a: str, b: str) -> bool:
        ea, eb = self.entry(a), self.entry(b)
        if ea is None or eb is None:
            return a == b or a == "top"
        return self.subsumes_ids(ea.type_id, eb.type_id)

    def _decode_glb(self, c: int):
        if c == 0:
            return FALSE
        if self._code_index is None:
            self._fresh_codes()
            self._code_index = {self.code_of(e.type_id): e.type_id
                                for e in self.entries}
        exact = self._code_index.get(c)
        if exact is not None:
            return TypeLit(self.name_of(exact))
        candidates = [e.type_id for e in self.entries
                      if self.code_of(e.type_id) & ~c == 0]
        maximal = [t for t in candidates
                   if not any(u != t and self.subsumes_ids(u, t)
                              for u in candidates)]
        if not maximal:
            return FALSE
        lits = sorted((TypeLit(self.name_of(t)) for t in maximal),
                      key=simplify._SORT_KEY)
        return lits[0] if len(lits) == 1 else Or(tuple(lits))

    def glb_codes(self, a: str, b: str):
        """Code-level GLB over the type-name order alone."""
        ta, tb = self.ensure(a), self.ensure(b)
        return self._decode_glb(self.code_of(ta) & self.code_of(tb))

    def lub_codes(self, a: str, b: str):
        """Code-level LUB: the minimal upper antichain."""
        ta, tb = self.ensure(a), self.ensure(b)
        u = self.code_of(ta) | self.code_of(tb)
        candidates = [e.type_id for e in self.entries
                      if u & ~self.code_of(e.type_id) == 0]
        minimal = [t for t in candidates
                   if not any(v != t and self.subsumes_ids(t, v)
                              for v in candidates)]
        lits = sorted((TypeLit(self.name_of(t)) for t in minimal),
                      key=simplify._SORT_KEY)
        if not lits:
            return TRUE  # unreachable: top is always an upper bound
        return lits[0] if len(lits) == 1 else And(tuple(lits))

    # -- simplifier bridge ------------------------------------------------

    def kind_of(self, name: str) -> str | None:
        e = self.entry(name)
        return e.kind if e is not None else None

    def nf_subsumes(self, a: str, b: str) -> bool:
        ea, eb = self.entry(a), self.entry(b)
        if ea is None or eb is None:
            return False
        return self.subsumes_ids(ea.type_id, eb.type_id)

    def incompatible_subset(self, names: frozenset) -> bool:
        idset = set()
        for n in names:
            tid = self.ids.get(n)
            if tid is None:
                return False
            idset.add(tid)
        return any(s <= idset for s in self.materialized)

    def atom_in_type(self, kind: str, value, name: str) -> bool:
        del value
        target = self.entry(name)
        if target is None:
            return False
        return self.subsumes_ids(target.type_id, self.ids[kind])

    # -- incompatibility ----------------------------------------------------

    def declare_incompatible(self, names) -> None:
        """Register a bottom set: the conjunction of the names denotes the
        empty type.  Propagates downward immediately.
        """
        ids = [self.ensure(n) for n in names]
        if len(set(ids)) != len(ids):
            raise GrammarError("incompatibility sets must not repeat a type")
        idset = frozenset(ids)
        if len(idset) < 2:
            raise GrammarError("an incompatibility needs at least 2 types")
        for x in idset:
            for y in idset:
                if x != y and self._reaches_up(x, y):
                    raise GrammarError(
                        f"{self.name_of(y)} subsumes {self.name_of(x)}; "
                        "an incompatibility set must be an antichain")
        self.declared_incompat.append(idset)
        for t in idset:
            self.entries[t].incompatible_with.add(idset)
        self._materialize(idset)
        self._touch()

    def _materialize(self, seed: frozenset[int]):
        queue = [seed]
        while queue:
            s = queue.pop()
            if s in self.materialized:
                continue
            self.materialized.add(s)
            for m in s:
                rest = s - {m}
                for child in self._down_neighbors(m):
                    queue.append(rest | {child})

    def _propagate_incompat_edge(self, lower: int, upper: int):
        for s in [s for s in self.materialized if upper in s]:
            self._materialize(s - {upper} | {lower})

    def _rematerialize(self):
        self.materialized.clear()
        for s in self.declared_incompat:
            self._materialize(s)

    def declare_partition(self, supertype: str, members) -> None:
        """Split a supertype exhaustively into pairwise-incompatible members."""
        members = tuple(members)
        if len(members) < 2:
            raise GrammarError("a partition needs at least 2 members")
        if len(set(members)) != len(members):
            raise GrammarError("partition members must be pairwise distinct")
        sid = self.ensure(supertype)
        sup = self.entries[sid]
        if sup.conj_parents:
            raise GrammarError(
                f"{supertype} already inherits conjunctively; it cannot also "
                "be partitioned")
        mids = [self.ensure(m) for m in members]
        for mid, mname in zip(mids, members):
            if self.incompatible_subset(frozenset({supertype, mname})):
                raise GrammarError(
                    f"partition member {mname} is already incompatible with "
                    f"its supertype {supertype}")
        for mid in mids:
            if mid not in sup.disj_alternatives:
                self._add_edge(mid, sid, conj=False)
        for i, x in enumerate(mids):
            for y in mids[i + 1:]:
                pair = frozenset({x, y})
                if pair not in self.declared_incompat:
                    self.declared_incompat.append(pair)
                    self.entries[x].incompatible_with.add(pair)
                    self.entries[y].incompatible_with.add(pair)
                    self._materialize(pair)
        sup.defined = True
        self._touch()

    # -- definition entry ---------------------------------------------------

    def define(self, defn, *, target: str = "cnf", memo=None) -> None:
        """Enter or re-enter a type-level definition."""
        if isinstance(defn, ast.TypeDef):
            if defn.name in RESERVED:
                raise GrammarError(f"{defn.name} is a reserved built-in name")
            if defn.name in PREDEFINED:
                raise GrammarError(
                    f"{defn.name} is predefined and cannot be redefined")
            existing = self.entry(defn.name)
            if existing is not None and existing.defined:
                self.redefine(defn, target=target, memo=memo)
            else:
                self._enter_type(defn, target, memo)
                self.definitions[defn.name] = defn
                if defn.name not in self.definition_order:
                    self.definition_order.append(defn.name)
        elif isinstance(defn, ast.PartitionDecl):
            self.declare_partition(defn.supertype, defn.members)
        elif isinstance(defn, ast.IncompatibilityDecl):
            self.declare_incompatible(defn.members)
        else:
            raise TypeError(f"not a hierarchy-level definition: {defn!r}")

    def _enter_type(self, d: ast.TypeDef, target: str, memo) -> None:
        self._reject_boolean_corefs(d)
        nf = simplify.simplify(d.body, target, self, memo)
        if nf is FALSE:
            raise GrammarError(
                f"the definition of {d.name} simplifies to bottom")
        groups, fs_parts = self._split(d, nf, target)
        tid = self.ensure(d.name)
        entry = self.entries[tid]
        if d.kind == "sort" and fs_parts:
            raise GrammarError(
                f"sort {d.name} cannot carry feature constraints")
        entry.kind = "sort" if d.kind == "sort" else "avm"
        entry.skeleton = tuple(fs_parts)
        entry.defined = True
        self._decompose(entry, groups, target, bool(fs_parts))
        for part in fs_parts:
            self._register_value_names(part)
        self._touch()

    def _reject_boolean_corefs(self, d: ast.TypeDef):
        def scan(expr):
            if isinstance(expr, ast.Coref):
                raise GrammarError(
                    f"in {d.name}: coreference tags are only meaningful "
                    "inside feature terms")
            if isinstance(expr, (ast.Conj, ast.Disj)):
                for i in expr.items:
                    scan(i)
            elif isinstance(expr, ast.Xor):
                scan(expr.left)
                scan(expr.right)
            elif isinstance(expr, ast.Neg):
                scan(expr.item)
        scan(d.body)

    def _split(self, d: ast.TypeDef, nf, target: str):
        """Separate a normalized body into type groups and feature parts.

        Returns (groups, fs_parts) where each group is a tuple of literals:
        for CNF a disjunctive clause, for DNF a conjunctive term.
        """
        def payload(lit: FsLit):
            return lit.payload

        if nf is TRUE:
            return [], []
        if isinstance(nf, FsLit):
            return [], [payload(nf)]
        if isinstance(nf, (TypeLit, AtomLit)):
            return [(nf,)], []
        top_items = list(nf.items) if isinstance(nf, (And, Or)) else [nf]
        if target == "cnf":
            if not isinstance(nf, And):
                top_items = [nf]
            groups, fs_parts = [], []
            for item in top_items:
                if isinstance(item, FsLit):
                    fs_parts.append(payload(item))
                elif isinstance(item, Or):
                    lits = item.items
                    if any(isinstance(l, FsLit) for l in lits):
                        raise GrammarError(
                            f"in {d.name}: feature terms cannot occur under "
                            "'|' in a definition")
                    groups.append(tuple(lits))
                else:
                    groups.append((item,))
            return groups, fs_parts
        # DNF target
        if isinstance(nf, Or):
            groups = []
            for item in nf.items:
                lits = item.items if isinstance(item, And) else (item,)
                if any(isinstance(l, FsLit) for l in lits):
                    raise GrammarError(
                        f"in {d.name}: feature terms cannot occur under "
                        "'|' in a definition")
                groups.append(tuple(lits))
            return groups, []
        lits = nf.items if isinstance(nf, And) else (nf,)
        fs_parts = [payload(l) for l in lits if isinstance(l, FsLit)]
        rest = tuple(l for l in lits if not isinstance(l, FsLit))
        groups = [(l,) for l in rest]
        return groups, fs_parts

    def _decompose(self, entry: HierarchyEntry, groups, target: str,
                   has_skeleton: bool) -> None:
        """Reduce the type part to a pure conjunction or a disjunction of
        symbols, creating intermediate types as needed."""
        for g in groups:
            for lit in g:
                if isinstance(lit, AtomLit):
                    raise GrammarError(
                        f"in {entry.name}: atoms cannot appear in the type "
                        "part of a definition")
        if not groups:
            return
        disj_groups = groups if target == "cnf" else None
        if target == "cnf":
            # groups are disjunctive clauses, conjunction on top
            if len(groups) == 1 and len(groups[0]) > 1:
                alts = [self._lit_ref(l) for l in groups[0]]
                for alt in alts:
                    self._add_edge(alt, entry.type_id, conj=False)
                return
            refs = [self._group_ref(g, disjunctive=True) for g in groups]
            if has_skeleton and len(refs) >= 2:
                refs = [self._conj_intermediate(refs)]
            for r in refs:
                self._add_edge(entry.type_id, r, conj=True)
            return
        del disj_groups
        # DNF: groups are conjunctive terms, disjunction on top
        if len(groups) == 1:
            refs = [self._lit_ref(l) for l in groups[0]]
            if has_skeleton and len(refs) >= 2:
                refs = [self._conj_intermediate(refs)]
            for r in refs:
                self._add_edge(entry.type_id, r, conj=True)
            return
        alts = [self._group_ref(g, disjunctive=False) for g in groups]
        for alt in alts:
            self._add_edge(alt, entry.type_id, conj=False)

    def _lit_ref(self, lit: TypeLit) -> int:
        if lit.negated:
            return self._neg_intermediate(lit.name)
        return self.ensure(lit.name)

    def _group_ref(self, group, disjunctive: bool) -> int:
        if len(group) == 1:
            return self._lit_ref(group[0])
        members = [self._lit_ref(l) for l in group]
        if disjunctive:
            return self._disj_intermediate(members)
        return self._conj_intermediate(members)

    def _core_name(self, tid: int) -> str:
        name = self.name_of(tid)
        if self.entries[tid].kind == "intermediate" and name.startswith("|"):
            inner = name[1:-1]
            if "|" in inner:
                return f"({inner})"
            return inner
        return name

    def _neg_intermediate(self, name: str) -> int:
        base = self.ensure(name)
        iname = f"|~{name}|"
        tid = self.ids.get(iname)
        if tid is not None:
            return tid
        tid = self._new_entry(iname, "intermediate", defined=True)
        pair = frozenset({base, tid})
        self.declared_incompat.append(pair)
        self.entries[base].incompatible_with.add(pair)
        self.entries[tid].incompatible_with.add(pair)
        self._materialize(pair)
        return tid

    def _disj_intermediate(self, members) -> int:
        members = sorted(set(members), key=self._core_name)
        iname = "|" + "|".join(self._core_name(m) for m in members) + "|"
        tid = self.ids.get(iname)
        if tid is not None:
            entry = self.entries[tid]
            if not entry.disj_alternatives:  # wiped by a redefinition
                for m in members:
                    self._add_edge(m, tid, conj=False)
            return tid
        tid = self._new_entry(iname, "intermediate", defined=True)
        for m in members:
            self._add_edge(m, tid, conj=False)
        return tid

    def _conj_intermediate(self, members) -> int:
        memberset = frozenset(members)
        ordered = sorted(memberset, key=self._core_name)
        iname = "|" + "&".join(self._core_name(m) for m in ordered) + "|"
        tid = self.ids.get(iname)
        if tid is not None:
            if not self.entries[tid].conj_parents:  # wiped by a redefinition
                self._link_conj_intermediate(tid, memberset, ordered)
            return tid
        tid = self._new_entry(iname, "intermediate", defined=True)
        self._link_conj_intermediate(tid, memberset, ordered)
        return tid

    def _link_conj_intermediate(self, tid: int, memberset: frozenset[int],
                                ordered) -> None:
        # reuse existing conjunction intermediates covering part of the set
        subsets = [(other, mset) for other, mset in self._conj_members.items()
                   if mset < memberset and self.entries[other].conj_parents]
        maximal = [(other, mset) for other, mset in subsets
                   if not any(mset < bigger for _, bigger in subsets)]
        covered: set[int] = set()
        parents: list[int] = []
        for other, mset in sorted(maximal, key=lambda p: self._core_name(p[0])):
            parents.append(other)
            covered |= mset
        parents.extend(m for m in ordered if m not in covered)
        for p in dict.fromkeys(parents):
            self._add_edge(tid, p, conj=True)
        self._conj_members[tid] = memberset

    def _register_value_names(self, expr) -> None:
        """Auto-create placeholder entries for names that a skeleton uses in
        type position: a name conjoined with feature structure or with other
        names must denote a type, while a name standing alone in a value
        position may later resolve as a symbol atom.
        """
        def scan_value(value):
            items = value.items if isinstance(value, ast.Conj) else (value,)
            names = [i for i in items if isinstance(i, ast.TypeName)]
            structs = [i for i in items
                       if isinstance(i, (ast.FeatureTerm, ast.ListTerm))]
            if len(names) >= 2 or (names and structs):
                for n in names:
                    if n.name not in ("top", "bottom"):
                        self.ensure(n.name)
            for i in items:
                if isinstance(i, ast.FeatureTerm):
                    for _, v in i.pairs:
                        scan_value(v)
                elif isinstance(i, ast.ListTerm):
                    for e in i.elements:
                        scan_value(e)
                    if i.tail is not None:
                        scan_value(i.tail)
                elif isinstance(i, (ast.Disj,)):
                    for alt in i.items:
                        scan_value(alt)
                elif isinstance(i, ast.Xor):
                    scan_value(i.left)
                    scan_value(i.right)
                elif isinstance(i, ast.Neg):
                    if isinstance(i.item, ast.TypeName):
                        self.ensure(i.item.name)
        scan_value(expr)

    # -- redefinition -------------------------------------------------------

    def dependents_of(self, name: str) -> set[str]:
        """Names whose entries must be rebuilt when this type changes:
        subtypes, disjunction alternatives and definitional users, closed
        transitively."""
        start = self.ids.get(name)
        if start is None:
            return set()
        users = self._user_index()
        seen = {start}
        stack = [start]
        while stack:
            t = stack.pop()
            nexts = set(self._rev_conj.get(t, set()))
            nexts |= self.entries[t].disj_alternatives
            nexts |= users.get(t, set())
            for u in nexts:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return {self.name_of(t) for t in seen}

    def _user_index(self) -> dict[int, set[int]]:
        users: dict[int, set[int]] = {}
        for owner, mentioned in self.dependency_edges().items():
            for used in mentioned:
                users.setdefault(used, set()).add(owner)
        return users

    def dependency_edges(self) -> dict[int, set[int]]:
        """owner -> mentioned-in-definition, over edges and skeletons."""
        edges: dict[int, set[int]] = {}
        for e in self.entries:
            mentioned = set(e.conj_parents) | set(e.disj_alternatives)
            for part in e.skeleton:
                mentioned |= self._skeleton_mentions(part)
            edges[e.type_id] = mentioned
        return edges

    def _skeleton_mentions(self, expr) -> set[int]:
        found: set[int] = set()
        for sub in ast.walk(expr):
            if isinstance(sub, ast.TypeName):
                tid = self.ids.get(sub.name)
                if tid is not None:
                    found.add(tid)
            elif isinstance(sub, ast.ListTerm):
                found.add(self.ids["cons"] if sub.elements else
                          self.ids["null-list"])
                if sub.elements:
                    found.add(self.ids["null-list"])
        return found

    def redefine(self, d: ast.TypeDef, *, target: str = "cnf", memo=None) -> None:
        """Replace a definition; rebuilds every dependent entry and recodes."""
        affected = self.dependents_of(d.name)
        self.definitions[d.name] = d
        for nm in affected:
            tid = self.ids[nm]
            entry = self.entries[tid]
            for p in entry.conj_parents:
                self._rev_conj.get(p, set()).discard(tid)
            for alt in entry.disj_alternatives:
                self._rev_disj.get(alt, set()).discard(tid)
            entry.conj_parents = set()
            entry.disj_alternatives = set()
            entry.skeleton = ()
            self._conj_members.pop(tid, None)
            if entry.kind != "intermediate":
                entry.defined = False
        for nm in self.definition_order:
            if nm in affected and nm in self.definitions:
                self._enter_type(self.definitions[nm], target, memo)
        self._rematerialize()
        if self.encoding == "transitive-closure":
            self._recompute_codes_tc()
        self._touch()

    # -- typed GLB ------------------------------------------------------------

    def glb_typed(self, a, b, memo=None) -> GlbVerdict:
        """Generalized GLB over typed operands: avm or sort types, atoms and
        bare feature constraints, following the open/closed world split."""
        ka, va = self._operand(a)
        kb, vb = self._operand(b)
        if ka == "bottom" or kb == "bottom":
            return GlbVerdict(FALSE, FAIL)
        if ka == "top":
            return self._of_operand(kb, vb)
        if kb == "top":
            return self._of_operand(ka, va)
        handler = {
            ("type", "type"): self._glb_type_type,
            ("type", "atom"): self._glb_type_atom,
            ("atom", "type"): lambda x, y, m: self._glb_type_atom(y, x, m),
            ("type", "fc"): self._glb_type_fc,
            ("fc", "type"): lambda x, y, m: self._glb_type_fc(y, x, m),
            ("atom", "atom"): self._glb_atom_atom,
            ("atom", "fc"): self._glb_mismatch,
            ("fc", "atom"): self._glb_mismatch,
            ("fc", "fc"): self._glb_fc_fc,
        }[(ka, kb)]
        return handler(va, vb, memo)

    def _operand(self, x):
        from . import fs as fsmod
        if isinstance(x, str):
            name = x
        elif isinstance(x, TypeLit):
            if x.negated:
                raise TypeError("negated types are not typed-GLB operands")
            name = x.name
        elif isinstance(x, ast.TypeName):
            name = x.name
        elif isinstance(x, (AtomLit,)):
            return "atom", x
        elif isinstance(x, ast.Atom):
            return "atom", AtomLit(x.kind, x.value)
        elif isinstance(x, FsLit):
            return "fc", x.payload
        elif isinstance(x, (ast.FeatureTerm, ast.ListTerm)):
            return "fc", x
        elif isinstance(x, fsmod.FeatureStructure):
            return "fc", x
        elif x is TRUE:
            return "top", None
        elif x is FALSE:
            return "bottom", None
        else:
            raise TypeError(f"not a typed-GLB operand: {x!r}")
        if name == "top":
            return "top", None
        if name == "bottom":
            return "bottom", None
        e = self.entry(name)
        if e is None:
            return "atom", AtomLit("symbol", name)
        return "type", e.type_id

    def _of_operand(self, kind, value) -> GlbVerdict:
        if kind == "atom":
            return GlbVerdict(value, SKIP_FEATURE_UNIFY)
        if kind == "fc":
            return GlbVerdict(self._fc_lit(value), FEATURE_UNIFY)
        if kind == "top":
            return GlbVerdict(TRUE, SKIP_FEATURE_UNIFY)
        entry = self.entries[value]
        action = SKIP_FEATURE_UNIFY if entry.sort_like() else FEATURE_UNIFY
        return GlbVerdict(TypeLit(entry.name), action)

    def _fc_lit(self, payload) -> FsLit:
        return payload if isinstance(payload, FsLit) else FsLit(payload)

    def _glb_mismatch(self, va, vb, memo) -> GlbVerdict:
        return GlbVerdict(FALSE, FAIL)

    def _glb_atom_atom(self, va: AtomLit, vb: AtomLit, memo) -> GlbVerdict:
        if va.kind == vb.kind and va.value == vb.value:
            return GlbVerdict(va, SKIP_FEATURE_UNIFY)
        return GlbVerdict(FALSE, FAIL)

    def _glb_type_atom(self, tid: int, atom: AtomLit, memo) -> GlbVerdict:
        entry = self.entries[tid]
        if entry.sort_like() and self.atom_in_type(atom.kind, atom.value,
                                                   entry.name):
            return GlbVerdict(atom, SKIP_FEATURE_UNIFY)
        return GlbVerdict(FALSE, FAIL)

    def _glb_type_fc(self, tid: int, fc, memo) -> GlbVerdict:
        from . import fs as fsmod
        entry = self.entries[tid]
        if not entry.avm_like():
            return GlbVerdict(FALSE, FAIL)
        expanded = self.expanded_type(entry.name)
        probe = fc if isinstance(fc, fsmod.FeatureStructure) \
            else fsmod.build_fs(fc, self)
        if probe is fsmod.BOTTOM:
            return GlbVerdict(FALSE, FAIL)
        if fsmod.unify(expanded, probe, self, memo) is fsmod.BOTTOM:
            return GlbVerdict(FALSE, FAIL)
        return GlbVerdict(TypeLit(entry.name), FEATURE_UNIFY)

    def _glb_fc_fc(self, va, vb, memo) -> GlbVerdict:
        from . import fs as fsmod
        fa = va if isinstance(va, fsmod.FeatureStructure) \
            else fsmod.build_fs(va, self)
        fb = vb if isinstance(vb, fsmod.FeatureStructure) \
            else fsmod.build_fs(vb, self)
        if fa is fsmod.BOTTOM or fb is fsmod.BOTTOM:
            return GlbVerdict(FALSE, FAIL)
        if fsmod.unify(fa, fb, self, memo) is fsmod.BOTTOM:
            return GlbVerdict(FALSE, FAIL)
        return GlbVerdict(TRUE, FEATURE_UNIFY)

    def _glb_type_type(self, ta: int, tb: int, memo) -> GlbVerdict:
        ea, eb = self.entries[ta], self.entries[tb]
        if ta == tb:
            action = SKIP_FEATURE_UNIFY if ea.sort_like() else FEATURE_UNIFY
            return GlbVerdict(TypeLit(ea.name), action)
        if any(s <= {ta, tb} for s in self.materialized):
            return GlbVerdict(FALSE, FAIL)
        if ea.avm_like() != eb.avm_like():
            return GlbVerdict(FALSE, FAIL)  # avm against sort
        if self.subsumes_ids(tb, ta):
            return self._of_operand("type", ta)
        if self.subsumes_ids(ta, tb):
            return self._of_operand("type", tb)
        if ea.sort_like():
            decoded = self._decode_glb(self.code_of(ta) & self.code_of(tb))
            if isinstance(decoded, TypeLit):
                cand = self.entry(decoded.name)
                if cand is not None and cand.sort_like():
                    return GlbVerdict(decoded, SKIP_FEATURE_UNIFY)
            return GlbVerdict(FALSE, FAIL)  # closed world
        # open world: confirm a code candidate only if its own constraints
        # are entailed by the combination of the operands' skeletons
        decoded = self._decode_glb(self.code_of(ta) & self.code_of(tb))
        if isinstance(decoded, TypeLit):
            cand = self.entry(decoded.name)
            if cand is not None and cand.kind == "avm" \
                    and self._verify_candidate(cand, ea, eb, memo):
                return GlbVerdict(decoded, FEATURE_UNIFY)
        lits = sorted((TypeLit(ea.name), TypeLit(eb.name)), key=simplify._SORT_KEY)
        return GlbVerdict(And(tuple(lits)), FEATURE_UNIFY)

    def _verify_candidate(self, cand: HierarchyEntry, ea: HierarchyEntry,
                          eb: HierarchyEntry, memo) -> bool:
        cand_skel = self.skeleton_fs(cand.name)
        if cand_skel is None:
            return True
        guard = frozenset({ea.type_id, eb.type_id})
        if guard in self._verify_guard:
            return False
        from . import fs as fsmod
        self._verify_guard.add(guard)
        try:
            sa = self.skeleton_fs(ea.name) or fsmod.empty_fs()
            sb = self.skeleton_fs(eb.name) or fsmod.empty_fs()
            combined = fsmod.unify(sa, sb, self, memo)
            if combined is fsmod.BOTTOM:
                return False
            return fsmod.subsumes_fs(cand_skel, combined, self)
        finally:
            self._verify_guard.discard(guard)

    # -- skeletons and cached expansions ------------------------------------

    def skeleton_fs(self, name: str):
        """The definitional feature constraint as a structure, or None."""
        e = self.entry(name)
        if e is None or not e.skeleton:
            return None
        cached = self._skeleton_cache.get(e.type_id)
        if cached is None:
            from . import fs as fsmod
            expr = e.skeleton[0] if len(e.skeleton) == 1 \
                else ast.Conj(tuple(e.skeleton))
            cached = fsmod.build_fs(expr, self)
            self._skeleton_cache[e.type_id] = cached
        return cached

    def ancestor_chain(self, name: str) -> list[str]:
        """The type and everything above it, nearest first."""
        start = self.ids.get(name)
        if start is None:
            return []
        seen = {start}
        order = [start]
        queue = [start]
        while queue:
            t = queue.pop(0)
            for up in sorted(self._up_neighbors(t)):
                if up not in seen:
                    seen.add(up)
                    order.append(up)
                    queue.append(up)
        return [self.name_of(t) for t in order]

    def expanded_type(self, name: str):
        """Standalone expansion of a type definition (cached per type)."""
        from . import expansion, fs as fsmod
        tid = self.ensure(name)
        cached = self._expansion_cache.get(tid)
        if cached is _IN_PROGRESS:
            return fsmod.typed_node_fs(name)  # conservative on re-entry
        if cached is None:
            self._expansion_cache[tid] = _IN_PROGRESS
            try:
                base = fsmod.typed_node_fs(name)
                control = expansion.ExpansionControl(mode="resolved",
                                                     max_path_length=50)
                cached = expansion.expand(base, control, self)
            finally:
                if self._expansion_cache.get(tid) is _IN_PROGRESS:
                    del self._expansion_cache[tid]
            self._expansion_cache[tid] = cached
        return cached

    # -- diagnostics ---------------------------------------------------------

    def dump(self) -> str:
        """One line per type: name, kind, code, parents, alternatives,
        declared incompatibilities; stable field order."""
        self._fresh_codes()
        lines = []
        for e in self.entries:
            parents = ",".join(sorted(self.name_of(p) for p in e.conj_parents))
            alts = ",".join(sorted(self.name_of(a)
                                   for a in e.disj_alternatives))
            incompat = ";".join(sorted(
                "{" + ",".join(sorted(self.name_of(m) for m in s)) + "}"
                for s in e.incompatible_with))
            lines.append(
                f"{e.name} kind={e.kind} code={self.code_of(e.type_id):#x} "
                f"parents=[{parents}] alternatives=[{alts}] "
                f"incompatible=[{incompat}]")
        return "\n".join(lines)
