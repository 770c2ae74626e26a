"""Controlled type expansion: make definitional constraints explicit.

Expansion walks a structure outside-in, unifying each node's type
definitions (and those of all supertypes) into place.  Disjunctive types are
resolved by trying every alternative on a private copy of the whole graph:
alternatives that fail are pruned, a single survivor is adopted, several
survivors leave a disjunctive type slot carrying their expanded structures.

Recursive types expand lazily in resolved mode: a node stops symbolic when a
prefix of its path has already unified the same type in and the node carries
nothing beyond definitional material.  Complete mode never stops early and
relies on the path-length and depth bounds, surfacing them as a distinct
bounded outcome rather than a truth value.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import fs as fsmod
from . import simplify
from .errors import ExpansionBounded
from .fs import (BOTTOM, FeatureStructure, Node, UnificationFailure, copy_fs,
                 find)
from .simplify import And, FALSE, FsLit, Or, TRUE, TypeLit


@dataclass(frozen=True)
class PathPattern:
    """Attribute path with wildcards: `*` matches one attribute, a trailing
    `**` matches any suffix; a leading `!` in the source form negates."""

    negative: bool
    parts: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "PathPattern":
        negative = text.startswith("!")
        body = text[1:] if negative else text
        parts = tuple(p for p in body.split("|") if p)
        return cls(negative, parts)

    def matches(self, path: tuple[str, ...]) -> bool:
        parts = self.parts
        deep = bool(parts) and parts[-1] == "**"
        if deep:
            parts = parts[:-1]
        if not deep and len(path) > len(parts):
            return False
        return all(p in ("*", a) for p, a in zip(parts, path))


@dataclass
class ExpansionControl:
    """Per-query expansion policy; the fields combine conjunctively."""

    include_types: frozenset | None = None
    exclude_types: frozenset = frozenset()
    path_patterns: tuple[PathPattern, ...] = ()
    depth_bounds: dict = field(default_factory=dict)
    max_path_length: int | None = 50
    mode: str = "complete"  # 'complete' | 'resolved'

    def __post_init__(self):
        if self.mode not in ("complete", "resolved"):
            raise ValueError(f"unknown expansion mode {self.mode!r}")
        if self.include_types is not None \
                and self.include_types & self.exclude_types:
            raise ValueError("include and exclude type sets must be disjoint")
        if any(n < 0 for n in self.depth_bounds.values()):
            raise ValueError("depth bounds must be >= 0")

    def positive_patterns(self):
        return [p for p in self.path_patterns if not p.negative]

    def negative_patterns(self):
        return [p for p in self.path_patterns if p.negative]


# ---------------------------------------------------------------------------
# Recursive-type detection


def detect_recursive_types(hier) -> set[str]:
    """Types on a cycle of the definition dependency graph.

    The graph has an edge t -> u whenever u occurs in t's definition (type
    part, feature skeleton, or disjunction alternatives); the table is
    cached and refreshed whenever the hierarchy changes.
    """
    cached = hier._recursive_cache
    if cached is not None and cached[0] == hier.generation:
        return cached[1]
    edges = hier.dependency_edges()
    on_cycle = _cycle_nodes(edges)
    names = {hier.name_of(t) for t in on_cycle}
    for e in hier.entries:
        e.recursive = e.type_id in on_cycle
    hier._recursive_cache = (hier.generation, names)
    return names


def _cycle_nodes(edges: dict[int, set[int]]) -> set[int]:
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = [0]
    result: set[int] = set()

    def strongconnect(v0: int):
        work = [(v0, iter(sorted(edges.get(v0, ()))))]
        index[v0] = low[v0] = counter[0]
        counter[0] += 1
        stack.append(v0)
        on_stack.add(v0)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(edges.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == v:
                        break
                if len(scc) > 1 or v in edges.get(v, ()):
                    result.update(scc)

    for v in edges:
        if v not in index:
            strongconnect(v)
    return result


# ---------------------------------------------------------------------------
# The expansion engine


def expand(f, control: ExpansionControl, hier, memo=None):
    """Expand a structure under a control policy.

    Returns the expanded structure or BOTTOM; raises ExpansionBounded when a
    resource bound was hit in complete mode (completeness abandoned, not
    refuted).
    """
    result, _ = expand_detail(f, control, hier, memo)
    return BOTTOM if result is None else result


def expand_detail(f, control: ExpansionControl, hier, memo=None):
    """expand() plus the failure path: (structure, None) or (None, path)."""
    if f is BOTTOM:
        return None, ()
    detect_recursive_types(hier)
    work = copy_fs(f)
    try:
        root = _expand_graph(work.root, control, hier, memo)
    except UnificationFailure as exc:
        return None, exc.path
    result = FeatureStructure(root)
    _mark_expanded(result, hier)
    return result, None


def _node_types(node: Node) -> list[str]:
    """Positive type names of a single-term slot (empty for Or slots)."""
    slot = node.slot
    if isinstance(slot, Or):
        return []
    lits = slot.items if isinstance(slot, And) else (slot,)
    return [l.name for l in lits
            if isinstance(l, TypeLit) and not l.negated]


def _permitted(node: Node, path, control: ExpansionControl, hier) -> bool:
    types = [t for t in _node_types(node) if hier.kind_of(t) is not None]
    if control.exclude_types:
        for t in types:
            if any(hier.subsumes(x, t) for x in control.exclude_types
                   if hier.kind_of(x) is not None):
                return False
    if control.include_types is not None:
        if not any(hier.subsumes(x, t) for t in types
                   for x in control.include_types
                   if hier.kind_of(x) is not None):
            return False
    for pattern in control.negative_patterns():
        if pattern.matches(path):
            return False
    positives = control.positive_patterns()
    if positives and not any(p.matches(path) for p in positives):
        return False
    return True


def _demanded(path, control: ExpansionControl) -> bool:
    return any(p.matches(path) for p in control.positive_patterns())


def _scan(root: Node):
    """Breadth-first traversal yielding (node, path, prefix frames)."""
    seen: set[int] = set()
    queue: deque = deque([(root, (), ())])
    while queue:
        node, path, frames = queue.popleft()
        node = find(node)
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node, path, frames
        child_frames = frames + (node,)
        for attr in sorted(node.feats):
            queue.append((node.feats[attr], path + (attr,), child_frames))


def _prefix_applied(frames, name: str) -> int:
    return sum(1 for anc in frames if name in find(anc).applied)


def _conj_action(node: Node, path, frames, control, hier):
    """Names whose skeletons still need unifying at this node, or a stop."""
    todo = []
    for t in sorted(set(_node_types(node))):
        entry = hier.entry(t)
        if entry is None:
            continue
        chain = hier.ancestor_chain(t)
        chain_set = set(chain)
        if chain_set <= node.applied:
            continue
        depth_bound = control.depth_bounds.get(t)
        if depth_bound is not None and _prefix_applied(frames, t) >= depth_bound:
            if control.mode == "complete":
                raise ExpansionBounded(
                    f"depth bound for {t} exceeded at " + _fmt_path(path))
            continue
        if control.mode == "resolved" and entry.recursive \
                and not _demanded(path, control) \
                and _prefix_applied(frames, t) > 0 \
                and fsmod.all_definitional(node):
            continue  # the information is already given on a prefix path
        todo.append((t, chain))
    return todo


def _fmt_path(path) -> str:
    return "|".join(path) or "(root)"


def _alt_marker(t: str) -> str:
    return f"alternatives of {t}"  # spaces cannot occur in type names

_SLOT_MARKER = "slot alternatives"


def _disj_action(node: Node, hier):
    """Pending disjunction at this node: ('entry', t, alts) or ('slot', terms)."""
    slot = node.slot
    if isinstance(slot, Or):
        if _SLOT_MARKER in node.applied:
            return None
        return ("slot", list(slot.items))
    for t in sorted(set(_node_types(node))):
        entry = hier.entry(t)
        if entry is None or not entry.disj_alternatives:
            continue
        if _alt_marker(t) in node.applied:
            continue
        alts = sorted(hier.name_of(a) for a in entry.disj_alternatives)
        return ("entry", t, alts)
    return None


def _expand_graph(root: Node, control: ExpansionControl, hier, memo) -> Node:
    mpl = control.max_path_length
    while True:
        action = None
        for node, path, frames in _scan(root):
            node = find(node)
            if node.slot is FALSE:
                raise UnificationFailure(path)
            if node.expanded:
                continue
            if not _permitted(node, path, control, hier):
                continue
            if mpl is not None and len(path) > mpl:
                if control.mode == "complete":
                    raise ExpansionBounded(
                        "maximal path length exceeded at " + _fmt_path(path))
                continue
            todo = _conj_action(node, path, frames, control, hier)
            if todo:
                action = ("conj", node, path, todo)
                break
            disj = _disj_action(node, hier)
            if disj is not None:
                action = ("disj", node, path, disj)
                break
        if action is None:
            return find(root)
        kind, node, path, payload = action
        if kind == "conj":
            for t, chain in payload:
                for name in chain:
                    node = find(node)
                    if name in node.applied:
                        continue
                    skeleton = hier.skeleton_fs(name)
                    if skeleton is not None:
                        instance = copy_fs(skeleton, definitional=True,
                                           applied=False)
                        fsmod._merge_nodes(node, instance.root, hier, memo,
                                           path)
                    node = find(node)
                    node.applied = node.applied | {name}
            continue
        root = _resolve_disjunction(root, node, path, payload, control, hier,
                                    memo)
        if isinstance(root, _Adopted):
            return root.node


class _Adopted:
    __slots__ = ("node",)

    def __init__(self, node: Node):
        self.node = node


def _resolve_disjunction(root: Node, node: Node, path, payload,
                         control: ExpansionControl, hier, memo):
    if payload[0] == "entry":
        _, t, alts = payload
        node.applied = node.applied | {_alt_marker(t)}
        constraints = [(alt, TypeLit(alt)) for alt in alts]
        keep = [l for l in _term_lits(node.slot)
                if not (isinstance(l, TypeLit) and l.name == t)]
    else:
        _, terms = payload
        node.applied = node.applied | {_SLOT_MARKER}
        constraints = [(None, term) for term in terms]
        keep = []
    survivors = []
    bounded = None
    for label, constraint in constraints:
        trial_root, mapping = _copy_graph(root)
        trial_node = mapping[id(find(node))]
        try:
            if payload[0] == "slot":
                trial_node.slot = TRUE
            fsmod._constrain(trial_node, constraint, hier, memo)
            expanded = _expand_graph(find(trial_root), control, hier, memo)
        except UnificationFailure:
            continue
        except ExpansionBounded as exc:
            bounded = exc
            continue
        survivors.append((label, expanded))
    if bounded is not None:
        # an alternative could not be decided; the disjunction must not be
        # pruned (or kept) on incomplete evidence
        raise bounded
    if not survivors:
        raise UnificationFailure(path)
    if len(survivors) == 1:
        return _Adopted(survivors[0][1])
    node = find(node)
    new_terms = []
    for label, expanded in survivors:
        target = fsmod.get_path(FeatureStructure(expanded), path)
        handle = FsLit(FeatureStructure(target))
        lits = [handle] if label is None else [TypeLit(label), handle]
        lits += keep
        ordered = tuple(sorted(set(lits), key=simplify._SORT_KEY))
        new_terms.append(ordered[0] if len(ordered) == 1 else And(ordered))
    new_terms = sorted(set(new_terms), key=simplify._SORT_KEY)
    node.slot = new_terms[0] if len(new_terms) == 1 else Or(tuple(new_terms))
    return root


def _term_lits(term) -> list:
    if isinstance(term, And):
        return list(term.items)
    if term is TRUE:
        return []
    return [term]


def _copy_graph(root: Node):
    """Deep copy returning the new root and an id-based node mapping."""
    mapping: dict[int, Node] = {}

    def dup(n: Node) -> Node:
        n = find(n)
        hit = mapping.get(id(n))
        if hit is not None:
            return hit
        c = Node(n.slot, n.definitional)
        c.applied = n.applied
        c.expanded = n.expanded
        mapping[id(n)] = c
        for attr, child in n.feats.items():
            c.feats[attr] = dup(child)
        return c

    return dup(root), mapping


def _mark_expanded(f: FeatureStructure, hier) -> None:
    """A node is fully expanded iff its types' constraints are all present
    and every substructure is fully expanded."""
    nodes = fsmod._reachable(f.root)
    state: dict[int, bool] = {}
    for n in nodes:
        local = not isinstance(n.slot, Or)
        if local:
            for t in _node_types(n):
                entry = hier.entry(t)
                if entry is None:
                    continue
                if not set(hier.ancestor_chain(t)) <= n.applied:
                    local = False
                    break
                if entry.disj_alternatives:
                    local = False
                    break
        state[id(n)] = local
    changed = True
    while changed:
        changed = False
        for n in nodes:
            if not state[id(n)]:
                continue
            if any(not state[id(find(c))] for c in n.feats.values()):
                state[id(n)] = False
                changed = True
    for n in nodes:
        n.expanded = state[id(n)]


def alternative_structures(node: Node) -> list[tuple[str | None, object]]:
    """Decompose a disjunctive slot into (alternative name, structure) pairs."""
    slot = find(node).slot
    terms = slot.items if isinstance(slot, Or) else (slot,)
    out = []
    for term in terms:
        name = None
        handle = None
        for lit in _term_lits(term):
            if isinstance(lit, TypeLit) and not lit.negated:
                name = lit.name
            elif isinstance(lit, FsLit):
                handle = lit.payload
        out.append((name, handle))
    return out


# ---------------------------------------------------------------------------
# Consistency checking and satisfiability


@dataclass
class ConsistencyEntry:
    name: str
    outcome: str  # 'consistent' | 'inconsistent' | 'bounded'
    detail: str = ""
    structure: object = None


@dataclass
class ConsistencyReport:
    entries: list[ConsistencyEntry] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        out = {"consistent": 0, "inconsistent": 0, "bounded": 0}
        for e in self.entries:
            out[e.outcome] += 1
        return out

    def render(self) -> list[str]:
        lines = [f"check: {e.name} {e.outcome}"
                 + (f" at {e.detail}" if e.detail else "")
                 for e in self.entries]
        c = self.counts()
        lines.append(f"result: {c['consistent']} consistent, "
                     f"{c['inconsistent']} inconsistent, "
                     f"{c['bounded']} bounded")
        return lines


def check_entry(name: str, base, control, hier, memo=None) -> ConsistencyEntry:
    try:
        expanded, fail_path = expand_detail(base, control, hier, memo)
    except ExpansionBounded as exc:
        return ConsistencyEntry(name, "bounded", str(exc))
    if expanded is None:
        return ConsistencyEntry(name, "inconsistent", _fmt_path(fail_path))
    return ConsistencyEntry(name, "consistent", structure=expanded)


def check_consistency(store, control: ExpansionControl, hier,
                      memo=None) -> ConsistencyReport:
    """Expand every type definition and instance; collect per-name outcomes.

    `store` provides ordered (name, structure) pairs via check_targets().
    """
    report = ConsistencyReport()
    for name, base in store.check_targets():
        if base is BOTTOM:
            report.entries.append(ConsistencyEntry(name, "inconsistent"))
            continue
        entry = check_entry(name, base, control, hier, memo)
        report.entries.append(entry)
    return report


def satisfiable(f, g, control: ExpansionControl, hier, memo=None) -> str:
    """'yes', 'no' or 'bounded' for the unification of two structures.

    Complete mode with no bounds may not terminate; that choice is the
    contract, and hitting a bound is reported as 'bounded', never as a
    truth value.
    """
    u = fsmod.unify(f, g, hier, memo)
    if u is BOTTOM:
        return "no"
    try:
        expanded = expand(u, control, hier, memo)
    except ExpansionBounded:
        return "bounded"
    return "no" if expanded is BOTTOM else "yes"


def satisfiable_structure(f, g, control: ExpansionControl, hier, memo=None):
    """Like satisfiable, but returns (verdict, expanded structure or None)."""
    u = fsmod.unify(f, g, hier, memo)
    if u is BOTTOM:
        return "no", None
    try:
        expanded = expand(u, control, hier, memo)
    except ExpansionBounded:
        return "bounded", None
    if expanded is BOTTOM:
        return "no", None
    return "yes", expanded
