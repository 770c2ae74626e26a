"""Typed feature structures and graph unification.

A structure is a rooted directed graph; node identity is structure sharing
(coreference) and graphs may be cyclic.  Unification works on private copies
under a union-find discipline, combining type slots through the typed GLB
and simplifier, so declared type-level incompatibilities override feature
compatibility.
"""
from __future__ import annotations

from . import ast, simplify
from .simplify import And, AtomLit, FALSE, FsLit, Or, TRUE, TypeLit


class _Bottom:
    __slots__ = ()

    def __repr__(self):
        return "bottom"


BOTTOM = _Bottom()


class UnificationFailure(Exception):
    def __init__(self, path: tuple[str, ...] = ()):
        self.path = path
        super().__init__("unification failure at " + ("/".join(path) or "root"))


class Node:
    __slots__ = ("slot", "feats", "forward", "definitional", "applied",
                 "expanded")

    def __init__(self, slot=TRUE, definitional: bool = False):
        self.slot = slot
        self.feats: dict[str, Node] = {}
        self.forward: Node | None = None
        self.definitional = definitional
        self.applied: frozenset = frozenset()
        self.expanded = False


def find(node: Node) -> Node:
    while node.forward is not None:
        if node.forward.forward is not None:
            node.forward = node.forward.forward
        node = node.forward
    return node


class FeatureStructure:
    __slots__ = ("_root",)

    def __init__(self, root: Node):
        self._root = root

    @property
    def root(self) -> Node:
        return find(self._root)

    def __repr__(self):
        return f"<fs {render_avm(self)}>"


def empty_fs() -> FeatureStructure:
    return FeatureStructure(Node(TRUE))


def typed_node_fs(name: str) -> FeatureStructure:
    return FeatureStructure(Node(TypeLit(name)))


def _reachable(root: Node) -> list[Node]:
    seen: list[Node] = []
    ids: set[int] = set()
    stack = [root]
    while stack:
        n = find(stack.pop())
        if id(n) in ids:
            continue
        ids.add(id(n))
        seen.append(n)
        stack.extend(n.feats.values())
    return seen


def copy_fs(f: FeatureStructure, *, definitional: bool | None = None,
            applied: bool = True) -> FeatureStructure:
    """Deep copy; optionally overriding the definitional mark on every node."""
    memo: dict[int, Node] = {}

    def dup(n: Node) -> Node:
        n = find(n)
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        c = Node(n.slot, n.definitional if definitional is None else definitional)
        c.applied = n.applied if applied else frozenset()
        c.expanded = n.expanded
        memo[id(n)] = c
        for attr, child in n.feats.items():
            c.feats[attr] = dup(child)
        return c

    return FeatureStructure(dup(f.root))


# ---------------------------------------------------------------------------
# Slot combination


def _glb_operand(lit) -> bool:
    if isinstance(lit, TypeLit):
        return not lit.negated
    return isinstance(lit, (AtomLit, FsLit))


def _term_literals(term) -> list:
    if isinstance(term, And):
        return list(term.items)
    return [term]


def _rebuild_dnf(terms: list[tuple]) -> object:
    if not terms:
        return FALSE
    built = []
    for lits in terms:
        ordered = tuple(sorted(set(lits), key=simplify._SORT_KEY))
        built.append(ordered[0] if len(ordered) == 1 else And(ordered))
    built = sorted(set(built), key=simplify._SORT_KEY)
    return built[0] if len(built) == 1 else Or(tuple(built))


def _glb_pass(nf, hier, memo):
    """Prune and substitute DNF terms pairwise through the typed GLB."""
    if hier is None or nf is TRUE or nf is FALSE:
        return nf
    terms = nf.items if isinstance(nf, Or) else (nf,)
    out: list[tuple] = []
    for term in terms:
        lits = _term_literals(term)
        dead = False
        changed = True
        while changed and not dead:
            changed = False
            n = len(lits)
            for i in range(n):
                if changed or dead:
                    break
                for j in range(i + 1, n):
                    a, b = lits[i], lits[j]
                    if not (_glb_operand(a) and _glb_operand(b)):
                        continue
                    fc_a, fc_b = isinstance(a, FsLit), isinstance(b, FsLit)
                    if fc_a and fc_b:
                        continue  # merged structurally, not symbolically
                    verdict = hier.glb_typed(a, b, memo)
                    if verdict.failed():
                        dead = True
                        break
                    if fc_a or fc_b:
                        continue  # the structure survives alongside the type
                    r = verdict.result
                    if isinstance(r, AtomLit) or (
                            isinstance(r, TypeLit) and not r.negated):
                        lits[i] = r
                        del lits[j]
                        changed = True
                        break
        if not dead:
            out.append(tuple(lits))
    return _rebuild_dnf(out)


def combine_slots(s1, s2, hier, memo=None):
    """Conjoin two type slots; FALSE signals failure."""
    if s1 is TRUE:
        return s2
    if s2 is TRUE:
        return s1
    if s1 is FALSE or s2 is FALSE:
        return FALSE
    if s1 == s2:
        return s1
    nf = simplify.simplify(And((s1, s2)), "dnf", hier, memo)
    return _glb_pass(nf, hier, memo)


def _single_term_handles(slot):
    """FsLit literals of a single-term slot, plus the slot without them."""
    if isinstance(slot, FsLit):
        return [slot], TRUE
    if isinstance(slot, And):
        handles = [l for l in slot.items if isinstance(l, FsLit)]
        if not handles:
            return [], slot
        rest = tuple(l for l in slot.items if not isinstance(l, FsLit))
        if not rest:
            return handles, TRUE
        return handles, (rest[0] if len(rest) == 1 else And(rest))
    return [], slot


# ---------------------------------------------------------------------------
# Unification


def _merge_nodes(a: Node, b: Node, hier, memo, path: tuple[str, ...] = ()):
    stack: list[tuple[Node, Node, tuple[str, ...]]] = [(a, b, path)]
    while stack:
        x, y, p = stack.pop()
        x, y = find(x), find(y)
        if x is y:
            continue
        y.forward = x
        slot = combine_slots(x.slot, y.slot, hier, memo)
        if slot is FALSE:
            raise UnificationFailure(p)
        x.definitional = x.definitional and y.definitional
        x.applied = x.applied | y.applied
        x.expanded = False
        feats_y = y.feats
        y.feats = {}
        for attr, yc in feats_y.items():
            xc = x.feats.get(attr)
            if xc is None:
                x.feats[attr] = yc
            else:
                stack.append((xc, yc, p + (attr,)))
        # a slot that collapsed to one alternative releases its structure
        handles, slot = _single_term_handles(slot)
        x.slot = slot
        for h in handles:
            root = _instantiate_handle(h, hier, memo)
            stack.append((x, root, p))


def _instantiate_handle(h: FsLit, hier, memo) -> Node:
    payload = h.payload
    if isinstance(payload, FeatureStructure):
        return copy_fs(payload).root
    built = build_fs(payload, hier, memo=memo)
    if built is BOTTOM:
        raise UnificationFailure()
    return built.root


def unify(f, g, hier=None, memo=None):
    """Unify two structures on working copies; BOTTOM is the failure value."""
    if f is BOTTOM or g is BOTTOM:
        return BOTTOM
    fa, fb = copy_fs(f), copy_fs(g)
    try:
        _merge_nodes(fa.root, fb.root, hier, memo)
    except UnificationFailure:
        return BOTTOM
    return FeatureStructure(fa.root)


def unify_into(target: FeatureStructure, node: Node, g: FeatureStructure,
               hier, memo=None) -> None:
    """Merge a copy of g into one node of target, destructively.

    Raises UnificationFailure on clash; used by the expansion engine.
    """
    del target
    gc = copy_fs(g)
    _merge_nodes(node, gc.root, hier, memo)


# ---------------------------------------------------------------------------
# Structure building from syntax


def build_fs(expr, hier=None, memo=None, *, definitional: bool = False,
             tags: dict[str, Node] | None = None):
    """Realize a type expression as a feature structure.

    Equal coreference tags map to one shared node; conjunctions at a node
    merge type slots (simplified) and feature maps recursively; list sugar
    becomes FIRST/REST chains.  Returns BOTTOM on immediate inconsistency.
    """
    tags = {} if tags is None else tags
    root = Node(TRUE, definitional)
    try:
        _absorb(root, expr, hier, memo, tags, definitional)
    except UnificationFailure:
        return BOTTOM
    return FeatureStructure(find(root))


def _absorb(node: Node, expr, hier, memo, tags, definitional):
    node = find(node)
    if isinstance(expr, ast.Conj):
        for item in expr.items:
            _absorb(find(node), item, hier, memo, tags, definitional)
        return
    if isinstance(expr, ast.Coref):
        prior = tags.get(expr.tag)
        if prior is None:
            tags[expr.tag] = node
        else:
            _merge_nodes(prior, node, hier, memo)
        return
    if isinstance(expr, ast.FeatureTerm):
        for attr, value in expr.pairs:
            child = Node(TRUE, definitional)
            _absorb(child, value, hier, memo, tags, definitional)
            node = find(node)
            existing = node.feats.get(attr)
            if existing is None:
                node.feats[attr] = find(child)
            else:
                _merge_nodes(existing, child, hier, memo, (attr,))
        return
    if isinstance(expr, ast.ListTerm):
        _absorb_list(node, expr, hier, memo, tags, definitional)
        return
    if isinstance(expr, (ast.TypeName, ast.Atom, ast.Neg, ast.Disj, ast.Xor)):
        nf = simplify.simplify(expr, "dnf", hier, memo)
        _constrain(node, nf, hier, memo)
        return
    if isinstance(expr, (TypeLit, AtomLit, FsLit, And, Or)) or expr is TRUE \
            or expr is FALSE:
        _constrain(node, expr, hier, memo)
        return
    if isinstance(expr, ast.TemplateCall):
        raise TypeError("template calls must be expanded before building")
    raise TypeError(f"cannot build a structure from {expr!r}")


def _constrain(node: Node, nf, hier, memo):
    node = find(node)
    slot = combine_slots(node.slot, nf, hier, memo)
    if slot is FALSE:
        raise UnificationFailure()
    handles, slot = _single_term_handles(slot)
    node.slot = slot
    for h in handles:
        root = _instantiate_handle(h, hier, memo)
        _merge_nodes(node, root, hier, memo)


def _absorb_list(node: Node, expr: ast.ListTerm, hier, memo, tags,
                 definitional):
    if not expr.elements:
        if expr.tail is not None:
            _absorb(node, expr.tail, hier, memo, tags, definitional)
        else:
            _constrain(node, TypeLit("null-list"), hier, memo)
        return
    current = node
    for element in expr.elements:
        current = find(current)
        _constrain(current, TypeLit("cons"), hier, memo)
        first = current.feats.get("FIRST")
        if first is None:
            first = Node(TRUE, definitional)
            current.feats["FIRST"] = first
        _absorb(first, element, hier, memo, tags, definitional)
        current = find(current)
        rest = current.feats.get("REST")
        if rest is None:
            rest = Node(TRUE, definitional)
            current.feats["REST"] = rest
        current = rest
    current = find(current)
    if expr.tail is not None:
        _absorb(current, expr.tail, hier, memo, tags, definitional)
    else:
        _constrain(current, TypeLit("null-list"), hier, memo)


# ---------------------------------------------------------------------------
# Queries


def get_path(f: FeatureStructure, path) -> Node | None:
    """Node reached by a sequence of attributes; None when absent."""
    if f is BOTTOM:
        return None
    node = f.root
    for attr in path:
        node = find(node)
        child = node.feats.get(attr)
        if child is None:
            return None
        node = child
    return find(node)


def subsumes_fs(f, g, hier=None) -> bool:
    """True when f is at least as general as g: an embedding of f's graph
    into g's preserving root, features, sharing and slot subsumption."""
    if f is BOTTOM:
        return g is BOTTOM
    if g is BOTTOM:
        return True
    mapping: dict[int, Node] = {}
    stack = [(f.root, g.root)]
    while stack:
        x, y = stack.pop()
        x, y = find(x), find(y)
        seen = mapping.get(id(x))
        if seen is not None:
            if seen is not y:
                return False
            continue
        mapping[id(x)] = y
        if not _slot_subsumes(x.slot, y.slot, hier):
            return False
        for attr, xc in x.feats.items():
            yc = y.feats.get(attr)
            if yc is None:
                return False
            stack.append((xc, yc))
    return True


def _slot_subsumes(a, b, hier) -> bool:
    if a is TRUE or a == b:
        return True
    if b is FALSE:
        return True
    if b is TRUE:
        return False
    aterms = a.items if isinstance(a, Or) else (a,)
    bterms = b.items if isinstance(b, Or) else (b,)
    for bt in bterms:
        blits = _term_literals(bt)
        if not any(all(any(_lit_subsumes(al, bl, hier) for bl in blits)
                       for al in _term_literals(at))
                   for at in aterms):
            return False
    return True


def _lit_subsumes(a, b, hier) -> bool:
    if a == b:
        return True
    if isinstance(a, TypeLit) and isinstance(b, TypeLit):
        if not a.negated and not b.negated:
            if hier is not None and hier.kind_of(a.name) is not None \
                    and hier.kind_of(b.name) is not None:
                return hier.nf_subsumes(a.name, b.name)
            return False
        if a.negated and b.negated:
            return hier is not None and hier.nf_subsumes(b.name, a.name)
        if a.negated and not b.negated:
            return hier is not None \
                and hier.incompatible_subset(frozenset({a.name, b.name}))
        return False
    if isinstance(a, TypeLit) and isinstance(b, AtomLit) and not a.negated:
        if hier is None:
            return False
        kind = hier.kind_of(a.name)
        if kind in ("sort", "builtin", "top"):
            return hier.atom_in_type(b.kind, b.value, a.name)
        return False
    if isinstance(a, FsLit) and isinstance(b, FsLit):
        return a.key == b.key
    return False


# ---------------------------------------------------------------------------
# Rendering and structural comparison


def render_avm(f) -> str:
    """Linear attribute-value text with coreference tags at first occurrence;
    deterministic node numbering, so it doubles as a canonical form."""
    if f is BOTTOM:
        return "bottom"
    root = f.root
    refcount: dict[int, int] = {}
    order: list[Node] = []

    def count(n: Node):
        n = find(n)
        refcount[id(n)] = refcount.get(id(n), 0) + 1
        if refcount[id(n)] > 1:
            return
        order.append(n)
        for attr in sorted(n.feats):
            count(n.feats[attr])

    count(root)
    numbers: dict[int, int] = {}
    for n in order:
        if refcount.get(id(n), 0) > 1:
            numbers[id(n)] = len(numbers) + 1

    seen: set[int] = set()

    def render(n: Node) -> str:
        n = find(n)
        tag = numbers.get(id(n))
        if tag is not None:
            if id(n) in seen:
                return f"#{tag}"
            seen.add(id(n))
        parts = []
        if n.slot is not TRUE:
            parts.append(simplify.print_nf(n.slot))
        if n.feats:
            inner = ", ".join(f"{attr} {render(n.feats[attr])}"
                              for attr in sorted(n.feats))
            parts.append(f"[{inner}]")
        body = " & ".join(parts) if parts else "top"
        if tag is not None:
            return f"#{tag} & {body}" if parts else f"#{tag}"
        return body

    return render(root)


def structurally_equal(f, g) -> bool:
    """Isomorphism up to node identity (shared structure must match)."""
    if f is BOTTOM or g is BOTTOM:
        return f is g
    return render_avm(f) == render_avm(g)


def all_definitional(node: Node) -> bool:
    return all(n.definitional for n in _reachable(find(node)))
