"""Chordality, perfect elimination orders and chordal/tree decompositions.

A decomposition splits V into a loop-chordal core, pendant loopless trees
hanging off the core by a single edge, and cone parts that each have exactly
one core vertex adjacent to all of them.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .folds import SearchBudgetExceeded
from .graphs import ConstraintGraph


@dataclass(frozen=True)
class EliminationResult:
    order: tuple[str, ...] | None
    chordless_cycle: tuple[str, ...] | None

    @property
    def chordal(self) -> bool:
        return self.order is not None


def _simple_nbrs(G: ConstraintGraph, alive: set) -> dict[str, set]:
    return {v: (set(G.neighbors(v)) - {v}) & alive for v in alive}


def is_valid_elimination_order(G: ConstraintGraph, order, looped: bool = False) -> bool:
    """Direct check that each vertex's later neighbours (with it) form a clique.

    With ``looped`` the clique must be loop-complete: every member looped and
    every pair adjacent.
    """
    if sorted(order) != sorted(G.vertices):
        return False
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [w for w in G.neighbors(v) if w != v and pos[w] > pos[v]]
        group = later + [v]
        if looped and not all(G.is_looped(w) for w in group):
            return False
        for a, b in itertools.combinations(later, 2):
            if not G.adjacent(a, b):
                return False
    return True


def _chordless_cycle(G: ConstraintGraph, alive: set) -> tuple[str, ...] | None:
    nb = _simple_nbrs(G, alive)
    for v in G.vertices:
        if v not in alive:
            continue
        ns = [w for w in G.vertices if w in nb[v]]
        for x, y in itertools.combinations(ns, 2):
            if y in nb[x]:
                continue
            blocked = (nb[v] | {v}) - {x, y}
            prev = {x: None}
            queue = deque([x])
            while queue and y not in prev:
                s = queue.popleft()
                for t in G.vertices:
                    if t in nb[s] and t not in blocked and t not in prev:
                        prev[t] = s
                        queue.append(t)
            if y in prev:
                path = [y]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return (v,) + tuple(reversed(path))
    return None


def perfect_elimination_order(G: ConstraintGraph) -> EliminationResult:
    """Repeatedly remove the first simplicial vertex; loops are ignored."""
    alive = set(G.vertices)
    order = []
    while alive:
        nb = _simple_nbrs(G, alive)
        pick = None
        for v in G.vertices:
            if v in alive and all(b in nb[a] for a, b in itertools.combinations(
                    [w for w in G.vertices if w in nb[v]], 2)):
                pick = v
                break
        if pick is None:
            return EliminationResult(None, _chordless_cycle(G, alive))
        order.append(pick)
        alive.discard(pick)
    return EliminationResult(tuple(order), None)


def is_chordal(G: ConstraintGraph) -> bool:
    return perfect_elimination_order(G).chordal


def is_loop_chordal(G: ConstraintGraph) -> bool:
    return len(G.loops()) == len(G) and is_chordal(G)


def has_safe_symbol(H: ConstraintGraph) -> str | None:
    everyone = frozenset(H.vertices)
    for v in H.vertices:
        if H.neighbors(v) == everyone:
            return v
    return None


@dataclass(frozen=True)
class TreePart:
    vertices: tuple[str, ...]
    root: str
    attachment: str


@dataclass(frozen=True)
class ConePart:
    vertices: tuple[str, ...]
    attachment: str


@dataclass(frozen=True)
class ChordalTreeDecomposition:
    core: tuple[str, ...]
    tree_parts: tuple[TreePart, ...]
    cone_parts: tuple[ConePart, ...]


def _connected(H: ConstraintGraph, verts) -> bool:
    verts = set(verts)
    if not verts:
        return False
    start = next(iter(verts))
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for t in H.neighbors(s):
            if t in verts and t not in seen:
                seen.add(t)
                stack.append(t)
    return seen == verts


def _components(H: ConstraintGraph, verts) -> list[tuple[str, ...]]:
    verts = set(verts)
    comps = []
    for v in H.vertices:
        if v not in verts:
            continue
        comp = {v}
        stack = [v]
        verts.discard(v)
        while stack:
            s = stack.pop()
            for t in H.neighbors(s):
                if t in verts:
                    verts.discard(t)
                    comp.add(t)
                    stack.append(t)
        comps.append(tuple(w for w in H.vertices if w in comp))
    return comps


def _as_tree(H: ConstraintGraph, part, core: set) -> TreePart | None:
    part_set = set(part)
    if any(H.is_looped(v) for v in part):
        return None
    inner = {frozenset((u, w)) for u in part for w in H.neighbors(u) if w in part_set}
    if len(inner) != len(part) - 1 or not _connected(H, part):
        return None
    links = [(u, c) for u in part for c in H.vertices if c in core and H.adjacent(u, c)]
    if len(links) != 1:
        return None
    return TreePart(tuple(part), links[0][0], links[0][1])


def _as_cone(H: ConstraintGraph, part, core_order) -> ConePart | None:
    if not _connected(H, part):
        return None
    touched = [c for c in core_order if any(H.adjacent(u, c) for u in part)]
    if len(touched) != 1 or not all(H.adjacent(u, touched[0]) for u in part):
        return None
    return ConePart(tuple(part), touched[0])


def _try_core(H: ConstraintGraph, core: tuple[str, ...], prefer: str) -> ChordalTreeDecomposition | None:
    core_set = set(core)
    if not _connected(H, core) or not is_loop_chordal(H.induced(core)):
        return None
    trees, cones = [], []
    for comp in _components(H, set(H.vertices) - core_set):
        attempts = (_as_tree, _as_cone) if prefer == "tree" else (_as_cone, _as_tree)
        for attempt in attempts:
            part = attempt(H, comp, core_set if attempt is _as_tree else core)
            if part is not None:
                (trees if isinstance(part, TreePart) else cones).append(part)
                break
        else:
            return None
    return ChordalTreeDecomposition(core, tuple(trees), tuple(cones))


def chordal_tree_decomposition(
    H: ConstraintGraph, budget: int = 1 << 16
) -> ChordalTreeDecomposition | None:
    """First decomposition found by a deterministic search, or None if none exists.

    Given the core, the remaining parts are forced to be the connected
    components of the rest, so enumerating cores is a complete search.
    Raises SearchBudgetExceeded when more than ``budget`` cores would be tried.
    """
    s = has_safe_symbol(H)
    if s is not None:
        dec = _try_core(H, (s,), prefer="cone")
        if dec is not None:
            return dec
    looped = H.loops()
    tried = 0
    for size in range(len(looped), 0, -1):
        for core in itertools.combinations(looped, size):
            tried += 1
            if tried > budget:
                raise SearchBudgetExceeded("decomposition search budget exhausted")
            dec = _try_core(H, core, prefer="tree")
            if dec is not None:
                return dec
    return None


def validate_decomposition(H: ConstraintGraph, dec: ChordalTreeDecomposition) -> list[str]:
    """Structural re-check of every defining condition; empty list means valid."""
    problems = []
    core = set(dec.core)
    parts = [set(t.vertices) for t in dec.tree_parts] + [set(j.vertices) for j in dec.cone_parts]
    union = set(core)
    for p in parts:
        if union & p:
            problems.append("parts overlap")
        union |= p
    if union != set(H.vertices):
        problems.append("parts do not cover V")
    if not core or not is_loop_chordal(H.induced(core)):
        problems.append("core is not a nonempty loop-chordal graph")
    elif not _connected(H, core):
        problems.append("core is not connected")
    for t in dec.tree_parts:
        ts = set(t.vertices)
        if any(H.is_looped(v) for v in ts):
            problems.append(f"tree part {t.vertices} has a loop")
        inner = {frozenset((u, w)) for u in ts for w in H.neighbors(u) if w in ts}
        if len(inner) != len(ts) - 1 or not _connected(H, ts):
            problems.append(f"tree part {t.vertices} is not a tree")
        links = {(u, c) for u in ts for c in H.neighbors(u) if c in core}
        if links != {(t.root, t.attachment)}:
            problems.append(f"tree part {t.vertices} does not meet the core in one edge")
    for j in dec.cone_parts:
        js = set(j.vertices)
        if not _connected(H, js):
            problems.append(f"cone part {j.vertices} is not connected")
        touched = {c for c in core if any(H.adjacent(u, c) for u in js)}
        if touched != {j.attachment} or not all(H.adjacent(u, j.attachment) for u in js):
            problems.append(f"cone part {j.vertices} must meet the core only at one hub adjacent to all of it")
    for p, q in itertools.combinations(parts, 2):
        if any(H.adjacent(u, w) for u in p for w in q):
            problems.append("edge between two distinct non-core parts")
    return problems


def natural_linear_order(H: ConstraintGraph, dec: ChordalTreeDecomposition) -> tuple[str, ...]:
    """Vertices listed from ≺-least to ≺-greatest.

    Cone parts come first, then tree parts, then the core in
    perfect-elimination order. Inside a tree part, vertices farther from the
    root come first, so every tree vertex sits below its parent and the root
    below its core attachment; the improvement step at P-map fixed points
    moves a tree value towards the root and needs exactly this. Remaining
    ties follow declaration order.
    """
    idx = H.index
    out: list[str] = []
    for j in dec.cone_parts:
        out += sorted(j.vertices, key=idx)
    for t in dec.tree_parts:
        members = set(t.vertices)
        depth = {t.root: 0}
        queue = deque([t.root])
        while queue:
            s = queue.popleft()
            for w in H.neighbors(s):
                if w in members and w not in depth:
                    depth[w] = depth[s] + 1
                    queue.append(w)
        out += sorted(t.vertices, key=lambda v: (-depth[v], idx(v)))
    peo = perfect_elimination_order(H.induced(dec.core))
    if peo.order is None:
        raise ValueError("core is not chordal")
    out += list(peo.order)
    return tuple(out)


def order_rank(order) -> dict[str, int]:
    """1-based rank of each vertex under ≺."""
    return {v: k for k, v in enumerate(order, 1)}
