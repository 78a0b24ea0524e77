"""Unique maximal configurations on finite boards.

``order`` is always a tuple of vertices from ≺-least to ≺-greatest. The
greedy maximal point is the construction used for condition M1; the
exhaustive oracle enumerates every point of the board once and answers
dominance questions with array operations.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .chordal import ChordalTreeDecomposition, order_rank
from .graphs import ConstraintGraph, FiniteBoard, all_distances
from .homspace import HomSolver, points_array


class M1Failure(ValueError):
    """No ≼-greatest point exists; carries two incomparable points."""

    def __init__(self, pair: tuple[dict, dict]):
        self.pair = pair
        super().__init__("M1 fails: incomparable maximal points")


def _check_order(H: ConstraintGraph, order: Sequence[str]) -> dict[str, int]:
    if sorted(order) != sorted(H.vertices) or len(set(order)) != len(H):
        raise ValueError("order must list every vertex exactly once")
    return order_rank(order)


def dominates(order: Sequence[str], big: Mapping, small: Mapping) -> bool:
    """``small ≼ big`` coordinatewise."""
    rank = order_rank(order)
    return all(rank[small[s]] <= rank[big[s]] for s in small)


@dataclass
class MaximalConfigResult:
    omega_alpha: dict
    order_used: tuple[str, ...]
    orderings_tested: int
    stable: bool
    incomparable_pair: tuple[dict, dict] | None = None


def greedy_maximal(board: FiniteBoard, H: ConstraintGraph, order: Sequence[str],
                   alpha: Mapping[str, str], site_sequence: Sequence[str] | None = None,
                   solver: HomSolver | None = None) -> dict:
    """Visit sites in turn, giving each the ≺-greatest value that still extends."""
    solver = solver or HomSolver(board, H)
    cur = dict(alpha)
    if solver.first(cur) is None:
        raise ValueError("alpha is not globally admissible on the board")
    for s in site_sequence or board.sites:
        if s in cur:
            continue
        for v in reversed(order):
            cur[s] = v
            if solver.first(cur) is not None:
                break
        else:
            raise AssertionError("no admissible value at a site of an admissible configuration")
    return cur


def maximal_configuration(board: FiniteBoard, H: ConstraintGraph, order: Sequence[str],
                          alpha: Mapping[str, str] | None = None, orderings: int = 20,
                          seed: int = 0) -> MaximalConfigResult:
    """Greedy maximal point under the canonical site order plus seeded reorderings.

    Every greedy result is a maximal element of [α]; two different results
    are therefore incomparable and certify that M1 fails.
    """
    _check_order(H, order)
    alpha = dict(alpha or {})
    solver = HomSolver(board, H)
    base = greedy_maximal(board, H, order, alpha, board.sites, solver)
    rng = random.Random(seed)
    sequences = [list(board.sites[::-1])] + [
        rng.sample(board.sites, len(board.sites)) for _ in range(max(orderings - 2, 0))]
    for seq in sequences[:max(orderings - 1, 0)]:
        other = greedy_maximal(board, H, order, alpha, seq, solver)
        if other != base:
            return MaximalConfigResult(base, tuple(order), orderings, False, (base, other))
    return MaximalConfigResult(base, tuple(order), max(orderings, 1), True)


def _shapes(board: FiniteBoard, max_size: int, sites: Iterable[str] | None,
            max_shapes: int, rng: random.Random) -> list[tuple[str, ...]]:
    pool = board.sort(board.sites if sites is None else sites)
    shapes = [c for k in range(max_size + 1) for c in itertools.combinations(pool, k)]
    if len(shapes) > max_shapes:
        shapes = [()] + rng.sample(shapes[1:], max_shapes - 1)
    return shapes


@dataclass
class UMCVerdict:
    condition: str
    holds: bool
    alphas_checked: int
    shapes_checked: int
    measured_distance: int | None = None
    bound: int | None = None
    counterexample: dict | None = None
    maxima: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "maxima"}


def _decode(board, H, row) -> dict:
    return {s: H.vertices[int(v)] for s, v in zip(board.sites, row)}


def verify_M1(board: FiniteBoard, H: ConstraintGraph, order: Sequence[str], max_shape_size: int = 2,
              sites: Iterable[str] | None = None, max_shapes: int = 5000, seed: int = 0,
              point_limit: int = 10**6) -> UMCVerdict:
    """For every α on every tested shape: a ≼-greatest point of [α] exists and equals the greedy one.

    The oracle enumerates every point of the board and takes the
    coordinatewise maximum of the ranks over [α]; a greatest element exists
    exactly when that maximum is itself a point.
    """
    rank = _check_order(H, order)
    P = points_array(board, H, limit=point_limit)
    R = np.array([rank[v] for v in H.vertices], dtype=np.int16)[P]
    rng = random.Random(seed)
    shapes = _shapes(board, max_shape_size, sites, max_shapes, rng)
    solver = HomSolver(board, H)
    maxima: dict = {}
    checked = 0
    for A in shapes:
        cols = [board.index(s) for s in A]
        for vals in np.unique(P[:, cols], axis=0) if cols else [np.zeros(0, dtype=P.dtype)]:
            mask = np.all(P[:, cols] == vals, axis=1) if cols else np.ones(len(P), dtype=bool)
            rows = R[mask]
            top = rows.max(axis=0)
            alpha = {s: H.vertices[int(v)] for s, v in zip(A, vals)}
            checked += 1
            hit = np.nonzero(np.all(rows == top, axis=1))[0]
            greedy = greedy_maximal(board, H, order, alpha, board.sites, solver)
            if not len(hit):
                g = np.array([rank[greedy[s]] for s in board.sites])
                above = rows[~np.all(rows <= g, axis=1)][0]
                dom = rows[np.all(rows >= above, axis=1)]
                best = dom[np.argmax(dom.sum(axis=1))]
                inv = {r: v for v, r in rank.items()}
                other = {s: inv[int(r)] for s, r in zip(board.sites, best)}
                return UMCVerdict("M1", False, checked, len(shapes), counterexample={
                    "alpha": alpha, "incomparable_pair": [greedy, other]})
            oracle = _decode(board, H, P[mask][hit[0]])
            if oracle != greedy:
                return UMCVerdict("M1", False, checked, len(shapes), counterexample={
                    "alpha": alpha, "greatest": oracle, "greedy": greedy,
                    "reason": "greedy disagrees with the oracle"})
            maxima[tuple(sorted(alpha.items()))] = greedy
    return UMCVerdict("M1", True, checked, len(shapes), maxima=maxima)


def disagreement(a: Mapping, b: Mapping) -> set:
    return {s for s in a if s in b and a[s] != b[s]}


def verify_M2(board: FiniteBoard, H: ConstraintGraph, order: Sequence[str], g: int,
              max_shape_size: int = 2, sites: Iterable[str] | None = None,
              max_shapes: int = 5000, pairs_budget: int = 10**6, seed: int = 0,
              m1: UMCVerdict | None = None) -> UMCVerdict:
    """Σ_V(ω_α₁, ω_α₂) ⊆ N_g(Σ_A(α₁, α₂)) over pairs on the tested shapes.

    Reports the smallest g that would have sufficed for every tested pair.
    """
    m1 = m1 or verify_M1(board, H, order, max_shape_size, sites, max_shapes, seed)
    if not m1.holds:
        raise M1Failure(tuple(m1.counterexample.get("incomparable_pair", (None, None))))
    dist = all_distances(board)
    by_shape: dict[tuple, list] = {}
    for key, omega in m1.maxima.items():
        by_shape.setdefault(tuple(s for s, _ in key), []).append((dict(key), omega))
    worst, witness, pairs = 0, None, 0
    for shape, items in by_shape.items():
        for (a1, w1), (a2, w2) in itertools.combinations(items, 2):
            pairs += 1
            if pairs > pairs_budget:
                break
            sig_a = disagreement(a1, a2)
            sig_v = disagreement(w1, w2)
            need = max((min(dist[z][y] for y in sig_a) for z in sig_v), default=0)
            if need > worst:
                worst, witness = need, {"alpha1": a1, "alpha2": a2, "sigma_V": sorted(sig_v),
                                        "sigma_A": sorted(sig_a)}
    return UMCVerdict("M2", worst <= g, m1.alphas_checked, m1.shapes_checked,
                      measured_distance=worst, bound=g,
                      counterexample=witness if worst > g else None)


@dataclass(frozen=True)
class PMapState:
    omega_1: Mapping[str, str]
    omega_2: Mapping[str, str]
    x: str


def _lower_neighbours(board, rank, state: PMapState):
    w1, w2, x = state.omega_1, state.omega_2, state.x
    below = [y for y in board.neighbors(x) if rank[w1[y]] < rank[w1[x]]]
    prec = [y for y in below if rank[w1[y]] < rank[w2[y]]]
    succ = [y for y in below if rank[w1[y]] > rank[w2[y]]]
    return below, prec, succ


def p_map_level(order: Sequence[str], state: PMapState) -> int:
    return order_rank(order)[state.omega_1[state.x]]


def p_map_step(board: FiniteBoard, order: Sequence[str], state: PMapState) -> PMapState:
    rank = order_rank(order)
    if not rank[state.omega_1[state.x]] < rank[state.omega_2[state.x]]:
        raise ValueError("state is not in D: need ω₁(x) ≺ ω₂(x)")
    _, prec, succ = _lower_neighbours(board, rank, state)
    if prec:
        return PMapState(state.omega_1, state.omega_2, prec[0])
    if succ:
        return PMapState(state.omega_2, state.omega_1, succ[0])
    return state


def p_map_orbit(board: FiniteBoard, order: Sequence[str], state: PMapState) -> list[PMapState]:
    """States visited until the first fixed point (inclusive)."""
    orbit = [state]
    while True:
        nxt = p_map_step(board, order, orbit[-1])
        if nxt == orbit[-1]:
            return orbit
        orbit.append(nxt)


def _improving_candidate(H, order, rank, dec: ChordalTreeDecomposition, state, below) -> str | None:
    w1, w2, x = state.omega_1, state.omega_2, state.x
    t = w1[x]
    if below:
        return w2[x]
    for j in dec.cone_parts:
        if t in j.vertices:
            return j.attachment
    for tp in dec.tree_parts:
        if t in tp.vertices:
            members = set(tp.vertices)
            parent = {tp.root: tp.attachment}
            stack = [tp.root]
            while stack:
                s = stack.pop()
                for w in H.neighbors(s):
                    if w in members and w not in parent:
                        parent[w] = s
                        stack.append(w)
            if t == tp.root or parent[t] == tp.root:
                return tp.attachment
            return parent[parent[t]]
    higher = [c for c in dec.core if rank[c] > rank[t] and H.adjacent(c, t)]
    return min(higher, key=rank.__getitem__) if higher else None


def improvable_at_fixed_point(board: FiniteBoard, H: ConstraintGraph, order: Sequence[str],
                              state: PMapState,
                              decomposition: ChordalTreeDecomposition | None = None) -> str | None:
    """A value u ≻ ω₁(x) that can replace ω₁(x) while keeping ω₁ a point.

    With a decomposition, the case-by-case choice of the improvement
    argument is tried first; otherwise (or if it fails) the ≺-greatest
    admissible replacement is returned. None means no replacement works.
    """
    rank = order_rank(order)
    if p_map_step(board, order, state) != state:
        raise ValueError("state is not a fixed point of the P-map")
    w1, x = state.omega_1, state.x
    values = [w1[y] for y in board.neighbors(x)]

    def ok(u: str) -> bool:
        return rank[u] > rank[w1[x]] and all(H.adjacent(u, v) for v in values)

    if decomposition is not None:
        below, _, _ = _lower_neighbours(board, rank, state)
        u = _improving_candidate(H, order, rank, decomposition, state, below)
        if u is not None and ok(u):
            return u
    for u in reversed(order):
        if ok(u):
            return u
    return None
