"""Configurations on finite boards, admissibility, languages and mixing checks.

A configuration is a plain ``dict`` from site to vertex. The extender is a
backtracking search with minimum-remaining-values branching and arc
consistency on the homomorphism constraint, so it is exact on finite boards.
"""
from __future__ import annotations

import itertools
import random
import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .graphs import ConstraintGraph, FiniteBoard, all_distances

Config = dict

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class BudgetExceeded(RuntimeError):
    pass


class HomSolver:
    """Homomorphism search from ``board[target]`` into ``H`` with bitmask domains."""

    def __init__(self, board: FiniteBoard, H: ConstraintGraph, target: Iterable[str] | None = None):
        self.board = board
        self.H = H
        self.sites = board.sites if target is None else board.sort(target)
        self.pos = {s: i for i, s in enumerate(self.sites)}
        self.nbrs = [
            tuple(self.pos[t] for t in board.neighbors(s) if t in self.pos) for s in self.sites
        ]
        self.hadj = H.adjacency_masks()
        self.full = (1 << len(H)) - 1
        self._support: dict[int, int] = {}

    def support(self, mask: int) -> int:
        r = self._support.get(mask)
        if r is None:
            r, m = 0, mask
            while m:
                low = m & -m
                r |= self.hadj[low.bit_length() - 1]
                m ^= low
            self._support[mask] = r
        return r

    def _propagate(self, dom: list[int], changed: Iterable[int]) -> bool:
        queue = deque(changed)
        queued = set(queue)
        while queue:
            s = queue.popleft()
            queued.discard(s)
            sup = self.support(dom[s])
            for t in self.nbrs[s]:
                nd = dom[t] & sup
                if nd != dom[t]:
                    if not nd:
                        return False
                    dom[t] = nd
                    if t not in queued:
                        queued.add(t)
                        queue.append(t)
        return True

    def domains(self, config: Mapping[str, str], restrict: Mapping[str, int] | None = None):
        dom = [self.full] * len(self.sites)
        for s, mask in (restrict or {}).items():
            if s in self.pos:
                dom[self.pos[s]] &= mask
        for s, v in config.items():
            if s in self.pos:
                dom[self.pos[s]] &= 1 << self.H.index(v)
        if not all(dom) or not self._propagate(dom, range(len(dom))):
            return None
        return dom

    def _search(self, dom: list[int], order: Callable[[int], list[int]]) -> Iterator[list[int]]:
        best, best_count = -1, 1 << 30
        for i, d in enumerate(dom):
            c = d.bit_count()
            if 1 < c < best_count:
                best, best_count = i, c
                if c == 2:
                    break
        if best < 0:
            yield dom
            return
        for v in order(dom[best]):
            nd = dom.copy()
            nd[best] = 1 << v
            if self._propagate(nd, (best,)):
                yield from self._search(nd, order)

    @staticmethod
    def _ascending(mask: int) -> list[int]:
        return [i for i in range(mask.bit_length()) if mask >> i & 1]

    def solutions(self, config: Mapping[str, str], rng: random.Random | None = None,
                  restrict: Mapping[str, int] | None = None) -> Iterator[list[int]]:
        dom = self.domains(config, restrict)
        if dom is None:
            return iter(())
        if rng is None:
            order = self._ascending
        else:
            def order(mask: int) -> list[int]:
                vals = self._ascending(mask)
                rng.shuffle(vals)
                return vals
        return self._search(dom, order)

    def decode(self, dom: list[int]) -> Config:
        V = self.H.vertices
        return {s: V[d.bit_length() - 1] for s, d in zip(self.sites, dom)}

    def first(self, config: Mapping[str, str], rng: random.Random | None = None) -> Config | None:
        for sol in self.solutions(config, rng):
            return self.decode(sol)
        return None


def _check_config(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str]) -> None:
    for s, v in config.items():
        if s not in board._index:
            raise KeyError(f"site {s!r} is not on the board")
        if v not in H._index:
            raise KeyError(f"value {v!r} is not a vertex of the constraint graph")


def is_locally_admissible(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str]) -> bool:
    _check_config(board, H, config)
    for s, v in config.items():
        for t in board.neighbors(s):
            if t in config and not H.adjacent(v, config[t]):
                return False
    return True


def extend(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str],
           target: Iterable[str] | None = None, rng: random.Random | None = None) -> Config | None:
    """A locally admissible configuration on ``target`` agreeing with ``config``, or None."""
    _check_config(board, H, config)
    target = set(board.sites if target is None else target)
    if not set(config) <= target:
        raise ValueError("target must contain the configuration's shape")
    return HomSolver(board, H, target).first(config, rng)


def is_globally_admissible(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str],
                           radius: int | None = None) -> bool:
    """Extends to the whole board, or to N_radius(shape) when ``radius`` is given."""
    from .graphs import neighborhood

    if radius is None or not config:
        return extend(board, H, config) is not None
    return extend(board, H, config, neighborhood(board, config, radius)) is not None


def iter_points(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str] | None = None,
                target: Iterable[str] | None = None) -> Iterator[Config]:
    solver = HomSolver(board, H, target)
    for sol in solver.solutions(config or {}):
        yield solver.decode(sol)


def points_array(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str] | None = None,
                 limit: int = 10**6) -> np.ndarray:
    """All points extending ``config`` as rows of vertex indices in board site order."""
    solver = HomSolver(board, H)
    rows = []
    for sol in solver.solutions(config or {}):
        rows.append([d.bit_length() - 1 for d in sol])
        if len(rows) > limit:
            raise BudgetExceeded(f"more than {limit} points")
    return np.array(rows, dtype=np.int16).reshape(len(rows), len(board))


def language(board: FiniteBoard, H: ConstraintGraph, A: Iterable[str],
             budget: int = 10**6) -> list[Config]:
    """L_A: globally admissible configurations on A, in lexicographic order."""
    A = board.sort(A)
    if len(H) ** len(A) > budget:
        raise BudgetExceeded(f"|H|^|A| = {len(H)}^{len(A)} exceeds the budget")
    local = HomSolver(board, H, A)
    whole = HomSolver(board, H)
    out = []
    for sol in local.solutions({}):
        cfg = local.decode(sol)
        if whole.first(cfg) is not None:
            out.append(cfg)
    out.sort(key=lambda c: [H.index(c[s]) for s in A])
    return out


def brute_force_extend(board: FiniteBoard, H: ConstraintGraph, config: Mapping[str, str],
                       target: Iterable[str] | None = None) -> Config | None:
    """Plain depth-first extension in site order with no propagation.

    Kept deliberately simple as an independent check on ``extend``.
    """
    sites = [s for s in (board.sites if target is None else board.sort(target)) if s not in config]
    if not is_locally_admissible(board, H, config):
        return None
    cur = dict(config)

    def go(i: int) -> bool:
        if i == len(sites):
            return True
        s = sites[i]
        for v in H.vertices:
            if all(H.adjacent(v, cur[t]) for t in board.neighbors(s) if t in cur):
                cur[s] = v
                if go(i + 1):
                    return True
                del cur[s]
        return False

    return cur if go(0) else None


@dataclass
class MixingVerdict:
    property: str
    gap: int | None
    holds: bool | None
    counterexample: dict | None = None
    search_bounds: dict = field(default_factory=dict)
    method: str = ""

    @property
    def exit_code(self) -> int:
        return {True: 0, False: 1, None: 2}[self.holds]


def _values_at(board, H, solver: HomSolver, x: str) -> list[str]:
    return [v for v in H.vertices if solver.first({x: v}) is not None]


def check_strong_irreducibility(board: FiniteBoard, H: ConstraintGraph, g: int,
                                budget: int = 10**6, sites: Iterable[str] | None = None) -> MixingVerdict:
    """Singleton shapes: every admissible x↦u and y↦v with dist(x,y) >= g jointly extend."""
    sites = board.sort(board.interior if sites is None else sites)
    dist = all_distances(board)
    solver = HomSolver(board, H)
    vals = {x: _values_at(board, H, solver, x) for x in sites}
    calls = 0
    for x, y in itertools.combinations(sites, 2):
        if dist[x][y] < g:
            continue
        for u in vals[x]:
            for v in vals[y]:
                calls += 1
                if calls > budget:
                    return MixingVerdict("strong_irreducibility", g, None,
                                         search_bounds={"shapes": "singletons", "extend_calls": budget},
                                         method="budget exhausted")
                if solver.first({x: u, y: v}) is None:
                    return MixingVerdict(
                        "strong_irreducibility", g, False,
                        {"alpha": {x: u}, "sigma": {}, "beta": {y: v}, "distance": dist[x][y]},
                        {"shapes": "singletons", "extend_calls": calls}, "singleton search")
    return MixingVerdict("strong_irreducibility", g, True, None,
                         {"shapes": "singletons", "extend_calls": calls}, "singleton search")


def _ssf_ring_failure(H: ConstraintGraph, ring_edges: frozenset, size: int):
    """First locally admissible partial ring assignment with no common neighbour.

    Returned as (ring position, vertex) pairs so results can be shared by
    sites whose neighbourhoods look alike.
    """
    hv = H.vertices
    for cfg in itertools.product((None,) + hv, repeat=size):
        assigned = [(i, v) for i, v in enumerate(cfg) if v is not None]
        if any((i, j) in ring_edges and not H.adjacent(v, w)
               for (i, v), (j, w) in itertools.combinations(assigned, 2)):
            continue
        common = set(hv)
        for _, v in assigned:
            common &= H.neighbors(v)
            if not common:
                return tuple(assigned)
    return None


def check_SSF(board: FiniteBoard, H: ConstraintGraph) -> MixingVerdict:
    cache: dict = {}
    for x in board.sites:
        ring = board.neighbors(x)
        ring_edges = frozenset(
            (i, j) for i, j in itertools.combinations(range(len(ring)), 2)
            if board.adjacent(ring[i], ring[j]))
        key = (len(ring), ring_edges)
        if key not in cache:
            cache[key] = _ssf_ring_failure(H, ring_edges, len(ring))
        fail = cache[key]
        if fail is not None:
            beta = {ring[i]: v for i, v in fail}
            return MixingVerdict("SSF", None, False, {"site": x, "beta": beta},
                                 {"sites": len(board)}, "exhaustive")
    return MixingVerdict("SSF", None, True, None, {"sites": len(board)}, "exhaustive")


def validate_tssm_counterexample(board: FiniteBoard, H: ConstraintGraph, alpha: Mapping,
                                 sigma: Mapping, beta: Mapping,
                                 extender: Callable = extend) -> bool:
    """[ασ] and [σβ] nonempty while [ασβ] is empty."""
    a_s = {**sigma, **alpha}
    s_b = {**sigma, **beta}
    if any(a_s.get(k, v) != v for k, v in beta.items()):
        return False
    joint = {**a_s, **beta}
    return (extender(board, H, a_s) is not None and extender(board, H, s_b) is not None
            and extender(board, H, joint) is None)


@dataclass(frozen=True)
class TSSMBudget:
    max_points: int = 20000
    max_work: float = 1e11


def _pair_search(board, H, P: np.ndarray, xi: int, yi: int, u: int, v: int,
                 work_left: float) -> tuple[dict | None, float]:
    """Exact σ search for singletons via agreement sets of point pairs.

    If (S, σ) is a counterexample with witnesses ω₁ ∈ [ασ], ω₂ ∈ [σβ], then
    σ can be enlarged to ω₁ on the whole agreement set of ω₁ and ω₂ (minus
    x, y) and stays a counterexample, so scanning point pairs is exhaustive.
    """
    at_x, at_y = P[:, xi] == u, P[:, yi] == v
    P1 = P[at_x & ~at_y]
    P2 = P[at_y & ~at_x]
    P12 = P[at_x & at_y]
    n = P.shape[1]
    cost = float(len(P1)) * len(P2) * max(len(P12), 1) * n
    if cost > work_left:
        return None, -1.0
    if not len(P1) or not len(P2):
        return None, cost
    keep = np.ones(n, dtype=bool)
    keep[[xi, yi]] = False
    for w1 in P1:
        agree = (P2 == w1) & keep
        diff = (P12 != w1).astype(np.float32)
        hits = diff @ agree.T.astype(np.float32)
        bad = np.nonzero(hits.min(axis=0) > 0)[0] if len(P12) else np.arange(len(P2))
        if len(bad):
            j = int(bad[0])
            sites = board.sites
            V = H.vertices
            sigma = {sites[k]: V[w1[k]] for k in np.nonzero(agree[j])[0]}
            return {"alpha": {sites[xi]: V[u]}, "sigma": sigma, "beta": {sites[yi]: V[v]},
                    "omega1": {sites[k]: V[w1[k]] for k in range(n)},
                    "omega2": {sites[k]: V[P2[j][k]] for k in range(n)}}, cost
    return None, cost


def check_TSSM(board: FiniteBoard, H: ConstraintGraph, g: int,
               budget: TSSMBudget = TSSMBudget(), witnesses: Iterable = (),
               use_ssf: bool = True, sites: Iterable[str] | None = None) -> MixingVerdict:
    """TSSM with gap g through the singleton reduction.

    Order of evidence: supplied witnesses, the SSF shortcut (SSF gives TSSM
    with gap 2), singleton strong-irreducibility failures, and finally the
    exact point-pair search when the point set fits the budget.
    """
    dist = all_distances(board)
    for w in witnesses:
        alpha, sigma, beta = w["alpha"], w["sigma"], w["beta"]
        if min(dist[a][b] for a in alpha for b in beta) >= g and \
                validate_tssm_counterexample(board, H, alpha, sigma, beta):
            return MixingVerdict("TSSM", g, False, dict(w), {"source": "supplied witness"}, "witness")
    if use_ssf and g >= 2 and check_SSF(board, H).holds:
        return MixingVerdict("TSSM", g, True, None, {"certificate": "SSF"}, "SSF implies gap 2")
    si = check_strong_irreducibility(board, H, g, sites=sites)
    if si.holds is False:
        return MixingVerdict("TSSM", g, False, si.counterexample, si.search_bounds, "empty sigma")
    sites = board.sort(board.interior if sites is None else sites)
    bounds = {"shapes": "singletons", "sigma": "all subsets (point-pair reduction)",
              "max_points": budget.max_points, "max_work": budget.max_work}
    try:
        P = points_array(board, H, limit=budget.max_points)
    except BudgetExceeded:
        return MixingVerdict("TSSM", g, None, None, bounds, "point budget exhausted")
    work_left = budget.max_work
    for x, y in itertools.combinations(sites, 2):
        if dist[x][y] < g:
            continue
        xi, yi = board.index(x), board.index(y)
        for u in np.unique(P[:, xi]):
            for v in np.unique(P[:, yi]):
                found, cost = _pair_search(board, H, P, xi, yi, int(u), int(v), work_left)
                if cost < 0:
                    return MixingVerdict("TSSM", g, None, None, bounds, "work budget exhausted")
                work_left -= cost
                if found is not None:
                    return MixingVerdict("TSSM", g, False, found, bounds, "point-pair search")
    bounds["points"] = int(len(P))
    return MixingVerdict("TSSM", g, True, None, bounds, "point-pair search")
