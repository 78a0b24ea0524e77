"""Folds, dismantling certificates and persistent vertices.

Folding ``u`` into ``v`` deletes ``u``, so every reduced graph is the induced
subgraph on the surviving vertex set. All searches below run on bitmasks of
surviving vertices, which makes memoisation on reduced graphs exact.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graphs import ConstraintGraph


class SearchBudgetExceeded(RuntimeError):
    """A bounded search ran out of node expansions before deciding."""


@dataclass(frozen=True)
class FoldStep:
    folded: str
    absorber: str


@dataclass(frozen=True)
class DismantleCertificate:
    steps: tuple[FoldStep, ...]
    terminal: str
    terminal_looped: bool

    def to_json(self) -> dict:
        return {
            "steps": [{"folded": s.folded, "absorber": s.absorber} for s in self.steps],
            "terminal": self.terminal,
            "terminal_looped": self.terminal_looped,
        }


@dataclass(frozen=True)
class StuckReport:
    """Why a graph is not dismantlable: a fold-free reduction plus the exhaustive verdict."""

    stuck_vertices: tuple[str, ...]
    greedy_steps: tuple[FoldStep, ...]
    exhaustive_confirmed: bool


class _Masks:
    def __init__(self, H: ConstraintGraph):
        self.H = H
        self.n = len(H)
        self.adj = H.adjacency_masks()
        self.full = (1 << self.n) - 1

    def folds(self, alive: int) -> list[tuple[int, int]]:
        out = []
        for u in range(self.n):
            if not alive >> u & 1:
                continue
            nu = self.adj[u] & alive
            for v in range(self.n):
                if v != u and alive >> v & 1 and nu & ~(self.adj[v] & alive) == 0:
                    out.append((u, v))
        return out

    def first_fold(self, alive: int) -> tuple[int, int] | None:
        """Canonical greedy choice: lowest absorber v, then lowest folded u."""
        for v in range(self.n):
            if not alive >> v & 1:
                continue
            nv = self.adj[v] & alive
            for u in range(self.n):
                if u != v and alive >> u & 1 and self.adj[u] & alive & ~nv == 0:
                    return u, v
        return None

    def names(self, alive: int) -> tuple[str, ...]:
        return tuple(self.H.vertices[i] for i in range(self.n) if alive >> i & 1)


def find_folds(H: ConstraintGraph) -> list[tuple[str, str]]:
    """All ordered pairs (u, v), u != v, with N(u) ⊆ N(v), in canonical order."""
    m = _Masks(H)
    return [(H.vertices[u], H.vertices[v]) for u, v in m.folds(m.full)]


def _greedy(m: _Masks) -> tuple[list[tuple[int, int]], int]:
    alive = m.full
    steps = []
    while alive & (alive - 1):
        f = m.first_fold(alive)
        if f is None:
            break
        steps.append(f)
        alive &= ~(1 << f[0])
    return steps, alive


def _exhaustive(m: _Masks, start: int, budget: int) -> list[tuple[int, int]] | None:
    """Depth-first search over all fold sequences with failure memoisation."""
    dead: set[int] = set()
    expansions = 0

    def go(alive: int) -> list | None:
        nonlocal expansions
        if not alive & (alive - 1):
            return []
        if alive in dead:
            return None
        expansions += 1
        if expansions > budget:
            raise SearchBudgetExceeded("fold search budget exhausted")
        seen_u = set()
        for u, v in m.folds(alive):
            if u in seen_u:
                continue
            seen_u.add(u)
            rest = go(alive & ~(1 << u))
            if rest is not None:
                return [(u, v)] + rest
        dead.add(alive)
        return None

    return go(start)


def exhaustive_dismantle(H: ConstraintGraph, budget: int = 10**6) -> DismantleCertificate | None:
    """Oracle: search every fold sequence, independent of the greedy order."""
    m = _Masks(H)
    seq = _exhaustive(m, m.full, budget)
    return None if seq is None else _certificate(m, seq)


def _certificate(m: _Masks, seq: list[tuple[int, int]]) -> DismantleCertificate:
    alive = m.full
    for u, _ in seq:
        alive &= ~(1 << u)
    terminal = m.H.vertices[alive.bit_length() - 1]
    return DismantleCertificate(
        tuple(FoldStep(m.H.vertices[u], m.H.vertices[v]) for u, v in seq),
        terminal,
        m.H.is_looped(terminal),
    )


def greedy_dismantle(H: ConstraintGraph) -> DismantleCertificate | StuckReport:
    """Greedy folding only (lowest absorber, then lowest folded vertex); no search."""
    m = _Masks(H)
    steps, alive = _greedy(m)
    if not alive & (alive - 1):
        return _certificate(m, steps)
    return StuckReport(m.names(alive),
                       tuple(FoldStep(H.vertices[u], H.vertices[v]) for u, v in steps),
                       exhaustive_confirmed=False)


def dismantle(H: ConstraintGraph, budget: int = 10**6) -> DismantleCertificate | StuckReport:
    """Greedy folding (lowest absorber, then lowest folded vertex) with exhaustive fallback."""
    m = _Masks(H)
    steps, alive = _greedy(m)
    if not alive & (alive - 1):
        return _certificate(m, steps)
    rescue = _exhaustive(m, m.full, budget)
    if rescue is not None:
        return _certificate(m, rescue)
    return StuckReport(
        m.names(alive),
        tuple(FoldStep(H.vertices[u], H.vertices[v]) for u, v in steps),
        exhaustive_confirmed=True,
    )


def is_dismantlable(H: ConstraintGraph) -> bool:
    return isinstance(dismantle(H), DismantleCertificate)


def replay(H: ConstraintGraph, cert: DismantleCertificate) -> bool:
    """Independent re-check of a certificate using set neighbourhoods."""
    alive = set(H.vertices)
    for step in cert.steps:
        u, v = step.folded, step.absorber
        if u == v or u not in alive or v not in alive:
            return False
        if not (H.neighbors(u) & alive) <= (H.neighbors(v) & alive):
            return False
        alive.discard(u)
    return alive == {cert.terminal} and H.is_looped(cert.terminal) == cert.terminal_looped


def persistent_vertices(H: ConstraintGraph, budget: int = 10**6) -> dict[str, bool | None]:
    """Looped vertices reachable as the terminal of some fold sequence.

    Returns a map from each looped vertex to True/False, or None when the
    directed search for that vertex ran out of budget.
    """
    if len(H) < 2:
        raise ValueError("persistent vertices are defined for nontrivial graphs")
    if not is_dismantlable(H):
        raise ValueError("graph is not dismantlable")
    m = _Masks(H)
    out: dict[str, bool | None] = {}
    for t in range(m.n):
        if not H.is_looped(H.vertices[t]):
            continue
        target = 1 << t
        dead: set[int] = set()
        expansions = 0

        def reach(alive: int) -> bool:
            nonlocal expansions
            if alive == target:
                return True
            if alive in dead:
                return False
            expansions += 1
            if expansions > budget:
                raise SearchBudgetExceeded
            for u in sorted({u for u, _ in m.folds(alive)}):
                if u != t and reach(alive & ~(1 << u)):
                    return True
            dead.add(alive)
            return False

        try:
            out[H.vertices[t]] = reach(m.full)
        except SearchBudgetExceeded:
            out[H.vertices[t]] = None
    return out
