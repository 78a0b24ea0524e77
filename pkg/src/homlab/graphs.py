"""Constraint graphs, finite boards, named families and board metrics.

Identifiers are strings and the canonical order is declaration order. A loop
is stored as the one-element pair ``frozenset({v})``, so ``{v, v}`` and the
neighbourhood convention ``v in N(v)`` for looped ``v`` line up.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

Edge = frozenset


def _edge(u: str, v: str) -> frozenset:
    return frozenset((u, v))


@dataclass(frozen=True)
class ConstraintGraph:
    """Finite graph with loops allowed; the spin alphabet ``H``."""

    vertices: tuple[str, ...]
    edges: frozenset
    _nbrs: Mapping[str, frozenset] = field(init=False, repr=False, compare=False)
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ValueError("a constraint graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex identifier")
        known = set(self.vertices)
        nbrs: dict[str, set] = {v: set() for v in self.vertices}
        for e in self.edges:
            if not e <= known:
                raise ValueError(f"edge {sorted(e)} has an undeclared endpoint")
            ends = tuple(e)
            u, v = (ends[0], ends[0]) if len(ends) == 1 else ends
            nbrs[u].add(v)
            nbrs[v].add(u)
        object.__setattr__(self, "_nbrs", {v: frozenset(s) for v, s in nbrs.items()})
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.vertices)})

    def __len__(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        return self._index[v]

    def neighbors(self, v: str) -> frozenset:
        """N(v); contains ``v`` itself exactly when ``v`` is looped."""
        return self._nbrs[v]

    def adjacent(self, u: str, v: str) -> bool:
        return v in self._nbrs[u]

    def is_looped(self, v: str) -> bool:
        return v in self._nbrs[v]

    def loops(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.is_looped(v))

    def degree(self, v: str) -> int:
        return len(self._nbrs[v])

    def induced(self, keep: Iterable[str]) -> "ConstraintGraph":
        keep = set(keep)
        verts = tuple(v for v in self.vertices if v in keep)
        return ConstraintGraph(verts, frozenset(e for e in self.edges if e <= keep))

    def deloop(self) -> "ConstraintGraph":
        return ConstraintGraph(self.vertices, frozenset(e for e in self.edges if len(e) == 2))

    def adjacency_masks(self) -> list[int]:
        """Bitmask of N(v) over vertex indices, one entry per vertex."""
        out = []
        for v in self.vertices:
            m = 0
            for w in self._nbrs[v]:
                m |= 1 << self._index[w]
            out.append(m)
        return out

    def edge_list(self) -> list[tuple[str, str]]:
        """Edges as ordered pairs sorted by declaration order (loops as ``(v, v)``)."""
        pairs = []
        for e in self.edges:
            ends = sorted(e, key=self._index.__getitem__)
            pairs.append((ends[0], ends[-1]))
        return sorted(pairs, key=lambda p: (self._index[p[0]], self._index[p[1]]))


def build_constraint_graph(
    vertex_list: Sequence, edge_list: Iterable[Sequence]
) -> ConstraintGraph:
    verts = tuple(str(v) for v in vertex_list)
    edges = set()
    for pair in edge_list:
        u, v = (str(p) for p in pair)
        edges.add(_edge(u, v))
    return ConstraintGraph(verts, frozenset(edges))


@dataclass(frozen=True)
class FiniteBoard:
    """Finite simple connected graph standing in for a board.

    ``interior`` is the analysis region; the remaining sites model the
    exterior that carries boundary conditions. ``coords`` is filled in for
    lattice families so geometric constructions can address sites.
    """

    sites: tuple[str, ...]
    adjacency: frozenset
    interior: frozenset
    coords: Mapping[str, tuple[int, ...]] | None = field(default=None, compare=False)
    _nbrs: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.sites) < 2:
            raise ValueError("a board needs at least two sites")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("duplicate site identifier")
        index = {s: i for i, s in enumerate(self.sites)}
        nbrs: dict[str, list] = {s: [] for s in self.sites}
        for e in self.adjacency:
            if len(e) != 2:
                raise ValueError("boards are simple: loops are not allowed")
            u, v = tuple(e)
            if u not in index or v not in index:
                raise ValueError(f"edge {u}-{v} has an undeclared endpoint")
            nbrs[u].append(v)
            nbrs[v].append(u)
        if not set(self.interior) <= set(index):
            raise ValueError("interior must be a subset of the sites")
        ordered = {s: tuple(sorted(n, key=index.__getitem__)) for s, n in nbrs.items()}
        object.__setattr__(self, "_nbrs", ordered)
        object.__setattr__(self, "_index", index)
        seen = {self.sites[0]}
        queue = deque(seen)
        while queue:
            s = queue.popleft()
            for t in ordered[s]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        if len(seen) != len(self.sites):
            raise ValueError("board is not connected")

    def __len__(self) -> int:
        return len(self.sites)

    def index(self, s: str) -> int:
        return self._index[s]

    def __contains__(self, s: object) -> bool:
        return s in self._index

    def neighbors(self, s: str) -> tuple[str, ...]:
        return self._nbrs[s]

    def adjacent(self, s: str, t: str) -> bool:
        return t in self._nbrs[s]

    def degree(self, s: str) -> int:
        return len(self._nbrs[s])

    @property
    def max_degree(self) -> int:
        return max(len(n) for n in self._nbrs.values())

    def sort(self, sites: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(set(sites), key=self._index.__getitem__))

    def at(self, *xy: int) -> str:
        """Site identifier of a lattice coordinate."""
        return ",".join(str(c) for c in xy)

    def edge_list(self) -> list[tuple[str, str]]:
        pairs = [tuple(sorted(e, key=self._index.__getitem__)) for e in self.adjacency]
        return sorted(pairs, key=lambda p: (self._index[p[0]], self._index[p[1]]))

    def subboard(self, keep: Iterable[str], interior: Iterable[str] | None = None) -> "FiniteBoard":
        keep = set(keep)
        sites = tuple(s for s in self.sites if s in keep)
        adj = frozenset(e for e in self.adjacency if e <= keep)
        inner = frozenset(keep if interior is None else interior)
        coords = None if self.coords is None else {s: self.coords[s] for s in sites}
        return FiniteBoard(sites, adj, inner, coords)


def _board(sites, edges, coords=None, interior=None) -> FiniteBoard:
    sites = tuple(sites)
    inner = frozenset(sites if interior is None else interior)
    return FiniteBoard(sites, frozenset(_edge(u, v) for u, v in edges), inner, coords)


# --- metrics -------------------------------------------------------------


def _bfs(board: FiniteBoard, sources: Iterable[str], limit: float = math.inf) -> dict[str, int]:
    dist = {}
    queue = deque()
    for s in sources:
        if s not in board._index:
            raise KeyError(f"site {s!r} is not on the board")
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        s = queue.popleft()
        if dist[s] >= limit:
            continue
        for t in board.neighbors(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return dist


def distance(board: FiniteBoard, A: Iterable[str], B: Iterable[str]) -> float:
    """dist(A, B); ``math.inf`` when either side is empty."""
    A, B = set(A), set(B)
    for s in A | B:
        if s not in board._index:
            raise KeyError(f"site {s!r} is not on the board")
    if not A or not B:
        return math.inf
    dist = _bfs(board, A)
    return min(dist[b] for b in B)


def neighborhood(board: FiniteBoard, A: Iterable[str], n: int) -> frozenset:
    """N_n(A) = {x : dist(x, A) <= n}."""
    return frozenset(_bfs(board, A, limit=n))


def boundary(board: FiniteBoard, A: Iterable[str]) -> frozenset:
    """∂A = {x : dist(x, A) = 1}."""
    return frozenset(s for s, d in _bfs(board, A, limit=1).items() if d == 1)


def closure(board: FiniteBoard, A: Iterable[str]) -> frozenset:
    return neighborhood(board, A, 1)


def all_distances(board: FiniteBoard) -> dict[str, dict[str, int]]:
    return {s: _bfs(board, [s]) for s in board.sites}


# --- named constraint graphs ---------------------------------------------


def _require_positive(**params: int) -> None:
    for name, value in params.items():
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def complete(n: int, looped: bool = False) -> ConstraintGraph:
    _require_positive(n=n)
    verts = [str(i) for i in range(1, n + 1)]
    edges = [(u, v) for i, u in enumerate(verts) for v in verts[i + (0 if looped else 1):]]
    return build_constraint_graph(verts, edges)


def hard_core() -> ConstraintGraph:
    return build_constraint_graph(["0", "1"], [("0", "0"), ("0", "1")])


def star(n: int, center_loop: bool = False, all_looped: bool = False) -> ConstraintGraph:
    _require_positive(n=n)
    verts = [str(i) for i in range(n + 1)]
    edges = [("0", v) for v in verts[1:]]
    if center_loop or all_looped:
        edges.append(("0", "0"))
    if all_looped:
        edges += [(v, v) for v in verts[1:]]
    return build_constraint_graph(verts, edges)


def barbell(n: int) -> ConstraintGraph:
    _require_positive(n=n)
    verts = [str(i) for i in range(n + 2)]
    edges = [("0", "0"), (str(n + 1), str(n + 1))]
    edges += [(str(i), str(i + 1)) for i in range(n + 1)]
    return build_constraint_graph(verts, edges)


def h_q(q: int) -> ConstraintGraph:
    """K_{q+1} on 0..q plus a looped ``a`` and an unlooped ``b`` joined to it."""
    _require_positive(q=q)
    core = [str(i) for i in range(q + 1)]
    edges = [(u, v) for i, u in enumerate(core) for v in core[i + 1:]]
    edges += [("a", "a")] + [(x, v) for x in ("a", "b") for v in core]
    return build_constraint_graph(core + ["a", "b"], edges)


def counterexample_abcd() -> ConstraintGraph:
    return build_constraint_graph(
        ["a", "b", "c", "d"],
        [("a", "a"), ("b", "b"), ("c", "c"), ("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
    )


NAMED_FAMILIES = (
    "K_n", "K_n_looped", "H_phi", "S_n", "S_n_center_loop", "S_n_all_looped",
    "barbell_n", "H_q", "counterexample_abcd",
)


def generate_named(family: str, params: Mapping[str, int] | None = None) -> ConstraintGraph:
    p = dict(params or {})
    if family == "K_n":
        return complete(p["n"])
    if family == "K_n_looped":
        return complete(p["n"], looped=True)
    if family == "H_phi":
        return hard_core()
    if family == "S_n":
        return star(p["n"])
    if family == "S_n_center_loop":
        return star(p["n"], center_loop=True)
    if family == "S_n_all_looped":
        return star(p["n"], all_looped=True)
    if family == "barbell_n":
        return barbell(p["n"])
    if family == "H_q":
        return h_q(p["q"])
    if family == "counterexample_abcd":
        return counterexample_abcd()
    raise ValueError(f"unknown graph family {family!r}")


# --- named boards ----------------------------------------------------------


def box_z2(w: int, h: int) -> FiniteBoard:
    """w x h piece of Z^2; sites ``"x,y"`` listed column by column."""
    _require_positive(w=w, h=h)
    coords = {f"{x},{y}": (x, y) for x in range(w) for y in range(h)}
    edges = []
    for x in range(w):
        for y in range(h):
            if x + 1 < w:
                edges.append((f"{x},{y}", f"{x + 1},{y}"))
            if y + 1 < h:
                edges.append((f"{x},{y}", f"{x},{y + 1}"))
    return _board(coords, edges, coords)


def lattice_region(cells: Iterable[tuple[int, int]]) -> FiniteBoard:
    """Induced subgraph of Z^2 on ``cells``, sites ordered by (x, y)."""
    cells = sorted(set(cells))
    coords = {f"{x},{y}": (x, y) for x, y in cells}
    present = set(cells)
    edges = []
    for x, y in cells:
        for nx, ny in ((x + 1, y), (x, y + 1)):
            if (nx, ny) in present:
                edges.append((f"{x},{y}", f"{nx},{ny}"))
    return _board(coords, edges, coords)


def ball_tree(d: int, r: int) -> FiniteBoard:
    """Radius-r ball around the root of the d-regular tree."""
    _require_positive(d=d)
    if r < 1:
        raise ValueError("radius must be at least 1")
    sites = ["0"]
    edges = []
    frontier = [("0", None)]
    for _ in range(r):
        nxt = []
        for s, parent in frontier:
            kids = d if parent is None else d - 1
            for k in range(kids):
                c = f"{s}.{k}"
                sites.append(c)
                edges.append((s, c))
                nxt.append((c, s))
        frontier = nxt
    return _board(sites, edges)


def path_board(n: int) -> FiniteBoard:
    _require_positive(n=n)
    coords = {str(i): (i,) for i in range(n)}
    return _board(coords, [(str(i), str(i + 1)) for i in range(n - 1)], coords)


def cycle_board(n: int) -> FiniteBoard:
    if n < 3:
        raise ValueError("a simple cycle needs at least three sites")
    sites = [str(i) for i in range(n)]
    return _board(sites, [(sites[i], sites[(i + 1) % n]) for i in range(n)])


def star_board(n: int) -> FiniteBoard:
    _require_positive(n=n)
    sites = [str(i) for i in range(n + 1)]
    return _board(sites, [("0", s) for s in sites[1:]])


def with_exterior_ring(board: FiniteBoard, width: int = 1) -> FiniteBoard:
    """Mark sites within ``width - 1`` of a degree-deficient site as exterior."""
    if width < 1:
        return board
    deficient = [s for s in board.sites if board.degree(s) < board.max_degree]
    outer = neighborhood(board, deficient, width - 1) if deficient else frozenset()
    inner = frozenset(s for s in board.sites if s not in outer)
    if not inner:
        raise ValueError("exterior ring swallows the whole board")
    return FiniteBoard(board.sites, board.adjacency, inner, board.coords)


BOARD_FAMILIES = ("box_Z2", "ball_Td", "path_n", "cycle_n", "star_n", "custom")


def generate_board(family: str, params: Mapping | None = None) -> FiniteBoard:
    p = dict(params or {})
    ring = p.pop("exterior_ring", 0)
    if family == "box_Z2":
        board = box_z2(p["w"], p["h"])
    elif family == "ball_Td":
        board = ball_tree(p["d"], p["r"])
    elif family == "path_n":
        board = path_board(p["n"])
    elif family == "cycle_n":
        board = cycle_board(p["n"])
    elif family == "star_n":
        board = star_board(p["n"])
    elif family == "custom":
        board = _board(p["sites"], p["edges"], interior=p.get("interior"))
    else:
        raise ValueError(f"unknown board family {family!r}")
    return with_exterior_ring(board, ring) if ring else board
