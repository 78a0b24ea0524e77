"""Exact nearest-neighbour Gibbs specifications on finite regions.

Weights are exp(-E) with the energy summed over vertex terms, interior edges
once each, and edges to the boundary. Partition functions are computed by a
dynamic programme that sweeps the region site by site and keeps a table over
the values of the still-open frontier, all in log space.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graphs import ConstraintGraph, FiniteBoard, boundary, generate_named
from .homspace import HomSolver, is_locally_admissible

NEG_INF = -math.inf


def logsumexp(values: Iterable[float]) -> float:
    vals = [v for v in values if v != NEG_INF]
    if not vals:
        return NEG_INF
    m = max(vals)
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))


class EmptySpecification(ValueError):
    """No configuration of the region is compatible with the boundary."""


@dataclass(frozen=True)
class Interaction:
    """Energy table Φ on V ∪ E with non-positive finite values."""

    H: ConstraintGraph
    vertex_energy: Mapping[str, float]
    edge_energy: Mapping[frozenset, float]

    def __post_init__(self) -> None:
        if set(self.vertex_energy) != set(self.H.vertices):
            raise ValueError("every vertex needs an energy")
        if set(self.edge_energy) != set(self.H.edges):
            raise ValueError("every edge needs an energy")
        for value in itertools.chain(self.vertex_energy.values(), self.edge_energy.values()):
            if not math.isfinite(value) or value > 0:
                raise ValueError(f"energies must be finite and <= 0, got {value}")

    @classmethod
    def build(cls, H: ConstraintGraph, vertex: Mapping[str, float] | None = None,
              edge: Mapping | None = None, shift: bool = False) -> "Interaction":
        """Fill missing entries with 0; ``shift`` subtracts the maxima.

        Shifting every vertex energy (or every edge energy) by one constant
        leaves every conditional distribution unchanged, because each site
        and each edge near the region contributes exactly one term.
        """
        v = {x: 0.0 for x in H.vertices}
        for key, val in (vertex or {}).items():
            if key not in v:
                raise ValueError(f"unknown vertex {key!r}")
            v[key] = float(val)
        e = {x: 0.0 for x in H.edges}
        for key, val in (edge or {}).items():
            key = key if isinstance(key, frozenset) else frozenset(key)
            if key not in e:
                raise ValueError(f"{sorted(key)} is not an edge")
            e[key] = float(val)
        if shift:
            mv, me = max(v.values()), max(e.values(), default=0.0)
            v = {k: x - mv for k, x in v.items()}
            e = {k: x - me for k, x in e.items()}
        return cls(H, v, e)

    def vertex(self, u: str) -> float:
        return self.vertex_energy[u]

    def edge(self, u: str, w: str) -> float:
        return self.edge_energy[frozenset((u, w))]

    def to_json(self) -> dict:
        return {"vertex": dict(self.vertex_energy),
                "edge": {"-".join(self.H.edge_list()[i]): self.edge(*self.H.edge_list()[i])
                         for i in range(len(self.H.edges))}}


def uniform(H: ConstraintGraph) -> Interaction:
    return Interaction.build(H)


def hardcore(beta: float) -> Interaction:
    """βΦ^HC on H_φ: the occupied symbol 1 has activity e^β."""
    return Interaction.build(generate_named("H_phi"), {"1": -beta}, shift=True)


def potts_ferro(q: int, beta: float) -> Interaction:
    H = generate_named("K_n_looped", {"n": q})
    return Interaction.build(H, edge={e: -beta for e in H.edges if len(e) == 1}, shift=True)


def potts_antiferro(q: int, beta: float) -> Interaction:
    H = generate_named("K_n_looped", {"n": q})
    return Interaction.build(H, edge={e: -beta for e in H.edges if len(e) == 2}, shift=True)


def widom_rowlinson(q: int, beta: float) -> Interaction:
    H = generate_named("S_n_all_looped", {"n": q})
    return Interaction.build(H, {v: -beta for v in H.vertices if v != "0"}, shift=True)


def phi_lambda(H: ConstraintGraph, v_star: str, lam: float) -> Interaction:
    """Φ_λ: −log λ on v*, zero elsewhere."""
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    return Interaction.build(H, {v_star: -math.log(lam)})


def phi_prec_lambda(H: ConstraintGraph, order: Sequence[str], lam: float) -> Interaction:
    """Φ^≺_λ: the k-th vertex from the bottom of ≺ gets −k log λ."""
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    if sorted(order) != sorted(H.vertices) or len(set(order)) != len(H):
        raise ValueError("order must be a total order on the vertices")
    return Interaction.build(H, {v: -k * math.log(lam) for k, v in enumerate(order, 1)})


def lambda0_wsm(h_size: int, delta: int) -> float:
    """log of (Δ−1)² |H|^(2 Δ^(|H|−1))."""
    if h_size < 1 or delta < 2:
        raise ValueError("need |H| >= 1 and Δ >= 2")
    return 2 * math.log(delta - 1) + 2 * delta ** (h_size - 1) * math.log(h_size)


def lambda0_ssm(h_size: int, delta: int, g: int) -> float:
    """log of (Δ−1)² |H|^(2 Δ^(g+1))."""
    if h_size < 1 or delta < 2 or g < 0:
        raise ValueError("need |H| >= 1, Δ >= 2, g >= 0")
    return 2 * math.log(delta - 1) + 2 * delta ** (g + 1) * math.log(h_size)


@dataclass(frozen=True)
class SpecificationQuery:
    """π^ω_A on ``board``: ``omega`` must at least cover ∂A; extra sites are ignored."""

    board: FiniteBoard
    phi: Interaction
    A: frozenset
    omega: Mapping[str, str] = field(default_factory=dict)

    @property
    def H(self) -> ConstraintGraph:
        return self.phi.H


class _Prepared:
    def __init__(self, q: SpecificationQuery, site_order: Sequence[str] | None = None):
        board, H = q.board, q.H
        self.q = q
        self.A = board.sort(q.A)
        if not self.A:
            raise ValueError("A must be nonempty")
        self.bd = board.sort(boundary(board, self.A))
        missing = [s for s in self.bd if s not in q.omega]
        if missing:
            raise ValueError(f"omega does not cover the boundary sites {missing}")
        self.omega = {s: q.omega[s] for s in self.bd}
        if not is_locally_admissible(board, H, self.omega):
            raise EmptySpecification("boundary configuration is not locally admissible")
        nv = len(H)
        self.nv = nv
        V = H.vertices
        self.ev = [q.phi.vertex(v) for v in V]
        self.ee = [[q.phi.edge(V[i], V[j]) if H.adjacent(V[i], V[j]) else math.inf
                    for j in range(nv)] for i in range(nv)]
        inA = set(self.A)
        self.nbrs_in = {s: [t for t in board.neighbors(s) if t in inA] for s in self.A}
        base = {}
        for s in self.A:
            row = []
            for i in range(nv):
                e = self.ev[i]
                for t in board.neighbors(s):
                    if t in self.omega:
                        e += self.ee[i][H.index(self.omega[t])]
                row.append(-e if math.isfinite(e) else NEG_INF)
            base[s] = row
        self.base = base
        self.order = list(site_order) if site_order else self._good_order()

    def _frontier_width(self, order) -> int:
        done, width = set(), 0
        for s in order:
            done.add(s)
            open_ = sum(1 for t in done if any(n not in done for n in self.nbrs_in[t]))
            width = max(width, open_)
        return width

    def _good_order(self) -> list[str]:
        candidates = [list(self.A)]
        for start in (self.A[0], self.A[-1]):
            seen, queue = [start], [start]
            while queue:
                s = queue.pop(0)
                for t in self.nbrs_in[s]:
                    if t not in seen:
                        seen.append(t)
                        queue.append(t)
            seen += [s for s in self.A if s not in seen]
            candidates.append(seen)
        coords = self.q.board.coords
        if coords is not None and all(len(coords[s]) == 2 for s in self.A):
            candidates.append(sorted(self.A, key=lambda s: (coords[s][1], coords[s][0])))
        return min(candidates, key=self._frontier_width)

    def sweep(self, pins: Mapping[str, str] | None = None,
              marks: Mapping[str, Iterable[str]] | None = None) -> dict[int, float]:
        """log of the summed weight, split by how many sites take a marked value."""
        H = self.q.H
        allowed = {s: {H.index(v)} for s, v in (pins or {}).items()}
        marked = {s: {H.index(v) for v in vs} for s, vs in (marks or {}).items()}
        states: dict[tuple, float] = {((), 0): 0.0}
        frontier: list[str] = []
        done: set[str] = set()
        for s in self.order:
            back = [frontier.index(t) for t in self.nbrs_in[s] if t in done]
            done.add(s)
            grown = frontier + [s]
            keep = [i for i, t in enumerate(grown) if any(n not in done for n in self.nbrs_in[t])]
            row = self.base[s]
            vals = [v for v in range(self.nv) if row[v] != NEG_INF and (s not in allowed or v in allowed[s])]
            hot = marked.get(s, ())
            acc: dict[tuple, list] = {}
            for (key, count), lw in states.items():
                for v in vals:
                    tot = lw + row[v]
                    for i in back:
                        e = self.ee[v][key[i]]
                        if e == math.inf:
                            break
                        tot -= e
                    else:
                        full = key + (v,)
                        nk = (tuple(full[i] for i in keep), count + (v in hot))
                        acc.setdefault(nk, []).append(tot)
            states = {k: logsumexp(v) for k, v in acc.items()}
            frontier = [grown[i] for i in keep]
            if not states:
                return {}
        by_count: dict[int, list] = {}
        for (_, count), lw in states.items():
            by_count.setdefault(count, []).append(lw)
        return {c: logsumexp(v) for c, v in sorted(by_count.items())}

    def log_z(self, pins: Mapping[str, str] | None = None) -> float:
        return logsumexp(self.sweep(pins).values())


def log_partition_function(query: SpecificationQuery, pins: Mapping[str, str] | None = None) -> float:
    return _Prepared(query).log_z(pins)


def partition_function(query: SpecificationQuery) -> float:
    lz = log_partition_function(query)
    if lz == NEG_INF:
        raise EmptySpecification("no admissible filling of A")
    return math.exp(lz)


def energy(query: SpecificationQuery, alpha: Mapping[str, str]) -> float:
    """E(α) summed exactly as defined, interior pairs halved per endpoint."""
    board, phi, H = query.board, query.phi, query.H
    A = set(query.A)
    if set(alpha) != A:
        raise ValueError("alpha must be a configuration on A")
    bd = boundary(board, A)
    total = 0.0
    for x in board.sort(A):
        a = alpha[x]
        total += phi.vertex(a)
        for y in board.neighbors(x):
            b = alpha[y] if y in A else query.omega.get(y) if y in bd else None
            if b is None:
                continue
            if not H.adjacent(a, b):
                raise ValueError(f"alpha is inadmissible at {x}-{y}")
            total += 0.5 * phi.edge(a, b) if y in A else phi.edge(a, b)
    return total


def log_marginal(query: SpecificationQuery, beta: Mapping[str, str], prepared: _Prepared | None = None) -> float:
    prep = prepared or _Prepared(query)
    lz = prep.log_z()
    if lz == NEG_INF:
        raise EmptySpecification("no admissible filling of A")
    if not set(beta) <= set(query.A):
        raise ValueError("beta must live inside A")
    return prep.log_z(beta) - lz


def conditional_marginal(query: SpecificationQuery, beta: Mapping[str, str]) -> float:
    """π^ω_A(β), the probability that the region shows β on its shape."""
    return math.exp(log_marginal(query, beta))


def marginal_table(query: SpecificationQuery, B: Sequence[str]) -> dict[tuple, float]:
    """π^ω_A over every configuration of B (zeros included), keyed by value tuples."""
    prep = _Prepared(query)
    lz = prep.log_z()
    if lz == NEG_INF:
        raise EmptySpecification("no admissible filling of A")
    B = query.board.sort(B)
    out = {}
    for vals in itertools.product(query.H.vertices, repeat=len(B)):
        out[vals] = math.exp(prep.log_z(dict(zip(B, vals))) - lz)
    return out


def enumerate_weights(query: SpecificationQuery) -> list[tuple[dict, float]]:
    """Every admissible α on A with its log-weight, by explicit enumeration.

    Independent of the dynamic programme: the homomorphism solver lists the
    fillings and ``energy`` scores each one.
    """
    board, H = query.board, query.H
    bd = boundary(board, query.A)
    omega = {s: query.omega[s] for s in bd}
    restrict = {}
    for s in query.A:
        mask = (1 << len(H)) - 1
        for t in board.neighbors(s):
            if t in omega:
                m = 0
                for w in H.neighbors(omega[t]):
                    m |= 1 << H.index(w)
                mask &= m
        restrict[s] = mask
    solver = HomSolver(board, H, query.A)
    out = []
    for sol in solver.solutions({}, restrict=restrict):
        alpha = solver.decode(sol)
        out.append((alpha, -energy(query, alpha)))
    return out


def random_point(board: FiniteBoard, H: ConstraintGraph, rng: random.Random,
                 config: Mapping[str, str] | None = None) -> dict | None:
    return HomSolver(board, H).first(config or {}, rng)


P_C_LOWER = 0.556  # known lower bound on the site-percolation threshold of Z²


@dataclass
class TailBoundVerdict:
    variant: str
    holds: bool
    log_lhs: list[float]
    log_rhs: list[float]
    reference: dict

    def to_json(self) -> dict:
        return {"variant": self.variant, "holds": self.holds, "log_lhs": self.log_lhs,
                "log_rhs": self.log_rhs, "reference": self.reference,
                "lhs": [math.exp(x) for x in self.log_lhs]}


def check_tail_bound(board: FiniteBoard, H: ConstraintGraph, v_star_or_order, lam: float,
                     A: Iterable[str], B: Iterable[str], omega: Mapping[str, str],
                     variant: str = "dismantlable", g: int | None = None,
                     tol: float = 1e-12) -> TailBoundVerdict:
    """Exact tail probabilities of "many sites of B off the reference" against the closed-form bounds.

    ``dismantlable``: reference value v* everywhere on B, interaction Φ_λ,
    exponent Δ^(|H|−1); requires N_{|H|−2}(B) ⊆ A.
    ``umc``: reference ω_δ for δ = ω|∂A, event α(y) ≺ ω_δ(y), interaction
    Φ^≺_λ, exponent Δ^(g+1) with g defaulting to |H|−2.
    """
    from .graphs import neighborhood
    from .umc import greedy_maximal

    A, B = frozenset(A), board.sort(B)
    if not set(B) <= A:
        raise ValueError("B must be a subset of A")
    delta = board.max_degree
    if variant == "dismantlable":
        v_star = v_star_or_order
        if v_star not in H.vertices:
            raise ValueError(f"unknown vertex {v_star!r}")
        if not neighborhood(board, B, len(H) - 2) <= A:
            raise ValueError("this bound needs N_{|H|-2}(B) inside A")
        phi = phi_lambda(H, v_star, lam)
        marks = {y: [v for v in H.vertices if v != v_star] for y in B}
        exponent = delta ** (len(H) - 1)
        reference = {y: v_star for y in B}
    elif variant == "umc":
        order = tuple(v_star_or_order)
        g = len(H) - 2 if g is None else g
        phi = phi_prec_lambda(H, order, lam)
        delta_cfg = {s: omega[s] for s in boundary(board, A)}
        top = greedy_maximal(board, H, order, delta_cfg)
        rank = {v: i for i, v in enumerate(order)}
        marks = {y: [v for v in H.vertices if rank[v] < rank[top[y]]] for y in B}
        exponent = delta ** (g + 1)
        reference = {y: top[y] for y in B}
    else:
        raise ValueError("variant must be 'dismantlable' or 'umc'")
    prep = _Prepared(SpecificationQuery(board, phi, A, omega))
    counts = prep.sweep(marks=marks)
    lz = logsumexp(counts.values())
    if lz == NEG_INF:
        raise EmptySpecification("no admissible filling of A")
    lhs, rhs = [], []
    for k in range(len(B) + 1):
        lhs.append(min(0.0, logsumexp(w for c, w in counts.items() if c >= k) - lz))
        rhs.append(len(B) * exponent * math.log(len(H)) - k * math.log(lam))
    holds = all(l <= r + tol for l, r in zip(lhs, rhs))
    return TailBoundVerdict(variant, holds, lhs, rhs, reference)


@dataclass
class QReport:
    value: float
    p_c_lower: float
    below_p_c: bool
    boundaries: int
    distinct_distributions: int
    witness: tuple | None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def q_of_pi(board: FiniteBoard, phi: Interaction, site: str, chunk: int = 64) -> QReport:
    """Largest single-site total variation over pairs of realisable boundary values.

    A neighbour tuple counts when some point of the board shows it, which is
    decided by the extender (or directly when the board has the
    single-site-fillability property, since then local admissibility suffices).
    """
    import numpy as np
    from .homspace import check_SSF, is_globally_admissible

    H = phi.H
    if board.degree(site) != board.max_degree:
        raise ValueError("the site must have full degree")
    nbrs = board.neighbors(site)
    nv = len(H)
    V = H.vertices
    adj = np.array([[H.adjacent(u, w) for w in V] for u in V])
    ee = np.array([[phi.edge(u, w) if H.adjacent(u, w) else 0.0 for w in V] for u in V])
    ev = np.array([phi.vertex(u) for u in V])
    tuples = np.array(list(itertools.product(range(nv), repeat=len(nbrs))), dtype=np.int64)
    ok = np.ones((len(tuples), nv), dtype=bool)
    energy_ = np.tile(ev, (len(tuples), 1))
    for k in range(len(nbrs)):
        ok &= adj[tuples[:, k]]
        energy_ = energy_ + ee[tuples[:, k]]
    alive = ok.any(axis=1)
    # pairs of boundary sites that are themselves adjacent must agree with H
    for i, j in itertools.combinations(range(len(nbrs)), 2):
        if board.adjacent(nbrs[i], nbrs[j]):
            alive &= adj[tuples[:, i], tuples[:, j]]
    ssf = check_SSF(board, H).holds
    idx = np.nonzero(alive)[0]
    if not ssf:
        idx = np.array([i for i in idx if is_globally_admissible(
            board, H, {s: V[t] for s, t in zip(nbrs, tuples[i])})], dtype=np.int64)
    if not len(idx):
        raise EmptySpecification("no admissible boundary around the site")
    logw = np.where(ok[idx], -energy_[idx], -np.inf)
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    dist = w / w.sum(axis=1, keepdims=True)
    uniq, first = np.unique(np.round(dist, 13), axis=0, return_index=True)
    dist = dist[first]
    best, pair = 0.0, (0, 0)
    for start in range(0, len(dist), chunk):
        block = dist[start:start + chunk]
        tv = 0.5 * np.abs(block[:, None, :] - dist[None, :, :]).sum(axis=2)
        i, j = np.unravel_index(np.argmax(tv), tv.shape)
        if tv[i, j] > best:
            best, pair = float(tv[i, j]), (start + i, j)
    rows = idx[first]
    witness = tuple({s: V[t] for s, t in zip(nbrs, tuples[rows[p]])} for p in pair) if best > 0 else None
    return QReport(best, P_C_LOWER, best < P_C_LOWER, int(len(idx)), int(len(dist)), witness)
