"""One-dimensional chains embedded between walls, and their eigenvalue decay caps."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gibbs import Interaction, uniform
from .graphs import ConstraintGraph

TOL = 1e-9


@dataclass
class ChannelChain:
    states: tuple[str, ...]
    transition: np.ndarray
    wall_interaction: dict
    symmetric_kernel: np.ndarray  # D^½ W D^½, similar to ρ·P

    def to_json(self) -> dict:
        return {"states": list(self.states), "transition": self.transition.tolist(),
                "wall_interaction": self.wall_interaction}


@dataclass
class SpectralReport:
    eigenvalues: list[float]
    lambda_star: float
    rate_cap: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def channel_chain(H: ConstraintGraph, wall_values: Sequence[str], phi: Interaction | None = None) -> ChannelChain:
    """Chain on the vertices adjacent to every wall value.

    Vertex weights absorb the wall edges: Φ̃(u) = Φ(u) + Σ_w Φ(u, w). The
    Markov measure of the resulting nearest-neighbour chain has
    P(u, v) = T(u, v) ψ(v) / (ρ ψ(u)) with T the symmetrised transfer matrix
    and (ρ, ψ) its Perron pair.
    """
    phi = phi or uniform(H)
    if phi.H != H:
        raise ValueError("interaction lives on a different graph")
    for w in wall_values:
        if w not in H.vertices:
            raise ValueError(f"unknown wall value {w!r}")
    states = tuple(v for v in H.vertices if all(H.adjacent(v, w) for w in wall_values))
    if not states:
        raise ValueError("no vertex is admissible between the walls")
    tilde = {u: phi.vertex(u) + sum(phi.edge(u, w) for w in wall_values) for u in states}
    n = len(states)
    W = np.zeros((n, n))
    for i, u in enumerate(states):
        for j, v in enumerate(states):
            if H.adjacent(u, v):
                W[i, j] = math.exp(-phi.edge(u, v))
    d = np.sqrt(np.exp([-tilde[u] for u in states]))
    T = d[:, None] * W * d[None, :]
    vals, vecs = np.linalg.eigh(T)
    rho = vals[-1]
    if rho <= TOL:
        raise ValueError("the channel admits no bi-infinite configuration")
    psi = np.abs(vecs[:, -1])
    if np.any(psi <= 0):
        raise ValueError("transfer matrix is reducible; the chain is not well defined")
    P = T * psi[None, :] / (rho * psi[:, None])
    return ChannelChain(states, P, tilde, T / rho)


def eigen_decay(chain: ChannelChain) -> SpectralReport:
    """Spectrum of P via the similar symmetric matrix; λ_* and −log λ_*."""
    S = chain.symmetric_kernel
    if not np.allclose(S, S.T, atol=TOL):
        raise ValueError("transition is not reversible after normalisation")
    P = chain.transition
    if np.any(P < -TOL) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12):
        raise ValueError("transition matrix is not stochastic")
    ev = sorted(np.linalg.eigvalsh(S).tolist(), reverse=True)
    if len(ev) == 1:
        return SpectralReport(ev, 0.0, math.inf)
    lam = max(abs(ev[1]), abs(ev[-1]))
    return SpectralReport(ev, lam, -math.log(lam) + 0.0 if lam > 0 else math.inf)


def ssm_rate_cap(q: int) -> float:
    if q < 2:
        raise ValueError("q must be at least 2")
    return math.log(q - 1)
