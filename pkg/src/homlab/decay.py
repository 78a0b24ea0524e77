"""Boundary-sensitivity measurements and the channel constructions that defeat mixing.

A geometry turns a distance d into a board, a region A, a probe set B, and
boundary data: a list of shared base configurations plus a list of variants
on the sites that are allowed to differ. The total variation at d is the
largest gap, over bases and probe values, between variants.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .gibbs import EmptySpecification, Interaction, SpecificationQuery, _Prepared
from .graphs import ConstraintGraph, FiniteBoard, box_z2, boundary, distance, lattice_region
from .homspace import HomSolver, is_locally_admissible


@dataclass
class DecayInstance:
    board: FiniteBoard
    A: frozenset
    B: tuple
    bases: list
    variants: list
    distance: float


@dataclass
class DecayReport:
    mode: str
    geometry: dict
    distances: list
    tv_values: list
    fitted_rate: float | None
    fit_residual: float | None
    note: str = ""

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _configs_on(board: FiniteBoard, H: ConstraintGraph, sites: Sequence[str], fixed: Mapping,
                limit: int, rng: random.Random) -> list[dict]:
    """Globally admissible configurations on ``sites`` compatible with ``fixed``."""
    out = []
    solver = HomSolver(board, H)
    for vals in itertools.product(H.vertices, repeat=len(sites)):
        cfg = dict(zip(sites, vals))
        merged = {**fixed, **cfg}
        if is_locally_admissible(board, H, merged) and solver.first(merged) is not None:
            out.append(cfg)
    if len(out) > limit:
        out = rng.sample(out, limit)
    return out


@dataclass
class StripGeometry:
    """Z² strip of fixed height; A is the first d columns after a fixed left column.

    SSM layout: only the column at distance d from the probe varies.
    """

    H: ConstraintGraph
    height: int = 3
    bases: int = 3
    variant_limit: int = 64
    seed: int = 0
    mode: str = "SSM"

    def describe(self) -> dict:
        return {"kind": "strip", "height": self.height, "bases": self.bases, "seed": self.seed}

    def build(self, d: int) -> DecayInstance:
        board = box_z2(d + 2, self.height)
        mid = self.height // 2
        A = frozenset(board.at(x, y) for x in range(1, d + 1) for y in range(self.height))
        left = [board.at(0, y) for y in range(self.height)]
        right = [board.at(d + 1, y) for y in range(self.height)]
        rng = random.Random(self.seed)
        solver = HomSolver(board, self.H)
        bases = []
        for _ in range(self.bases):
            pt = solver.first({}, rng)
            base = {s: pt[s] for s in left}
            if base not in bases:
                bases.append(base)
        variants = _configs_on(board, self.H, right, {}, self.variant_limit, rng)
        B = (board.at(1, mid),)
        return DecayInstance(board, A, B, bases, variants, distance(board, B, right))


@dataclass
class BoxGeometry:
    """Square box with the probe in the middle; whole outer rings vary (WSM layout)."""

    H: ConstraintGraph
    samples: int = 8
    seed: int = 0
    mode: str = "WSM"

    def describe(self) -> dict:
        return {"kind": "box", "samples": self.samples, "seed": self.seed}

    def build(self, d: int) -> DecayInstance:
        n = 2 * d + 1
        board = box_z2(n, n)
        A = frozenset(board.at(x, y) for x in range(1, n - 1) for y in range(1, n - 1))
        ring = board.sort(boundary(board, A))
        rng = random.Random(self.seed)
        solver = HomSolver(board, self.H)
        variants = []
        for v in self.H.vertices:
            pt = solver.first({s: v for s in ring})
            if pt is not None:
                variants.append({s: pt[s] for s in ring})
        for _ in range(self.samples):
            pt = solver.first({}, rng)
            cfg = {s: pt[s] for s in ring}
            if cfg not in variants:
                variants.append(cfg)
        B = (board.at(d, d),)
        return DecayInstance(board, A, B, [{}], variants, distance(board, B, ring))


# -- the diagonal channel for the four-vertex dismantlable graph ---------------


def diagonal_channel(n: int) -> dict:
    """Band between two alternating a/d diagonals with a zigzag channel of 2n−1 sites.

    The channel sites p_i = (i+1, i) and q_i = (i+2, i) only admit b or c, and
    b, c are not adjacent, so the value at the right end x_r propagates to x_l.
    """
    if n < 1:
        raise ValueError("n must be positive")
    cells = [(x, y) for y in range(n + 1) for x in range(y - 1, y + 5) if x >= 0]
    board = lattice_region(cells)
    at = lambda x, y: board.at(x, y)
    wall = {at(i, i): "a" if i % 2 == 0 else "d" for i in range(n + 1)}
    wall.update({at(j + 3, j): "d" if j % 2 == 0 else "a" for j in range(n)})
    A = frozenset([at(i + 1, i) for i in range(n)] + [at(i + 2, i) for i in range(n - 1)])
    return {"board": board, "sigma": wall, "A": A, "x_l": at(1, 0), "x_r": at(n + 1, n - 1)}


@dataclass
class DiagonalChannelGeometry:
    H: ConstraintGraph
    mode: str = "SSM"

    def describe(self) -> dict:
        return {"kind": "diagonal-channel"}

    def build(self, n: int) -> DecayInstance:
        c = diagonal_channel(n)
        variants = [{c["x_r"]: v} for v in ("b", "c")]
        return DecayInstance(c["board"], c["A"], (c["x_l"],), [c["sigma"]], variants,
                             distance(c["board"], [c["x_l"]], [c["x_r"]]))


# -- the barbell channel in a looped tree -------------------------------------


def barbell_channel(d: int, low: str = "0", high: str = "2") -> dict:
    """Four-row strip with rows 0 and 3 frozen to the two looped ends of a barbell.

    Rows 1 and 2 can only carry alternating columns (low, mid) / (mid, high),
    so α = low at (0, 1) and β = high at (d, 2) are jointly impossible when d
    is even, while each alone is fine.
    """
    board = box_z2(d + 1, 4)
    sigma = {board.at(x, 0): low for x in range(d + 1)}
    sigma.update({board.at(x, 3): high for x in range(d + 1)})
    return {"board": board, "sigma": sigma, "alpha": {board.at(0, 1): low},
            "beta": {board.at(d, 2): high}}


# -- the K_q channel of H^q ----------------------------------------------------


def wall_channel(n: int, start: str = "1") -> dict:
    """Three-row strip: walls ``0 b 0 b ...`` above and ``b 0 b 0 ...`` below a channel.

    Every channel site sees one 0 and one b, leaving only the K_q vertices.
    """
    board = box_z2(n + 2, 3)
    sigma = {}
    for x in range(n + 2):
        sigma[board.at(x, 0)] = "0" if x % 2 == 0 else "b"
        sigma[board.at(x, 2)] = "b" if x % 2 == 0 else "0"
    sigma[board.at(0, 1)] = start
    A = frozenset(board.at(x, 1) for x in range(1, n + 1))
    return {"board": board, "sigma": sigma, "A": A, "probe": board.at(1, 1),
            "far": board.at(n + 1, 1)}


@dataclass
class WallChannelGeometry:
    H: ConstraintGraph
    start: str = "1"
    mode: str = "SSM"

    def describe(self) -> dict:
        return {"kind": "wall-channel", "start": self.start}

    def build(self, n: int) -> DecayInstance:
        c = wall_channel(n, self.start)
        states = [v for v in self.H.vertices
                  if all(self.H.adjacent(v, w) for w in ("0", "b"))]
        variants = [{c["far"]: v} for v in states]
        return DecayInstance(c["board"], c["A"], (c["probe"],), [c["sigma"]], variants,
                             distance(c["board"], [c["probe"]], [c["far"]]))


# -- measurement ---------------------------------------------------------------


def instance_tv(phi: Interaction, inst: DecayInstance) -> float:
    """max over bases and probe values of the spread of π^ω_A(β) across variants."""
    H = phi.H
    worst = 0.0
    for base in inst.bases:
        tables = []
        for var in inst.variants:
            omega = {**base, **var}
            try:
                prep = _Prepared(SpecificationQuery(inst.board, phi, inst.A, omega))
            except EmptySpecification:
                continue
            lz = prep.log_z()
            if lz == -math.inf:
                continue
            tables.append([math.exp(prep.log_z(dict(zip(inst.B, vals))) - lz)
                           for vals in itertools.product(H.vertices, repeat=len(inst.B))])
        if len(tables) > 1:
            arr = np.array(tables)
            worst = max(worst, float((arr.max(axis=0) - arr.min(axis=0)).max()))
    return min(max(worst, 0.0), 1.0)


def fit_rate(distances: Sequence[float], tv: Sequence[float],
             floor: float = 1e-13) -> tuple[float | None, float | None]:
    """Least squares of log TV on distance; returns (−slope, RMS residual)."""
    pts = [(d, math.log(t)) for d, t in zip(distances, tv) if t > floor]
    if len(pts) < 3:
        return None, None
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    M = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    resid = float(np.sqrt(np.mean((M @ coef - y) ** 2)))
    return float(-coef[0]) + 0.0, resid


def measure_decay(phi: Interaction, geometry, params: Sequence[int]) -> DecayReport:
    """TV at each geometry parameter; distances are the measured probe distances."""
    dists, tvs = [], []
    for p in params:
        inst = geometry.build(p)
        dists.append(inst.distance)
        tvs.append(instance_tv(phi, inst))
    if any(b <= a for a, b in zip(dists, dists[1:])):
        raise ValueError("geometry parameters must give strictly increasing distances")
    rate, resid = fit_rate(dists, tvs)
    note = "" if rate is not None else "fewer than 3 nonzero values; no rate fitted"
    return DecayReport(geometry.mode, geometry.describe(), dists, tvs, rate, resid, note)
