"""Seeded random constraint graphs checked against the implication ladder."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .chordal import chordal_tree_decomposition, has_safe_symbol
from .folds import SearchBudgetExceeded, dismantle, DismantleCertificate, replay
from .formats import format_graph
from .graphs import ConstraintGraph, box_z2, build_constraint_graph, path_board
from .homspace import check_SSF, check_strong_irreducibility


def random_graph(rng: random.Random, max_vertices: int, edge_p: float = 0.5,
                 loop_p: float = 0.4) -> ConstraintGraph:
    n = rng.randint(1, max_vertices)
    verts = [str(i) for i in range(n)]
    edges = [(u, u) for u in verts if rng.random() < loop_p]
    edges += [(u, v) for i, u in enumerate(verts) for v in verts[i + 1:] if rng.random() < edge_p]
    return build_constraint_graph(verts, edges)


@dataclass
class Classification:
    safe_symbol: str | None
    decomposable: bool | None
    dismantlable: bool
    certificate_ok: bool


def classify(H: ConstraintGraph) -> Classification:
    safe = has_safe_symbol(H)
    try:
        dec = chordal_tree_decomposition(H) is not None
    except SearchBudgetExceeded:
        dec = None
    res = dismantle(H)
    cert_ok = not isinstance(res, DismantleCertificate) or replay(H, res)
    return Classification(safe, dec, isinstance(res, DismantleCertificate), cert_ok)


def ladder_violations(H: ConstraintGraph, c: Classification) -> list[str]:
    out = []
    if c.safe_symbol is not None and c.decomposable is False:
        out.append("safe symbol but not decomposable")
    if c.decomposable and not c.dismantlable:
        out.append("decomposable but not dismantlable")
    if not c.certificate_ok:
        out.append("dismantling certificate does not replay")
    return out


@dataclass
class FuzzReport:
    count: int
    max_vertices: int
    seed: int
    tallies: dict
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.violations else 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def hierarchy_fuzz(count: int, max_vertices: int = 7, seed: int = 0, panel: bool = False) -> FuzzReport:
    """Random graphs through the ladder; with ``panel`` also the board-level consequences.

    Panel checks: a safe symbol must give SSF on a 3×3 box; a dismantlable
    graph must be strongly irreducible with gap 2|H|+1 on a path long enough
    for that gap to bite. Non-dismantlable graphs only get a note.
    """
    if count < 1:
        raise ValueError("count must be positive")
    rng = random.Random(seed)
    tallies = {"graphs": 0, "safe_symbol": 0, "decomposable": 0, "dismantlable": 0,
               "decomposition_unknown": 0}
    report = FuzzReport(count, max_vertices, seed, tallies)
    box = box_z2(3, 3)
    for i in range(count):
        H = random_graph(rng, max_vertices)
        c = classify(H)
        tallies["graphs"] += 1
        tallies["safe_symbol"] += c.safe_symbol is not None
        tallies["decomposable"] += bool(c.decomposable)
        tallies["dismantlable"] += c.dismantlable
        tallies["decomposition_unknown"] += c.decomposable is None
        found = ladder_violations(H, c)
        if panel:
            if c.safe_symbol is not None and not check_SSF(box, H).holds:
                found.append("safe symbol but SSF fails on a 3x3 box")
            g = 2 * len(H) + 1
            path = path_board(g + 2)
            si = check_strong_irreducibility(path, H, g, sites=path.sites)
            if c.dismantlable and si.holds is False:
                found.append(f"dismantlable but strong irreducibility fails at gap {g}")
            if not c.dismantlable:
                report.notes.append({"index": i, "graph": format_graph(H),
                                     "si_failure_found": si.holds is False})
        for problem in found:
            report.violations.append({"index": i, "problem": problem, "graph": format_graph(H)})
    return report
