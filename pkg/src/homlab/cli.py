"""``homlab`` command line.

Every command builds a report dict, prints it as JSON, optionally writes it
to ``--json``, and exits 0 (holds), 1 (fails, with certificate), 2 (budget
exhausted) or 3 (bad input).
"""
from __future__ import annotations

import argparse
import math
import random
import sys
import time
from pathlib import Path
from typing import Sequence

from . import chordal, decay, folds, fuzz, gibbs, homspace, reproduce, spectral, umc
from .formats import (FormatError, dumps, file_digest, load_graph, parse_board_spec,
                      parse_interaction_text)
from .graphs import NAMED_FAMILIES, ConstraintGraph, FiniteBoard, generate_named

INPUT_ERROR = 3


class UsageError(ValueError):
    pass


# -- argument parsing helpers ----------------------------------------------------


def parse_graph_arg(spec: str) -> tuple[ConstraintGraph, dict]:
    """A graph file, or a named family such as ``H_phi``, ``K_n:5``, ``H_q:13``."""
    if Path(spec).is_file():
        return load_graph(spec), {"graph_file": spec, "sha256": file_digest(spec)}
    family, _, param = spec.partition(":")
    if family not in NAMED_FAMILIES:
        raise UsageError(f"{spec!r} is neither a graph file nor a named family")
    params = {}
    if param:
        params["q" if family == "H_q" else "n"] = int(param)
    return generate_named(family, params), {"graph_family": family, "params": params}


def parse_board_arg(spec: str) -> tuple[FiniteBoard, dict]:
    board = parse_board_spec(spec)
    info = {"board": spec}
    if Path(spec).is_file():
        info["sha256"] = file_digest(spec)
    return board, info


def parse_config(text: str | None, board: FiniteBoard, H: ConstraintGraph) -> dict:
    """``site=value`` entries separated by ``;``."""
    out = {}
    for item in filter(None, (t.strip() for t in (text or "").split(";"))):
        site, sep, value = item.partition("=")
        if not sep or site not in board or value not in H.vertices:
            raise UsageError(f"bad configuration entry {item!r}")
        out[site] = value
    return out


def parse_sites(text: str, board: FiniteBoard) -> frozenset:
    if text == "interior":
        return board.interior
    if text == "all":
        return frozenset(board.sites)
    sites = frozenset(filter(None, (t.strip() for t in text.split(";"))))
    unknown = [s for s in sites if s not in board]
    if unknown:
        raise UsageError(f"unknown sites {unknown}")
    return sites


def parse_order(text: str | None, H: ConstraintGraph) -> tuple[str, ...]:
    if text in (None, "auto"):
        dec = chordal.chordal_tree_decomposition(H)
        if dec is None:
            raise UsageError("no chordal/tree decomposition; pass --order explicitly")
        return chordal.natural_linear_order(H, dec)
    if Path(text).is_file():
        text = Path(text).read_text()
    order = tuple(t for t in text.replace(",", " ").split() if t)
    if sorted(order) != sorted(H.vertices) or len(set(order)) != len(H):
        raise UsageError("order must list every vertex exactly once")
    return order


def parse_phi(spec: str, H: ConstraintGraph | None, order: Sequence[str] | None = None) -> gibbs.Interaction:
    name, _, arg = spec.partition(":")
    nums = [a for a in arg.split(",") if a]
    try:
        if name == "hardcore":
            return gibbs.hardcore(float(nums[0]))
        if name == "potts-f":
            return gibbs.potts_ferro(int(nums[0]), float(nums[1]))
        if name == "potts-af":
            return gibbs.potts_antiferro(int(nums[0]), float(nums[1]))
        if name == "wr":
            return gibbs.widom_rowlinson(int(nums[0]), float(nums[1]))
    except (IndexError, ValueError) as exc:
        raise UsageError(f"bad interaction {spec!r}: {exc}") from exc
    if H is None:
        raise UsageError(f"interaction {spec!r} needs --graph")
    if name == "uniform":
        return gibbs.uniform(H)
    if name == "lambda":
        return gibbs.phi_lambda(H, nums[0], float(nums[1]))
    if name == "prec-lambda":
        return gibbs.phi_prec_lambda(H, order or parse_order(None, H), float(nums[0]))
    if Path(spec).is_file():
        vertex, edge = parse_interaction_text(Path(spec).read_text(), H)
        return gibbs.Interaction.build(H, vertex, edge)
    raise UsageError(f"unknown interaction {spec!r}")


def full_point(board: FiniteBoard, H: ConstraintGraph, partial: dict, seed: int) -> dict:
    pt = homspace.extend(board, H, partial, rng=random.Random(seed))
    if pt is None:
        raise UsageError("the given boundary data does not extend to a point of the board")
    return pt


# -- commands --------------------------------------------------------------------


def cmd_analyze(a) -> tuple[dict, int]:
    H, info = parse_graph_arg(a.graph)
    safe = chordal.has_safe_symbol(H)
    try:
        dec = chordal.chordal_tree_decomposition(H)
        dec_out = {"decomposition": dec, "natural_order": chordal.natural_linear_order(H, dec)} if dec else None
        decomposable = dec is not None
    except folds.SearchBudgetExceeded:
        dec_out, decomposable = "unknown", None
    res = folds.dismantle(H)
    dismantlable = isinstance(res, folds.DismantleCertificate)
    if safe is not None:
        position = "safe symbol"
    elif decomposable:
        position = "chordal/tree decomposable"
    elif dismantlable:
        position = "dismantlable"
    else:
        position = "not dismantlable"
    result = {
        "safe_symbol": safe, "decomposable": decomposable, "decomposition": dec_out,
        "dismantlable": dismantlable, "fold_result": res,
        "loop_chordal": chordal.is_loop_chordal(H), "position": position,
    }
    if dismantlable and len(H) > 1:
        result["persistent_vertices"] = folds.persistent_vertices(H)
    return {"inputs": info, "result": result}, 0


def cmd_fold(a) -> tuple[dict, int]:
    H, info = parse_graph_arg(a.graph)
    try:
        res = folds.dismantle(H, budget=a.budget)
    except folds.SearchBudgetExceeded:
        return {"inputs": info, "result": {"dismantlable": None}}, 2
    ok = isinstance(res, folds.DismantleCertificate)
    if ok and a.certificate:
        Path(a.certificate).write_text(dumps(res.to_json()["steps"]))
    result = {"dismantlable": ok, "certificate" if ok else "stuck": res,
              "replays": folds.replay(H, res) if ok else None}
    return {"inputs": info, "result": result}, 0 if ok else 1


def cmd_chordal(a) -> tuple[dict, int]:
    H, info = parse_graph_arg(a.graph)
    peo = chordal.perfect_elimination_order(H)
    result = {"chordal": peo.chordal, "elimination_order": peo.order,
              "chordless_cycle": peo.chordless_cycle, "loop_chordal": chordal.is_loop_chordal(H)}
    return {"inputs": info, "result": result}, 0 if peo.chordal else 1


def cmd_decompose(a) -> tuple[dict, int]:
    H, info = parse_graph_arg(a.graph)
    try:
        dec = chordal.chordal_tree_decomposition(H, budget=a.budget)
    except folds.SearchBudgetExceeded:
        return {"inputs": info, "result": {"decomposition": "unknown"}}, 2
    if dec is None:
        return {"inputs": info, "result": {"decomposition": None}}, 1
    result = {"decomposition": dec, "natural_order": chordal.natural_linear_order(H, dec),
              "problems": chordal.validate_decomposition(H, dec)}
    return {"inputs": info, "result": result}, 0


def cmd_check(a) -> tuple[dict, int]:
    H, info = parse_graph_arg(a.graph)
    board, binfo = parse_board_arg(a.board)
    info.update(binfo)
    prop = a.property.lower()
    if prop in ("si", "strong_irreducibility"):
        if a.gap is None:
            raise UsageError("--gap is required")
        v = homspace.check_strong_irreducibility(board, H, a.gap, budget=a.budget)
    elif prop == "tssm":
        if a.gap is None:
            raise UsageError("--gap is required")
        v = homspace.check_TSSM(board, H, a.gap, homspace.TSSMBudget(max_points=a.budget))
    elif prop == "ssf":
        v = homspace.check_SSF(board, H)
    else:
        raise UsageError("property must be SI, TSSM or SSF")
    return {"inputs": info, "parameters": {"gap": a.gap, "budget": a.budget}, "result": v}, v.exit_code


def cmd_umc(a) -> tuple[dict, int]:
    H, info = parse_graph_arg(a.graph)
    board, binfo = parse_board_arg(a.board)
    info.update(binfo)
    order = parse_order(a.order, H)
    g = len(H) - 2 if a.distance is None else a.distance
    m1 = umc.verify_M1(board, H, order, a.max_shape, seed=a.seed)
    result = {"order": order, "M1": m1}
    code = 0 if m1.holds else 1
    if m1.holds:
        m2 = umc.verify_M2(board, H, order, g, a.max_shape, seed=a.seed, m1=m1)
        result["M2"] = m2
        code = 0 if m2.holds else 1
    return {"inputs": info, "parameters": {"distance_bound": g, "max_shape": a.max_shape},
            "result": result}, code


def _gibbs_setup(a):
    H = parse_graph_arg(a.graph)[0] if a.graph else None
    order = parse_order(a.order, H) if (a.order and H is not None) else None
    phi = parse_phi(a.phi, H, order)
    return phi.H, phi, order


def cmd_gibbs(a) -> tuple[dict, int]:
    H, phi, order = _gibbs_setup(a)
    params = {"phi": a.phi, "interaction": phi}
    if a.action == "decay":
        kinds = {"strip": decay.StripGeometry, "box": decay.BoxGeometry,
                 "diagonal": decay.DiagonalChannelGeometry, "wall": decay.WallChannelGeometry}
        geom = kinds[a.geometry](H)
        if hasattr(geom, "seed"):
            geom.seed = a.seed
        ds = [int(x) for x in a.params.split(",")]
        rep = decay.measure_decay(phi, geom, ds)
        return {"parameters": params, "result": rep}, 0
    board, info = parse_board_arg(a.board)
    if a.action == "qpi":
        site = a.site or board.sites[len(board) // 2]
        return {"inputs": info, "parameters": params, "result": gibbs.q_of_pi(board, phi, site)}, 0
    A = parse_sites(a.region, board)
    omega = full_point(board, H, parse_config(a.omega, board, H), a.seed)
    if a.action == "marginal":
        beta = parse_config(a.beta, board, H)
        q = gibbs.SpecificationQuery(board, phi, A, omega)
        lm = gibbs.log_marginal(q, beta)
        result = {"log_partition_function": gibbs.log_partition_function(q),
                  "log_marginal": lm, "marginal": math.exp(lm), "omega": omega, "beta": beta}
        return {"inputs": info, "parameters": params, "result": result}, 0
    B = parse_sites(a.probe, board) if a.probe else A
    lam = a.lam
    if a.variant == "dismantlable":
        ref = a.vstar or next(v for v, ok in folds.persistent_vertices(H).items() if ok)
    else:
        ref = order or parse_order(None, H)
    v = gibbs.check_tail_bound(board, H, ref, lam, A, B, omega, a.variant)
    params.update({"lambda": lam, "variant": a.variant})
    return {"inputs": info, "parameters": params, "result": v}, 0 if v.holds else 1


def cmd_spectral(a) -> tuple[dict, int]:
    if a.family != "H_q":
        raise UsageError("only the H_q family has a wall channel")
    H = generate_named("H_q", {"q": a.q})
    phi = parse_phi(a.phi, H) if a.phi else gibbs.uniform(H)
    chain = spectral.channel_chain(H, ("0", "b"), phi)
    rep = spectral.eigen_decay(chain)
    result = {"chain": chain, "report": rep, "ssm_rate_cap": spectral.ssm_rate_cap(a.q)}
    return {"parameters": {"q": a.q}, "result": result}, 0


def cmd_reproduce(a) -> tuple[dict, int]:
    kwargs = {"q": a.q} if a.example == "prop-9.4" else {}
    rep = reproduce.run(a.example, **kwargs)
    return {"parameters": kwargs, "result": rep}, rep.exit_code


def cmd_fuzz(a) -> tuple[dict, int]:
    rep = fuzz.hierarchy_fuzz(a.count, a.max_vertices, a.seed, panel=a.panel)
    return {"result": rep}, rep.exit_code


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homlab", description="Homomorphism-space mixing toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="also write the report here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common])
    s.add_argument("graph")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("fold", parents=[common])
    s.add_argument("graph")
    s.add_argument("--certificate", metavar="PATH")
    s.add_argument("--budget", type=int, default=10**6)
    s.set_defaults(func=cmd_fold)

    s = sub.add_parser("chordal", parents=[common])
    s.add_argument("graph")
    s.set_defaults(func=cmd_chordal)

    s = sub.add_parser("decompose", parents=[common])
    s.add_argument("graph")
    s.add_argument("--budget", type=int, default=1 << 16)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("check", parents=[common])
    s.add_argument("property", help="SI, TSSM or SSF")
    s.add_argument("graph")
    s.add_argument("--board", required=True)
    s.add_argument("--gap", type=int)
    s.add_argument("--budget", type=int, default=10**6)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("umc", parents=[common])
    s.add_argument("graph")
    s.add_argument("--board", required=True)
    s.add_argument("--order", default="auto")
    s.add_argument("--distance", type=int)
    s.add_argument("--max-shape", type=int, default=2)
    s.set_defaults(func=cmd_umc)

    s = sub.add_parser("gibbs", parents=[common])
    s.add_argument("action", choices=["marginal", "decay", "tailbound", "qpi"])
    s.add_argument("--phi", required=True)
    s.add_argument("--graph")
    s.add_argument("--board")
    s.add_argument("--region", default="interior", help="'interior', 'all' or sites joined by ';'")
    s.add_argument("--omega", help="partial boundary 'site=v;...', extended with the seed")
    s.add_argument("--beta", help="probe configuration 'site=v;...'")
    s.add_argument("--probe", help="B for tail bounds, sites joined by ';'")
    s.add_argument("--order")
    s.add_argument("--lam", type=float, default=10.0)
    s.add_argument("--variant", choices=["dismantlable", "umc"], default="dismantlable")
    s.add_argument("--vstar")
    s.add_argument("--site")
    s.add_argument("--geometry", choices=["strip", "box", "diagonal", "wall"], default="strip")
    s.add_argument("--params", default="1,2,3,4,5,6")
    s.set_defaults(func=cmd_gibbs)

    s = sub.add_parser("spectral", parents=[common])
    s.add_argument("--family", default="H_q")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--phi")
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("reproduce", parents=[common])
    s.add_argument("example", choices=reproduce.CATALOGUE)
    s.add_argument("--q", type=int, default=5)
    s.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("fuzz", parents=[common])
    s.add_argument("--count", type=int, default=200)
    s.add_argument("--max-vertices", type=int, default=7)
    s.add_argument("--panel", action="store_true")
    s.set_defaults(func=cmd_fuzz)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for bad usage, which would read as "budget exhausted"
        return INPUT_ERROR if exc.code == 2 else int(exc.code or 0)
    start = time.perf_counter()
    try:
        body, code = args.func(args)
    except (UsageError, FormatError, ValueError, KeyError, OSError) as exc:
        print(f"homlab {args.command}: {exc}", file=sys.stderr)
        return INPUT_ERROR
    report = {"command": args.command, "seed": args.seed, "exit_code": code, **body}
    if args.timing:
        report["wall_clock_s"] = round(time.perf_counter() - start, 6)
    text = dumps(report)
    if args.json:
        Path(args.json).write_text(text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
