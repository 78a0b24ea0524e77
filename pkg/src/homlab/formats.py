"""Text formats for graphs, boards and interactions, plus JSON helpers."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from pathlib import Path
from typing import Any

from .graphs import ConstraintGraph, FiniteBoard, build_constraint_graph, generate_board


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _split_edge(token: str, line: int) -> tuple[str, str]:
    parts = token.split("-")
    if len(parts) != 2 or not all(parts):
        raise FormatError(f"malformed edge {token!r} (expected u-v)", line)
    return parts[0], parts[1]


def _parse_sections(text: str, allowed: set[str]) -> tuple[dict[str, list[str]], dict[str, int]]:
    found: dict[str, list[str]] = {}
    where: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep or key not in allowed:
            raise FormatError(f"expected one of {sorted(allowed)} followed by ':'", lineno)
        if key in found:
            raise FormatError(f"duplicate {key!r} line", lineno)
        found[key] = rest.split()
        where[key] = lineno
    if "vertices" not in found:
        raise FormatError("missing 'vertices:' line")
    return found, where


def parse_graph(text: str) -> ConstraintGraph:
    sec, where = _parse_sections(text, {"vertices", "edges"})
    edges = [_split_edge(t, where.get("edges")) for t in sec.get("edges", [])]
    try:
        return build_constraint_graph(sec["vertices"], edges)
    except ValueError as exc:
        raise FormatError(str(exc), where.get("edges", where["vertices"])) from exc


def parse_board(text: str) -> FiniteBoard:
    sec, where = _parse_sections(text, {"vertices", "edges", "interior"})
    sites = sec["vertices"]
    edges = [_split_edge(t, where.get("edges")) for t in sec.get("edges", [])]
    for u, v in edges:
        if u == v:
            raise FormatError(f"loop {u}-{v} on a board", where["edges"])
    try:
        return generate_board(
            "custom", {"sites": sites, "edges": edges, "interior": sec.get("interior")}
        )
    except ValueError as exc:
        raise FormatError(str(exc), where.get("edges", where["vertices"])) from exc


def format_graph(H: ConstraintGraph) -> str:
    edges = " ".join(f"{u}-{v}" for u, v in H.edge_list())
    return f"vertices: {' '.join(H.vertices)}\nedges: {edges}\n"


def format_board(board: FiniteBoard) -> str:
    edges = " ".join(f"{u}-{v}" for u, v in board.edge_list())
    text = f"vertices: {' '.join(board.sites)}\nedges: {edges}\n"
    if set(board.interior) != set(board.sites):
        text += f"interior: {' '.join(board.sort(board.interior))}\n"
    return text


def load_graph(path: str | Path) -> ConstraintGraph:
    return parse_graph(Path(path).read_text())


def load_board(path: str | Path) -> FiniteBoard:
    return parse_board(Path(path).read_text())


def parse_board_spec(spec: str) -> FiniteBoard:
    """``family:params`` such as ``box_Z2:4x3``, ``ball_Td:3,2``, ``path_n:6``.

    Anything that is not a known family prefix is read as a board file.
    """
    family, sep, params = spec.partition(":")
    if not sep:
        return load_board(spec)
    ring = 0
    if "+ring" in params:
        params, _, r = params.partition("+ring")
        ring = int(r or 1)
    if family == "box_Z2":
        w, _, h = params.partition("x")
        p = {"w": int(w), "h": int(h or w)}
    elif family == "ball_Td":
        d, _, r = params.partition(",")
        p = {"d": int(d), "r": int(r)}
    elif family in ("path_n", "cycle_n", "star_n"):
        p = {"n": int(params)}
    else:
        return load_board(spec)
    p["exterior_ring"] = ring
    return generate_board(family, p)


def parse_interaction_text(text: str, H: ConstraintGraph) -> tuple[dict, dict]:
    vertex: dict[str, float] = {}
    edge: dict[frozenset, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("vertex", "edge"):
            raise FormatError("expected 'vertex <v> <energy>' or 'edge <u>-<v> <energy>'", lineno)
        try:
            value = float(parts[2])
        except ValueError as exc:
            raise FormatError(f"bad energy {parts[2]!r}", lineno) from exc
        if parts[0] == "vertex":
            if parts[1] not in H.vertices:
                raise FormatError(f"unknown vertex {parts[1]!r}", lineno)
            vertex[parts[1]] = value
        else:
            u, v = _split_edge(parts[1], lineno)
            if u not in H.vertices or v not in H.vertices or not H.adjacent(u, v):
                raise FormatError(f"{u}-{v} is not an edge of the constraint graph", lineno)
            edge[frozenset((u, v))] = value
    return vertex, edge


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _key(k: Any) -> str:
    if isinstance(k, frozenset):
        ends = sorted(k)
        return "-".join(ends * 2 if len(ends) == 1 else ends)
    return str(k)


def jsonable(obj: Any) -> Any:
    """Convert results into plain JSON data with a deterministic layout."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_json"):
            return jsonable(obj.to_json())
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if hasattr(obj, "item") and callable(obj.item):
        return jsonable(obj.item())
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
