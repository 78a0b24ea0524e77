import json
import math

import pytest

from homlab.formats import (FormatError, dumps, format_board, format_graph, jsonable, parse_board,
                            parse_board_spec, parse_graph, parse_interaction_text)
from homlab.graphs import box_z2, generate_named


def test_graph_round_trip():
    H = generate_named("counterexample_abcd")
    assert parse_graph(format_graph(H)) == H


def test_graph_text_with_comments():
    H = parse_graph("# hard core\nvertices: 0 1\nedges: 0-0 0-1  # loop at 0\n")
    assert H == generate_named("H_phi")


def test_board_round_trip_keeps_interior():
    b = parse_board_spec("box_Z2:4x4+ring1")
    b2 = parse_board(format_board(b))
    assert set(b2.sites) == set(b.sites) and b2.interior == b.interior


def test_parse_error_has_line_number():
    with pytest.raises(FormatError) as err:
        parse_graph("vertices: a b\nedges: a-c\n")
    assert err.value.line == 2


def test_board_rejects_loops():
    with pytest.raises((FormatError, ValueError)):
        parse_board("vertices: a b\nedges: a-a a-b\n")


def test_board_specs():
    assert len(parse_board_spec("box_Z2:4x3")) == 12
    assert len(parse_board_spec("ball_Td:3,2")) == 10
    assert len(parse_board_spec("path_n:6")) == 6


def test_interaction_text():
    H = generate_named("H_phi")
    v, e = parse_interaction_text("vertex 1 -0.5\nedge 0-1 -0.25\n", H)
    assert v == {"1": -0.5} and e == {frozenset({"0", "1"}): -0.25}
    with pytest.raises(FormatError):
        parse_interaction_text("edge 1-1 -1\n", H)


def test_json_layout():
    data = jsonable({frozenset({"a"}): 1, frozenset({"b", "a"}): 2, "x": math.inf})
    assert data == {"a-a": 1, "a-b": 2, "x": "inf"}
    assert json.loads(dumps({"b": 1, "a": [box_z2(1, 2).sites]})) == {"a": [["0,0", "0,1"]], "b": 1}
