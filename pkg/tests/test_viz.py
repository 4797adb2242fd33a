import json

import numpy as np
import pytest

from clevrgraph.errors import ClevrGraphError
from clevrgraph.graph import StructuralGraph
from clevrgraph.scene import load_scenes, parse_scene
from clevrgraph.text import parse_text
from clevrgraph.viz import COLOR_HEX, MODALITY_FILL, render_svg, to_dot
from clevrgraph.grounding import ground
from dotcheck import DotSyntaxError, check_dot
from helpers import FIG1A_QUESTION, random_graph


def test_dotcheck_accepts_known_good():
    for sample in (
        "graph { }",
        'digraph G {\n  a [label="x"];\n  a -> b [style=dashed];\n}',
        'strict digraph { a -> b -> c; subgraph s { d } ; e [k=1.5, j="x\\"y"] }',
        'graph g { a -- b; node [shape=box]; "weird id" -- c:port:ne }',
        "digraph { /* block */ a // line\n # hash\n }",
        "digraph { a = b; x [html=<<b>bold</b>>, w=-.5] }",
    ):
        check_dot(sample)


@pytest.mark.parametrize(
    "sample",
    [
        "digraph {",
        "graph } {",
        "digraph { a -- b }",
        "graph { a -> b }",
        "digraph { a [x=] }",
        'digraph { "unterminated }',
        "notagraph { }",
        "digraph { a -> }",
        "digraph {} trailing",
    ],
)
def test_dotcheck_rejects_known_bad(sample):
    with pytest.raises(DotSyntaxError):
        check_dot(sample)


def test_empty_graph_minimal_dot():
    g = StructuralGraph(nodes=[], edges=[], graph_kind="G_s", provenance="")
    dot = to_dot(g, "legend")
    assert dot == "digraph G_s {\n}\n"
    check_dot(dot)


def test_fig1a_legend_matches_golden(golden_dir):
    dot = to_dot(parse_text(FIG1A_QUESTION), "legend")
    assert dot == (golden_dir / "fig1a_gs_legend.dot").read_text(encoding="utf-8")


def test_fig1a_legend_shape(golden_dir):
    dot = to_dot(parse_text(FIG1A_QUESTION), "legend")
    check_dot(dot)
    lines = dot.splitlines()
    assert sum("doublecircle" in line for line in lines) == 3
    assert sum("style=dashed" in line for line in lines) == 2
    assert any('label="right"' in line for line in lines)
    assert any('label="same_color"' in line for line in lines)


def test_to_dot_deterministic():
    g = parse_text(FIG1A_QUESTION)
    assert to_dot(g, "legend") == to_dot(g, "legend")
    assert to_dot(g, "plain") == to_dot(g, "plain")


@pytest.mark.parametrize("style", ["legend", "plain"])
@pytest.mark.parametrize("seed", range(30))
def test_random_graphs_emit_valid_dot(style, seed):
    g = random_graph(np.random.default_rng(seed))
    check_dot(to_dot(g, style))


def test_unknown_style_rejected():
    g = StructuralGraph(nodes=[], edges=[], graph_kind="G_s", provenance="")
    with pytest.raises(ClevrGraphError):
        to_dot(g, "fancy")


def _node_line(dot, node_id):
    for line in dot.splitlines():
        if line.strip().startswith(f"n{node_id} ["):
            return line
    raise AssertionError(f"no node line for n{node_id}")


def test_legend_encodes_all_four_attributes(demo_scene_dict):
    gt = parse_scene(load_scenes(json.dumps(demo_scene_dict))[0])
    dot = to_dot(gt, "legend")
    check_dot(dot)
    glyph = {"cube": "shape=box", "sphere": "shape=circle", "cylinder": "shape=cylinder"}
    for obj_node in gt.object_nodes():
        constraints = gt.attributes_of(obj_node.id)
        hexcolor = COLOR_HEX[constraints["color"]]
        attr_ids = [e.src for e in gt.edges
                    if e.label == "attribute_of" and e.dst == obj_node.id]
        assert "doublecircle" in _node_line(dot, obj_node.id)
        for attr_id in attr_ids:
            node = gt.nodes[attr_id]
            line = _node_line(dot, attr_id)
            assert hexcolor in line  # color encoded as fill on every attribute
            if node.category == "size":
                scale = "1.1" if node.label == "large" else "0.5"
                assert f"width={scale}" in line and "fixedsize=true" in line
            if node.category == "material":
                assert (":white" in line) == (node.label == "metal")  # gradient = metal
            if node.category == "shape":
                assert glyph[node.label] in line


def test_joint_graph_modality_fills(demo_scene_dict):
    gs = parse_text("the yellow rubber thing")
    gt = parse_scene(load_scenes(json.dumps(demo_scene_dict))[0])
    gu = ground(gs, gt)
    dot = to_dot(gu, "legend")
    check_dot(dot)
    for node in gu.nodes:
        line = _node_line(dot, node.id)
        assert MODALITY_FILL[node.modality] in line
    grounding_lines = [line for line in dot.splitlines() if "style=dotted" in line]
    assert len(grounding_lines) == 1


def test_plain_style_has_no_glyph_coding():
    dot = to_dot(parse_text(FIG1A_QUESTION), "plain")
    check_dot(dot)
    assert "shape=" not in dot and "fillcolor" not in dot
    assert 'label="right"' in dot  # relation labels survive as text


def test_render_svg_without_binary(monkeypatch):
    monkeypatch.setenv("PATH", "")
    svg, diagnostics = render_svg("digraph { }")
    assert svg is None
    assert [d.kind for d in diagnostics] == ["renderer_missing"]
