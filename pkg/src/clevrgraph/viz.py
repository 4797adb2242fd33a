"""DOT rendering for structural graphs.

Legend style encodes all four attributes visually: objects are double circles;
the shape attribute is drawn with the shape's own glyph (box / circle /
cylinder); size is a diamond scaled small or large; material is a diamond whose
fill is a gradient for metal and solid for rubber; and every attribute node is
filled with its object's color. Joint graphs fill text nodes orange and image
nodes aquamarine. Plain style is text labels only.

SVG output shells out to a `dot` binary when one is installed; when none is
found the DOT source is returned with a notice instead of failing.
"""

from __future__ import annotations

import shutil
import subprocess

from .diagnostics import Diagnostic
from .errors import ClevrGraphError
from .graph import StructuralGraph
from .lexicon import MATCHING_LABELS, SPATIAL_LABELS

# The eight CLEVR palette colors, as rendered by the dataset generator.
COLOR_HEX = {
    "gray": "#575757",
    "red": "#ad2323",
    "blue": "#2a4bd7",
    "green": "#1d6914",
    "brown": "#814919",
    "purple": "#8126c0",
    "cyan": "#29d0d0",
    "yellow": "#ffee33",
}

MODALITY_FILL = {"text": "#ffa500", "image": "#7fffd4"}  # orange / aquamarine

_SHAPE_GLYPH = {"cube": "box", "sphere": "circle", "cylinder": "cylinder"}
_SIZE_SCALE = {"small": 0.5, "large": 1.1}
_RELATION_LABELS = set(SPATIAL_LABELS) | set(MATCHING_LABELS)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fontcolor(fill: str) -> str:
    base = fill.split(":", 1)[0]
    if not base.startswith("#") or len(base) != 7:
        return "black"
    r, g, b = (int(base[i : i + 2], 16) for i in (1, 3, 5))
    luma = 0.299 * r + 0.587 * g + 0.114 * b
    return "gray90" if luma < 128 else "black"


def to_dot(graph: StructuralGraph, style: str = "legend") -> str:
    """Deterministic DOT text for a graph; style is "legend" or "plain"."""
    if style not in ("legend", "plain"):
        raise ClevrGraphError(f"unknown style {style!r}")
    lines = [f"digraph {graph.graph_kind} {{"]

    owner = {}
    constraints = {}
    for edge in graph.edges:
        if edge.label == "attribute_of":
            owner[edge.src] = edge.dst
            constraints.setdefault(edge.dst, {})[graph.nodes[edge.src].category] = graph.nodes[
                edge.src
            ].label

    for node in graph.nodes:
        attrs = [("label", _quote(node.label))]
        if style == "legend":
            if graph.graph_kind == "G_u":
                fill = MODALITY_FILL[node.modality]
            elif node.kind == "attribute":
                obj_constraints = constraints.get(owner.get(node.id), {})
                fill = COLOR_HEX.get(obj_constraints.get("color"), "white")
            else:
                fill = "white"
            if node.kind == "object":
                attrs.append(("shape", "doublecircle"))
            elif node.category == "shape":
                attrs.append(("shape", _SHAPE_GLYPH[node.label]))
            elif node.category == "size":
                scale = _SIZE_SCALE[node.label]
                attrs.append(("shape", "diamond"))
                attrs.append(("width", str(scale)))
                attrs.append(("height", str(scale)))
                attrs.append(("fixedsize", "true"))
            else:
                attrs.append(("shape", "diamond"))
            if node.category == "material" and node.label == "metal":
                fill = f"{fill}:white"
            attrs.append(("style", "filled"))
            attrs.append(("fillcolor", _quote(fill)))
            attrs.append(("fontcolor", _quote(_fontcolor(fill))))
        rendered = ", ".join(f"{k}={v}" for k, v in attrs)
        lines.append(f"  n{node.id} [{rendered}];")

    for edge in graph.edges:
        attrs = []
        if edge.label in _RELATION_LABELS:
            attrs.append(("label", _quote(edge.label)))
            if style == "legend":
                attrs.append(("style", "dashed"))
        elif edge.label == "grounding" and style == "legend":
            attrs.append(("style", "dotted"))
        if attrs:
            rendered = ", ".join(f"{k}={v}" for k, v in attrs)
            lines.append(f"  n{edge.src} -> n{edge.dst} [{rendered}];")
        else:
            lines.append(f"  n{edge.src} -> n{edge.dst};")

    lines.append("}")
    return "\n".join(lines) + "\n"


def render_svg(dot_source: str):
    """(svg_text, diagnostics). svg_text is None when no `dot` renderer exists,
    with a renderer_missing diagnostic instead; a present-but-failing renderer
    raises."""
    binary = shutil.which("dot")
    if binary is None:
        return None, [
            Diagnostic(
                kind="renderer_missing",
                message="no graphviz `dot` binary on PATH; emitting DOT source only",
            )
        ]
    proc = subprocess.run(
        [binary, "-Tsvg"], input=dot_source.encode("utf-8"), capture_output=True
    )
    if proc.returncode != 0:
        raise ClevrGraphError(f"dot renderer failed: {proc.stderr.decode(errors='replace')}")
    return proc.stdout.decode("utf-8"), []
