"""Align a text graph with a scene graph into the joint bipartite graph (kind G_u).

A text mention is connected to every scene object whose four attributes satisfy
all of the mention's constraints; categories the mention leaves unconstrained
match anything. Ambiguity is kept: all satisfying candidates get an edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .diagnostics import Diagnostic
from .errors import InvariantError
from .graph import Edge, Node, StructuralGraph


@dataclass
class GroundingResult:
    graph: StructuralGraph
    text_id_offset: int
    diagnostics: list[Diagnostic] = field(default_factory=list)


def ground_result(gs: StructuralGraph, gt: StructuralGraph) -> GroundingResult:
    """Join gs and gt; image nodes keep their ids, text node ids are offset by |V_t|
    (the offset is recorded in the joint graph's provenance)."""
    if gs.graph_kind != "G_s":
        raise InvariantError(f"expected a G_s text graph, got {gs.graph_kind}")
    if gt.graph_kind != "G_t":
        raise InvariantError(f"expected a G_t scene graph, got {gt.graph_kind}")

    offset = gt.num_nodes
    nodes = list(gt.nodes)
    for node in gs.nodes:
        nodes.append(
            Node(
                id=node.id + offset,
                kind=node.kind,
                modality=node.modality,
                label=node.label,
                category=node.category,
                payload=node.payload,
            )
        )
    edges = list(gt.edges)
    edges.extend(
        Edge(src=e.src + offset, dst=e.dst + offset, label=e.label) for e in gs.edges
    )

    diagnostics = []
    image_objects = [(n.id, gt.attributes_of(n.id)) for n in gt.object_nodes()]
    for text_obj in gs.object_nodes():
        constraints = gs.attributes_of(text_obj.id)
        matched = False
        for image_id, attrs in image_objects:
            if all(attrs.get(cat) == val for cat, val in constraints.items()):
                edges.append(Edge(src=text_obj.id + offset, dst=image_id, label="grounding"))
                matched = True
        if not matched:
            diagnostics.append(
                Diagnostic(
                    kind="ungrounded_mention",
                    message=f"text mention {text_obj.label} matches no scene object",
                    context={"mention": text_obj.label, "constraints": constraints},
                )
            )

    provenance = json.dumps(
        {"image": gt.provenance, "text": gs.provenance, "text_id_offset": offset},
        sort_keys=True,
    )
    graph = StructuralGraph(nodes=nodes, edges=edges, graph_kind="G_u", provenance=provenance)
    return GroundingResult(graph=graph, text_id_offset=offset, diagnostics=diagnostics)


def ground(gs: StructuralGraph, gt: StructuralGraph) -> StructuralGraph:
    """The joint graph alone; diagnostics are available through ground_result()."""
    return ground_result(gs, gt).graph
