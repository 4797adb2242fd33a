"""Structural graphs shared by the text, scene, and joint pipelines, plus their
canonical JSON serialization (schema in docs/graph-schema.md).

Graphs are immutable values after construction and validation; edges are stored
directed with the convention that (a -label-> b) reads "a is <label> of b".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DanglingReferenceError, GraphSchemaError, InvariantError
from .lexicon import MATCHING_LABELS, SPATIAL_LABELS, default_lexicon

GRAPH_KINDS = ("G_s", "G_t", "G_u")
NODE_KINDS = ("object", "attribute")
MODALITIES = ("text", "image")

# Edge label order is fixed: it defines the one-hot edge-feature slots.
EDGE_LABELS = ("attribute_of",) + SPATIAL_LABELS + MATCHING_LABELS + ("grounding",)

SCHEMA_VERSION = 1

_NODE_KEYS = {"id", "kind", "modality", "label", "category", "payload"}
_EDGE_KEYS = {"src", "dst", "label"}
_TOP_KEYS = {"version", "graph_kind", "provenance", "nodes", "edges"}


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    modality: str
    label: str
    category: Optional[str] = None
    payload: Optional[dict] = None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: str


@dataclass(frozen=True)
class StructuralGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    graph_kind: str
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        validate(self)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def object_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == "object"]

    def attribute_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == "attribute"]

    def attributes_of(self, object_id: int) -> dict[str, str]:
        """Constraint map {category: value} carried by an object node's attributes."""
        out = {}
        for edge in self.edges:
            if edge.label == "attribute_of" and edge.dst == object_id:
                attr = self.nodes[edge.src]
                out[attr.category] = attr.label
        return out


def validate(graph: StructuralGraph) -> None:
    """Check every structural invariant; raises a GraphValidationError subclass."""
    if graph.graph_kind not in GRAPH_KINDS:
        raise GraphSchemaError(f"unknown graph_kind {graph.graph_kind!r}")
    lex = default_lexicon()

    ids = [n.id for n in graph.nodes]
    if ids != list(range(len(ids))):
        raise InvariantError("node ids must be unique, contiguous from 0, and listed in order")
    for node in graph.nodes:
        if node.kind not in NODE_KINDS:
            raise GraphSchemaError(f"node {node.id}: unknown kind {node.kind!r}")
        if node.modality not in MODALITIES:
            raise GraphSchemaError(f"node {node.id}: unknown modality {node.modality!r}")
        if node.kind == "attribute":
            if node.category is None or not lex.is_canonical(node.category, node.label):
                raise InvariantError(
                    f"attribute node {node.id}: label {node.label!r} is not a canonical "
                    f"{node.category!r} value"
                )
        elif node.category is not None:
            raise InvariantError(f"object node {node.id} must not carry a category")
        if node.modality == "text" and graph.graph_kind == "G_t":
            raise InvariantError(f"text node {node.id} not allowed in a G_t graph")
        if node.modality == "image" and graph.graph_kind == "G_s":
            raise InvariantError(f"image node {node.id} not allowed in a G_s graph")

    n = len(graph.nodes)
    seen = set()
    attr_edge_count = dict.fromkeys(
        (node.id for node in graph.nodes if node.kind == "attribute"), 0
    )
    for edge in graph.edges:
        if edge.label not in EDGE_LABELS:
            raise GraphSchemaError(f"unknown edge label {edge.label!r}")
        if not (0 <= edge.src < n and 0 <= edge.dst < n):
            raise DanglingReferenceError(
                f"edge {edge.src}->{edge.dst} references a missing node id"
            )
        if edge.src == edge.dst:
            raise InvariantError(f"self-loop on node {edge.src}")
        key = (edge.src, edge.dst, edge.label)
        if key in seen:
            raise InvariantError(f"duplicate edge {key}")
        seen.add(key)

        src, dst = graph.nodes[edge.src], graph.nodes[edge.dst]
        if edge.label == "attribute_of":
            if src.kind != "attribute" or dst.kind != "object" or src.modality != dst.modality:
                raise InvariantError(
                    f"attribute_of edge {edge.src}->{edge.dst} must join an attribute to an "
                    "object of the same modality"
                )
            attr_edge_count[src.id] += 1
        elif edge.label == "grounding":
            if graph.graph_kind != "G_u":
                raise InvariantError("grounding edges are only allowed in G_u graphs")
            if not (
                src.kind == "object"
                and dst.kind == "object"
                and src.modality == "text"
                and dst.modality == "image"
            ):
                raise InvariantError(
                    f"grounding edge {edge.src}->{edge.dst} must join a text object "
                    "to an image object"
                )
        else:
            if src.kind != "object" or dst.kind != "object" or src.modality != dst.modality:
                raise InvariantError(
                    f"{edge.label} edge {edge.src}->{edge.dst} must join two objects of "
                    "the same modality"
                )

    for node_id, count in attr_edge_count.items():
        if count != 1:
            raise InvariantError(
                f"attribute node {node_id} has {count} attribute_of edges, expected exactly 1"
            )


def adjacency(graph: StructuralGraph, directed: bool = False) -> np.ndarray:
    """|V| x |V| {0,1} adjacency matrix; undirected mode symmetrizes."""
    n = graph.num_nodes
    out = np.zeros((n, n), dtype=np.int8)
    for edge in graph.edges:
        out[edge.src, edge.dst] = 1
        if not directed:
            out[edge.dst, edge.src] = 1
    return out


def _node_doc(node: Node) -> dict:
    doc = {"id": node.id, "kind": node.kind, "modality": node.modality, "label": node.label}
    if node.category is not None:
        doc["category"] = node.category
    if node.payload is not None:
        doc["payload"] = node.payload
    return doc


def serialize(graph: StructuralGraph) -> bytes:
    """Canonical JSON bytes: sorted keys, 2-space indent, ASCII escapes, trailing
    newline. Byte equality of two serializations implies graph equality."""
    doc = {
        "version": SCHEMA_VERSION,
        "graph_kind": graph.graph_kind,
        "provenance": graph.provenance,
        "nodes": [_node_doc(n) for n in graph.nodes],
        "edges": [{"src": e.src, "dst": e.dst, "label": e.label} for e in graph.edges],
    }
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True) + "\n").encode("utf-8")


def _require(cond, message):
    if not cond:
        raise GraphSchemaError(message)


def deserialize(data: bytes | str) -> StructuralGraph:
    """Parse and fully validate a graph document; the inverse of serialize."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphSchemaError(f"not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"unknown top-level keys {sorted(unknown)}")
    _require(doc.get("version") == SCHEMA_VERSION, "missing or unsupported schema version")
    _require(isinstance(doc.get("provenance"), str), "provenance must be a string")
    _require(isinstance(doc.get("nodes"), list), "nodes must be an array")
    _require(isinstance(doc.get("edges"), list), "edges must be an array")

    nodes = []
    for i, nd in enumerate(doc["nodes"]):
        _require(isinstance(nd, dict), f"node {i} must be an object")
        unknown = set(nd) - _NODE_KEYS
        _require(not unknown, f"node {i}: unknown keys {sorted(unknown)}")
        _require(
            isinstance(nd.get("id"), int) and not isinstance(nd.get("id"), bool),
            f"node {i}: id must be an integer",
        )
        for key in ("kind", "modality", "label"):
            _require(isinstance(nd.get(key), str), f"node {i}: {key} must be a string")
        category = nd.get("category")
        _require(category is None or isinstance(category, str), f"node {i}: bad category")
        payload = nd.get("payload")
        _require(payload is None or isinstance(payload, dict), f"node {i}: bad payload")
        nodes.append(
            Node(
                id=nd["id"],
                kind=nd["kind"],
                modality=nd["modality"],
                label=nd["label"],
                category=category,
                payload=payload,
            )
        )

    max_id = len(nodes)
    edges = []
    for i, ed in enumerate(doc["edges"]):
        _require(isinstance(ed, dict), f"edge {i} must be an object")
        unknown = set(ed) - _EDGE_KEYS
        _require(not unknown, f"edge {i}: unknown keys {sorted(unknown)}")
        for key in ("src", "dst"):
            value = ed.get(key)
            _require(
                isinstance(value, int) and not isinstance(value, bool),
                f"edge {i}: {key} must be an integer",
            )
        _require(isinstance(ed.get("label"), str), f"edge {i}: label must be a string")
        if not (0 <= ed["src"] < max_id and 0 <= ed["dst"] < max_id):
            raise DanglingReferenceError(
                f"edge {i} references node id {max(ed['src'], ed['dst'])} "
                f"in a {max_id}-node graph"
            )
        edges.append(Edge(src=ed["src"], dst=ed["dst"], label=ed["label"]))

    return StructuralGraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        graph_kind=doc.get("graph_kind", ""),
        provenance=doc["provenance"],
    )
