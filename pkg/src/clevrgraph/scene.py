"""Scene-side parsing: CLEVR scenes JSON in, image structural graph (kind G_t) out.

The relationship convention follows the CLEVR generator: relationships[r][i] lists
the indices j such that object j stands in relation r to object i ("j is r of i").
Schema details in docs/scene-schema.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .diagnostics import Diagnostic
from .errors import (
    SceneRelationError,
    SceneSchemaError,
    SceneShapeError,
    SceneValueError,
)
from .graph import Edge, Node, StructuralGraph
from .lexicon import CATEGORIES, SPATIAL_LABELS, default_lexicon

_DUAL = {"left": "right", "right": "left", "front": "behind", "behind": "front"}


@dataclass(frozen=True)
class SceneObject:
    index: int
    size: str
    color: str
    material: str
    shape: str
    coords_3d: tuple[float, float, float]
    pixel_coords: Optional[tuple[float, float, float]] = None
    rotation: Optional[float] = None


@dataclass(frozen=True)
class SceneDocument:
    image_index: int
    objects: tuple[SceneObject, ...]
    relationships: dict[str, list[list[int]]]


def _coords(raw, name, scene_index, length=3):
    if not (isinstance(raw, (list, tuple)) and len(raw) == length) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
    ):
        raise SceneSchemaError(f"{name} must be a list of {length} numbers", scene_index)
    return tuple(float(v) for v in raw)


def _parse_object(raw, obj_index, scene_index, lex) -> SceneObject:
    if not isinstance(raw, dict):
        raise SceneSchemaError(f"object {obj_index} must be an object", scene_index)
    attrs = {}
    for cat in CATEGORIES:
        value = raw.get(cat)
        if not isinstance(value, str):
            raise SceneSchemaError(f"object {obj_index} missing {cat}", scene_index)
        if not lex.is_canonical(cat, value):
            raise SceneValueError(
                f"object {obj_index}: {value!r} is not a canonical {cat} value", scene_index
            )
        attrs[cat] = value
    coords_raw = raw.get("3d_coords", raw.get("coords_3d"))
    if coords_raw is None:
        raise SceneSchemaError(f"object {obj_index} missing 3d_coords", scene_index)
    pixel = raw.get("pixel_coords")
    rotation = raw.get("rotation")
    if rotation is not None and (not isinstance(rotation, (int, float)) or isinstance(rotation, bool)):
        raise SceneSchemaError(f"object {obj_index}: rotation must be a number", scene_index)
    return SceneObject(
        index=obj_index,
        coords_3d=_coords(coords_raw, f"object {obj_index} 3d_coords", scene_index),
        pixel_coords=None if pixel is None else _coords(pixel, f"object {obj_index} pixel_coords", scene_index),
        rotation=None if rotation is None else float(rotation),
        **attrs,
    )


def _parse_scene_doc(raw, position) -> SceneDocument:
    if not isinstance(raw, dict):
        raise SceneSchemaError("scene must be an object", position)
    image_index = raw.get("image_index", position)
    if not isinstance(image_index, int) or isinstance(image_index, bool):
        raise SceneSchemaError("image_index must be an integer", position)
    objects_raw = raw.get("objects")
    if not isinstance(objects_raw, list):
        raise SceneSchemaError("objects must be an array", position)
    lex = default_lexicon()
    objects = tuple(
        _parse_object(obj, i, position, lex) for i, obj in enumerate(objects_raw)
    )

    relationships_raw = raw.get("relationships")
    if not isinstance(relationships_raw, dict):
        raise SceneSchemaError("relationships must be an object", position)
    if set(relationships_raw) != set(SPATIAL_LABELS):
        raise SceneSchemaError(
            f"relationships must have exactly the keys {sorted(SPATIAL_LABELS)}", position
        )
    n = len(objects)
    relationships: dict[str, list[list[int]]] = {}
    for rel, rows in relationships_raw.items():
        if not isinstance(rows, list) or len(rows) != n:
            raise SceneShapeError(
                f"relationships[{rel!r}] must have one row per object "
                f"({len(rows) if isinstance(rows, list) else 'non-list'} rows for {n} objects)",
                position,
            )
        parsed_rows = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or not all(
                isinstance(j, int) and not isinstance(j, bool) for j in row
            ):
                raise SceneSchemaError(f"relationships[{rel!r}][{i}] must be a list of ints", position)
            if any(j == i for j in row):
                raise SceneRelationError(f"relationships[{rel!r}][{i}] is reflexive", position)
            if any(not 0 <= j < n for j in row):
                raise SceneRelationError(
                    f"relationships[{rel!r}][{i}] references an out-of-range object", position
                )
            if len(set(row)) != len(row):
                raise SceneRelationError(f"relationships[{rel!r}][{i}] has duplicates", position)
            parsed_rows.append(sorted(row))
        relationships[rel] = parsed_rows
    return SceneDocument(image_index=image_index, objects=objects, relationships=relationships)


def load_scenes(data: bytes | str) -> list[SceneDocument]:
    """Parse a CLEVR scenes file (top-level `scenes` array) or a single scene object."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SceneSchemaError(f"not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "scenes" in doc:
        scenes = doc["scenes"]
        if not isinstance(scenes, list):
            raise SceneSchemaError("scenes must be an array")
    elif isinstance(doc, dict):
        scenes = [doc]
    else:
        raise SceneSchemaError("top level must be a scenes file or a single scene object")
    return [_parse_scene_doc(scene, i) for i, scene in enumerate(scenes)]


def check_scene_consistency(scene: SceneDocument) -> list[Diagnostic]:
    """Pairwise duality check: j left-of i must imply i right-of j, and likewise
    front/behind. Violations are reported, not fatal (segmentation-derived scenes
    may be noisy)."""
    out = []
    for rel, rows in scene.relationships.items():
        dual = scene.relationships[_DUAL[rel]]
        for i, row in enumerate(rows):
            for j in row:
                if i not in dual[j]:
                    out.append(
                        Diagnostic(
                            kind="scene_inconsistency",
                            message=f"object {j} is {rel} of {i} but {i} is not {_DUAL[rel]} of {j}",
                            context={"image_index": scene.image_index, "relation": rel,
                                     "src": j, "dst": i},
                        )
                    )
    return out


def _transitive_reduction(pairs: set[tuple[int, int]], n: int) -> set[tuple[int, int]]:
    # Boolean closure, then drop any edge implied by a 2+ step path. O(n^3), fine
    # at scene scale.
    direct = [[False] * n for _ in range(n)]
    for a, b in pairs:
        direct[a][b] = True
    closure = [row[:] for row in direct]
    for k in range(n):
        for a in range(n):
            if closure[a][k]:
                row_a, row_k = closure[a], closure[k]
                for b in range(n):
                    if row_k[b]:
                        row_a[b] = True
    kept = set()
    for a, b in pairs:
        if not any(direct[a][c] and closure[c][b] for c in range(n) if c != a and c != b):
            kept.add((a, b))
    return kept


def parse_scene(scene: SceneDocument, prune: bool = False) -> StructuralGraph:
    """Scene document in, G_t out.

    Each object yields one object node (payload carries its coordinates) and four
    attribute nodes. Each relationship entry j in relationships[r][i] yields a
    directed edge j -r-> i. With prune=True only left/front edges survive, further
    thinned to their transitive reduction, which keeps large scenes viewable.
    """
    nodes: list[Node] = []
    edges: list[Edge] = []
    object_node_ids = []
    for obj in scene.objects:
        payload = {"coords_3d": list(obj.coords_3d)}
        if obj.pixel_coords is not None:
            payload["pixel_coords"] = list(obj.pixel_coords)
        if obj.rotation is not None:
            payload["rotation"] = obj.rotation
        obj_id = len(nodes)
        object_node_ids.append(obj_id)
        nodes.append(
            Node(id=obj_id, kind="object", modality="image", label=f"obj{obj.index + 1}",
                 payload=payload)
        )
        for cat in CATEGORIES:
            attr_id = len(nodes)
            nodes.append(
                Node(id=attr_id, kind="attribute", modality="image",
                     label=getattr(obj, cat), category=cat)
            )
            edges.append(Edge(src=attr_id, dst=obj_id, label="attribute_of"))

    n = len(scene.objects)
    for rel in SPATIAL_LABELS:
        pairs = {
            (j, i) for i, row in enumerate(scene.relationships[rel]) for j in row
        }
        if prune:
            if rel not in ("left", "front"):
                continue
            pairs = _transitive_reduction(pairs, n)
        for j, i in sorted(pairs):
            edges.append(Edge(src=object_node_ids[j], dst=object_node_ids[i], label=rel))

    provenance = json.dumps({"image_index": scene.image_index}, sort_keys=True)
    return StructuralGraph(nodes=nodes, edges=edges, graph_kind="G_t", provenance=provenance)
