"""Feature bundles: map a structural graph to (X, A, E) matrices plus an edge
index, through a pluggable embedding provider.

The default provider is a one-hot layout over the closed vocabulary. Node rows
are 19 wide: [kind:2 | size:2 | color:8 | material:2 | shape:3 | modality:2];
object nodes light their kind slot and modality slot (2 ones), attribute nodes
additionally light their value slot (3 ones). Edge rows are one-hot over the 10
edge labels in graph order. The full layout is frozen in docs/bundle-format.md.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmbeddingError, ExportError
from .graph import EDGE_LABELS, StructuralGraph, adjacency
from .lexicon import CATEGORIES, Lexicon, default_lexicon

_MAGIC = b"CGB1"


class EmbeddingProvider:
    """Pure per-node / per-edge vectorizer. Implementations must be deterministic
    functions of node/edge content (never of ids) with fixed output dims."""

    name: str = "abstract"
    node_dim: int = 0
    edge_dim: int = 0

    def embed_node(self, node) -> np.ndarray:
        raise NotImplementedError

    def embed_edge(self, edge) -> np.ndarray:
        raise NotImplementedError


class OneHotProvider(EmbeddingProvider):
    name = "onehot"

    def __init__(self, lexicon: Lexicon | None = None):
        self._lexicon = lexicon or default_lexicon()
        self._category_offset = {}
        offset = 2  # kind slots come first
        for cat in CATEGORIES:
            self._category_offset[cat] = offset
            offset += len(self._lexicon.values[cat])
        self._modality_offset = offset
        self.node_dim = offset + 2
        self.edge_dim = len(EDGE_LABELS)

    def embed_node(self, node) -> np.ndarray:
        vec = np.zeros(self.node_dim, dtype=np.float32)
        vec[0 if node.kind == "object" else 1] = 1.0
        if node.kind == "attribute":
            slot = self._lexicon.slot_index(node.category, node.label)
            vec[self._category_offset[node.category] + slot] = 1.0
        vec[self._modality_offset + (1 if node.modality == "image" else 0)] = 1.0
        return vec

    def embed_edge(self, edge) -> np.ndarray:
        vec = np.zeros(self.edge_dim, dtype=np.float32)
        vec[EDGE_LABELS.index(edge.label)] = 1.0
        return vec


class TableProvider(EmbeddingProvider):
    """File-backed provider: a whitespace-separated text table of word vectors
    (word followed by d floats per line). Node and edge labels are looked up
    verbatim; a `<unk>` row, when present, catches everything else."""

    name = "table"

    def __init__(self, path):
        self._table = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                word, values = parts[0], parts[1:]
                try:
                    vec = np.array([float(v) for v in values], dtype=np.float32)
                except ValueError as exc:
                    raise EmbeddingError(f"{path}:{lineno}: non-numeric vector entry") from exc
                if dim is None:
                    dim = len(vec)
                    if dim == 0:
                        raise EmbeddingError(f"{path}:{lineno}: empty vector")
                elif len(vec) != dim:
                    raise EmbeddingError(
                        f"{path}:{lineno}: expected {dim} values, got {len(vec)}"
                    )
                self._table[word] = vec
        if dim is None:
            raise EmbeddingError(f"{path}: empty vector table")
        self.node_dim = dim
        self.edge_dim = dim

    def _lookup(self, word):
        vec = self._table.get(word)
        if vec is None:
            vec = self._table.get("<unk>")
        if vec is None:
            raise EmbeddingError(f"word {word!r} not in vector table and no <unk> row")
        return vec.copy()

    def embed_node(self, node) -> np.ndarray:
        return self._lookup(node.label)

    def embed_edge(self, edge) -> np.ndarray:
        return self._lookup(edge.label)


def default_onehot_provider(lexicon: Lexicon | None = None) -> OneHotProvider:
    return OneHotProvider(lexicon)


@dataclass(eq=False)
class FeatureBundle:
    X: np.ndarray  # |V| x node_dim, float32
    A: np.ndarray  # |V| x |V|, float32, entries in {0,1}
    E: np.ndarray  # |E| x edge_dim, float32
    edge_index: np.ndarray  # 2 x |E|, int64, [src row; dst row]
    node_ids: list[int]

    @property
    def num_nodes(self) -> int:
        return self.X.shape[0]

    @property
    def num_edges(self) -> int:
        return self.E.shape[0]


def bundles_equal(a: FeatureBundle, b: FeatureBundle) -> bool:
    """Bit-exact equality across all five members."""
    return (
        a.X.shape == b.X.shape
        and a.A.shape == b.A.shape
        and a.E.shape == b.E.shape
        and a.edge_index.shape == b.edge_index.shape
        and np.array_equal(a.X, b.X)
        and np.array_equal(a.A, b.A)
        and np.array_equal(a.E, b.E)
        and np.array_equal(a.edge_index, b.edge_index)
        and a.node_ids == b.node_ids
    )


def _run_provider(fn, item, provider, dim, what):
    try:
        vec = np.asarray(fn(item), dtype=np.float32)
    except EmbeddingError:
        raise
    except Exception as exc:
        raise EmbeddingError(f"provider {provider.name!r} failed on {what}: {exc}") from exc
    if vec.shape != (dim,):
        raise EmbeddingError(
            f"provider {provider.name!r} returned shape {vec.shape} for {what}, expected ({dim},)"
        )
    return vec


def embed(
    graph: StructuralGraph, provider: EmbeddingProvider, directed: bool = False
) -> FeatureBundle:
    """Materialize the (X, A, E) bundle for a graph, in node/edge order."""
    if provider.node_dim <= 0 or provider.edge_dim <= 0:
        raise EmbeddingError(f"provider {provider.name!r} has non-positive dims")
    n, m = graph.num_nodes, graph.num_edges
    X = np.zeros((n, provider.node_dim), dtype=np.float32)
    for node in graph.nodes:
        X[node.id] = _run_provider(
            provider.embed_node, node, provider, provider.node_dim, f"node {node.id}"
        )
    E = np.zeros((m, provider.edge_dim), dtype=np.float32)
    edge_index = np.zeros((2, m), dtype=np.int64)
    for k, edge in enumerate(graph.edges):
        E[k] = _run_provider(
            provider.embed_edge, edge, provider, provider.edge_dim, f"edge {k} ({edge.src}->{edge.dst})"
        )
        edge_index[0, k] = edge.src
        edge_index[1, k] = edge.dst
    A = adjacency(graph, directed=directed).astype(np.float32)
    return FeatureBundle(X=X, A=A, E=E, edge_index=edge_index, node_ids=[n.id for n in graph.nodes])


def _dims(bundle: FeatureBundle) -> dict:
    return {
        "num_nodes": bundle.num_nodes,
        "num_edges": bundle.num_edges,
        "node_dim": int(bundle.X.shape[1]),
        "edge_dim": int(bundle.E.shape[1]),
    }


def export_bundle(bundle: FeatureBundle, format: str = "json") -> bytes:
    """Serialize a bundle. `json` nests plain arrays under a dims header;
    `bin` is the flat container documented in docs/bundle-format.md: a JSON
    header (dims, dtypes, byte offsets) followed by raw little-endian row-major
    matrix bytes. Both round-trip losslessly through import_bundle."""
    if format == "json":
        doc = {
            "format": "clevrgraph-bundle",
            "version": 1,
            "dims": _dims(bundle),
            "dtype": "float32",
            "index_dtype": "int64",
            "X": [[float(v) for v in row] for row in bundle.X],
            "A": [[float(v) for v in row] for row in bundle.A],
            "E": [[float(v) for v in row] for row in bundle.E],
            "edge_index": [[int(v) for v in row] for row in bundle.edge_index],
            "node_ids": list(bundle.node_ids),
        }
        return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("ascii")
    if format == "bin":
        sections = {}
        payload = b""
        parts = (
            ("X", np.ascontiguousarray(bundle.X, dtype="<f4")),
            ("A", np.ascontiguousarray(bundle.A, dtype="<f4")),
            ("E", np.ascontiguousarray(bundle.E, dtype="<f4")),
            ("edge_index", np.ascontiguousarray(bundle.edge_index, dtype="<i8")),
            ("node_ids", np.ascontiguousarray(np.array(bundle.node_ids, dtype="<i8"))),
        )
        for name, arr in parts:
            raw = arr.tobytes(order="C")
            sections[name] = {"offset": len(payload), "nbytes": len(raw)}
            payload += raw
        header = {
            "format": "clevrgraph-bundle",
            "version": 1,
            "dims": _dims(bundle),
            "dtype": "float32",
            "index_dtype": "int64",
            "order": "row-major",
            "endianness": "little",
            "sections": sections,
        }
        header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("ascii")
        return _MAGIC + struct.pack("<I", len(header_bytes)) + header_bytes + payload
    raise ExportError(f"unknown export format {format!r}")


def _check_dims(dims):
    if not isinstance(dims, dict) or set(dims) != {"num_nodes", "num_edges", "node_dim", "edge_dim"}:
        raise ExportError("bad dims header")
    for key, value in dims.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ExportError(f"bad dims entry {key}={value!r}")
    return dims


def import_bundle(data: bytes) -> FeatureBundle:
    """Inverse of export_bundle for both formats (sniffed by magic)."""
    if data[:4] == _MAGIC:
        (header_len,) = struct.unpack("<I", data[4:8])
        try:
            header = json.loads(data[8 : 8 + header_len].decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ExportError(f"bad binary header: {exc}") from exc
        dims = _check_dims(header.get("dims"))
        payload = data[8 + header_len :]
        shapes = {
            "X": ((dims["num_nodes"], dims["node_dim"]), "<f4"),
            "A": ((dims["num_nodes"], dims["num_nodes"]), "<f4"),
            "E": ((dims["num_edges"], dims["edge_dim"]), "<f4"),
            "edge_index": ((2, dims["num_edges"]), "<i8"),
            "node_ids": ((dims["num_nodes"],), "<i8"),
        }
        arrays = {}
        for name, (shape, dtype) in shapes.items():
            section = header["sections"][name]
            raw = payload[section["offset"] : section["offset"] + section["nbytes"]]
            count = int(np.prod(shape, dtype=np.int64))
            if len(raw) != count * np.dtype(dtype).itemsize:
                raise ExportError(f"section {name}: payload size mismatch")
            arrays[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        return FeatureBundle(
            X=arrays["X"],
            A=arrays["A"],
            E=arrays["E"],
            edge_index=arrays["edge_index"],
            node_ids=[int(v) for v in arrays["node_ids"]],
        )

    try:
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ExportError(f"not a bundle payload: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != "clevrgraph-bundle":
        raise ExportError("not a clevrgraph bundle document")
    dims = _check_dims(doc.get("dims"))

    def arr(key, shape, dtype):
        raw = doc.get(key)
        out = np.array(raw, dtype=dtype).reshape(shape)
        return out

    try:
        bundle = FeatureBundle(
            X=arr("X", (dims["num_nodes"], dims["node_dim"]), np.float32),
            A=arr("A", (dims["num_nodes"], dims["num_nodes"]), np.float32),
            E=arr("E", (dims["num_edges"], dims["edge_dim"]), np.float32),
            edge_index=arr("edge_index", (2, dims["num_edges"]), np.int64),
            node_ids=[int(v) for v in doc.get("node_ids", [])],
        )
    except (TypeError, ValueError) as exc:
        raise ExportError(f"bundle arrays do not match dims header: {exc}") from exc
    if len(bundle.node_ids) != dims["num_nodes"]:
        raise ExportError("node_ids length does not match num_nodes")
    return bundle
