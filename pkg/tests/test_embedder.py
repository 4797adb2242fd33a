import json

import numpy as np
import pytest

from clevrgraph.embed import (
    EmbeddingProvider,
    TableProvider,
    bundles_equal,
    default_onehot_provider,
    embed,
    export_bundle,
    import_bundle,
)
from clevrgraph.errors import EmbeddingError, ExportError
from clevrgraph.graph import EDGE_LABELS, Edge, Node, StructuralGraph, adjacency
from clevrgraph.text import parse_text
from helpers import FIG1A_QUESTION, random_graph

# Node one-hot layout: [kind:2 | size:2 | color:8 | material:2 | shape:3 | modality:2]
KIND_OBJECT, KIND_ATTRIBUTE = 0, 1
SIZE0, COLOR0, MATERIAL0, SHAPE0, MODALITY0 = 2, 4, 12, 14, 17


@pytest.fixture(scope="module")
def provider():
    return default_onehot_provider()


def test_onehot_dims(provider):
    assert provider.node_dim == 19
    assert provider.edge_dim == 10


def test_onehot_text_attribute_vector(provider):
    node = Node(id=0, kind="attribute", modality="text", label="yellow", category="color")
    vec = provider.embed_node(node)
    yellow_slot = COLOR0 + 7  # color order: gray red blue green brown purple cyan yellow
    assert set(np.flatnonzero(vec)) == {KIND_ATTRIBUTE, yellow_slot, MODALITY0}


def test_onehot_image_object_vector(provider):
    node = Node(id=3, kind="object", modality="image", label="obj4")
    vec = provider.embed_node(node)
    assert set(np.flatnonzero(vec)) == {KIND_OBJECT, MODALITY0 + 1}
    assert vec.sum() == 2


def test_onehot_edge_vectors(provider):
    e0 = provider.embed_edge(Edge(0, 1, "attribute_of"))
    assert np.array_equal(e0, np.eye(10, dtype=np.float32)[0])
    for slot, label in enumerate(EDGE_LABELS):
        vec = provider.embed_edge(Edge(0, 1, label))
        assert vec.sum() == 1.0 and vec[slot] == 1.0


def test_embed_empty_graph(provider):
    g = StructuralGraph(nodes=[], edges=[], graph_kind="G_s", provenance="")
    bundle = embed(g, provider)
    assert bundle.X.shape == (0, 19)
    assert bundle.A.shape == (0, 0)
    assert bundle.E.shape == (0, 10)
    assert bundle.edge_index.shape == (2, 0)
    assert bundle.node_ids == []


def test_embed_fig1a(provider):
    g = parse_text(FIG1A_QUESTION)
    bundle = embed(g, provider, directed=False)
    assert bundle.X.shape == (10, 19)
    assert bundle.A.shape == (10, 10)
    assert np.array_equal(bundle.A, bundle.A.T)
    assert int(bundle.A.sum()) == 18  # 9 edges symmetrized
    assert bundle.E.shape == (9, 10)
    row_ones = bundle.X.sum(axis=1)
    for node, ones in zip(g.nodes, row_ones):
        assert ones == (2 if node.kind == "object" else 3)


def test_embed_directed_adjacency(provider):
    g = parse_text(FIG1A_QUESTION)
    bundle = embed(g, provider, directed=True)
    assert np.array_equal(bundle.A, adjacency(g, directed=True).astype(np.float32))
    assert not np.array_equal(bundle.A, bundle.A.T)


def test_embed_edge_index_follows_edge_order(provider):
    g = parse_text(FIG1A_QUESTION)
    bundle = embed(g, provider)
    for k, edge in enumerate(g.edges):
        assert bundle.edge_index[0, k] == edge.src
        assert bundle.edge_index[1, k] == edge.dst
    assert bundle.edge_index.max() < g.num_nodes


def test_embed_permutation_conjugates(provider):
    g = parse_text(FIG1A_QUESTION)
    n = g.num_nodes
    rng = np.random.default_rng(5)
    perm = rng.permutation(n)  # perm[old] = new id
    nodes = [None] * n
    for node in g.nodes:
        nodes[perm[node.id]] = Node(
            id=int(perm[node.id]), kind=node.kind, modality=node.modality,
            label=node.label, category=node.category, payload=node.payload,
        )
    edges = [Edge(int(perm[e.src]), int(perm[e.dst]), e.label) for e in g.edges]
    permuted = StructuralGraph(nodes=nodes, edges=edges, graph_kind="G_s",
                               provenance=g.provenance)
    b1 = embed(g, provider)
    b2 = embed(permuted, provider)
    P = np.zeros((n, n), dtype=np.float32)
    for old, new in enumerate(perm):
        P[old, new] = 1.0
    assert np.array_equal(b2.X, P.T @ b1.X)
    assert np.array_equal(b2.A, P.T @ b1.A @ P)
    assert np.array_equal(b2.E, b1.E)  # same edge order, same labels


def test_provider_purity(provider):
    a = Node(id=0, kind="attribute", modality="image", label="red", category="color")
    b = Node(id=9, kind="attribute", modality="image", label="red", category="color")
    assert np.array_equal(provider.embed_node(a), provider.embed_node(b))


@pytest.mark.parametrize("seed", range(30))
def test_onehot_ones_invariant_random_graphs(provider, seed):
    g = random_graph(np.random.default_rng(seed))
    bundle = embed(g, provider)
    for node, ones in zip(g.nodes, bundle.X.sum(axis=1)):
        assert ones == (2 if node.kind == "object" else 3)
    assert np.array_equal(bundle.E.sum(axis=1), np.ones(g.num_edges, dtype=np.float32))


@pytest.mark.parametrize("fmt", ["json", "bin"])
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_export_roundtrip(provider, fmt, seed):
    g = random_graph(np.random.default_rng(seed))
    bundle = embed(g, provider)
    data = export_bundle(bundle, fmt)
    assert bundles_equal(import_bundle(data), bundle)
    # canonical bytes: identical on re-export
    assert export_bundle(import_bundle(data), fmt) == data


def test_export_header_dims(provider):
    bundle = embed(parse_text(FIG1A_QUESTION), provider)
    doc = json.loads(export_bundle(bundle, "json"))
    assert doc["dims"] == {"num_nodes": 10, "num_edges": 9, "node_dim": 19, "edge_dim": 10}
    assert doc["dtype"] == "float32"


def test_export_empty_graph_sections(provider):
    g = StructuralGraph(nodes=[], edges=[], graph_kind="G_s", provenance="")
    bundle = embed(g, provider)
    for fmt in ("json", "bin"):
        assert bundles_equal(import_bundle(export_bundle(bundle, fmt)), bundle)
    raw = export_bundle(bundle, "bin")
    header_len = int.from_bytes(raw[4:8], "little")
    header = json.loads(raw[8 : 8 + header_len])
    assert all(section["nbytes"] == 0 for section in header["sections"].values())


def test_export_unknown_format(provider):
    bundle = embed(parse_text("a ball"), provider)
    with pytest.raises(ExportError):
        export_bundle(bundle, "parquet")


def test_import_rejects_garbage():
    with pytest.raises(ExportError):
        import_bundle(b"definitely not a bundle")
    with pytest.raises(ExportError):
        import_bundle(json.dumps({"format": "something-else"}).encode())


def test_import_rejects_dim_mismatch(provider):
    bundle = embed(parse_text("a red ball"), provider)
    doc = json.loads(export_bundle(bundle, "json"))
    doc["dims"]["num_nodes"] = 99
    with pytest.raises(ExportError):
        import_bundle(json.dumps(doc).encode())


def test_table_provider(tmp_path):
    table = tmp_path / "vectors.txt"
    words = ["obj1", "obj2", "red", "sphere", "attribute_of", "left"]
    lines = [f"{w} {i + 1}.0 0.5 -2.25" for i, w in enumerate(words)]
    table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    provider = TableProvider(table)
    assert provider.node_dim == provider.edge_dim == 3
    g = parse_text("is the red ball left of the thing")
    # "thing" head -> object node labeled obj2; all labels present in the table
    bundle = embed(g, provider)
    assert bundle.X.shape == (4, 3)
    assert np.allclose(bundle.X[0], [1.0, 0.5, -2.25])


def test_table_provider_unknown_word_aborts(tmp_path):
    table = tmp_path / "vectors.txt"
    table.write_text("obj1 1.0 2.0\n", encoding="utf-8")
    g = parse_text("the red ball")
    with pytest.raises(EmbeddingError) as err:
        embed(g, TableProvider(table))
    assert "red" in str(err.value) or "node" in str(err.value)


def test_table_provider_unk_fallback(tmp_path):
    table = tmp_path / "vectors.txt"
    table.write_text("<unk> 0.0 0.0\nobj1 1.0 2.0\n", encoding="utf-8")
    g = parse_text("the red ball")
    bundle = embed(g, TableProvider(table))
    assert np.allclose(bundle.X[0], [1.0, 2.0])
    assert np.allclose(bundle.X[1], [0.0, 0.0])


def test_table_provider_ragged_rows(tmp_path):
    table = tmp_path / "vectors.txt"
    table.write_text("a 1.0 2.0\nb 3.0\n", encoding="utf-8")
    with pytest.raises(EmbeddingError):
        TableProvider(table)


def test_failing_provider_names_offender(provider):
    class Broken(EmbeddingProvider):
        name = "broken"
        node_dim = 4
        edge_dim = 4

        def embed_node(self, node):
            raise RuntimeError("boom")

        def embed_edge(self, edge):
            return np.zeros(4)

    with pytest.raises(EmbeddingError) as err:
        embed(parse_text("a ball"), Broken())
    assert "node 0" in str(err.value)


def test_wrong_dimension_provider_aborts():
    class WrongDim(EmbeddingProvider):
        name = "wrongdim"
        node_dim = 4
        edge_dim = 4

        def embed_node(self, node):
            return np.zeros(5)

        def embed_edge(self, edge):
            return np.zeros(4)

    with pytest.raises(EmbeddingError):
        embed(parse_text("a ball"), WrongDim())
