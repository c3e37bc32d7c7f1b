import xml.etree.ElementTree as ET

import pytest
from conftest import FIGURE_TABLE
from hypothesis import given, settings
from hypothesis import strategies as st

from micnet.export import (EDGE_TSV_HEADER, GraphDocument, GraphEdge, GraphNode,
                           read_edge_tsv, write_edge_tsv, write_graphml, write_sif)
from micnet.pipeline import PipelineConfig, run_pipeline

NS = {"g": "http://graphml.graphdrawing.org/xmlns"}
EMPTY = GraphDocument((), ())
PAIR = GraphDocument((GraphNode("A", "t", 3), GraphNode("B", "t", 2)),
                     (GraphEdge("A", "B", 0.97, 0.001, "iamic"),))


@pytest.fixture(scope="module")
def figure_doc():
    _, _, edges = run_pipeline(FIGURE_TABLE, PipelineConfig(
        min_frequency=0, p_threshold=0.5, n_permutations=40))
    return GraphDocument.from_edge_list(edges), edges


def _graphml_counts(text):
    root = ET.fromstring(text)
    graph = root.find("g:graph", NS)
    return len(graph.findall("g:node", NS)), len(graph.findall("g:edge", NS))


def test_document_validation():
    with pytest.raises(ValueError, match="unique"):
        GraphDocument((GraphNode("A", "t", 1), GraphNode("A", "t", 1)), ())
    with pytest.raises(ValueError, match="unknown endpoint"):
        GraphDocument((GraphNode("A", "t", 1),), (GraphEdge("A", "Z", 1, 1, "iamic"),))


def test_edge_tsv_empty():
    assert write_edge_tsv(EMPTY) == "\t".join(EDGE_TSV_HEADER) + "\n"


def test_edge_tsv_single_edge():
    assert write_edge_tsv(PAIR).splitlines() == [
        "source\ttarget\tscore\tpvalue\tmeasure", "A\tB\t0.97\t0.001\tiamic"]


def test_sif_single_edge():
    assert write_sif(PAIR) == "A\tassoc\tB\n"


def test_sif_isolated_node():
    doc = GraphDocument((GraphNode("A", "t", 1),), ())
    assert write_sif(doc) == "A\n"


def test_edge_tsv_rejects_nul_in_id():
    with pytest.raises(ValueError, match="NUL"):
        write_edge_tsv(GraphDocument((GraphNode("A\x00", "t", 1),), ()))


def test_sif_rejects_tab_in_id():
    with pytest.raises(ValueError, match="tab"):
        write_sif(GraphDocument((GraphNode("A\tB", "t", 1),), ()))


def test_graphml_empty():
    text = write_graphml(EMPTY)
    root = ET.fromstring(text)
    keys = {k.get("id") for k in root.findall("g:key", NS)}
    assert keys == {"type_name", "frequency", "score", "p_value", "measure"}
    assert root.find("g:graph", NS).get("edgedefault") == "undirected"
    assert _graphml_counts(text) == (0, 0)


def test_graphml_single_node():
    root = ET.fromstring(write_graphml(GraphDocument((GraphNode("A", "Shape", 4),), ())))
    node = root.find("g:graph/g:node", NS)
    data = {d.get("key"): d.text for d in node.findall("g:data", NS)}
    assert node.get("id") == "A" and data == {"type_name": "Shape", "frequency": "4"}


def test_graphml_escapes_markup_and_control_characters():
    odd = 'a<b>&"c\x01'
    doc = GraphDocument((GraphNode(odd, "t&u", 1), GraphNode("x", "t", 1)),
                        (GraphEdge(odd, "x", 0.5, 0.1, "pearson"),))
    text = write_graphml(doc)
    assert "\x01" not in text
    root = ET.fromstring(text)
    assert root.find("g:graph/g:node", NS).get("id") == 'a<b>&"c\\x01'
    assert root.find("g:graph/g:edge", NS).get("source") == 'a<b>&"c\\x01'


def test_figure_network_counts(figure_doc):
    doc, edges = figure_doc
    assert len(doc.nodes) == 10 and len(doc.edges) == len(edges) > 0
    assert len(write_edge_tsv(doc).splitlines()) == len(edges) + 1
    sif = write_sif(doc).splitlines()
    linked = {e.source for e in doc.edges} | {e.target for e in doc.edges}
    assert len(sif) == len(doc.edges) + len(set(n.id for n in doc.nodes) - linked)
    assert _graphml_counts(write_graphml(doc)) == (10, len(edges))


def test_figure_network_round_trip(figure_doc):
    doc, _ = figure_doc
    back = read_edge_tsv(write_edge_tsv(doc))
    assert [(e.source, e.target, e.measure) for e in back] == \
        [(e.source, e.target, e.measure) for e in doc.edges]
    for got, want in zip(back, doc.edges):
        assert got.score == pytest.approx(want.score, rel=1e-5)
        assert got.p_value == pytest.approx(want.p_value, rel=1e-5)


def test_outputs_are_stable(figure_doc):
    doc, _ = figure_doc
    again = GraphDocument(tuple(doc.nodes), tuple(doc.edges))
    for writer in (write_edge_tsv, write_sif, write_graphml):
        assert writer(doc) == writer(again)
        assert "\r" not in writer(doc)


names = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\t\n\r\x00"),
                min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(st.lists(names, min_size=2, max_size=6, unique=True),
       st.floats(0, 1), st.floats(1e-4, 1))
def test_round_trip_arbitrary_names(ids, s, p):
    nodes = tuple(GraphNode(i, "t", 1) for i in ids)
    edges = tuple(GraphEdge(a, b, s, p, "cosine") for a, b in zip(ids, ids[1:]))
    doc = GraphDocument(nodes, edges)
    back = read_edge_tsv(write_edge_tsv(doc))
    assert [(e.source, e.target) for e in back] == [(e.source, e.target) for e in edges]
    assert _graphml_counts(write_graphml(doc)) == (len(nodes), len(edges))
