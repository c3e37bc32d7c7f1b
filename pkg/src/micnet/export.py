"""Serialise association networks for external graph viewers.

Three formats: an edge table (TSV), the simple interaction format (SIF) and
GraphML.  Output is plain UTF-8 with LF newlines and depends only on the
document, so identical networks give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

from .pipeline import EdgeList

EDGE_TSV_HEADER = ("source", "target", "score", "pvalue", "measure")


@dataclass(frozen=True)
class GraphNode:
    id: str
    type_name: str
    frequency: int


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    score: float
    p_value: float
    measure: str


@dataclass(frozen=True)
class GraphDocument:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        known = set(ids)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"edge {e.source!r} - {e.target!r} has an unknown endpoint")

    @classmethod
    def from_edge_list(cls, edges: EdgeList) -> "GraphDocument":
        nodes = tuple(GraphNode(n.annotation.canonical, n.type_name, n.frequency)
                      for n in edges.nodes)
        links = tuple(GraphEdge(e.source.canonical, e.target.canonical, e.score,
                                e.p_value, edges.measure.value)
                      for e in edges.edges)
        return cls(nodes, links)


def _num(v: float) -> str:
    return f"{v:.6g}"


def write_edge_tsv(doc: GraphDocument) -> str:
    if any("\x00" in n.id for n in doc.nodes):
        raise ValueError("node ids containing NUL cannot be written as TSV")
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(EDGE_TSV_HEADER)
    for e in doc.edges:
        w.writerow([e.source, e.target, _num(e.score), _num(e.p_value), e.measure])
    return buf.getvalue()


def read_edge_tsv(text: str) -> list[GraphEdge]:
    reader = csv.reader(io.StringIO(text), delimiter="\t")
    header = next(reader)
    if tuple(header) != EDGE_TSV_HEADER:
        raise ValueError(f"unexpected edge table header: {header}")
    return [GraphEdge(r[0], r[1], float(r[2]), float(r[3]), r[4])
            for r in reader if r]


def write_sif(doc: GraphDocument) -> str:
    """``source<TAB>assoc<TAB>target`` per edge, then every isolated node alone."""
    for n in doc.nodes:
        if "\t" in n.id or "\n" in n.id:
            raise ValueError(f"node id {n.id!r} contains a tab or newline; "
                             "SIF cannot represent it")
    lines = [f"{e.source}\tassoc\t{e.target}" for e in doc.edges]
    linked = {e.source for e in doc.edges} | {e.target for e in doc.edges}
    lines += [n.id for n in doc.nodes if n.id not in linked]
    return "".join(line + "\n" for line in lines)


# characters XML 1.0 cannot carry even as references
_XML_ILLEGAL = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f￾￿]")


def _xml_value(text: str) -> str:
    clean = _XML_ILLEGAL.sub(lambda m: f"\\x{ord(m.group()):02x}", text)
    return quoteattr(clean, {"\n": "&#10;", "\r": "&#13;", "\t": "&#9;"})


def _xml_text(text: str) -> str:
    return _xml_value(text)[1:-1]


def write_graphml(doc: GraphDocument) -> str:
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="type_name" for="node" attr.name="type_name" attr.type="string"/>',
        '  <key id="frequency" for="node" attr.name="frequency" attr.type="int"/>',
        '  <key id="score" for="edge" attr.name="score" attr.type="double"/>',
        '  <key id="p_value" for="edge" attr.name="p_value" attr.type="double"/>',
        '  <key id="measure" for="edge" attr.name="measure" attr.type="string"/>',
        '  <graph id="associations" edgedefault="undirected">',
    ]
    for n in doc.nodes:
        out.append(f"    <node id={_xml_value(n.id)}>")
        out.append(f'      <data key="type_name">{_xml_text(n.type_name)}</data>')
        out.append(f'      <data key="frequency">{int(n.frequency)}</data>')
        out.append("    </node>")
    for e in doc.edges:
        out.append(f"    <edge source={_xml_value(e.source)} "
                   f"target={_xml_value(e.target)}>")
        out.append(f'      <data key="score">{_num(e.score)}</data>')
        out.append(f'      <data key="p_value">{_num(e.p_value)}</data>')
        out.append(f'      <data key="measure">{_xml_text(e.measure)}</data>')
        out.append("    </edge>")
    out += ["  </graph>", "</graphml>"]
    return "\n".join(out) + "\n"
