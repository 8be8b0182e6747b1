"""JSON graph documents and N-Triples export.

A document is one JSON object::

    {"schema_version": "1", "sentence_id": ..., "split": ...,
     "syntax_root": ..., "nodes": [{"id": ..., "attributes": {...}}, ...],
     "edges": [{"source": ..., "target": ..., "attributes": {...}}, ...]}

Nodes are sorted by id and edges by (source, target, domain, type).
Floats are written with Python's shortest round-trip repr, so values
survive a render/parse cycle exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any
from urllib.parse import quote

from .semantics import UdsGraph, check_semantics_invariants
from .syntax import Edge, SyntaxGraph
from .query.triples import Resource, TripleView

SCHEMA_VERSION = "1"
BASE_IRI = "http://udsgraph.invalid/"
XSD = "http://www.w3.org/2001/XMLSchema#"


class DocumentError(ValueError):
    pass


def _is_syntax(attrs: dict[str, Any]) -> bool:
    return attrs.get("domain") in ("syntax", "root")


def document(u: UdsGraph) -> dict:
    for attrs in (*u.nodes.values(), *(e.attributes for e in u.edges)):
        for key, value in attrs.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise DocumentError(f"attribute {key!r} is not finite: {value}")
    return {
        "schema_version": SCHEMA_VERSION,
        "sentence_id": u.sentence_id,
        "split": u.split,
        "syntax_root": u.syntax.root_id,
        "nodes": [{"id": k, "attributes": v} for k, v in sorted(u.nodes.items())],
        "edges": [
            {"source": e.source, "target": e.target, "attributes": e.attributes}
            for e in sorted(u.edges, key=Edge.sort_key)
        ],
    }


def render_document(u: UdsGraph) -> str:
    return json.dumps(document(u), sort_keys=True, ensure_ascii=False, indent=1,
                      allow_nan=False) + "\n"


def document_to_graph(doc: dict) -> UdsGraph:
    if not isinstance(doc, dict):
        raise DocumentError("document is not a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {version!r} (supported: {SCHEMA_VERSION!r})")
    try:
        sid = doc["sentence_id"]
        root = doc["syntax_root"]
        nodes = {n["id"]: dict(n["attributes"]) for n in doc["nodes"]}
        edges = [Edge(e["source"], e["target"], dict(e["attributes"])) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed document: missing or invalid {exc}") from None
    if len(nodes) != len(doc["nodes"]):
        raise DocumentError("duplicate node ids")
    if root not in nodes:
        raise DocumentError(f"syntax root {root!r} is not a node")
    syntax_nodes = {k: v for k, v in nodes.items() if _is_syntax(v)}
    syntax_edges = [e for e in edges if e.domain == "syntax"]
    for e in syntax_edges:
        if e.source not in syntax_nodes or e.target not in syntax_nodes:
            raise DocumentError(f"syntax edge {e.source!r} -> {e.target!r} leaves the syntax domain")
    g = SyntaxGraph(sid, syntax_nodes, syntax_edges, root)
    u = UdsGraph(
        sid, g,
        {k: v for k, v in nodes.items() if not _is_syntax(v)},
        [e for e in edges if e.domain != "syntax"],
        doc.get("split"),
    )
    problems = check_semantics_invariants(u)
    if problems:
        raise DocumentError("invalid semantics layer: " + "; ".join(problems))
    return u


def parse_document(text: str) -> UdsGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return document_to_graph(doc)


def _iri(resource_id: str) -> str:
    return f"<{BASE_IRI}{quote(resource_id, safe='-._~')}>"


def _escape(s: str) -> str:
    s = s.replace("\\", "\\\\").replace('"', '\\"')
    return s.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")


def _object(o) -> str:
    if isinstance(o, Resource):
        return _iri(o.id)
    if isinstance(o, str):
        return f'"{_escape(o)}"^^<{XSD}string>'
    return f'"{o!r}"^^<{XSD}double>'


def export_ntriples(view: TripleView) -> str:
    """One sorted line per triple, subjects and predicates under ``BASE_IRI``."""
    lines = sorted(f"{_iri(t.subject.id)} {_iri(t.predicate.id)} {_object(t.object)} ."
                   for t in view)
    return "".join(line + "\n" for line in lines)
