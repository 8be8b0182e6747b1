"""The semantics domain and the interface edges linking it to syntax."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Iterator

from .extraction import PredicateStructure
from .syntax import Edge, SyntaxGraph

PERFORMATIVE_SUFFIXES = {
    "sentence": "arg-sentence",
    "speaker": "pred-speaker",
    "author": "arg-author",
    "addressee": "arg-addressee",
}

# Clausal subordination edges run argument -> predicate.
SUBORDINATION_FROM_ARGUMENT = True


class GraphConstructionError(ValueError):
    pass


def predicate_node_id(sentence_id: str, head: int) -> str:
    return f"{sentence_id}-semantics-pred-{head}"


def argument_node_id(sentence_id: str, head: int) -> str:
    return f"{sentence_id}-semantics-arg-{head}"


def performative_node_id(sentence_id: str, role: str) -> str:
    return f"{sentence_id}-semantics-{PERFORMATIVE_SUFFIXES[role]}"


def is_performative(sentence_id: str, node_id: str) -> bool:
    return node_id in {performative_node_id(sentence_id, r) for r in PERFORMATIVE_SUFFIXES}


@dataclass(eq=False)
class UdsGraph:
    sentence_id: str
    syntax: SyntaxGraph
    semantics_nodes: dict[str, dict[str, Any]] = field(default_factory=dict)
    semantics_edges: list[Edge] = field(default_factory=list)
    split: str | None = None

    @property
    def nodes(self) -> dict[str, dict[str, Any]]:
        return {**self.syntax.nodes, **self.semantics_nodes}

    @property
    def edges(self) -> list[Edge]:
        return self.syntax.edges + self.semantics_edges

    def canonical(self) -> tuple:
        nodes = tuple(sorted((k, _freeze(v)) for k, v in self.nodes.items()))
        edges = tuple(sorted((e.sort_key(), _freeze(e.attributes)) for e in self.edges))
        return (self.sentence_id, self.split, nodes, edges)

    def __eq__(self, other):
        if not isinstance(other, UdsGraph):
            return NotImplemented
        return self.canonical() == other.canonical()

    def semantics_edge(self, source: str, target: str, domain: str = "semantics") -> Edge:
        for e in self.semantics_edges:
            if e.source == source and e.target == target and e.domain == domain:
                return e
        raise KeyError(f"no {domain} edge {source} -> {target}")

    def out_edges(self, node_id: str) -> Iterator[Edge]:
        return (e for e in self.semantics_edges if e.source == node_id)

    def is_performative(self, node_id: str) -> bool:
        return is_performative(self.sentence_id, node_id)

    def predicate_nodes(self) -> list[str]:
        return sorted(k for k, v in self.semantics_nodes.items() if v.get("type") == "predicate")

    def argument_nodes(self) -> list[str]:
        return sorted(k for k, v in self.semantics_nodes.items() if v.get("type") == "argument")

    def copy(self) -> UdsGraph:
        return copy.deepcopy(self)


def _freeze(attrs: dict) -> tuple:
    return tuple(sorted((k, (type(v).__name__, v)) for k, v in attrs.items()))


def build_semantics_layer(g: SyntaxGraph, preds: list[PredicateStructure]) -> UdsGraph:
    sid = g.sentence_id
    known = set(g.positions)
    u = UdsGraph(sid, g)
    nodes = u.semantics_nodes
    edges = u.semantics_edges
    pred_ids = {p.head_position: predicate_node_id(sid, p.head_position) for p in preds}

    def instance_edges(node_id: str, head: int, span: tuple[int, ...]):
        for pos in (head, *[q for q in span if q != head]):
            if pos not in known:
                raise GraphConstructionError(f"position {pos} not in sentence {sid!r}")
            kind = "head" if pos == head else "nonhead"
            edges.append(Edge(node_id, g.node_id(pos), {"domain": "interface", "type": kind}))

    for pred in preds:
        pid = pred_ids[pred.head_position]
        nodes[pid] = {"domain": "semantics", "type": "predicate"}
        instance_edges(pid, pred.head_position, pred.span)

    subordination = []
    for pred in preds:
        pid = pred_ids[pred.head_position]
        for arg in pred.arguments:
            aid = argument_node_id(sid, arg.head_position)
            if aid not in nodes:
                nodes[aid] = {"domain": "semantics", "type": "argument"}
                instance_edges(aid, arg.head_position, arg.span)
                if arg.is_clausal and arg.head_position in pred_ids:
                    embedded = pred_ids[arg.head_position]
                    pair = (aid, embedded) if SUBORDINATION_FROM_ARGUMENT else (embedded, aid)
                    subordination.append(
                        Edge(*pair, {"domain": "semantics", "type": "head"})
                    )
            edges.append(Edge(pid, aid, {"domain": "semantics", "type": "dependency"}))
    edges.extend(subordination)
    return u


def maximal_predicates(u: UdsGraph) -> set[str]:
    """Predicate nodes not reachable from any non-performative semantics node."""
    adjacency: dict[str, list[str]] = {}
    for e in u.semantics_edges:
        if e.domain == "semantics" and e.type in ("dependency", "head"):
            adjacency.setdefault(e.source, []).append(e.target)
    dominated: set[str] = set()
    stack = [
        t for s, targets in adjacency.items() if not u.is_performative(s) for t in targets
    ]
    while stack:
        node = stack.pop()
        if node in dominated:
            continue
        dominated.add(node)
        stack.extend(adjacency.get(node, ()))
    return {p for p in u.predicate_nodes() if p not in dominated}


def add_performative_nodes(u: UdsGraph) -> UdsGraph:
    """Return a copy of ``u`` with the sentence, speaker, author and addressee nodes."""
    out = u.copy()
    sid = out.sentence_id
    maximal = sorted(maximal_predicates(out))
    sentence = performative_node_id(sid, "sentence")
    speaker = performative_node_id(sid, "speaker")
    for role in ("sentence", "speaker", "author", "addressee"):
        out.semantics_nodes[performative_node_id(sid, role)] = {"domain": "semantics"}
    out.semantics_edges.append(
        Edge(sentence, out.syntax.root_id, {"domain": "interface", "type": "head"})
    )
    for pid in maximal:
        out.semantics_edges.append(Edge(sentence, pid, {"domain": "semantics", "type": "head"}))
    for role in ("sentence", "author", "addressee"):
        out.semantics_edges.append(
            Edge(speaker, performative_node_id(sid, role),
                 {"domain": "semantics", "type": "dependency"})
        )
    return out


def build_uds_graph(g: SyntaxGraph, preds: list[PredicateStructure],
                    split: str | None = None) -> UdsGraph:
    u = add_performative_nodes(build_semantics_layer(g, preds))
    u.split = split
    return u


def check_semantics_invariants(u: UdsGraph) -> list[str]:
    """Problems with the instance-edge structure, one message per offending node."""
    problems = []
    heads: dict[str, int] = {}
    for e in u.semantics_edges:
        if e.domain == "interface":
            if e.source not in u.semantics_nodes:
                problems.append(f"interface edge from unknown node {e.source!r}")
            if e.target not in u.syntax.nodes:
                problems.append(f"interface edge {e.source!r} -> unknown syntax node {e.target!r}")
            if e.type == "head":
                heads[e.source] = heads.get(e.source, 0) + 1
        elif e.domain == "semantics":
            for end in (e.source, e.target):
                if end not in u.semantics_nodes:
                    problems.append(f"semantics edge touches unknown node {end!r}")
    for node_id, attrs in sorted(u.semantics_nodes.items()):
        if attrs.get("domain") != "semantics":
            problems.append(f"node {node_id!r} has domain {attrs.get('domain')!r}")
        n = heads.get(node_id, 0)
        performative = u.is_performative(node_id)
        if performative and node_id != performative_node_id(u.sentence_id, "sentence"):
            if n:
                problems.append(f"performative node {node_id!r} has instance edges")
        elif n != 1:
            problems.append(f"node {node_id!r} has {n} head instance edges, expected 1")
    return problems
