"""The syntax domain: one node per token plus a root node, head -> dependent edges."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .conllu import Sentence, SentenceValidationError, validate_sentence


@dataclass
class Edge:
    source: str
    target: str
    attributes: dict[str, Any] = field(default_factory=dict)

    @property
    def domain(self) -> str:
        return self.attributes.get("domain", "")

    @property
    def type(self) -> str:
        return self.attributes.get("type", "")

    @property
    def key(self) -> tuple[str, str]:
        return (self.source, self.target)

    def sort_key(self) -> tuple[str, str, str, str]:
        return (self.source, self.target, self.domain, self.type)


def syntax_node_id(sentence_id: str, position: int) -> str:
    return f"{sentence_id}-syntax-{position}"


def root_node_id(sentence_id: str) -> str:
    return f"{sentence_id}-root"


@dataclass(eq=False)
class SyntaxGraph:
    sentence_id: str
    nodes: dict[str, dict[str, Any]]
    edges: list[Edge]
    root_id: str

    def node_id(self, position: int) -> str:
        node_id = syntax_node_id(self.sentence_id, position)
        if node_id not in self.nodes:
            raise KeyError(f"no token at position {position} in {self.sentence_id!r}")
        return node_id

    def node(self, position: int) -> dict[str, Any]:
        return self.nodes[self.node_id(position)]

    @cached_property
    def _position_of(self) -> dict[str, int]:
        return {
            node_id: attrs["position"]
            for node_id, attrs in self.nodes.items()
            if attrs.get("domain") == "syntax"
        }

    @cached_property
    def _children(self) -> dict[int, list[tuple[str, int]]]:
        children: dict[int, list[tuple[str, int]]] = {p: [] for p in self._position_of.values()}
        children[0] = []
        for e in self.edges:
            head = 0 if e.source == self.root_id else self._position_of[e.source]
            children[head].append((e.attributes["deprel"], self._position_of[e.target]))
        for deps in children.values():
            deps.sort(key=lambda d: d[1])
        return children

    @cached_property
    def _heads(self) -> dict[int, tuple[int, str]]:
        return {
            dep: (head, rel)
            for head, deps in self._children.items()
            for rel, dep in deps
        }

    @property
    def positions(self) -> list[int]:
        return sorted(self._position_of.values())

    def position_of(self, node_id: str) -> int:
        return self._position_of[node_id]

    def dependents(self, position: int) -> list[tuple[str, int]]:
        """``(deprel, position)`` pairs for the dependents of a token, by position."""
        if position not in self._children:
            raise KeyError(f"no token at position {position} in {self.sentence_id!r}")
        return list(self._children[position])

    def head_of(self, position: int) -> tuple[int, str]:
        """``(head position, deprel)``; head 0 is the root."""
        return self._heads[position]

    def root_token(self) -> int:
        return self._children[0][0][1]


def build_syntax_graph(s: Sentence) -> SyntaxGraph:
    violations = validate_sentence(s)
    if violations:
        raise SentenceValidationError(s.sentence_id, violations)
    sid = s.sentence_id
    root = root_node_id(sid)
    nodes: dict[str, dict[str, Any]] = {root: {"domain": "root", "type": "root"}}
    edges = []
    for t in s.tokens:
        attrs: dict[str, Any] = {
            "position": t.position,
            "domain": "syntax",
            "type": "token",
            "form": t.form,
            "lemma": t.lemma,
            "upos": t.upos,
            "xpos": t.xpos,
            # mirrors the incoming edge so node-level patterns can test the relation
            "deprel": t.deprel,
        }
        for key, value in t.feats.items():
            attrs.setdefault(key, value)
        nodes[syntax_node_id(sid, t.position)] = attrs
        source = root if t.head == 0 else syntax_node_id(sid, t.head)
        edges.append(
            Edge(
                source,
                syntax_node_id(sid, t.position),
                {"domain": "syntax", "type": "dependency", "deprel": t.deprel},
            )
        )
    return SyntaxGraph(sid, nodes, edges, root)


def subtree_positions(g: SyntaxGraph, position: int) -> tuple[int, ...]:
    """Positions dominated by ``position`` (inclusive), ascending."""
    out = []
    stack = [position]
    g.dependents(position)  # raises on unknown positions
    while stack:
        p = stack.pop()
        out.append(p)
        stack.extend(dep for _, dep in g._children[p])
    return tuple(sorted(out))
