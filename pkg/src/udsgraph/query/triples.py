"""Triple view of UDS graphs with reified edges."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

from ..annotations import SUBSPACES
from ..semantics import UdsGraph


@dataclass(frozen=True, order=True)
class Resource:
    id: str

    def __str__(self) -> str:
        return self.id


Term = Union[Resource, str, float]


class Triple(NamedTuple):
    subject: Resource
    predicate: Resource
    object: Term


def term_key(t: Term | None) -> tuple:
    """Total order over terms: unbound, resources, strings, numbers."""
    if t is None:
        return (0, "")
    if isinstance(t, Resource):
        return (1, t.id)
    if isinstance(t, str):
        return (2, t)
    return (3, t)


def triple_key(t: Triple) -> tuple:
    return (term_key(t.subject), term_key(t.predicate), term_key(t.object))


def edge_resource_id(source: str, target: str, domain: str) -> str:
    return f"{source}%%{target}%%{domain}"


def literal(value) -> str | float:
    """Numbers become binary64 reals, everything else a string."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return float(value)
    return str(value)


_QUALIFIED = {f"{s}.{p}": p for s, props in SUBSPACES.items() for p in props}


def attribute_name(key: str, attrs: dict) -> str:
    """Query-facing name of a stored attribute key.

    Normalized attributes are stored as ``<subspace>.<property>`` (plus
    ``.confidence``) and exposed under the bare property name, since
    property names are unique across subspaces. A bare name already used by
    another attribute of the same object keeps the qualified form.
    """
    suffix = ""
    base = key
    if key.endswith(".confidence") and key[: -len(".confidence")] in _QUALIFIED:
        base, suffix = key[: -len(".confidence")], ".confidence"
    short = _QUALIFIED.get(base)
    if short is None:
        return key
    name = short + suffix
    return key if name in attrs else name


class TripleView:
    """An immutable set of triples indexed by subject, predicate and object."""

    def __init__(self, triples: Iterable[Triple]):
        self.triples: tuple[Triple, ...] = tuple(sorted(set(triples), key=triple_key))
        self.by_subject: dict[Term, list[Triple]] = defaultdict(list)
        self.by_predicate: dict[Term, list[Triple]] = defaultdict(list)
        self.by_object: dict[Term, list[Triple]] = defaultdict(list)
        for t in self.triples:
            self.by_subject[t.subject].append(t)
            self.by_predicate[t.predicate].append(t)
            self.by_object[t.object].append(t)

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self.by_subject.get(t.subject, ())

    def match(self, s: Term | None = None, p: Term | None = None,
              o: Term | None = None) -> list[Triple]:
        """Triples matching the given positions; None is a wildcard."""
        candidates = [idx.get(v, []) for v, idx in
                      ((s, self.by_subject), (p, self.by_predicate), (o, self.by_object))
                      if v is not None]
        if not candidates:
            return list(self.triples)
        smallest = min(candidates, key=len)
        return [t for t in smallest
                if (s is None or _same(t.subject, s)) and (p is None or _same(t.predicate, p))
                and (o is None or _same(t.object, o))]

    def terms(self) -> list[Term]:
        seen = {x for t in self.triples for x in t}
        return sorted(seen, key=term_key)


def _same(a: Term, b: Term) -> bool:
    return type(a) is type(b) and a == b


def graph_triples(u: UdsGraph) -> list[Triple]:
    out = []
    for node_id, attrs in u.nodes.items():
        s = Resource(node_id)
        for key, value in attrs.items():
            out.append(Triple(s, Resource(attribute_name(key, attrs)), literal(value)))
    seen = set()
    for e in u.edges:
        eid = edge_resource_id(e.source, e.target, e.domain)
        if eid in seen:
            raise ValueError(f"two edges share the resource id {eid!r}")
        seen.add(eid)
        r = Resource(eid)
        out.append(Triple(Resource(e.source), r, Resource(e.target)))
        for key, value in e.attributes.items():
            out.append(Triple(r, Resource(attribute_name(key, e.attributes)), literal(value)))
    return out


def to_triples(graphs: UdsGraph | Iterable[UdsGraph]) -> TripleView:
    """One view over a graph or a whole corpus."""
    if isinstance(graphs, UdsGraph):
        graphs = [graphs]
    return TripleView(t for u in graphs for t in graph_triples(u))
