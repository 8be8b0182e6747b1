"""Annotation subspaces, raw annotator responses and attribute attachment.

Raw responses are JSON lines, one response per line::

    {"annotator": "a1", "target": "s1-semantics-pred-2", "subspace": "factuality",
     "property": "factual", "response": 1, "confidence": 4}

``target`` is a semantics node id, or ``[source, target]`` for a
predicate -> argument edge (protoroles). Instruments per subspace:

============  ==================  ==========  =====================
subspace      property            response    confidence
============  ==================  ==========  =====================
factuality    factual             0/1         1-5, required
genericity    pred-*/arg-*        0/1         1-5, required
time          duration            0-10        1-5, required
wordsense     a WordNet sense key 0/1         absent
protoroles    one of 18 roles     1-5         absent
============  ==================  ==========  =====================

Protoroles responses of 3 or less require a boolean ``applicable``.
Wordsense records may carry ``supersense`` (e.g. ``noun.person``);
otherwise it is read from the lexicographer-file field of the sense key.
An optional ``"version": "1"`` field is checked when present.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .semantics import UdsGraph

RAW_FORMAT_VERSION = "1"

DURATIONS = (
    "instant", "seconds", "minutes", "hours", "days", "weeks",
    "months", "years", "decades", "centuries", "forever",
)

PROTOROLES = (
    "instigation", "volition", "awareness", "sentient", "change-of-location",
    "existed-before", "existed-during", "existed-after", "change-of-possession",
    "change-of-state", "change-of-state-continuous", "was-used", "was-for-benefit",
    "partitive", "manner", "purpose", "location", "time",
)

# WordNet 3.0 lexicographer files, indexed by lex_filenum.
LEXNAMES = (
    "adj.all", "adj.pert", "adv.all", "noun.Tops", "noun.act", "noun.animal",
    "noun.artifact", "noun.attribute", "noun.body", "noun.cognition",
    "noun.communication", "noun.event", "noun.feeling", "noun.food", "noun.group",
    "noun.location", "noun.motive", "noun.object", "noun.person", "noun.phenomenon",
    "noun.plant", "noun.possession", "noun.process", "noun.quantity", "noun.relation",
    "noun.shape", "noun.state", "noun.substance", "noun.time", "verb.body",
    "verb.change", "verb.cognition", "verb.communication", "verb.competition",
    "verb.consumption", "verb.contact", "verb.creation", "verb.emotion", "verb.motion",
    "verb.perception", "verb.possession", "verb.social", "verb.stative", "verb.weather",
    "adj.ppl",
)
NOUN_SUPERSENSES = tuple(n for n in LEXNAMES if n.startswith("noun."))

SUBSPACES: dict[str, tuple[str, ...]] = {
    "factuality": ("factual",),
    "genericity": (
        "pred-particular", "pred-dynamic", "pred-hypothetical",
        "arg-particular", "arg-kind", "arg-abstract",
    ),
    "time": tuple(f"dur-{d}" for d in DURATIONS),
    "wordsense": tuple(f"supersense.{n}" for n in NOUN_SUPERSENSES),
    "protoroles": PROTOROLES,
}
NODE_SUBSPACES = ("factuality", "genericity", "time", "wordsense")
EDGE_SUBSPACES = ("protoroles",)
SUBSPACE_LABELS = {
    "factuality": "Factuality",
    "genericity": "Genericity",
    "time": "Time",
    "wordsense": "Entity Type",
}

Target = Union[str, tuple[str, str]]


class AnnotationLoadError(ValueError):
    def __init__(self, message: str, record: int | None = None):
        self.record = record
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)


class AttachmentError(ValueError):
    pass


def property_subspace(prop: str) -> str:
    for subspace, props in SUBSPACES.items():
        if prop in props:
            return subspace
    raise KeyError(prop)


def supersense_of(sense_key: str) -> str:
    """Lexicographer class of a WordNet sense key like ``dog%1:05:00::``."""
    try:
        lex_filenum = int(sense_key.split("%", 1)[1].split(":")[1])
        return LEXNAMES[lex_filenum]
    except (IndexError, ValueError):
        raise ValueError(f"cannot read a lexicographer file from sense key {sense_key!r}") from None


def attribute_key(subspace: str, prop: str) -> str:
    return f"{subspace}.{prop}"


def confidence_key(subspace: str, prop: str) -> str:
    return f"{subspace}.{prop}.confidence"


@dataclass(frozen=True)
class RawResponse:
    annotator_id: str
    target: Target
    subspace: str
    property: str
    response: int
    confidence: int | None = None
    applicable: bool | None = None
    supersense: str | None = None


@dataclass(frozen=True)
class AttributeValue:
    value: float
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


class RawAnnotationSet:
    """Responses grouped by ``(subspace, property, target)``."""

    def __init__(self, responses: Iterable[RawResponse] = ()):
        self.responses: list[RawResponse] = []
        self.groups: dict[tuple[str, str, Target], list[RawResponse]] = defaultdict(list)
        for r in responses:
            self.add(r)

    def add(self, r: RawResponse) -> None:
        self.responses.append(r)
        self.groups[(r.subspace, r.property, r.target)].append(r)

    def subspace(self, name: str) -> list[RawResponse]:
        return [r for r in self.responses if r.subspace == name]

    def subspaces(self) -> list[str]:
        return [s for s in SUBSPACES if any(r.subspace == s for r in self.responses)]

    def __len__(self) -> int:
        return len(self.responses)


def _check_int(record: dict, key: str, low: int, high: int, n: int) -> int:
    value = record.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise AnnotationLoadError(f"{key} must be an integer, got {value!r}", n)
    if not low <= value <= high:
        raise AnnotationLoadError(f"{key} {value} outside instrument range {low}-{high}", n)
    return value


def parse_raw_record(record: dict, n: int | None = None) -> RawResponse:
    if not isinstance(record, dict):
        raise AnnotationLoadError("record is not an object", n)
    if "version" in record and str(record["version"]) != RAW_FORMAT_VERSION:
        raise AnnotationLoadError(f"unsupported format version {record['version']!r}", n)
    for key in ("annotator", "target", "subspace", "property", "response"):
        if key not in record:
            raise AnnotationLoadError(f"missing field {key!r}", n)
    subspace = record["subspace"]
    prop = record["property"]
    if subspace not in SUBSPACES:
        raise AnnotationLoadError(f"unknown subspace {subspace!r}", n)

    target = record["target"]
    if subspace in EDGE_SUBSPACES:
        if not (isinstance(target, list) and len(target) == 2
                and all(isinstance(t, str) for t in target)):
            raise AnnotationLoadError(f"{subspace} target must be [source, target]", n)
        target = (target[0], target[1])
    elif not isinstance(target, str):
        raise AnnotationLoadError(f"{subspace} target must be a node id", n)

    confidence = record.get("confidence")
    applicable = record.get("applicable")
    supersense = record.get("supersense")
    if subspace in ("factuality", "genericity"):
        if prop not in SUBSPACES[subspace]:
            raise AnnotationLoadError(f"unknown {subspace} property {prop!r}", n)
        response = _check_int(record, "response", 0, 1, n)
        confidence = _check_int(record, "confidence", 1, 5, n)
    elif subspace == "time":
        if prop != "duration":
            raise AnnotationLoadError(f"time property must be 'duration', got {prop!r}", n)
        response = _check_int(record, "response", 0, len(DURATIONS) - 1, n)
        confidence = _check_int(record, "confidence", 1, 5, n)
    elif subspace == "wordsense":
        if confidence is not None:
            raise AnnotationLoadError("wordsense responses carry no confidence", n)
        response = _check_int(record, "response", 0, 1, n)
        if supersense is None:
            try:
                supersense = supersense_of(prop)
            except ValueError as exc:
                raise AnnotationLoadError(str(exc), n) from None
        if f"supersense.{supersense}" not in SUBSPACES["wordsense"]:
            raise AnnotationLoadError(f"sense {prop!r} is not in a noun supersense", n)
    else:  # protoroles
        if prop not in PROTOROLES:
            raise AnnotationLoadError(f"unknown protoroles property {prop!r}", n)
        if confidence is not None:
            raise AnnotationLoadError("protoroles responses carry no confidence", n)
        response = _check_int(record, "response", 1, 5, n)
        if response <= 3 and not isinstance(applicable, bool):
            raise AnnotationLoadError(
                "protoroles responses of 3 or less need a boolean 'applicable'", n
            )
        if response >= 4 and applicable is False:
            raise AnnotationLoadError("response >= 4 cannot be marked inapplicable", n)
    if subspace != "protoroles" and applicable is not None:
        raise AnnotationLoadError("'applicable' is only defined for protoroles", n)
    return RawResponse(
        annotator_id=str(record["annotator"]),
        target=target,
        subspace=subspace,
        property=prop,
        response=response,
        confidence=confidence,
        applicable=applicable,
        supersense=supersense,
    )


def read_raw_annotations(lines: Iterable[str]) -> RawAnnotationSet:
    out = RawAnnotationSet()
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AnnotationLoadError(f"invalid JSON: {exc.msg}", n) from None
        out.add(parse_raw_record(record, n))
    return out


def load_raw_annotations(path: str | Path) -> RawAnnotationSet:
    with open(path, encoding="utf-8") as f:
        return read_raw_annotations(f)


def _node_kind_required(subspace: str, prop: str) -> str:
    if subspace in ("factuality", "time"):
        return "predicate"
    if subspace == "wordsense":
        return "argument"
    return "predicate" if prop.startswith("pred-") else "argument"


def attach_attributes(u: UdsGraph, attrs: dict[tuple[Target, str, str], AttributeValue]) -> UdsGraph:
    """Return a copy of ``u`` carrying ``<subspace>.<property>`` and its confidence."""
    out = u.copy()
    for (target, subspace, prop), av in attrs.items():
        if subspace not in SUBSPACES or prop not in SUBSPACES[subspace]:
            raise AttachmentError(f"unknown attribute {subspace}.{prop}")
        if subspace in EDGE_SUBSPACES:
            if not isinstance(target, tuple):
                raise AttachmentError(f"{subspace} attaches to edges, got node {target!r}")
            try:
                edge = out.semantics_edge(*target, domain="semantics")
            except KeyError:
                raise AttachmentError(f"no semantics edge {target[0]} -> {target[1]}") from None
            if (edge.type != "dependency" or out.is_performative(edge.source)
                    or out.is_performative(edge.target)):
                raise AttachmentError(
                    f"{subspace} needs a predicate-argument dependency edge, got {target}"
                )
            store = edge.attributes
        else:
            if not isinstance(target, str):
                raise AttachmentError(f"{subspace} attaches to nodes, got edge {target!r}")
            if target not in out.semantics_nodes:
                raise AttachmentError(f"no semantics node {target!r}")
            store = out.semantics_nodes[target]
            kind = _node_kind_required(subspace, prop)
            if store.get("type") != kind:
                raise AttachmentError(
                    f"{subspace}.{prop} is only defined on {kind} nodes; "
                    f"{target!r} is {store.get('type', 'performative')!r}"
                )
        store[attribute_key(subspace, prop)] = float(av.value)
        store[confidence_key(subspace, prop)] = float(av.confidence)
    return out


def annotated_subspaces(attrs: dict) -> set[str]:
    return {s for s in SUBSPACES for k in attrs if k.startswith(s + ".")}


@dataclass
class CrossTab:
    labels: tuple[str, ...]
    nodes: np.ndarray
    edges: np.ndarray


def crosstab_counts(corpus: Iterable[UdsGraph], splits=("train", "dev", "test")) -> dict[str, CrossTab]:
    """Per-split counts of nodes (and protoroles edges) sharing node subspaces.

    ``nodes[r, c]`` counts semantics nodes annotated for both subspaces;
    ``edges[r, c]`` counts protoroles-annotated edges where one endpoint is
    annotated for ``r`` and the other for ``c``.
    """
    k = len(NODE_SUBSPACES)
    tabs = {s: CrossTab(NODE_SUBSPACES, np.zeros((k, k), int), np.zeros((k, k), int))
            for s in splits}
    index = {s: i for i, s in enumerate(NODE_SUBSPACES)}
    for u in corpus:
        split = u.split or "train"
        tab = tabs.setdefault(split, CrossTab(NODE_SUBSPACES, np.zeros((k, k), int),
                                              np.zeros((k, k), int)))
        marks = {}
        for node_id, attrs in u.semantics_nodes.items():
            have = np.zeros(k, bool)
            for s in annotated_subspaces(attrs) & set(NODE_SUBSPACES):
                have[index[s]] = True
            marks[node_id] = have
            tab.nodes += np.outer(have, have)
        for e in u.semantics_edges:
            if e.domain != "semantics" or "protoroles" not in annotated_subspaces(e.attributes):
                continue
            a, b = marks[e.source], marks[e.target]
            tab.edges += (np.outer(a, b) | np.outer(b, a))
    return tabs


def render_crosstab(matrix: np.ndarray, labels: Iterable[str]) -> str:
    """Upper-triangular table with blanks below the diagonal."""
    names = [SUBSPACE_LABELS.get(l, l) for l in labels]
    cells = [[f"{int(v):,}" if j >= i else "" for j, v in enumerate(row)]
             for i, row in enumerate(matrix)]
    width0 = max(len(n) for n in names)
    widths = [max(len(names[j]), *(len(r[j]) for r in cells)) for j in range(len(names))]
    lines = [" " * width0 + "  " + "  ".join(n.rjust(w) for n, w in zip(names, widths))]
    for name, row in zip(names, cells):
        lines.append(name.ljust(width0) + "  " + "  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def render_crosstabs(tabs: dict[str, CrossTab]) -> str:
    blocks = ["Annotated Nodes"]
    for split, tab in tabs.items():
        blocks += ["", split.capitalize(), render_crosstab(tab.nodes, tab.labels)]
    blocks += ["", "", "Annotated Edges + Nodes"]
    for split, tab in tabs.items():
        blocks += ["", split.capitalize(), render_crosstab(tab.edges, tab.labels)]
    return "\n".join(blocks) + "\n"
