"""Rule-based predicate/argument extraction over a syntax graph.

The rules approximate PredPatt closely enough to reproduce its output on
simple clauses, complement clauses, copular predicates and verb
coordination:

1. A token heads a predicate when its incoming relation is a trigger
   relation and it is a VERB, or when it has a ``cop`` dependent. A VERB
   attached by ``conj`` to a predicate head is also a predicate head.
2. A predicate's arguments are its dependents carrying an argument
   relation. A conjunct without a subject of its own borrows the subject
   of the predicate it is conjoined to.
3. An argument spans the subtree of its head. With ``case_lift`` the
   ``case`` dependents of the argument head are moved into the predicate
   span instead. Clausal arguments (a clausal relation whose dependent is
   itself a predicate head) keep their full subtree, markers included.
4. A predicate spans its head plus the lifted case markers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .syntax import SyntaxGraph, subtree_positions

CONJ_OF_PREDICATE = "conj"
SUBJECT_RELATIONS = frozenset({"nsubj", "nsubjpass", "csubj", "csubjpass"})


@dataclass(frozen=True)
class RuleConfig:
    predicate_trigger_relations: frozenset[str] = frozenset(
        {"root", "ccomp", "xcomp", "advcl", "acl", "acl:relcl", CONJ_OF_PREDICATE}
    )
    argument_relations: frozenset[str] = frozenset(
        {"nsubj", "nsubjpass", "csubj", "obj", "dobj", "iobj", "ccomp", "xcomp", "obl"}
    )
    clausal_relations: frozenset[str] = frozenset({"ccomp", "csubj", "xcomp"})
    relation_aliases: dict[str, str] = field(
        default_factory=lambda: {"dobj": "obj", "nmod": "obl", "nsubj:pass": "nsubjpass"}
    )
    case_lift: bool = True

    def __post_init__(self):
        chained = sorted(k for k, v in self.relation_aliases.items() if v in self.relation_aliases)
        if chained:
            raise ValueError(f"relation aliases are not idempotent for {chained}")

    @classmethod
    def from_dict(cls, data: dict) -> RuleConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown rule config keys: {unknown}")
        kwargs = {}
        for key, value in data.items():
            if key in ("relation_aliases", "case_lift"):
                kwargs[key] = value
            else:
                kwargs[key] = frozenset(value)
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> RuleConfig:
        """Read a JSON object whose keys are field names; missing keys keep defaults."""
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class ArgumentStructure:
    head_position: int
    span: tuple[int, ...]
    is_clausal: bool = False


@dataclass(frozen=True)
class PredicateStructure:
    head_position: int
    span: tuple[int, ...]
    arguments: tuple[ArgumentStructure, ...] = ()


def normalize_relation(deprel: str, cfg: RuleConfig) -> str:
    return cfg.relation_aliases.get(deprel, deprel)


def _in(deprel: str, relations: frozenset[str], cfg: RuleConfig) -> bool:
    # subtyped labels (obl:tmod) fall back to their universal part
    rel = normalize_relation(deprel, cfg)
    if rel in relations:
        return True
    base = normalize_relation(rel.split(":", 1)[0], cfg)
    return base in relations


def _predicate_heads(g: SyntaxGraph, cfg: RuleConfig) -> set[int]:
    triggers = cfg.predicate_trigger_relations - {CONJ_OF_PREDICATE}
    heads = set()
    for p in g.positions:
        _, rel = g.head_of(p)
        if g.node(p).get("upos") == "VERB" and _in(rel, triggers, cfg):
            heads.add(p)
        elif any(_in(r, frozenset({"cop"}), cfg) for r, _ in g.dependents(p)):
            heads.add(p)
    if CONJ_OF_PREDICATE in cfg.predicate_trigger_relations:
        frontier = sorted(heads)
        while frontier:
            nxt = []
            for p in frontier:
                for rel, dep in g.dependents(p):
                    if (dep not in heads and _in(rel, frozenset({"conj"}), cfg)
                            and g.node(dep).get("upos") == "VERB"):
                        heads.add(dep)
                        nxt.append(dep)
            frontier = nxt
    return heads


def _argument(g: SyntaxGraph, cfg: RuleConfig, head: int, rel: str,
              pred_heads: set[int]) -> tuple[ArgumentStructure, list[int]]:
    """Build an argument and return it with the case markers lifted out of it."""
    subtree = subtree_positions(g, head)
    if head in pred_heads and _in(rel, cfg.clausal_relations, cfg):
        return ArgumentStructure(head, subtree, True), []
    lifted = []
    if cfg.case_lift:
        lifted = [d for r, d in g.dependents(head) if _in(r, frozenset({"case"}), cfg)]
    span = tuple(p for p in subtree if p not in lifted)
    return ArgumentStructure(head, span, False), lifted


def extract_predicates(g: SyntaxGraph, cfg: RuleConfig | None = None) -> list[PredicateStructure]:
    cfg = cfg or RuleConfig()
    pred_heads = _predicate_heads(g, cfg)

    own: dict[int, list[tuple[int, str]]] = {}
    for p in sorted(pred_heads):
        own[p] = [(d, r) for r, d in g.dependents(p) if _in(r, cfg.argument_relations, cfg)]

    def borrowed_subject(p: int) -> list[tuple[int, str]]:
        # walk up the conj chain to the first conjunct that has a subject
        seen = {p}
        while True:
            head, rel = g.head_of(p)
            if head == 0 or head not in pred_heads or not _in(rel, frozenset({"conj"}), cfg):
                return []
            subjects = [(d, r) for d, r in own[head] if _in(r, SUBJECT_RELATIONS, cfg)]
            if subjects:
                return subjects
            if head in seen:
                return []
            seen.add(head)
            p = head

    out = []
    for p in sorted(pred_heads):
        candidates = list(own[p])
        if not any(_in(r, SUBJECT_RELATIONS, cfg) for _, r in candidates):
            candidates.extend(borrowed_subject(p))
        args = []
        span = {p}
        for head, rel in sorted(set(candidates)):
            arg, lifted = _argument(g, cfg, head, rel, pred_heads)
            args.append(arg)
            span.update(lifted)
        out.append(PredicateStructure(p, tuple(sorted(span)), tuple(args)))
    return out
