"""Synthetic raw annotations drawn from the normalization models themselves.

Useful for demos, tests and recovery checks: every record produced here is
valid input for ``read_raw_annotations``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy.special import expit, softmax

from .annotations import DURATIONS, PROTOROLES, SUBSPACES
from .semantics import UdsGraph

SENSE_KEYS = (
    "person%1:03:00::", "chris%1:18:00::", "dog%1:05:00::", "book%1:10:00::",
    "book%1:06:00::", "idea%1:09:00::", "city%1:15:00::", "day%1:28:00::",
)


def _annotators(rng, pool: int, k: int) -> list[str]:
    return [f"ann{a:02d}" for a in rng.choice(pool, size=min(k, pool), replace=False)]


def simulate_raw(graphs: Iterable[UdsGraph], seed: int = 0, n_annotators: int = 10,
                 per_item: int = 3, annotator_sd: float = 0.5) -> list[dict]:
    """Raw response records for every annotatable node and edge of ``graphs``."""
    rng = np.random.default_rng(seed)
    bias = {f"ann{a:02d}": rng.normal(0, annotator_sd) for a in range(n_annotators)}
    cuts = {a: np.sort(rng.normal(0, 1, 4)) * 1.5 for a in bias}
    records = []

    def binary(target, subspace, prop, beta):
        for a in _annotators(rng, n_annotators, per_item):
            records.append({
                "annotator": a, "target": target, "subspace": subspace, "property": prop,
                "response": int(rng.random() < expit(beta + bias[a])),
                "confidence": int(rng.integers(1, 6)),
            })

    for u in graphs:
        for node_id in u.predicate_nodes():
            if u.is_performative(node_id):
                continue
            binary(node_id, "factuality", "factual", rng.uniform(-3, 3))
            for prop in SUBSPACES["genericity"][:3]:
                binary(node_id, "genericity", prop, rng.uniform(-3, 3))
            logits = rng.normal(0, 2, len(DURATIONS))
            for a in _annotators(rng, n_annotators, per_item):
                records.append({
                    "annotator": a, "target": node_id, "subspace": "time",
                    "property": "duration",
                    "response": int(rng.choice(len(DURATIONS), p=softmax(logits))),
                    "confidence": int(rng.integers(1, 6)),
                })
        for node_id in u.argument_nodes():
            if u.is_performative(node_id):
                continue
            for prop in SUBSPACES["genericity"][3:]:
                binary(node_id, "genericity", prop, rng.uniform(-3, 3))
            senses = rng.choice(SENSE_KEYS, size=2, replace=False)
            for sense in senses:
                p = rng.uniform(0.1, 0.9)
                for a in _annotators(rng, n_annotators, per_item):
                    records.append({
                        "annotator": a, "target": node_id, "subspace": "wordsense",
                        "property": str(sense), "response": int(rng.random() < p),
                    })
        for e in u.semantics_edges:
            if (e.domain != "semantics" or e.type != "dependency" or u.is_performative(e.source)
                    or u.is_performative(e.target)):
                continue
            for prop in PROTOROLES:
                beta = rng.normal(0, 1.5)
                for a in _annotators(rng, n_annotators, per_item):
                    cdf = np.concatenate([expit(cuts[a] - beta), [1.0]])
                    response = int(np.searchsorted(cdf, rng.random())) + 1
                    rec = {"annotator": a, "target": [e.source, e.target],
                           "subspace": "protoroles", "property": prop, "response": response}
                    if response <= 3:
                        rec["applicable"] = bool(rng.random() < 0.7)
                    records.append(rec)
    return records
