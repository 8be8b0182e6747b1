# From raw crowd responses to attribute values
#
# Raw responses are simulated from the same mixed-effects models the
# normalizer fits, so we can watch what the fits recover.

from pathlib import Path
import json

import numpy as np

from udsgraph import graph_from_sentence, parse_conllu
from udsgraph.annotations import attach_attributes, read_raw_annotations
from udsgraph.normalization.models import fit_logistic_mem
from udsgraph.normalization.pipeline import normalize
from udsgraph.normalization.ridit import ridit_score
from udsgraph.synthetic import simulate_raw

DATA = Path(__file__).parent / "data"
graphs = [graph_from_sentence(s) for s in parse_conllu((DATA / "sentences.conllu").read_text())]

records = simulate_raw(graphs, seed=0)
print(len(records), "raw responses")
records[0]


# Confidence ratings are ridit scored per annotator: each level maps to the
# share of that annotator's ratings below it plus half the share at it.

ridit_score({"a": [1, 2, 2, 5]}).weights


# Normalize everything. Values are z-scored per property; confidences stay in [0, 1].

raw = read_raw_annotations(json.dumps(r) for r in records)
result = normalize(raw)
print(result.converged)
for d in result.diagnostics[:4]:
    print(d["subspace"], d["property"], d["model"], round(d["loss"], 2), d["iterations"])


# Factuality values for the predicates.

for (target, subspace, prop), av in result.attributes.items():
    if subspace == "factuality":
        print(f"{target:28} value {av.value:+.2f}  confidence {av.confidence:.2f}")


# How confidence reflects agreement. Three items share one panel of four
# annotators: a unanimous item, an item split down the middle with high
# confidence on both sides, and a split item where one side is unsure.

rng = np.random.default_rng(1)
data = [(f"bg{i}", f"a{a}", int(rng.random() < 0.5), int(rng.integers(1, 6)))
        for i in range(30) for a in rng.choice(8, 4, replace=False)]
for k, a in enumerate(["a0", "a1", "a2", "a3"]):
    data.append(("unanimous", a, 1, 5))
    data.append(("split-high", a, int(k < 2), 5))
    data.append(("split-mixed", a, int(k < 2), 5 if k < 2 else 1))
levels = {}
for item, annotator, response, confidence in data:
    levels.setdefault(annotator, []).append(confidence)
fit = fit_logistic_mem(data, ridit_score(levels))
{k: round(fit.confidences[k], 3) for k in ("unanimous", "split-high", "split-mixed")}


# Attach the normalized values to the graphs.

u = graphs[0]
mine = {k: v for k, v in result.attributes.items()
        if (k[0][0] if isinstance(k[0], tuple) else k[0]).startswith(u.sentence_id + "-")}
annotated = attach_attributes(u, mine)
sorted(annotated.semantics_nodes["gave-semantics-pred-2"])[:6]
