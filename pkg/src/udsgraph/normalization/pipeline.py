"""Raw responses in, z-scored attribute values with confidences out."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ..annotations import (
    DURATIONS, NOUN_SUPERSENSES, SUBSPACES, AttributeValue, RawAnnotationSet, RawResponse,
    Target,
)
from .aggregate import aggregate_supersenses, combine_protoroles, zscore_attributes
from .models import (
    FitDiagnostics, Observation, fit_applicability, fit_logistic_mem, fit_multinomial_mem,
    fit_ordinal_mem,
)
from .optim import OptimizerConfig
from .ridit import ridit_score

AttributeKey = tuple[Target, str, str]


@dataclass
class NormalizationResult:
    attributes: dict[AttributeKey, AttributeValue] = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(d["converged"] for d in self.diagnostics)


def _record(subspace: str, prop: str, model: str, diag: FitDiagnostics) -> dict:
    return {
        "subspace": subspace,
        "property": prop,
        "model": model,
        "loss": diag.loss,
        "initial_loss": diag.initial_loss,
        "iterations": diag.iterations,
        "outer_iterations": diag.outer_iterations,
        "converged": diag.converged,
    }


def _ridit(responses: list[RawResponse]):
    levels = defaultdict(list)
    for r in responses:
        levels[r.annotator_id].append(r.confidence)
    return ridit_score(levels)


def _binary(responses, cfg, subspace, values, conf, diags):
    weights = _ridit(responses)
    by_prop = defaultdict(list)
    for r in responses:
        by_prop[r.property].append(Observation(r.target, r.annotator_id, r.response, r.confidence))
    for prop in sorted(by_prop):
        fit = fit_logistic_mem(by_prop[prop], weights, cfg)
        for target, beta in fit.fixed_effects.items():
            values[(target, subspace, prop)] = beta
            conf[(target, subspace, prop)] = fit.confidences[target]
        diags.append(_record(subspace, prop, "logistic", fit.diagnostics))


def _time(responses, cfg, values, conf, diags):
    data = [Observation(r.target, r.annotator_id, r.response, r.confidence) for r in responses]
    fit = fit_multinomial_mem(data, _ridit(responses), cfg, n_classes=len(DURATIONS))
    for target, beta in fit.fixed_effects.items():
        for k, name in enumerate(DURATIONS):
            values[(target, "time", f"dur-{name}")] = float(beta[k])
            conf[(target, "time", f"dur-{name}")] = fit.confidences[target]
    diags.append(_record("time", "duration", "multinomial", fit.diagnostics))


def _wordsense(responses, cfg, sense_map, values, conf, diags):
    senses = dict(sense_map or {})
    for r in responses:
        senses.setdefault(r.property, r.supersense)
    data = [Observation((r.target, r.property), r.annotator_id, r.response) for r in responses]
    fit = fit_logistic_mem(data, None, cfg)
    gamma, d = aggregate_supersenses(fit.fixed_effects, fit.confidences, senses, NOUN_SUPERSENSES)
    for (arg, sup), value in gamma.items():
        values[(arg, "wordsense", f"supersense.{sup}")] = value
        conf[(arg, "wordsense", f"supersense.{sup}")] = d[(arg, sup)]
    diags.append(_record("wordsense", "sense", "logistic", fit.diagnostics))


def _protoroles(responses, cfg, zscore_first, values, conf, diags):
    ordinal = [Observation((r.target, r.property), r.annotator_id, r.response) for r in responses]
    fit = fit_ordinal_mem(ordinal, cfg)
    applicability = fit_applicability(
        [((r.target, r.property), r.annotator_id, r.response, r.applicable) for r in responses], cfg
    )
    beta = fit.fixed_effects
    if zscore_first:
        beta = zscore_attributes(beta, group=lambda key: key[1])
    combined = combine_protoroles(beta, applicability.fixed_effects)
    for (edge, prop), value in combined.items():
        values[(edge, "protoroles", prop)] = value
        conf[(edge, "protoroles", prop)] = fit.confidences[(edge, prop)]
    diags.append(_record("protoroles", "ordinal", "ordinal", fit.diagnostics))
    diags.append(_record("protoroles", "applicability", "logistic", applicability.diagnostics))


def normalize(raw: RawAnnotationSet, cfg: OptimizerConfig | None = None,
              sense_map: Mapping[str, str] | None = None, zscore: bool = True,
              protoroles_zscore_first: bool = False) -> NormalizationResult:
    """Fit every annotated subspace and return attribute values keyed by target.

    Factuality and genericity get one ridit-weighted logistic fit per
    property, time one multinomial fit over the eleven durations, wordsense
    one unweighted logistic fit over (argument, sense) items followed by
    supersense aggregation, and protoroles a joint ordinal fit over
    (edge, property) items scaled by the applicability fit.

    Values are z-scored per (subspace, property). For protoroles the
    applicability scaling happens first unless ``protoroles_zscore_first``.
    """
    cfg = cfg or OptimizerConfig()
    values: dict[AttributeKey, float] = {}
    conf: dict[AttributeKey, float] = {}
    diags: list[dict] = []
    for subspace in raw.subspaces():
        responses = raw.subspace(subspace)
        if subspace in ("factuality", "genericity"):
            _binary(responses, cfg, subspace, values, conf, diags)
        elif subspace == "time":
            _time(responses, cfg, values, conf, diags)
        elif subspace == "wordsense":
            _wordsense(responses, cfg, sense_map, values, conf, diags)
        else:
            _protoroles(responses, cfg, protoroles_zscore_first, values, conf, diags)
    if zscore and values:
        values = zscore_attributes(values)
    order = {s: n for n, s in enumerate(SUBSPACES)}
    keys = sorted(values, key=lambda k: (order[k[1]], k[2], json.dumps(k[0])))
    attrs = {k: AttributeValue(values[k], min(1.0, max(0.0, conf[k]))) for k in keys}
    return NormalizationResult(attrs, diags)


def attribute_record(key: AttributeKey, av: AttributeValue) -> dict:
    target, subspace, prop = key
    return {
        "target": list(target) if isinstance(target, tuple) else target,
        "subspace": subspace,
        "property": prop,
        "value": av.value,
        "confidence": av.confidence,
    }


def write_attributes(attrs: Mapping[AttributeKey, AttributeValue], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for key, av in attrs.items():
            f.write(json.dumps(attribute_record(key, av), sort_keys=True) + "\n")


def read_attributes(lines: Iterable[str]) -> dict[AttributeKey, AttributeValue]:
    out = {}
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            target = rec["target"]
            target = tuple(target) if isinstance(target, list) else target
            out[(target, rec["subspace"], rec["property"])] = AttributeValue(
                float(rec["value"]), float(rec["confidence"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"attribute record {n}: {exc}") from None
    return out


def load_attributes(path: str | Path) -> dict[AttributeKey, AttributeValue]:
    with open(path, encoding="utf-8") as f:
        return read_attributes(f)
