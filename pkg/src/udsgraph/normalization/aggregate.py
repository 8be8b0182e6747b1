from __future__ import annotations

import warnings
from collections import defaultdict
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np
from scipy.special import expit


def combine_protoroles(beta: Mapping, delta: Mapping) -> dict:
    """Scale each ordinal value by its applicability probability, ``expit(delta) * beta``."""
    missing_delta = [k for k in beta if k not in delta]
    missing_beta = [k for k in delta if k not in beta]
    if missing_delta or missing_beta:
        raise KeyError(
            f"key mismatch: {len(missing_delta)} without applicability {missing_delta[:5]}, "
            f"{len(missing_beta)} without ordinal value {missing_beta[:5]}"
        )
    return {k: float(expit(delta[k]) * beta[k]) for k in beta}


def aggregate_supersenses(
    beta: Mapping[tuple[Hashable, Hashable], float],
    confidence: Mapping[tuple[Hashable, Hashable], float],
    sense_map: Mapping[Hashable, str],
    supersenses: Iterable[str] | None = None,
) -> tuple[dict, dict]:
    """Per-(argument, supersense) values from per-(argument, sense) values.

    The value is the best-scoring sense of the argument under that
    supersense, and its confidence is the highest sense confidence there.
    Supersenses with no candidate sense for the argument get the smallest
    sense value in ``beta`` with confidence 1.

    ``supersenses`` defaults to every supersense named in ``sense_map``.
    """
    if not beta:
        return {}, {}
    unmapped = sorted({s for _, s in beta if s not in sense_map}, key=str)
    if unmapped:
        raise KeyError(f"senses without a supersense: {unmapped[:5]}")
    if supersenses is None:
        supersenses = sorted(set(sense_map.values()))
    else:
        supersenses = list(supersenses)
    floor = min(beta.values())
    by_arg: dict[Hashable, dict[str, list[tuple[float, float]]]] = defaultdict(lambda: defaultdict(list))
    for (arg, sense), value in beta.items():
        by_arg[arg][sense_map[sense]].append((value, confidence[(arg, sense)]))
    gamma, d = {}, {}
    for arg, groups in by_arg.items():
        for sup in supersenses:
            members = groups.get(sup)
            if members:
                gamma[(arg, sup)] = max(v for v, _ in members)
                d[(arg, sup)] = max(c for _, c in members)
            else:
                gamma[(arg, sup)] = floor
                d[(arg, sup)] = 1.0
    return gamma, d


def zscore_attributes(values: Mapping, group: Callable[[Hashable], Hashable] | None = None) -> dict:
    """Standardize values to mean 0, sd 1 (population) within each group.

    ``group`` maps a key to its group; by default keys are
    ``(target, subspace, property)`` tuples grouped by ``(subspace, property)``.
    Groups with one item or no spread are only centered.
    """
    if group is None:
        group = lambda key: key[1:]  # noqa: E731
    members: dict[Hashable, list] = defaultdict(list)
    for key in values:
        members[group(key)].append(key)
    out = {}
    for g, keys in members.items():
        x = np.array([values[k] for k in keys], dtype=float)
        centered = x - x.mean()
        sd = x.std()
        if len(keys) < 2 or sd <= 1e-12 * max(1.0, abs(x.mean())):
            warnings.warn(f"group {g!r} has no spread; values only centered", stacklevel=2)
            z = centered
        else:
            z = centered / sd
        out.update(zip(keys, z.tolist()))
    return out
