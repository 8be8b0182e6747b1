"""Mixed-effects models turning annotator responses into attribute values.

Every model has one fixed effect per item (the attribute value) and one
random effect per annotator (how that annotator maps values onto the
response scale). Random-effect variances are never optimized: each outer
iteration fits the parameters with the variance held fixed, then
re-estimates the variance from the fitted random effects.

All free parameters start at zero, so fits are reproducible bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.linalg import helmert
from scipy.special import expit, log_expit, logsumexp

from .optim import OptimizerConfig, minimize
from .ridit import RiditTable

LOG_2PI = np.log(2 * np.pi)
N_ORDINAL = 5
# smallest gap between adjacent cutpoints; keeps them distinct in floating point
MIN_GAP = 1e-6


class Observation(NamedTuple):
    item: Hashable
    annotator: Hashable
    response: int
    confidence: int | None = None


@dataclass
class FitDiagnostics:
    loss: float
    initial_loss: float
    iterations: int
    outer_iterations: int
    converged: bool
    variance: list[float] = field(default_factory=list)


@dataclass
class MemFit:
    model: str
    fixed_effects: dict
    random_effects: dict
    confidences: dict
    diagnostics: FitDiagnostics
    options: dict = field(default_factory=dict)

    def predict(self, item, annotator) -> np.ndarray | float:
        """Response distribution for one (item, annotator) under the fitted model.

        Logistic fits give P(y = 1); multinomial fits a probability vector
        over classes; ordinal fits a vector over the five levels.
        """
        beta = self.fixed_effects[item]
        u = self.random_effects[annotator]
        if self.model == "logistic":
            return float(expit(beta + u))
        if self.model == "multinomial":
            eta = np.asarray(beta) + np.asarray(u)
            return np.exp(eta - logsumexp(eta))
        return ordinal_probabilities(beta, u)


@dataclass
class _Design:
    items: list
    annotators: list
    item_idx: np.ndarray
    ann_idx: np.ndarray
    y: np.ndarray
    w: np.ndarray


def _design(data: Iterable, weights: RiditTable | None = None,
            items: Sequence | None = None) -> _Design:
    obs = [d if isinstance(d, Observation) else Observation(*d) for d in data]
    item_keys = list(dict.fromkeys(o.item for o in obs))
    if items is not None:
        seen = set(item_keys)
        missing = [i for i in items if i not in seen]
        if missing:
            warnings.warn(f"{len(missing)} item(s) have no annotations and are excluded: "
                          f"{missing[:5]}", stacklevel=3)
    ann_keys = list(dict.fromkeys(o.annotator for o in obs))
    ipos = {k: n for n, k in enumerate(item_keys)}
    apos = {k: n for n, k in enumerate(ann_keys)}
    if weights is None:
        w = np.ones(len(obs))
    else:
        w = np.array([weights.weight(o.annotator, o.confidence) for o in obs], dtype=float)
    return _Design(
        item_keys, ann_keys,
        np.array([ipos[o.item] for o in obs], dtype=np.intp),
        np.array([apos[o.annotator] for o in obs], dtype=np.intp),
        np.array([o.response for o in obs], dtype=np.intp),
        w,
    )


def _alternate(objective: Callable[[np.ndarray, np.ndarray], tuple[float, np.ndarray]],
               estimate: Callable[[np.ndarray, np.ndarray], np.ndarray], variance0: np.ndarray,
               x0: np.ndarray, cfg: OptimizerConfig):
    """Alternate parameter fits with variance re-estimation until the variance settles."""
    x = np.array(x0, dtype=float)
    variance = np.atleast_1d(np.asarray(variance0, dtype=float))
    total = 0
    converged = False
    outer = 0
    for outer in range(1, cfg.max_outer_iterations + 1):
        res = minimize(lambda v: objective(v, variance), x, cfg)
        x = res.x
        total += res.iterations
        if not cfg.reestimate_variance:
            converged = res.converged
            break
        new = np.atleast_1d(estimate(x, variance))
        if np.all(np.abs(new - variance) <= cfg.variance_tolerance * variance):
            converged = res.converged
            break
        variance = new
    loss, _ = objective(x, variance)
    initial, _ = objective(np.array(x0, dtype=float), variance)
    diag = FitDiagnostics(float(loss), float(initial), total, outer, bool(converged),
                          variance.tolist())
    return x, variance, diag


def _variance(effects: np.ndarray, curvature: np.ndarray | None, cfg: OptimizerConfig,
              axis=None) -> np.ndarray:
    """Random-effect variance from fitted effects (and their curvature for "laplace")."""
    if cfg.variance_estimator == "laplace" and curvature is not None:
        est = np.mean(effects ** 2 + 1.0 / curvature, axis=axis)
    else:
        est = np.var(effects, axis=axis)
    return np.maximum(est, cfg.variance_floor)


def _ridge(beta: np.ndarray, cfg: OptimizerConfig) -> tuple[float, np.ndarray]:
    """Log-penalty and gradient of the optional prior on fixed effects."""
    v = cfg.fixed_effect_variance
    if v is None:
        return 0.0, 0.0
    return -np.sum(beta * beta) / (2 * v), -beta / v


def fit_logistic_mem(data: Iterable, weights: RiditTable | None = None,
                     cfg: OptimizerConfig | None = None, items: Sequence | None = None) -> MemFit:
    """Weighted logistic MEM with per-item values and per-annotator intercepts.

    ``data`` holds ``(item, annotator, response, confidence)`` observations
    with binary responses. With a RiditTable each observation is weighted by
    its annotator's ridit-scored confidence; with None all weights are 1.

    The confidence of an item is the weighted mean likelihood its fitted
    value assigns to the observed responses.
    """
    cfg = cfg or OptimizerConfig()
    d = _design(data, weights, items)
    if np.any((d.y != 0) & (d.y != 1)):
        raise ValueError("logistic responses must be 0 or 1")
    ni, na = len(d.items), len(d.annotators)

    def objective(x, var):
        var = var[0]
        beta, u = x[:ni], x[ni:]
        eta = beta[d.item_idx] + u[d.ann_idx]
        ll = np.sum(d.w * (d.y * eta - np.logaddexp(0.0, eta)))
        penalty = -0.5 * na * (LOG_2PI + np.log(var)) - np.sum(u * u) / (2 * var)
        ridge, g_ridge = _ridge(beta, cfg)
        r = d.w * (d.y - expit(eta))
        g_beta = np.bincount(d.item_idx, r, ni) + g_ridge
        g_u = np.bincount(d.ann_idx, r, na) - u / var
        return -(ll + penalty + ridge), -np.concatenate([g_beta, g_u])

    def estimate(x, var):
        beta, u = x[:ni], x[ni:]
        p = expit(beta[d.item_idx] + u[d.ann_idx])
        curvature = np.bincount(d.ann_idx, d.w * p * (1 - p), na) + 1.0 / var[0]
        return _variance(u, curvature, cfg)

    x, _, diag = _alternate(objective, estimate, [cfg.initial_variance], np.zeros(ni + na), cfg)
    beta, u = x[:ni], x[ni:]
    p = expit(beta[d.item_idx] + u[d.ann_idx])
    lik = np.where(d.y == 1, p, 1 - p)
    conf = np.bincount(d.item_idx, d.w * lik, ni) / np.bincount(d.item_idx, d.w, ni)
    return MemFit(
        "logistic",
        dict(zip(d.items, beta.tolist())),
        dict(zip(d.annotators, u.tolist())),
        dict(zip(d.items, conf.tolist())),
        diag,
    )


def fit_multinomial_mem(data: Iterable, weights: RiditTable | None = None,
                        cfg: OptimizerConfig | None = None, n_classes: int = 11,
                        items: Sequence | None = None) -> MemFit:
    """Multinomial logistic MEM with vector-valued item and annotator effects.

    Responses are class indices ``0..n_classes-1``. Both effect vectors are
    constrained to sum to zero, which pins down the softmax; each class
    dimension of the annotator effects gets its own variance. An item's
    confidence (shared by all its classes) is the weighted mean likelihood
    of its observed responses.
    """
    cfg = cfg or OptimizerConfig()
    d = _design(data, weights, items)
    K = n_classes
    if np.any((d.y < 0) | (d.y >= K)):
        raise ValueError(f"multinomial responses must lie in 0..{K - 1}")
    ni, na = len(d.items), len(d.annotators)
    basis = helmert(K).T  # K x (K-1), orthonormal columns summing to zero
    rows = np.arange(len(d.y))
    onehot = np.zeros((len(d.y), K))
    onehot[rows, d.y] = 1.0

    def unpack(x):
        theta_b = x[: ni * (K - 1)].reshape(ni, K - 1)
        theta_u = x[ni * (K - 1):].reshape(na, K - 1)
        return theta_b @ basis.T, theta_u @ basis.T

    def probabilities(B, U):
        eta = B[d.item_idx] + U[d.ann_idx]
        logp = eta - logsumexp(eta, axis=1, keepdims=True)
        return logp, np.exp(logp)

    def objective(x, var):
        B, U = unpack(x)
        logp, p = probabilities(B, U)
        ll = np.sum(d.w * logp[rows, d.y])
        penalty = -0.5 * na * np.sum(LOG_2PI + np.log(var)) - np.sum(U * U / (2 * var))
        ridge, g_ridge = _ridge(B, cfg)
        resid = d.w[:, None] * (onehot - p)
        g_B = np.zeros((ni, K))
        np.add.at(g_B, d.item_idx, resid)
        g_B += g_ridge
        g_U = np.zeros((na, K))
        np.add.at(g_U, d.ann_idx, resid)
        g_U -= U / var
        grad = np.concatenate([(g_B @ basis).ravel(), (g_U @ basis).ravel()])
        return -(ll + penalty + ridge), -grad

    def estimate(x, var):
        B, U = unpack(x)
        _, p = probabilities(B, U)
        curvature = np.zeros((na, K))
        np.add.at(curvature, d.ann_idx, d.w[:, None] * p * (1 - p))
        return _variance(U, curvature + 1.0 / var, cfg, axis=0)

    x, _, diag = _alternate(objective, estimate, np.full(K, cfg.initial_variance),
                            np.zeros((ni + na) * (K - 1)), cfg)
    B, U = unpack(x)
    _, p = probabilities(B, U)
    lik = p[rows, d.y]
    conf = np.bincount(d.item_idx, d.w * lik, ni) / np.bincount(d.item_idx, d.w, ni)
    return MemFit(
        "multinomial",
        {k: B[n].copy() for n, k in enumerate(d.items)},
        {k: U[n].copy() for n, k in enumerate(d.annotators)},
        dict(zip(d.items, conf.tolist())),
        diag,
        {"n_classes": K},
    )


def cutpoints_from_params(center: np.ndarray, log_gaps: np.ndarray) -> np.ndarray:
    """Strictly increasing cutpoints: gaps of ``MIN_GAP + exp(log_gaps)``, mean ``center``."""
    gaps = MIN_GAP + np.exp(log_gaps)
    raw = np.concatenate([np.zeros(gaps.shape[:-1] + (1,)), np.cumsum(gaps, axis=-1)], axis=-1)
    return np.asarray(center)[..., None] + raw - raw.mean(axis=-1, keepdims=True)


def params_from_cutpoints(cutpoints) -> tuple[float, np.ndarray]:
    cutpoints = np.asarray(cutpoints, dtype=float)
    gaps = np.diff(cutpoints)
    if cutpoints.shape != (N_ORDINAL - 1,) or np.any(gaps <= MIN_GAP):
        raise ValueError(f"need 4 strictly increasing cutpoints, got {cutpoints.tolist()}")
    return float(cutpoints.mean()), np.log(gaps - MIN_GAP)


def ordinal_probabilities(beta, cutpoints) -> np.ndarray:
    """P(y = l), l = 1..5, where P(y <= l) = logistic(cutpoint_l - beta)."""
    cutpoints = np.asarray(cutpoints, dtype=float)
    cdf = expit(cutpoints - np.asarray(beta, dtype=float)[..., None])
    ones = np.ones(cdf.shape[:-1] + (1,))
    return np.diff(np.concatenate([0 * ones, cdf, ones], axis=-1), axis=-1)


def _ordinal_loglik(a: np.ndarray, b: np.ndarray, y: np.ndarray):
    """log P(y) and its derivatives in the upper (a) and lower (b) latent bounds.

    P(y) = logistic(a) - logistic(b); ``a`` is unused for the top level and
    ``b`` for the bottom one.
    """
    top, bottom = y == N_ORDINAL, y == 1
    a = np.where(top, 0.0, a)
    b = np.where(bottom, 0.0, b)
    gap = np.where(top | bottom, 1.0, a - b)
    logp = np.where(top, 0.0, log_expit(a)) + np.where(bottom, 0.0, log_expit(-b))
    logp = logp + np.where(top | bottom, 0.0, np.log(-np.expm1(-gap)))
    inner = np.where(top | bottom, 0.0, 1.0 / np.expm1(gap))
    da = np.where(top, 0.0, expit(-a) + inner)
    db = np.where(bottom, 0.0, -expit(b) - inner)
    # second derivative along a joint shift of a and b
    shift2 = (da * (1 - 2 * expit(a)) + db * (1 - 2 * expit(b)) - (da + db) ** 2)
    return logp, da, db, shift2


def fit_ordinal_mem(data: Iterable, cfg: OptimizerConfig | None = None,
                    gap_rate: str = "inverse-mean",
                    fixed_cutpoints: Mapping[Hashable, Sequence[float]] | None = None,
                    items: Sequence | None = None) -> MemFit:
    """Ordinal (cumulative logit) MEM with four cutpoints per annotator.

    ``data`` holds ``(item, annotator, response)`` with responses 1..5 and
    P(y <= l) = logistic(cutpoint_l - value). Each annotator's cutpoints are
    a center plus positive gaps, so they increase strictly. Centers get a
    normal penalty. Each gap position gets an exponential penalty whose
    rate is re-estimated from the fitted gaps: ``1 / mean(gap)`` by default,
    or ``1 / Var(gap)`` with ``gap_rate="inverse-variance"``.

    Annotators in ``fixed_cutpoints`` keep the given cutpoints and are left
    out of both penalties.
    """
    cfg = cfg or OptimizerConfig()
    if gap_rate not in ("inverse-variance", "inverse-mean"):
        raise ValueError(f"unknown gap_rate {gap_rate!r}")
    d = _design(data, None, items)
    if np.any((d.y < 1) | (d.y > N_ORDINAL)):
        raise ValueError("ordinal responses must lie in 1..5")
    ni, na = len(d.items), len(d.annotators)
    ng = N_ORDINAL - 2  # gaps between the four cutpoints
    upper = np.clip(d.y - 1, 0, N_ORDINAL - 2)
    lower = np.clip(d.y - 2, 0, N_ORDINAL - 2)
    # dcut_l / dgap_m = [l > m] - (ng - m) / (ng + 1)
    jac = (np.arange(ng + 1)[:, None] > np.arange(ng)[None, :]).astype(float)
    jac -= (ng - np.arange(ng))[None, :] / (ng + 1)

    x0 = np.zeros(ni + na + na * ng)
    free = np.ones(na, bool)
    for a, cut in (fixed_cutpoints or {}).items():
        if a not in d.annotators:
            continue
        n = d.annotators.index(a)
        free[n] = False
        center, log_gaps = params_from_cutpoints(cut)
        x0[ni + n] = center
        x0[ni + na + n * ng: ni + na + (n + 1) * ng] = log_gaps
    nfree = int(free.sum())
    mask = np.concatenate([np.ones(ni), free, np.repeat(free, ng)])

    def unpack(x):
        return x[:ni], x[ni:ni + na], x[ni + na:].reshape(na, ng)

    def objective(x, state):
        var_c, rate = state[0], state[1:]
        beta, center, log_gaps = unpack(x)
        cut = cutpoints_from_params(center, log_gaps)
        bi = beta[d.item_idx]
        logp, da, db, _ = _ordinal_loglik(cut[d.ann_idx, upper] - bi,
                                          cut[d.ann_idx, lower] - bi, d.y)
        egaps = np.exp(log_gaps)
        gaps = MIN_GAP + egaps
        c, gf = center[free], gaps[free]
        penalty = (-0.5 * nfree * (LOG_2PI + np.log(var_c)) - np.sum(c * c) / (2 * var_c)
                   + nfree * np.sum(np.log(rate)) - np.sum(rate * gf))
        ridge, g_ridge = _ridge(beta, cfg)
        g_beta = -np.bincount(d.item_idx, da + db, ni) + g_ridge
        g_cut = np.zeros((na, ng + 1))
        np.add.at(g_cut, (d.ann_idx, upper), da)
        np.add.at(g_cut, (d.ann_idx, lower), db)
        g_center = g_cut.sum(axis=1) - center / var_c
        g_log_gaps = ((g_cut @ jac) - rate * free[:, None]) * egaps
        grad = np.concatenate([g_beta, g_center, g_log_gaps.ravel()]) * mask
        return -(np.sum(logp) + penalty + ridge), -grad

    def estimate(x, state):
        if nfree == 0:
            return state
        beta, center, log_gaps = unpack(x)
        cut = cutpoints_from_params(center, log_gaps)
        bi = beta[d.item_idx]
        *_, shift2 = _ordinal_loglik(cut[d.ann_idx, upper] - bi, cut[d.ann_idx, lower] - bi, d.y)
        curvature = np.bincount(d.ann_idx, -shift2, na) + 1.0 / state[0]
        var_c = _variance(center[free], curvature[free], cfg)
        gaps = MIN_GAP + np.exp(log_gaps[free])
        if gap_rate == "inverse-variance":
            rate = 1.0 / np.maximum(np.var(gaps, axis=0), cfg.variance_floor)
        else:
            rate = 1.0 / np.maximum(gaps.mean(axis=0), cfg.variance_floor)
        return np.concatenate([np.atleast_1d(var_c), rate])

    state0 = np.concatenate([[cfg.initial_variance], np.full(ng, 1.0 / cfg.initial_variance)])
    x, _, diag = _alternate(objective, estimate, state0, x0, cfg)
    beta, center, log_gaps = unpack(x)
    cut = cutpoints_from_params(center, log_gaps)
    probs = ordinal_probabilities(beta[d.item_idx], cut[d.ann_idx])
    lik = probs[np.arange(len(d.y)), d.y - 1]
    conf = np.bincount(d.item_idx, lik, ni) / np.bincount(d.item_idx, None, ni)
    return MemFit(
        "ordinal",
        dict(zip(d.items, beta.tolist())),
        {k: cut[n].copy() for n, k in enumerate(d.annotators)},
        dict(zip(d.items, conf.tolist())),
        diag,
        {"gap_rate": gap_rate},
    )


def fit_applicability(data: Iterable, cfg: OptimizerConfig | None = None) -> MemFit:
    """Unweighted logistic MEM over applicability judgements.

    ``data`` holds ``(item, annotator, response, applicable)`` tuples.
    Applicability was only asked for responses of 3 or less, so higher
    responses (or a missing flag on them) count as applicable. The fitted
    fixed effects are the applicability values.
    """
    obs = []
    for item, annotator, response, applicable in data:
        if applicable is None:
            if response <= 3:
                raise ValueError(f"missing applicability for {item!r} by {annotator!r}")
            applicable = True
        obs.append(Observation(item, annotator, int(bool(applicable))))
    return fit_logistic_mem(obs, None, cfg)
