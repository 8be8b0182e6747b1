import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize as scipy_minimize
from scipy.special import expit, logsumexp

from udsgraph.normalization.models import (
    Observation, _ordinal_loglik, cutpoints_from_params, fit_applicability, fit_logistic_mem,
    fit_multinomial_mem, fit_ordinal_mem, ordinal_probabilities,
)
from udsgraph.normalization.optim import OptimizerConfig
from udsgraph.normalization.ridit import RiditTable, ridit_score

from oracles import grid_argmax, ordinal_loglik, weighted_logistic_grid

FIXED = OptimizerConfig(reestimate_variance=False, tolerance=1e-12, max_iterations=20000)


def ridit_for(data):
    levels = {}
    for o in data:
        levels.setdefault(o[1], []).append(o[3])
    return ridit_score(levels)


# logistic

def test_unanimous_item_positive():
    data = [("i", a, 1, 5) for a in "abc"] + [("j", a, y, 3) for a, y in zip("abc", (1, 0, 0))]
    fit = fit_logistic_mem(data, ridit_for(data))
    assert fit.fixed_effects["i"] > 0 and fit.confidences["i"] > 0.5


def test_split_item_is_middling():
    data = ([("same", a, 1, 5) for a in "abcd"]
            + [("split", a, y, 5) for a, y in zip("abcd", (1, 0, 1, 0))]
            + [("x", a, y, 1) for a, y in zip("abcd", (0, 1, 1, 0))])
    fit = fit_logistic_mem(data, ridit_for(data))
    assert abs(fit.confidences["split"] - 0.5) < 0.05
    assert abs(fit.fixed_effects["split"]) < 0.1 * abs(fit.fixed_effects["same"])


def test_logistic_matches_grid_oracle():
    # 2 items x 3 annotators, no separated item or annotator
    data = [(0, 0, 1, 0.9), (0, 1, 1, 0.4), (0, 2, 0, 0.6),
            (1, 0, 0, 0.8), (1, 1, 1, 0.3), (1, 2, 0, 0.7)]
    # one confidence level per observation so each tuple carries its own weight
    obs = [Observation(i, a, y, n) for n, (i, a, y, _) in enumerate(data)]
    table = RiditTable({a: {n: w for n, (i, a2, y, w) in enumerate(data) if a2 == a}
                        for a in range(3)})
    fit = fit_logistic_mem(obs, table, FIXED)
    expected = weighted_logistic_grid(data, 2, 3)
    got = [fit.fixed_effects[0], fit.fixed_effects[1]] + [fit.random_effects[a] for a in range(3)]
    assert np.allclose(got, expected, atol=0.05)


def test_missing_items_warn():
    with pytest.warns(UserWarning, match="no annotations"):
        fit_logistic_mem([("a", "x", 1, 1), ("a", "y", 0, 1)], ridit_score({"x": [1], "y": [1]}),
                         items=["a", "b"])


def test_responses_must_be_binary():
    with pytest.raises(ValueError):
        fit_logistic_mem([("a", "x", 2, 1)], None)


def test_nonconvergence_flag():
    data = [(i, a, (i + a) % 2, 1) for i in range(4) for a in range(3)]
    fit = fit_logistic_mem(data, None, OptimizerConfig(max_iterations=2, max_outer_iterations=1))
    assert fit.diagnostics.converged is False


def test_deterministic_and_loss_decreases():
    rng = np.random.default_rng(3)
    data = [(i, a, int(rng.random() < 0.6), int(rng.integers(1, 6)))
            for i in range(10) for a in range(4)]
    a = fit_logistic_mem(data, ridit_for(data))
    b = fit_logistic_mem(data, ridit_for(data))
    assert a.fixed_effects == b.fixed_effects and a.random_effects == b.random_effects
    assert a.diagnostics.loss <= a.diagnostics.initial_loss
    assert all(0 <= c <= 1 for c in a.confidences.values())


def test_logistic_matches_scipy_at_fixed_variance():
    rng = np.random.default_rng(11)
    n_items, n_ann = 6, 4
    data = [(i, a, int(rng.random() < 0.5), int(rng.integers(1, 6)))
            for i in range(n_items) for a in range(n_ann)]
    weights = ridit_for(data)
    fit = fit_logistic_mem(data, weights, FIXED)
    w = np.array([weights.weight(a, c) for _, a, _, c in data])
    items = np.array([d[0] for d in data])
    anns = np.array([d[1] for d in data])
    y = np.array([d[2] for d in data])

    def negll(x):
        eta = x[items] + x[n_items + anns]
        return -(np.sum(w * (y * eta - np.logaddexp(0, eta))) - np.sum(x[n_items:] ** 2) / 2)

    ref = scipy_minimize(negll, np.zeros(n_items + n_ann), method="BFGS", options={"gtol": 1e-10})
    if not np.all(np.isfinite(ref.x)) or np.max(np.abs(ref.x)) > 20:
        pytest.skip("separated draw")
    got = np.array([fit.fixed_effects[i] for i in range(n_items)])
    assert np.allclose(got, ref.x[:n_items], atol=1e-3)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1)),
                min_size=4, max_size=10), st.integers(0, 2))
def test_adding_positive_response_never_lowers_beta(base, item):
    data = [Observation(i, a, y) for i, a, y in base]
    data += [Observation(k, "anchor", k % 2) for k in range(3)]
    before = fit_logistic_mem(data, None, FIXED)
    after = fit_logistic_mem(data + [Observation(item, "new", 1)], None, FIXED)
    assert after.fixed_effects[item] >= before.fixed_effects[item] - 1e-6


# applicability

def test_applicability_signs():
    yes = fit_applicability([("e", a, 2, True) for a in "abc"] + [("f", a, 2, False) for a in "ab"]
                            + [("f", "c", 5, None)])
    assert yes.fixed_effects["e"] > 0
    no = fit_applicability([("e", a, 1, False) for a in "abc"] + [("f", a, 2, True) for a in "ab"]
                           + [("f", "c", 1, False)])
    assert no.fixed_effects["e"] < 0 and expit(no.fixed_effects["e"]) < 0.5


def test_applicability_missing_flag():
    with pytest.raises(ValueError, match="missing applicability"):
        fit_applicability([("e", "a", 2, None)])


def test_applicability_two_vs_one_matches_grid():
    data = [("e", 0, 1, True), ("e", 1, 2, True), ("e", 2, 3, False)]
    fit = fit_applicability(data, FIXED)
    expected = weighted_logistic_grid([(0, a, int(f), 1.0) for _, a, _, f in data], 1, 3)
    assert fit.fixed_effects["e"] > 0
    assert abs(fit.fixed_effects["e"] - expected[0]) < 0.05


# multinomial

def test_multinomial_unanimous_minutes():
    data = [("i", a, 2, 4) for a in "abcd"] + [("j", a, k, 2) for a, k in zip("abcd", (0, 5, 9, 4))]
    fit = fit_multinomial_mem(data, ridit_for(data))
    assert int(np.argmax(fit.fixed_effects["i"])) == 2
    assert abs(np.sum(fit.fixed_effects["i"])) < 1e-9
    assert abs(np.sum(fit.random_effects["a"])) < 1e-9


def test_multinomial_bimodal():
    days, decades = 4, 8
    data = ([("sick", a, days if n % 2 else decades, 5) for n, a in enumerate("abcdef")]
            + [("nap", a, 3, 5) for a in "abcdef"])
    fit = fit_multinomial_mem(data, ridit_for(data))
    beta = fit.fixed_effects["sick"]
    others = np.delete(beta, [days, decades])
    assert min(beta[days], beta[decades]) > others.max()
    assert fit.confidences["sick"] < fit.confidences["nap"]
    for a in "abcdef":
        p = fit.predict("sick", a)
        assert abs(p.sum() - 1) < 1e-12 and np.all(p >= 0)


def test_multinomial_matches_scipy_at_fixed_variance():
    rng = np.random.default_rng(5)
    K, n_items, n_ann = 4, 3, 3
    while True:
        # redraw until no item or annotator leaves a class unused (no separation)
        data = [(i, a, int(rng.integers(0, K)), 1) for i in range(n_items) for a in range(n_ann)
                for _ in range(3)]
        if all(len({d[2] for d in data if d[j] == v}) == K for j in (0, 1) for v in range(3)):
            break
    fit = fit_multinomial_mem(data, None, FIXED, n_classes=K)
    items = np.array([d[0] for d in data])
    anns = np.array([d[1] for d in data])
    y = np.array([d[2] for d in data])

    def negll(x):
        # unconstrained parameterization, sum-to-zero imposed by centering
        B = x[: n_items * K].reshape(n_items, K)
        U = x[n_items * K:].reshape(n_ann, K)
        B = B - B.mean(1, keepdims=True)
        U = U - U.mean(1, keepdims=True)
        eta = B[items] + U[anns]
        ll = np.sum(eta[np.arange(len(y)), y] - logsumexp(eta, axis=1))
        return -(ll - np.sum(U ** 2) / 2)

    ref = scipy_minimize(negll, np.zeros((n_items + n_ann) * K), method="BFGS",
                         options={"gtol": 1e-9})
    B = ref.x[: n_items * K].reshape(n_items, K)
    B = B - B.mean(1, keepdims=True)
    got = np.array([fit.fixed_effects[i] for i in range(n_items)])
    assert np.allclose(got, B, atol=1e-3)


def test_multinomial_range():
    with pytest.raises(ValueError):
        fit_multinomial_mem([("i", "a", 11, 1)], None)


# ordinal

def test_ordinal_likelihood_gradient():
    rng = np.random.default_rng(0)
    a = rng.normal(size=50) + 1
    b = a - rng.uniform(0.1, 3, size=50)
    y = rng.integers(1, 6, size=50)
    logp, da, db, _ = _ordinal_loglik(a, b, y)
    h = 1e-6
    num_a = (_ordinal_loglik(a + h, b, y)[0] - _ordinal_loglik(a - h, b, y)[0]) / (2 * h)
    num_b = (_ordinal_loglik(a, b + h, y)[0] - _ordinal_loglik(a, b - h, y)[0]) / (2 * h)
    assert np.allclose(da, num_a, atol=1e-6) and np.allclose(db, num_b, atol=1e-6)


def test_ordinal_probabilities_sum_to_one():
    cut = cutpoints_from_params(np.array([0.3, -1.0]), np.array([[0.1, -2.0, 1.0], [0, 0, 0]]))
    assert np.all(np.diff(cut, axis=1) > 0)
    p = ordinal_probabilities(np.array([[-5.0], [2.0]]), cut[:, None, :])
    assert np.allclose(p.sum(-1), 1, atol=1e-12) and np.all(p >= 0)


def test_ordinal_unanimous_five():
    data = [("pair", a, 5) for a in "abcd"] + [("other", a, y) for a, y in zip("abcd", (1, 2, 3, 2))]
    fit = fit_ordinal_mem(data)
    for a in "abcd":
        assert int(np.argmax(fit.predict("pair", a))) == 4
        assert np.all(np.diff(fit.random_effects[a]) > 0)


def test_ordinal_single_response_grid():
    cut = np.array([-2.0, -1.0, 0.5, 3.0])
    fit = fit_ordinal_mem([("pair", "a", 3)], FIXED, fixed_cutpoints={"a": cut})
    grid = np.linspace(-6, 6, 120001)
    ll = [ordinal_loglik(b, cut, 3) for b in grid[::100]]
    coarse = grid[::100][int(np.argmax(ll))]
    fine = grid[(grid > coarse - 0.02) & (grid < coarse + 0.02)]
    best = fine[int(np.argmax([ordinal_loglik(b, cut, 3) for b in fine]))]
    assert abs(fit.fixed_effects["pair"] - best) < 1e-3
    assert int(np.argmax(fit.predict("pair", "a"))) == 2
    assert np.allclose(fit.random_effects["a"], cut)


def test_ordinal_gap_rate_option():
    data = [(i, a, 1 + (i + a) % 5) for i in range(6) for a in range(3)]
    for rate in ("inverse-mean", "inverse-variance"):
        fit = fit_ordinal_mem(data, gap_rate=rate)
        assert fit.options["gap_rate"] == rate
        assert all(np.all(np.diff(c) > 0) for c in fit.random_effects.values())
    with pytest.raises(ValueError):
        fit_ordinal_mem(data, gap_rate="median")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3), st.integers(1, 5)),
                min_size=1, max_size=25))
def test_ordinal_fit_properties(rows):
    fit = fit_ordinal_mem(rows)
    assert fit.diagnostics.loss <= fit.diagnostics.initial_loss + 1e-9
    for cut in fit.random_effects.values():
        assert np.all(np.diff(cut) > 0)
    for item, ann, _ in rows:
        p = fit.predict(item, ann)
        assert abs(p.sum() - 1) < 1e-9 and np.all(p >= 0)
    assert all(0 <= c <= 1 for c in fit.confidences.values())


def test_laplace_variance_stays_positive():
    rng = np.random.default_rng(2)
    data = [(i, a, int(rng.random() < 0.5), 1) for i in range(8) for a in range(5)]
    fit = fit_logistic_mem(data, None, OptimizerConfig(variance_estimator="laplace"))
    assert fit.diagnostics.variance[0] > 1e-3


def test_fixed_effect_prior_bounds_separated_items():
    data = [("all", a, 1, 1) for a in range(4)] + [("mix", a, a % 2, 1) for a in range(4)]
    free = fit_logistic_mem(data, None)
    ridge = fit_logistic_mem(data, None, OptimizerConfig(fixed_effect_variance=4.0))
    assert ridge.fixed_effects["all"] < 10 < free.fixed_effects["all"]


@pytest.mark.parametrize("model", ["logistic", "multinomial", "ordinal"])
def test_objective_gradients(monkeypatch, model):
    import udsgraph.normalization.models as models

    captured = {}
    real = models.minimize

    def spy(fun, x0, cfg):
        captured["fun"], captured["n"] = fun, len(x0)
        return real(fun, x0, cfg)

    monkeypatch.setattr(models, "minimize", spy)
    rng = np.random.default_rng(1)
    rows = [(i, a, int(rng.integers(1, 6))) for i in range(5) for a in range(4)]
    cfg = OptimizerConfig(max_outer_iterations=2, fixed_effect_variance=2.0)
    if model == "logistic":
        fit_logistic_mem([(i, a, y % 2, 1) for i, a, y in rows], None, cfg)
    elif model == "multinomial":
        fit_multinomial_mem([(i, a, y, 1) for i, a, y in rows], None, cfg, n_classes=6)
    else:
        fit_ordinal_mem(rows, cfg, fixed_cutpoints={0: [-1.0, 0.0, 1.0, 2.0]})
    fun, n = captured["fun"], captured["n"]
    x = rng.normal(size=n) * 0.5
    _, grad = fun(x)
    h = 1e-6
    numeric = np.array([(fun(x + h * e)[0] - fun(x - h * e)[0]) / (2 * h) for e in np.eye(n)])
    if model == "ordinal":
        numeric[5] = 0.0  # the fixed annotator's parameters are frozen
        numeric[5 + 4: 5 + 4 + 3] = 0.0
    assert np.allclose(grad, numeric, atol=1e-5)


def test_recovery_with_more_responses_and_prior():
    # with 20 responses per item and a N(0, 3) prior on fixed effects,
    # estimates track the generating values closely
    rs = []
    for seed in range(3):
        rng = np.random.default_rng(seed)
        beta, u = rng.uniform(-3, 3, 50), rng.normal(0, 0.5, 40)
        data = [(i, int(a), int(rng.random() < expit(beta[i] + u[a])))
                for i in range(50) for a in rng.choice(40, 20, replace=False)]
        fit = fit_logistic_mem(data, cfg=OptimizerConfig(fixed_effect_variance=3.0))
        est = np.array([fit.fixed_effects[i] for i in range(50)])
        rs.append(np.corrcoef(est, beta)[0, 1])
        strong = np.abs(beta) >= 1
        assert np.all(np.sign(est[strong]) == np.sign(beta[strong]))
    assert min(rs) > 0.93
