import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cindex_audit.concordance import OutcomeView, harrell_c
from cindex_audit.errors import ConvergenceError, SeparationError, ValidationError
from cindex_audit.models import cox_fit, partial_log_likelihood
from cindex_audit.models.cox import _derivatives, _sort_for_likelihood
from cindex_audit.reductions import RiskVector
from cindex_audit.survdata import Dataset, simulate_weibull_ph


def two_group(n=2000, log_hr=0.7, seed=0):
    rng = np.random.default_rng(seed)
    g = (np.arange(n) % 2).astype(float)
    t_event = rng.standard_exponential(n) / np.exp(log_hr * g)
    t_cens = rng.standard_exponential(n) / 0.3
    return Dataset(np.minimum(t_event, t_cens), (t_event <= t_cens).astype(int), g[:, None])


def test_loglik_matches_naive_oracle():
    d = simulate_weibull_ph(40, [0.8, -0.3], seed=1)
    for beta in ([0.0, 0.0], [0.5, -1.0], [1.3, 0.2]):
        mine = partial_log_likelihood(beta, d, center=False)
        ref = oracles.breslow_loglik(beta, d.time.tolist(), d.status.tolist(), d.X.tolist())
        assert mine == pytest.approx(ref, rel=1e-12)


def test_loglik_with_tied_times():
    d = Dataset(np.array([1, 1, 2, 2, 2, 3.0]), np.array([1, 1, 0, 1, 1, 1]),
                np.array([[0.2], [1.0], [-0.5], [0.3], [0.0], [2.0]]))
    for b in (-1.0, 0.4):
        ref = oracles.breslow_loglik([b], d.time.tolist(), d.status.tolist(), d.X.tolist())
        assert partial_log_likelihood([b], d, center=False) == pytest.approx(ref, rel=1e-12)


def test_two_group_grid_search():
    d = two_group()
    m = cox_fit(d)
    grid = np.arange(0.0, 1.5, 1e-3)
    ll = [partial_log_likelihood([b], d, center=False) for b in grid]
    assert abs(m.beta[0] - grid[int(np.argmax(ll))]) < 1e-3
    assert abs(m.beta[0] - 0.7) < 0.1


def test_gradient_sup_norm_and_finite_differences():
    d = simulate_weibull_ph(500, [0.5, -0.5, 0.2], seed=3)
    m = cox_fit(d, tol=1e-9)
    assert m.grad_norm < 1e-8
    s = _sort_for_likelihood(d.time, d.status, d.X - d.X.mean(axis=0))
    b = np.array([0.3, -0.2, 0.1])
    _, grad, hess = _derivatives(b, s)
    h = 1e-5
    fd = np.array([(_derivatives(b + h * e, s, 0)[0] - _derivatives(b - h * e, s, 0)[0]) / (2 * h)
                   for e in np.eye(3)])
    np.testing.assert_allclose(grad, fd, rtol=1e-4)
    fdh = np.array([(_derivatives(b + h * e, s)[1] - _derivatives(b - h * e, s)[1]) / (2 * h)
                    for e in np.eye(3)])
    np.testing.assert_allclose(hess, fdh, rtol=1e-4, atol=1e-6)


def test_likelihood_trace_non_decreasing():
    d = simulate_weibull_ph(800, [1.5, -1.0], seed=4)
    trace = np.array(cox_fit(d).loglik_trace)
    assert np.all(np.diff(trace) >= -1e-9 * np.abs(trace[1:]))


def test_recovers_coefficients():
    est = np.mean([cox_fit(simulate_weibull_ph(2000, [0.5, -0.5], seed=s)).beta for s in range(10)],
                  axis=0)
    np.testing.assert_allclose(est, [0.5, -0.5], atol=0.1)
    big = cox_fit(simulate_weibull_ph(5000, [1.0], seed=0))
    assert abs(big.beta[0] - 1.0) < 0.1


def test_constant_covariates_warn():
    d = Dataset(np.arange(1.0, 7.0), np.ones(6, dtype=int), np.ones((6, 2)), ("a", "b"))
    with pytest.warns(RuntimeWarning, match="zero variance"):
        m = cox_fit(d)
    np.testing.assert_array_equal(m.beta, [0, 0])
    assert len(m.warnings) == 2


def test_separation_detected():
    x = np.arange(1.0, 21.0)
    d = Dataset(x, np.ones(20, dtype=int), -x[:, None])
    with pytest.raises(SeparationError) as exc:
        cox_fit(d, max_iter=500)
    assert np.max(np.abs(exc.value.beta)) > 50


def test_non_convergence_carries_state():
    d = simulate_weibull_ph(300, [1.0], seed=2)
    with pytest.raises(ConvergenceError) as exc:
        cox_fit(d, tol=1e-30, max_iter=2)
    assert exc.value.beta is not None and exc.value.grad_norm > 0


def test_needs_two_events():
    d = Dataset(np.array([1.0, 2.0, 3.0]), np.array([1, 0, 0]), np.zeros((3, 1)) + [[0], [1], [2]])
    with pytest.raises(ValidationError):
        cox_fit(d)


def test_predict_risk_hand_example():
    train = simulate_weibull_ph(200, [0.5, -0.5], seed=9)
    m = cox_fit(train)
    X = np.array([[1.0, 2.0], [0.0, -1.0], [3.0, 0.5]])
    test = Dataset(np.ones(3), np.ones(3, dtype=int), X)
    expect = [sum((X[i, k] - m.train_feature_means[k]) * m.beta[k] for k in range(2)) for i in range(3)]
    np.testing.assert_allclose(m.predict_risk(test).values, expect, atol=1e-12)
    with pytest.raises(ValidationError):
        m.predict_risk(Dataset(np.ones(1), np.ones(1, dtype=int), np.zeros((1, 3))))


def test_distribution_identities():
    train = simulate_weibull_ph(300, [1.0, -0.7], seed=5)
    m = cox_fit(train)
    S = m.predict_distribution(train)
    eta = m.predict_risk(train).values
    # eta = 0 row is the baseline survival
    zero = Dataset(np.ones(1), np.ones(1, dtype=int), m.train_feature_means[None, :])
    np.testing.assert_allclose(m.predict_distribution(zero).probs[0], np.exp(-m.baseline.cumhaz),
                               atol=1e-15)
    i, j = 0, 1
    inner = (S.probs[i] > 0) & (S.probs[i] < 1) & (S.probs[j] > 0) & (S.probs[j] < 1)
    ratio = np.log(S.probs[i][inner]) / np.log(S.probs[j][inner])
    np.testing.assert_allclose(ratio, np.exp(eta[i] - eta[j]), rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_ph_rows_never_cross(seed):
    d = simulate_weibull_ph(40, [1.0, -0.5], seed=seed)
    m = cox_fit(d)
    S = m.predict_distribution(d).probs
    eta = m.predict_risk(d).values
    order = np.argsort(eta, kind="stable")
    Ssorted, esorted = S[order], eta[order]
    for a in range(len(order) - 1):
        if esorted[a + 1] > esorted[a]:
            both = (Ssorted[a] > 0) & (Ssorted[a] < 1) & (Ssorted[a + 1] > 0) & (Ssorted[a + 1] < 1)
            assert np.all(Ssorted[a + 1][both] < Ssorted[a][both])


def test_harrell_monotone_transform_invariance():
    d = simulate_weibull_ph(300, [1.0, 0.4], seed=6)
    m = cox_fit(d)
    out = OutcomeView.of(d)
    eta = m.predict_risk(d).values
    base = harrell_c(RiskVector(eta), out).estimate
    assert harrell_c(RiskVector(np.exp(eta)), out).estimate == base
    assert harrell_c(RiskVector(10 * eta), out).estimate == base


def test_zero_beta_ties():
    d = Dataset(np.arange(1.0, 7.0), np.ones(6, dtype=int), np.ones((6, 1)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = cox_fit(d)
    assert np.all(m.predict_risk(d).values == 0)


def test_separation_warn_mode():
    x = np.arange(1.0, 21.0)
    d = Dataset(x, np.ones(20, dtype=int), np.column_stack([-x, np.sin(x)]), ("sep", "other"))
    with pytest.warns(RuntimeWarning, match="may be infinite"):
        m = cox_fit(d, on_separation="warn")
    assert np.all(np.isfinite(m.beta)) and m.beta[0] > 10
    assert any("sep" in w for w in m.warnings)
    S = m.predict_distribution(d)
    assert np.all(np.isfinite(S.probs))
