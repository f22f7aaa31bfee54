import numpy as np
import pytest

from cindex_audit.concordance import OutcomeView, comparable_pairs, harrell_c
from cindex_audit.errors import NoComparablePairsError, ValidationError
from cindex_audit.models import SmoothCModel, smoothc_fit, smoothc_predict
from cindex_audit.models.smoothc import smoothed_concordance
from cindex_audit.reductions import RiskVector
from cindex_audit.survdata import Dataset, SplitSpec, holdout_split, simulate_weibull_ph


def test_separable_case():
    x = np.arange(1.0, 31.0)
    d = Dataset(x, np.ones(30, dtype=int), -x[:, None])
    m = smoothc_fit(d)
    assert m.weights[0] > 0
    assert harrell_c(m.predict_risk(d), OutcomeView.of(d)).estimate == 1.0


def test_gradient_matches_finite_differences():
    d = simulate_weibull_ph(200, [0.8, -0.4, 0.1], seed=2)
    m = smoothc_fit(d, steps=50)
    i, j = comparable_pairs(d.time, d.status)
    diff = d.X[i] - d.X[j]
    _, g = smoothed_concordance(m.weights, diff, m.sigma)
    h = 1e-5
    fd = np.array([(smoothed_concordance(m.weights + h * e, diff, m.sigma)[0]
                    - smoothed_concordance(m.weights - h * e, diff, m.sigma)[0]) / (2 * h)
                   for e in np.eye(3)])
    np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-10)


def test_noise_out_of_sample():
    d = simulate_weibull_ph(1000, [0.0, 0.0], seed=4)
    tr, te = holdout_split(d, SplitSpec(2 / 3, 4))
    m = smoothc_fit(tr)
    assert abs(harrell_c(m.predict_risk(te), OutcomeView.of(te)).estimate - 0.5) <= 0.05


def test_predict_hand_and_ties():
    m = SmoothCModel(np.array([2.0, -1.0]), 0.1, True, np.array([1.0, 0.0]))
    X = np.array([[1.0, 1.0], [2.0, 0.0], [0.0, 3.0]])
    d = Dataset(np.ones(3), np.ones(3, dtype=int), X)
    np.testing.assert_allclose(smoothc_predict(m, d).values, [-1.0, 2.0, -5.0], atol=1e-12)
    zero = SmoothCModel(np.zeros(2), 0.1, True, np.zeros(2))
    assert np.all(zero.predict_risk(d).values == 0)
    with pytest.raises(ValidationError):
        smoothc_predict(m, Dataset(np.ones(1), np.ones(1, dtype=int), np.zeros((1, 3))))


def test_positive_scaling_invariant():
    d = simulate_weibull_ph(200, [0.8, -0.4], seed=6)
    m = smoothc_fit(d, steps=50)
    out = OutcomeView.of(d)
    base = harrell_c(m.predict_risk(d), out).estimate
    scaled = SmoothCModel(m.weights * 7.5, m.sigma, m.converged, m.train_feature_means)
    assert harrell_c(scaled.predict_risk(d), out).estimate == base


def test_no_pairs():
    d = Dataset(np.array([1.0, 1.0]), np.array([1, 1]), np.array([[0.0], [1.0]]))
    with pytest.raises(NoComparablePairsError):
        smoothc_fit(d)


def test_objective_improves():
    d = simulate_weibull_ph(300, [1.0, -1.0], seed=8)
    m = smoothc_fit(d)
    i, j = comparable_pairs(d.time, d.status)
    start, _ = smoothed_concordance(np.zeros(2), d.X[i] - d.X[j], 0.1)
    assert m.objective > start
