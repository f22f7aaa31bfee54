import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cindex_audit.concordance import OutcomeView, harrell_c
from cindex_audit.curves import CurveMatrix, km_fit
from cindex_audit.errors import ValidationError
from cindex_audit.models import cox_fit
from cindex_audit.reductions import (Orientation, ReductionSpec, RiskVector, expected_mortality,
                                     prob_at_time, reduce, summary_reduce)
from cindex_audit.survdata import simulate_weibull_ph


def test_expmort_examples():
    m = CurveMatrix([1.0, 2.0], [[1.0, 1.0], [0.9, 0.8]])
    r = expected_mortality(m)
    assert r.values[0] == 0
    assert r.values[1] == pytest.approx(-(np.log(0.9) + np.log(0.8)))
    assert r.values[1] == pytest.approx(0.32850, abs=1e-5)
    assert r.orientation is Orientation.HIGHER_IS_RISKIER


def test_expmort_clamps_zero():
    r = expected_mortality(CurveMatrix([1.0], [[0.0]]))
    assert np.isfinite(r.values[0]) and r.values[0] == pytest.approx(-np.log(1e-15))


def test_prob_at_time_examples():
    m = CurveMatrix([1.0, 3.0], [[0.9, 0.4], [0.7, 0.6]])
    np.testing.assert_array_equal(prob_at_time(m, 0.5).values, [1, 1])
    np.testing.assert_array_equal(prob_at_time(m, 2.0).values, [0.9, 0.7])
    np.testing.assert_array_equal(prob_at_time(m, 3.0).values, [0.4, 0.6])
    assert prob_at_time(m, 2.0).orientation is Orientation.HIGHER_IS_LONGER_LIVED
    out = OutcomeView([1.0, 2.0], [1, 1])
    assert harrell_c(prob_at_time(m, 0.5), out).estimate == 0.5


def test_spec_validation():
    with pytest.raises(ValidationError):
        ReductionSpec("prob_at_time")
    with pytest.raises(ValidationError):
        ReductionSpec("mean_naive", time_point=3.0)
    with pytest.raises(ValidationError):
        ReductionSpec("expected_mortality", delta=1.0)
    with pytest.raises(ValidationError):
        ReductionSpec("bogus")
    assert ReductionSpec("mean_drop", delta=2.0).describe() == "mean_drop;delta=2"


def test_proper_rows_fix_invariant():
    m = CurveMatrix([1.0, 2.0, 4.0], [[0.8, 0.3, 0.0], [0.5, 0.5, 0.0]])
    a, b, c = (summary_reduce(m, ReductionSpec(k)).values for k in ("mean_naive", "mean_drop",
                                                                      "mean_linear"))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    assert summary_reduce(m, ReductionSpec("mean_naive")).improper_count == 0


def test_rats_like_row(rats):
    km = km_fit(rats)
    m = CurveMatrix(km.times, km.probs[None, :])
    naive = summary_reduce(m, ReductionSpec("mean_naive")).values[0]
    drop = summary_reduce(m, ReductionSpec("mean_drop", delta=1.0)).values[0]
    lin = summary_reduce(m, ReductionSpec("mean_linear")).values[0]
    assert drop == pytest.approx(naive + km.terminal * 1.0)
    assert lin > 2.5 * naive
    assert summary_reduce(m, ReductionSpec("mean_naive")).improper_count == 1


def test_median_drop_on_improper():
    m = CurveMatrix([1.0, 2.0], [[0.9, 0.8], [0.4, 0.3]])
    np.testing.assert_array_equal(summary_reduce(m, ReductionSpec("median_drop")).values, [3.0, 1.0])


def test_reduce_dispatch():
    m = CurveMatrix([1.0, 2.0], [[0.9, 0.8], [0.4, 0.3]])
    assert reduce(m, ReductionSpec("prob_at_time", time_point=1.5)).values.tolist() == [0.9, 0.4]
    with pytest.raises(ValidationError):
        summary_reduce(m, ReductionSpec("expected_mortality"))


def test_flipped_and_mislabelled():
    r = RiskVector([1.0, 3.0, 2.0])
    out = OutcomeView([1.0, 2.0, 3.0], [1, 1, 1])
    base = harrell_c(r, out).estimate
    assert harrell_c(r.flipped(), out).estimate == base
    assert harrell_c(r.mislabelled(), out).estimate == pytest.approx(1 - base, abs=1e-12)


def test_risk_vector_validation():
    with pytest.raises(ValidationError):
        RiskVector([1.0, np.nan])
    with pytest.raises(ValidationError):
        RiskVector([1.0], improper_count=2)


def test_ph_rank_agreement():
    d = simulate_weibull_ph(300, [1.0, -0.5], seed=7)
    model = cox_fit(d)
    S = model.predict_distribution(d)
    eta = model.predict_risk(d).values
    order = np.argsort(eta, kind="stable")
    em = expected_mortality(S).values
    assert np.all(np.diff(em[order]) >= 0)
    for red in (ReductionSpec("mean_drop"), ReductionSpec("mean_linear")):
        v = -summary_reduce(S, red).values
        assert np.all(np.diff(v[order]) >= 0)


rows = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10)


@settings(max_examples=200, deadline=None)
@given(rows, st.integers(0, 9), st.floats(0.01, 0.5))
def test_expmort_monotone(ps, k, bump):
    p = np.minimum.accumulate(np.array(ps))
    k %= p.size
    q = p.copy()
    q[: k + 1] = np.minimum(1.0, q[: k + 1] + bump)
    q = np.minimum.accumulate(q)
    if np.all(q == p):
        return
    t = np.arange(1.0, p.size + 1)
    em = expected_mortality(CurveMatrix(t, np.vstack([p, q]))).values
    assert em[1] < em[0]
