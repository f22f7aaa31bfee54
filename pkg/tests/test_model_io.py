import json

import numpy as np
import pytest

from cindex_audit.concordance import OutcomeView
from cindex_audit.errors import ValidationError
from cindex_audit.models import ForestParams, cox_fit, load_model, rsf_fit, save_model, smoothc_fit
from cindex_audit.survdata import simulate_weibull_ph


@pytest.fixture(scope="module")
def data():
    return simulate_weibull_ph(150, [1.0, -0.5], seed=1)


def test_cox_roundtrip(tmp_path, data):
    m = cox_fit(data)
    save_model(m, tmp_path / "m.json", OutcomeView.of(data))
    back, out = load_model(tmp_path / "m.json")
    np.testing.assert_allclose(back.predict_distribution(data).probs,
                               m.predict_distribution(data).probs, atol=1e-12, rtol=0)
    np.testing.assert_array_equal(back.predict_risk(data).values, m.predict_risk(data).values)
    np.testing.assert_array_equal(out.times, data.time)


def test_rsf_roundtrip(tmp_path, data):
    m = rsf_fit(data, ForestParams(n_trees=3))
    save_model(m, tmp_path / "f.json")
    back, out = load_model(tmp_path / "f.json")
    assert out is None
    np.testing.assert_allclose(back.predict_distribution(data).probs,
                               m.predict_distribution(data).probs, atol=1e-12, rtol=0)


def test_smoothc_roundtrip(tmp_path, data):
    m = smoothc_fit(data, steps=20)
    save_model(m, tmp_path / "s.json")
    back, _ = load_model(tmp_path / "s.json")
    np.testing.assert_array_equal(back.predict_risk(data).values, m.predict_risk(data).values)


def test_rejects_foreign_and_future(tmp_path, data):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"format": "other"}))
    with pytest.raises(ValidationError):
        load_model(p)
    save_model(smoothc_fit(data, steps=5), p)
    doc = json.loads(p.read_text())
    doc["format_version"] = 99
    p.write_text(json.dumps(doc))
    with pytest.raises(ValidationError, match="version"):
        load_model(p)
