"""Versioned JSON model files.

Layout (``format_version`` 1)::

    {
      "format": "cindex-audit-model",
      "format_version": 1,
      "kind": "cox" | "rsf" | "smoothc",
      "feature_names": [...],
      "train_outcomes": {"time": [...], "status": [...]} | null,
      "model": { kind-specific fields }
    }

Floats are written with Python's shortest round-trip repr, so a reloaded
model predicts bit-for-bit what the original did.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..curves import HazardCurve
from ..errors import ValidationError
from .cox import CoxModel
from .forest import ForestModel, ForestParams, SurvivalTree
from .smoothc import SmoothCModel

FORMAT = "cindex-audit-model"
FORMAT_VERSION = 1


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _ints(a):
    return [int(v) for v in np.asarray(a).ravel()]


def model_to_dict(model, train_outcomes=None) -> dict:
    if isinstance(model, CoxModel):
        body = {"beta": _floats(model.beta), "train_feature_means": _floats(model.train_feature_means),
                "baseline_times": _floats(model.baseline.times),
                "baseline_cumhaz": _floats(model.baseline.cumhaz),
                "n_iter": model.n_iter, "grad_norm": model.grad_norm,
                "warnings": list(model.warnings)}
    elif isinstance(model, ForestModel):
        body = {"params": asdict(model.params), "grid": _floats(model.grid),
                "n_features": model.n_features,
                "trees": [{"feature": _ints(t.feature), "threshold": [None if np.isnan(v) else float(v)
                                                                      for v in t.threshold],
                           "left": _ints(t.left), "right": _ints(t.right), "leaf": _ints(t.leaf),
                           "leaf_cumhaz": [_floats(row) for row in t.leaf_cumhaz]}
                          for t in model.trees]}
    elif isinstance(model, SmoothCModel):
        body = {"weights": _floats(model.weights), "sigma": model.sigma, "converged": model.converged,
                "train_feature_means": _floats(model.train_feature_means),
                "n_steps": model.n_steps, "objective": model.objective}
    else:
        raise ValidationError(f"cannot serialize {type(model).__name__}")
    outcomes = None
    if train_outcomes is not None:
        outcomes = {"time": _floats(train_outcomes.times), "status": _ints(train_outcomes.events)}
    return {"format": FORMAT, "format_version": FORMAT_VERSION, "kind": model.kind,
            "feature_names": list(model.feature_names), "train_outcomes": outcomes, "model": body}


def model_from_dict(doc: dict):
    """Rebuild ``(model, train_outcomes or None)`` from :func:`model_to_dict` output."""
    from ..concordance import OutcomeView

    if doc.get("format") != FORMAT:
        raise ValidationError("not a cindex-audit model file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported model format version {doc.get('format_version')}")
    kind, body, names = doc["kind"], doc["model"], tuple(doc.get("feature_names", ()))
    if kind == "cox":
        model = CoxModel(np.array(body["beta"]),
                         HazardCurve(body["baseline_times"], body["baseline_cumhaz"]),
                         np.array(body["train_feature_means"]), names, body["n_iter"],
                         body["grad_norm"], (), tuple(body["warnings"]))
    elif kind == "rsf":
        trees = tuple(
            SurvivalTree(np.array(t["feature"]),
                         np.array([np.nan if v is None else v for v in t["threshold"]], dtype=float),
                         np.array(t["left"]), np.array(t["right"]), np.array(t["leaf"]),
                         np.array(t["leaf_cumhaz"], dtype=float))
            for t in body["trees"])
        model = ForestModel(trees, np.array(body["grid"]), ForestParams(**body["params"]),
                            body["n_features"], names)
    elif kind == "smoothc":
        model = SmoothCModel(np.array(body["weights"]), body["sigma"], body["converged"],
                             np.array(body["train_feature_means"]), body["n_steps"],
                             body["objective"], names)
    else:
        raise ValidationError(f"unknown model kind {kind!r}")
    outcomes = doc.get("train_outcomes")
    if outcomes is not None:
        outcomes = OutcomeView(outcomes["time"], outcomes["status"])
    return model, outcomes


def save_model(model, path, train_outcomes=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model, train_outcomes), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
