"""Linear risk score fitted by gradient ascent on a sigmoid-smoothed Harrell's C.

This stands in for C-index boosting: like it, the fitted model produces a
risk score only and no survival distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..concordance import comparable_pairs
from ..errors import NoComparablePairsError, ValidationError
from ..reductions import Orientation, RiskVector


@dataclass(frozen=True, eq=False)
class SmoothCModel:
    weights: np.ndarray
    sigma: float
    converged: bool
    train_feature_means: np.ndarray
    n_steps: int = 0
    objective: float = float("nan")
    feature_names: tuple[str, ...] = ()

    prediction_types = frozenset({"risk"})
    kind = "smoothc"

    def predict_risk(self, data) -> RiskVector:
        return smoothc_predict(self, data)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def smoothed_concordance(w, diff, sigma):
    """Mean of sigmoid((eta_i - eta_j) / sigma) over comparable pairs, and its gradient.

    ``diff`` holds ``x_i - x_j`` for every comparable pair (i earlier).
    """
    s = _sigmoid(diff @ w / sigma)
    value = float(s.mean())
    grad = (s * (1.0 - s)) @ diff / (sigma * diff.shape[0])
    return value, grad


def smoothc_fit(train, sigma: float = 0.1, steps: int = 500, lr: float = 0.1,
                tol: float = 1e-6) -> SmoothCModel:
    """Gradient ascent from zero weights with step-size backtracking.

    ``converged`` is set when the gradient norm drops below ``tol``. On
    separable data the smoothed objective has no finite maximizer, so the run
    ends after ``steps`` iterations unconverged with a concordant direction.
    """
    if sigma <= 0 or lr <= 0:
        raise ValidationError("sigma and lr must be positive")
    i, j = comparable_pairs(train.time, train.status)
    if i.size == 0:
        raise NoComparablePairsError("training data has no comparable pairs")
    means = train.X.mean(axis=0)
    diff = train.X[i] - train.X[j]
    w = np.zeros(train.X.shape[1])
    value, grad = smoothed_concordance(w, diff, sigma)
    step = lr
    converged = False
    done = 0
    for done in range(1, steps + 1):
        if np.linalg.norm(grad) < tol:
            converged = True
            break
        while step > 1e-12:
            cand = w + step * grad
            new_value, new_grad = smoothed_concordance(cand, diff, sigma)
            if new_value >= value:
                w, value, grad = cand, new_value, new_grad
                step *= 1.5
                break
            step /= 2
        else:
            break
    else:
        converged = bool(np.linalg.norm(grad) < tol)
    return SmoothCModel(w, sigma, converged, means, done, value, train.feature_names)


def smoothc_predict(model: SmoothCModel, data) -> RiskVector:
    if data.X.shape[1] != model.weights.size:
        raise ValidationError(f"model expects {model.weights.size} covariates, got {data.X.shape[1]}")
    return RiskVector((data.X - model.train_feature_means) @ model.weights,
                      Orientation.HIGHER_IS_RISKIER, "native")
