"""Concordance measures for right-censored outcomes.

Pair convention shared by every measure here: ``(i, j)`` is comparable when
``T_i < T_j`` and subject ``i`` had the event, or when ``T_i == T_j`` and
exactly one of the two had the event (that subject counts as earlier). Tied
predictions score one half.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import CurveMatrix, product_limit
from .errors import NoComparablePairsError, NumericalError, ValidationError
from .reductions import Orientation, RiskVector


@dataclass(frozen=True, eq=False)
class OutcomeView:
    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        events = np.asarray(self.events).reshape(-1).astype(np.int64)
        if times.shape != events.shape:
            raise ValidationError("times and events must have equal length")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events)

    def __len__(self):
        return self.times.size

    @classmethod
    def of(cls, data) -> "OutcomeView":
        return cls(data.time, data.status)


@dataclass(frozen=True)
class ConcordanceResult:
    """One concordance estimate with the pair counts behind it.

    For unweighted measures ``estimate == (concordant + 0.5 * tied) /
    comparable``. Uno's C also fills the ``weighted_*`` fields, and its
    estimate is their ratio.
    """

    estimate: float
    comparable: int
    concordant: int
    tied: int
    measure: str
    risk_source: str = "native"
    tau: Optional[float] = None
    weighted_concordant: Optional[float] = None
    weighted_comparable: Optional[float] = None

    CSV_HEADER = ("measure", "risk_source", "estimate", "comparable", "concordant", "tied", "tau")

    def csv_row(self) -> list[str]:
        return [self.measure, self.risk_source, f"{self.estimate:.12g}", str(self.comparable),
                str(self.concordant), str(self.tied),
                "" if self.tau is None else f"{self.tau:.12g}"]


def comparable_mask(times, events) -> np.ndarray:
    """Boolean matrix ``m[i, j]``: pair (i earlier, j later) is comparable."""
    t = np.asarray(times, dtype=float)
    e = np.asarray(events).astype(bool)
    earlier = t[:, None] < t[None, :]
    same = (t[:, None] == t[None, :]) & ~e[None, :]
    return e[:, None] & (earlier | same)


def comparable_pairs(times, events) -> tuple[np.ndarray, np.ndarray]:
    return np.nonzero(comparable_mask(times, events))


def riskier_values(risks: RiskVector) -> np.ndarray:
    """Risk values oriented so that larger means more hazardous."""
    if risks.orientation is Orientation.HIGHER_IS_RISKIER:
        return np.asarray(risks.values, dtype=float)
    return -np.asarray(risks.values, dtype=float)


def _check_lengths(n_pred: int, outcomes: OutcomeView):
    if n_pred != len(outcomes):
        raise ValidationError(f"{n_pred} predictions for {len(outcomes)} outcomes")


def _source(risks: RiskVector) -> str:
    return risks.source.describe() if hasattr(risks.source, "describe") else str(risks.source)


def _counts(mask, phi_i, phi_j):
    comparable = int(mask.sum())
    if comparable == 0:
        raise NoComparablePairsError("no comparable pairs")
    concordant = int((mask & (phi_i > phi_j)).sum())
    tied = int((mask & (phi_i == phi_j)).sum())
    return comparable, concordant, tied


def harrell_c(risks: RiskVector, outcomes: OutcomeView) -> ConcordanceResult:
    """Harrell's C: share of comparable pairs where the earlier subject is riskier."""
    _check_lengths(len(risks.values), outcomes)
    phi = riskier_values(risks)
    mask = comparable_mask(outcomes.times, outcomes.events)
    comp, conc, tied = _counts(mask, phi[:, None], phi[None, :])
    return ConcordanceResult((conc + 0.5 * tied) / comp, comp, conc, tied, "harrell", _source(risks))


def censoring_survival_left(train: OutcomeView, at) -> np.ndarray:
    """Kaplan-Meier of the censoring distribution, evaluated just before ``at``."""
    G = product_limit(train.times, 1 - train.events)
    at = np.asarray(at, dtype=float)
    k = np.searchsorted(G.times, at, side="left") - 1
    return np.where(k >= 0, G.probs[np.clip(k, 0, None)], 1.0)


def uno_c(risks: RiskVector, outcomes: OutcomeView, train_outcomes: OutcomeView,
          tau: Optional[float] = None) -> ConcordanceResult:
    """Uno's IPCW C restricted to earlier times below ``tau``.

    Each comparable pair is weighted by ``G(T_i-)**-2``, with ``G`` the
    censoring survival estimated on ``train_outcomes``. ``tau`` defaults to the
    largest event time in ``outcomes``.
    """
    _check_lengths(len(risks.values), outcomes)
    t, e = outcomes.times, outcomes.events
    if tau is None:
        if not e.any():
            raise NoComparablePairsError("no events in outcomes")
        tau = float(t[e == 1].max())
    phi = riskier_values(risks)
    mask = comparable_mask(t, e) & (t < tau)[:, None]
    comp, conc, tied = _counts(mask, phi[:, None], phi[None, :])

    rows = mask.any(axis=1)
    G = censoring_survival_left(train_outcomes, t)
    if np.any(G[rows] <= 0):
        bad = float(t[rows][G[rows] <= 0][0])
        raise NumericalError(f"censoring survival is zero just before t={bad:g}; IPCW weight undefined")
    w = np.zeros_like(t)
    w[rows] = 1.0 / G[rows] ** 2

    W = mask * w[:, None]
    num = float((W * (phi[:, None] > phi[None, :])).sum() + 0.5 * (W * (phi[:, None] == phi[None, :])).sum())
    den = float(W.sum())
    return ConcordanceResult(num / den, comp, conc, tied, "uno", _source(risks), tau, num, den)


def antolini_c(curves: CurveMatrix, outcomes: OutcomeView,
               risk_source: str = "distribution") -> ConcordanceResult:
    """Antolini's C: compare both curves at the earlier subject's observed time."""
    _check_lengths(len(curves), outcomes)
    S = curves.at_each(outcomes.times)  # S[i, j] = S_j(T_i)
    own = np.diag(S)[:, None]
    mask = comparable_mask(outcomes.times, outcomes.events)
    # concordant when the earlier subject has the lower survival probability
    comp, conc, tied = _counts(mask, -own, -S)
    return ConcordanceResult((conc + 0.5 * tied) / comp, comp, conc, tied, "antolini", risk_source)


def _cases_controls(risks: RiskVector, outcomes: OutcomeView, t: float):
    _check_lengths(len(risks.values), outcomes)
    phi = riskier_values(risks)
    cases = (outcomes.times <= t) & (outcomes.events == 1)
    controls = outcomes.times > t
    if not cases.any() or not controls.any():
        raise NoComparablePairsError(f"need at least one case and one control at t={t:g}")
    return phi[cases], phi[controls]


def roc_at_time(risks: RiskVector, outcomes: OutcomeView, t: float, thresholds) -> list[tuple[float, float]]:
    """Cumulative-case / dynamic-control (sensitivity, specificity) per threshold.

    Subjects censored at or before ``t`` are neither cases nor controls.
    """
    case, ctrl = _cases_controls(risks, outcomes, t)
    c = np.asarray(thresholds, dtype=float)
    sens = (case[None, :] > c[:, None]).mean(axis=1)
    spec = (ctrl[None, :] <= c[:, None]).mean(axis=1)
    return list(zip(sens.tolist(), spec.tolist()))


def auc_at_time(risks: RiskVector, outcomes: OutcomeView, t: float) -> float:
    """Trapezoidal area under the ROC curve traced through every distinct risk."""
    case, ctrl = _cases_controls(risks, outcomes, t)
    cuts = np.concatenate([[-np.inf], np.unique(np.concatenate([case, ctrl]))])
    # integer true/false positive counts keep the trapezoid sum exact
    tp = (case[None, :] > cuts[:, None]).sum(axis=1)
    fp = (ctrl[None, :] > cuts[:, None]).sum(axis=1)
    # cuts ascend, so both counts descend from (n_ctrl, n_case) to (0, 0)
    twice_area = int(np.sum((fp[:-1] - fp[1:]) * (tp[:-1] + tp[1:])))
    return twice_area / (2 * case.size * ctrl.size)
