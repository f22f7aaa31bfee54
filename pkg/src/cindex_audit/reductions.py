"""Distribution-to-risk reductions.

Every reduction returns a :class:`RiskVector` whose orientation says which
direction means "more hazardous". Nothing here negates values to make them
look like risks; the concordance layer normalizes orientation exactly once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .curves import (LOG_CLAMP, CurveMatrix, curve_mean, curve_median, drop_to_zero,
                     linear_extrapolate)
from .errors import ValidationError


class Orientation(str, enum.Enum):
    HIGHER_IS_RISKIER = "higher_is_riskier"
    HIGHER_IS_LONGER_LIVED = "higher_is_longer_lived"

    def flipped(self) -> "Orientation":
        if self is Orientation.HIGHER_IS_RISKIER:
            return Orientation.HIGHER_IS_LONGER_LIVED
        return Orientation.HIGHER_IS_RISKIER


METHODS = ("expected_mortality", "prob_at_time", "mean_naive", "mean_drop", "mean_linear",
           "median_drop")
SUMMARY_METHODS = ("mean_naive", "mean_drop", "mean_linear", "median_drop")


@dataclass(frozen=True)
class ReductionSpec:
    method: str
    time_point: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown reduction {self.method!r}; choose from {', '.join(METHODS)}")
        if (self.time_point is not None) != (self.method == "prob_at_time"):
            raise ValidationError("time_point is required for prob_at_time and only for it")
        if self.time_point is not None and not self.time_point > 0:
            raise ValidationError("time_point must be positive")
        if self.delta is not None:
            if self.method not in ("mean_drop", "median_drop"):
                raise ValidationError("delta only applies to the drop-to-zero variants")
            if not self.delta > 0:
                raise ValidationError("delta must be positive")

    def describe(self) -> str:
        parts = [self.method]
        if self.time_point is not None:
            parts.append(f"t={self.time_point:.12g}")
        if self.delta is not None:
            parts.append(f"delta={self.delta:.12g}")
        return ";".join(parts)


@dataclass(frozen=True, eq=False)
class RiskVector:
    values: np.ndarray
    orientation: Orientation = Orientation.HIGHER_IS_RISKIER
    source: Union[ReductionSpec, str] = "native"
    improper_count: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise ValidationError("risk values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if not 0 <= self.improper_count <= values.size:
            raise ValidationError("improper_count out of range")

    def __len__(self):
        return self.values.size

    def flipped(self) -> "RiskVector":
        """Same ranking expressed the other way round."""
        return RiskVector(-self.values, self.orientation.flipped(), self.source, self.improper_count)

    def mislabelled(self) -> "RiskVector":
        """Same values with the opposite orientation tag; a deliberate misuse."""
        return RiskVector(self.values, self.orientation.flipped(), self.source, self.improper_count)


def expected_mortality(curves: CurveMatrix) -> RiskVector:
    """Sum of the cumulative hazard ``-log S`` over the prediction grid."""
    p = np.clip(curves.probs, LOG_CLAMP, 1.0)
    return RiskVector(np.sum(-np.log(p), axis=1), Orientation.HIGHER_IS_RISKIER,
                      ReductionSpec("expected_mortality"))


def prob_at_time(curves: CurveMatrix, t: float) -> RiskVector:
    """Survival probability at ``t``; larger means longer-lived."""
    return RiskVector(curves.at(t), Orientation.HIGHER_IS_LONGER_LIVED,
                      ReductionSpec("prob_at_time", time_point=float(t)))


def summary_reduce(curves: CurveMatrix, spec: ReductionSpec) -> RiskVector:
    """Mean or median survival time of each row after the requested tail fix."""
    if spec.method not in SUMMARY_METHODS:
        raise ValidationError(f"{spec.method} is not a summary reduction")
    delta = 1.0 if spec.delta is None else spec.delta
    values = np.empty(len(curves))
    improper = 0
    for i in range(len(curves)):
        c = curves.row(i)
        improper += bool(c.improper)
        if spec.method == "mean_naive":
            values[i] = curve_mean(c)
        elif spec.method == "mean_drop":
            values[i] = curve_mean(drop_to_zero(c, delta))
        elif spec.method == "mean_linear":
            values[i] = curve_mean(linear_extrapolate(c))
        else:
            values[i] = curve_median(drop_to_zero(c, delta))
    return RiskVector(values, Orientation.HIGHER_IS_LONGER_LIVED, spec, improper)


def reduce(curves: CurveMatrix, spec: ReductionSpec) -> RiskVector:
    if spec.method == "expected_mortality":
        return expected_mortality(curves)
    if spec.method == "prob_at_time":
        return prob_at_time(curves, spec.time_point)
    return summary_reduce(curves, spec)
