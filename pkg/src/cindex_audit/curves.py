"""Step survival curves, nonparametric estimators, and tail fixes.

Curves are right-continuous: the value on ``[times[k], times[k+1])`` is
``probs[k]`` and the curve equals 1 before ``times[0]``. A curve produced by
:func:`linear_extrapolate` additionally carries ``linear_after``; from that
time on the curve is the straight line through its grid points, which keeps
its mean and median exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError, ValidationError

#: floor applied before taking logs of survival probabilities
LOG_CLAMP = 1e-15


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StepCurve:
    times: np.ndarray
    probs: np.ndarray
    linear_after: Optional[float] = None

    def __post_init__(self):
        times, probs = _frozen(self.times).reshape(-1), _frozen(self.probs).reshape(-1)
        if times.shape != probs.shape or times.size == 0:
            raise ValidationError("times and probs must be non-empty and the same length")
        if times[0] <= 0 or np.any(np.diff(times) <= 0):
            raise ValidationError("curve times must be positive and strictly increasing")
        if np.any(probs < 0) or np.any(probs > 1) or np.any(np.diff(probs) > 0):
            raise ValidationError("curve probabilities must lie in [0, 1] and not increase")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "probs", probs)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    @property
    def terminal(self) -> float:
        return float(self.probs[-1])

    @property
    def improper(self) -> bool:
        """True when probability mass is left unassigned beyond the last time."""
        return self.probs[-1] > 0

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(k >= 0, self.probs[np.clip(k, 0, None)], 1.0)
        if self.linear_after is not None:
            inner = (t >= self.linear_after) & (k >= 0) & (k < self.times.size - 1)
            kk = k[inner]
            t0, t1 = self.times[kk], self.times[kk + 1]
            p0, p1 = self.probs[kk], self.probs[kk + 1]
            out[inner] = p0 + (p1 - p0) * (t[inner] - t0) / (t1 - t0)
        return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class HazardCurve:
    times: np.ndarray
    cumhaz: np.ndarray

    def __post_init__(self):
        times, cumhaz = _frozen(self.times).reshape(-1), _frozen(self.cumhaz).reshape(-1)
        if times.shape != cumhaz.shape:
            raise ValidationError("times and cumhaz must have equal length")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("hazard times must be strictly increasing")
        if cumhaz.size and (cumhaz[0] < 0 or np.any(np.diff(cumhaz) < 0)):
            raise ValidationError("cumulative hazard must be non-negative and non-decreasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "cumhaz", cumhaz)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        k = np.searchsorted(self.times, np.atleast_1d(np.asarray(t, dtype=float)), side="right") - 1
        if self.cumhaz.size == 0:
            out = np.zeros(k.shape)
        else:
            out = np.where(k >= 0, self.cumhaz[np.clip(k, 0, None)], 0.0)
        return float(out[0]) if scalar else out

    def survival(self) -> StepCurve:
        return StepCurve(self.times, np.exp(-self.cumhaz))


@dataclass(frozen=True, eq=False)
class CurveMatrix:
    """Survival probabilities for M subjects on a shared grid of M* times."""

    times: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times).reshape(-1)
        probs = _frozen(self.probs)
        if probs.ndim == 1:
            probs = _frozen(probs.reshape(1, -1))
        if probs.ndim != 2 or probs.shape[1] != times.size or times.size == 0:
            raise ValidationError(f"probs shape {probs.shape} does not match {times.size} grid times")
        if times[0] <= 0 or np.any(np.diff(times) <= 0):
            raise ValidationError("grid times must be positive and strictly increasing")
        if np.any(probs < 0) or np.any(probs > 1) or np.any(np.diff(probs, axis=1) > 0):
            raise ValidationError("every row must be a valid survival curve")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return self.probs.shape[0]

    def row(self, i: int) -> StepCurve:
        return StepCurve(self.times, self.probs[i])

    def at(self, t) -> np.ndarray:
        """Every subject's survival probability at the scalar time ``t``."""
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        if k < 0:
            return np.ones(len(self))
        return self.probs[:, k].copy()

    def at_each(self, t) -> np.ndarray:
        """Matrix ``out[i, j] = S_j(t[i])`` for a vector of times."""
        k = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right") - 1
        out = self.probs.T[np.clip(k, 0, None)].copy()
        out[k < 0] = 1.0
        return out

    def to_csv(self, path, subject_ids=None) -> None:
        ids = subject_ids if subject_ids is not None else [f"s{i}" for i in range(len(self))]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["time", *ids])
            for k, t in enumerate(self.times):
                w.writerow([f"{t:.12g}", *(f"{p:.12g}" for p in self.probs[:, k])])

    @classmethod
    def from_csv(cls, path) -> "CurveMatrix":
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(arr[:, 0], arr[:, 1:].T)


def _risk_table(time, status):
    """Unique times with events and at-risk counts at each."""
    time = np.asarray(time, dtype=float)
    status = np.asarray(status)
    if time.size == 0:
        raise ValidationError("cannot fit an estimator to empty data")
    grid, inv = np.unique(time, return_inverse=True)
    deaths = np.bincount(inv, weights=status, minlength=grid.size)
    counts = np.bincount(inv, minlength=grid.size)
    at_risk = counts[::-1].cumsum()[::-1]
    return grid, deaths, at_risk


def product_limit(time, status) -> StepCurve:
    grid, d, n = _risk_table(time, status)
    return StepCurve(grid, np.cumprod(1.0 - d / n))


def nelson_aalen(time, status) -> HazardCurve:
    grid, d, n = _risk_table(time, status)
    return HazardCurve(grid, np.cumsum(d / n))


def km_fit(data) -> StepCurve:
    """Kaplan-Meier estimate over the unique observed times of ``data``."""
    return product_limit(data.time, data.status)


def na_fit(data) -> HazardCurve:
    """Nelson-Aalen cumulative hazard over the unique observed times of ``data``."""
    return nelson_aalen(data.time, data.status)


def drop_to_zero(curve: StepCurve, delta: float = 1.0) -> StepCurve:
    """Make a curve proper by dropping to 0 at ``t_max + delta``."""
    if delta <= 0:
        raise ValidationError("delta must be positive")
    if not curve.improper:
        return curve
    return StepCurve(np.append(curve.times, curve.t_max + delta), np.append(curve.probs, 0.0),
                     curve.linear_after)


def linear_extrapolate(curve: StepCurve, n_points: int = 20) -> StepCurve:
    """Continue an improper curve along the line through (0, 1) and its last point.

    The line is sampled at ``n_points`` equally spaced times after ``t_max``,
    the last of which is the zero crossing ``t_max / (1 - S(t_max))``.
    """
    if not curve.improper:
        return curve
    if curve.terminal >= 1.0:
        raise NumericalError("flat curve S = 1 has no zero crossing to extrapolate to")
    # a terminal value near 0 puts the crossing within rounding of t_max
    t_zero = max(curve.t_max / (1.0 - curve.terminal), np.nextafter(curve.t_max, np.inf))
    new_t = curve.t_max + (t_zero - curve.t_max) * np.arange(1, n_points + 1) / n_points
    new_t[-1] = t_zero
    new_t = np.unique(new_t[new_t > curve.t_max])
    new_p = np.clip(1.0 - new_t / t_zero, 0.0, curve.terminal)
    new_p[-1] = 0.0
    return StepCurve(np.append(curve.times, new_t), np.append(curve.probs, new_p),
                     linear_after=curve.t_max)


def _linear_segments(curve: StepCurve) -> np.ndarray:
    """Mask over segments [times[k], times[k+1]) that are interpolated linearly."""
    if curve.linear_after is None:
        return np.zeros(curve.times.size - 1, dtype=bool)
    return curve.times[:-1] >= curve.linear_after


def curve_mean(curve: StepCurve) -> float:
    """Area under the curve from 0 to its last grid time.

    For an improper curve this is the restricted mean: mass beyond ``t_max``
    is ignored. Check ``curve.improper`` to tell the cases apart.
    """
    widths = np.diff(curve.times)
    heights = np.where(_linear_segments(curve),
                       0.5 * (curve.probs[:-1] + curve.probs[1:]),
                       curve.probs[:-1])
    return float(curve.times[0] + np.sum(heights * widths))


def curve_median(curve: StepCurve) -> Optional[float]:
    """Smallest time at which the curve is at or below 0.5, or None."""
    hit = np.flatnonzero(curve.probs <= 0.5)
    if hit.size == 0:
        return None
    k = int(hit[0])
    if k > 0 and _linear_segments(curve)[k - 1]:
        t0, t1 = curve.times[k - 1], curve.times[k]
        p0, p1 = curve.probs[k - 1], curve.probs[k]
        return float(t0 + (p0 - 0.5) / (p0 - p1) * (t1 - t0))
    return float(curve.times[k])
