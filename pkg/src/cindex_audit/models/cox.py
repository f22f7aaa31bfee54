"""Cox proportional hazards fitted by Newton-Raphson on the Breslow partial likelihood."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..curves import CurveMatrix, HazardCurve
from ..errors import ConvergenceError, SeparationError, ValidationError
from ..reductions import Orientation, RiskVector

SEPARATION_BOUND = 50.0
STEP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CoxModel:
    beta: np.ndarray
    baseline: HazardCurve
    train_feature_means: np.ndarray
    feature_names: tuple[str, ...] = ()
    n_iter: int = 0
    grad_norm: float = 0.0
    loglik_trace: tuple[float, ...] = ()
    warnings: tuple[str, ...] = ()

    prediction_types = frozenset({"risk", "distribution"})
    kind = "cox"

    def predict_risk(self, data) -> RiskVector:
        return cox_predict_risk(self, data)

    def predict_distribution(self, data) -> CurveMatrix:
        return cox_predict_distribution(self, data)


class _Sorted(NamedTuple):
    """Training data sorted by time; ``first[k]`` opens the k-th event time's risk set."""

    X: np.ndarray
    event: np.ndarray
    first: np.ndarray
    deaths: np.ndarray


def _sort_for_likelihood(time, status, X) -> _Sorted:
    order = np.argsort(time, kind="stable")
    t, e = time[order], status[order].astype(float)
    uniq, first = np.unique(t, return_index=True)
    deaths = np.bincount(np.searchsorted(uniq, t), weights=e, minlength=uniq.size)
    keep = deaths > 0
    return _Sorted(X[order], e, first[keep], deaths[keep])


def _rev_cumsum(a):
    return np.flip(np.cumsum(np.flip(a, axis=0), axis=0), axis=0)


def _derivatives(beta, s: _Sorted, order: int = 2):
    """Partial log-likelihood and (optionally) its gradient and Hessian."""
    eta = s.X @ beta
    log_S0 = np.flip(np.logaddexp.accumulate(np.flip(eta)))[s.first]
    loglik = float(s.event @ eta - s.deaths @ log_S0)
    if order == 0:
        return loglik, None, None
    # a single shift is exact unless eta spans ~700, which only diverging fits reach
    shift = eta.max()
    w = np.exp(eta - shift)
    S0 = _rev_cumsum(w)[s.first]
    S1 = _rev_cumsum(w[:, None] * s.X)[s.first]
    S2 = _rev_cumsum(w[:, None, None] * s.X[:, :, None] * s.X[:, None, :])[s.first]
    with np.errstate(divide="ignore", invalid="ignore"):  # caller checks finiteness
        mean = S1 / S0[:, None]
        cov = S2 / S0[:, None, None] - mean[:, :, None] * mean[:, None, :]
    grad = s.event @ s.X - s.deaths @ mean
    hess = -np.tensordot(s.deaths, cov, axes=1)
    return loglik, grad, hess


def partial_log_likelihood(beta, data, center=True) -> float:
    """Breslow partial log-likelihood of ``beta`` on ``data``."""
    X = data.X - data.X.mean(axis=0) if center else data.X
    return _derivatives(np.asarray(beta, dtype=float), _sort_for_likelihood(data.time, data.status, X), 0)[0]


def cox_fit(train, tol: float = 1e-9, max_iter: int = 100,
            on_separation: str = "raise") -> CoxModel:
    """Maximize the partial likelihood from beta = 0 with step-halving.

    A covariate with zero variance keeps coefficient 0 and is recorded in
    ``model.warnings``. Raises :class:`ConvergenceError` after ``max_iter``.

    A monotone likelihood (perfect separation) shows up as coefficients past
    50 in magnitude, or as a vanishing gradient while Newton steps stay large
    and the likelihood keeps rising out to that bound. It raises
    :class:`SeparationError`; with ``on_separation="warn"`` the fit instead
    stops at the last finite iterate and records a warning.
    """
    if on_separation not in ("raise", "warn"):
        raise ValidationError("on_separation must be 'raise' or 'warn'")
    if train.n_events < 2:
        raise ValidationError("Cox fit needs at least two events")
    means = train.X.mean(axis=0)
    Xc = train.X - means
    p = Xc.shape[1]
    notes = []
    active = np.ptp(train.X, axis=0) > 0 if p else np.zeros(0, dtype=bool)
    for k in np.flatnonzero(~active):
        msg = f"covariate {train.feature_names[k]!r} has zero variance; coefficient fixed at 0"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    s = _sort_for_likelihood(train.time, train.status, Xc[:, active])
    b = np.zeros(int(active.sum()))
    loglik, grad, hess = _derivatives(b, s)
    trace = [loglik]
    gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0

    def diverged(beta_seen):
        msg = "coefficients diverge; the partial likelihood looks monotone (perfect separation)"
        if on_separation == "raise":
            raise SeparationError(msg, beta=beta_seen)
        names = [n for n, a in zip(train.feature_names, active) if a]
        big = ", ".join(names[k] for k in np.flatnonzero(np.abs(beta_seen) > 10)) or "unknown"
        note = f"{msg}; stopped early, coefficients may be infinite ({big})"
        warnings.warn(note, RuntimeWarning, stacklevel=3)
        notes.append(note)

    it = 0
    while b.size:
        try:
            step = np.linalg.solve(-hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(-hess, grad, rcond=None)[0]
        # below this level likelihood comparisons are round-off
        noise = 1e-12 * max(1.0, abs(loglik))
        if gnorm < tol:
            if np.max(np.abs(step)) <= STEP_TOL * (1.0 + np.max(np.abs(b))):
                break
            # vanishing gradient but large Newton steps: probe the ray past the bound
            far = b + step / np.max(np.abs(step)) * (SEPARATION_BOUND + 1 + 2 * np.max(np.abs(b)))
            if _derivatives(far, s, 0)[0] >= loglik - noise:
                diverged(far)
                break
        if it == max_iter:
            raise ConvergenceError(f"Newton-Raphson did not converge in {max_iter} iterations "
                                   f"(gradient sup-norm {gnorm:.3g})", beta=b, grad_norm=gnorm)
        it += 1
        for _ in range(11):
            if grad @ step < noise or _derivatives(b + step, s, 0)[0] >= loglik:
                break
            step = step / 2
        else:
            raise ConvergenceError("step-halving found no ascent before the gradient vanished",
                                   beta=b, grad_norm=gnorm)
        nxt = b + step
        if np.max(np.abs(nxt)) > SEPARATION_BOUND:
            diverged(nxt)
            break
        new_loglik, new_grad, new_hess = _derivatives(nxt, s)
        if not (np.isfinite(new_grad).all() and np.isfinite(new_hess).all()):
            diverged(nxt)
            break
        b, loglik, grad, hess = nxt, new_loglik, new_grad, new_hess
        trace.append(loglik)
        gnorm = float(np.max(np.abs(grad)))

    beta = np.zeros(p)
    beta[active] = b
    risk = np.exp(Xc @ beta)
    grid, first = np.unique(np.sort(train.time), return_index=True)
    order = np.argsort(train.time, kind="stable")
    S0 = _rev_cumsum(risk[order])[first]
    d = np.bincount(np.searchsorted(grid, train.time), weights=train.status, minlength=grid.size)
    keep = d > 0
    baseline = HazardCurve(grid[keep], np.cumsum(d[keep] / S0[keep]))
    return CoxModel(beta, baseline, means, train.feature_names, it, gnorm, tuple(trace), tuple(notes))


def _linear_predictor(model: CoxModel, data) -> np.ndarray:
    if data.X.shape[1] != model.beta.size:
        raise ValidationError(f"model expects {model.beta.size} covariates, got {data.X.shape[1]}")
    return (data.X - model.train_feature_means) @ model.beta


def cox_predict_risk(model: CoxModel, data) -> RiskVector:
    return RiskVector(_linear_predictor(model, data), Orientation.HIGHER_IS_RISKIER, "native")


def cox_predict_distribution(model: CoxModel, data) -> CurveMatrix:
    eta = _linear_predictor(model, data)
    H = model.baseline.cumhaz[None, :] * np.exp(eta)[:, None]
    return CurveMatrix(model.baseline.times, np.exp(-H))
