"""Random survival forest with log-rank splitting and Nelson-Aalen leaves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from ..curves import CurveMatrix
from ..errors import ValidationError


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 250
    mtry: int | None = None  # None -> ceil(sqrt(p))
    min_node_size: int = 5
    max_thresholds: int = 32
    bootstrap: bool = True
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValidationError("n_trees must be at least 1")
        if self.min_node_size < 1:
            raise ValidationError("min_node_size must be at least 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValidationError("mtry must be at least 1")


@dataclass(frozen=True, eq=False)
class SurvivalTree:
    """Array-encoded binary tree.

    Node ``k`` is a leaf when ``left[k] == -1``; its cumulative hazard on the
    forest grid is ``leaf_cumhaz[leaf[k]]``. Internal nodes send ``x[feature[k]]
    <= threshold[k]`` to ``left[k]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf: np.ndarray
    leaf_cumhaz: np.ndarray

    def apply(self, X) -> np.ndarray:
        """Leaf row index reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.left[node[idx]] >= 0
        return self.leaf[node]

    def predict_cumhaz(self, X) -> np.ndarray:
        return self.leaf_cumhaz[self.apply(X)]


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[SurvivalTree, ...]
    grid: np.ndarray
    params: ForestParams
    n_features: int
    feature_names: tuple[str, ...] = ()

    prediction_types = frozenset({"distribution"})
    kind = "rsf"

    def predict_distribution(self, data) -> CurveMatrix:
        return rsf_predict(self, data)


class _NodeRisk:
    """Risk-set bookkeeping for one node, shared by every candidate feature."""

    def __init__(self, time, event):
        ev_times = np.unique(time[event == 1])
        self.K = ev_times.size
        # subject i is at risk at event times 0..pos[i]; it dies at pos[i] when event[i]
        self.pos1 = np.searchsorted(ev_times, time, side="right")
        self.event = event
        counts = np.bincount(self.pos1, minlength=self.K + 1)
        self.Y = counts[::-1].cumsum()[::-1][1:].astype(float)
        self.d = np.bincount(self.pos1, weights=event, minlength=self.K + 1)[1:]
        self.corr = np.divide(self.Y - self.d, self.Y - 1, out=np.zeros_like(self.Y),
                              where=self.Y > 1)
        self.n, self.n_ev = time.size, event.sum()

    def scores(self, x, thresholds, min_node_size: int) -> np.ndarray:
        K, Q = self.K, thresholds.size
        # left child of threshold q holds subjects with enter[i] <= q
        enter = np.searchsorted(thresholds, x, side="left")
        inside = enter < Q
        flat = enter[inside] * (K + 1) + self.pos1[inside]
        size = Q * (K + 1)
        n_by_pos = np.bincount(flat, minlength=size).reshape(Q, K + 1).cumsum(axis=0)
        d_by_pos = np.bincount(flat, weights=self.event[inside], minlength=size)
        d_by_pos = d_by_pos.reshape(Q, K + 1).cumsum(axis=0)
        YL = n_by_pos[:, ::-1].cumsum(axis=1)[:, ::-1][:, 1:]
        frac = YL / self.Y
        U = np.sum(d_by_pos[:, 1:] - frac * self.d, axis=1)
        V = (frac * (1 - frac)) @ (self.corr * self.d)

        n_left, ev_left = n_by_pos.sum(axis=1), d_by_pos.sum(axis=1)
        ok = ((n_left >= min_node_size) & (self.n - n_left >= min_node_size)
              & (ev_left >= 2) & (self.n_ev - ev_left >= 2) & (V > 0))
        return np.where(ok, U**2 / np.where(V > 0, V, 1.0), -np.inf)


def logrank_scores(x, time, event, thresholds, min_node_size: int = 1) -> np.ndarray:
    """Squared standardized log-rank statistic for every split ``x <= c``.

    Inadmissible splits (a child smaller than ``min_node_size`` or with fewer
    than two events, or zero variance) score ``-inf``.
    """
    return _NodeRisk(np.asarray(time, dtype=float), np.asarray(event, dtype=float)).scores(
        np.asarray(x, dtype=float), np.asarray(thresholds, dtype=float), min_node_size)


def candidate_thresholds(x, max_thresholds: int = 32) -> np.ndarray:
    u = np.unique(x)
    mids = (u[:-1] + u[1:]) / 2
    if mids.size > max_thresholds:
        pick = np.unique(np.round(np.linspace(0, mids.size - 1, max_thresholds)).astype(int))
        mids = mids[pick]
    return mids


def _leaf_cumhaz(time, event, grid) -> np.ndarray:
    """Nelson-Aalen cumulative hazard of a leaf, read off on the forest grid."""
    pos1 = np.searchsorted(grid, time, side="right")  # event times always lie on the grid
    counts = np.bincount(pos1, minlength=grid.size + 1)
    at_risk = counts[::-1].cumsum()[::-1][1:]
    d = np.bincount(pos1, weights=event, minlength=grid.size + 1)[1:]
    return np.cumsum(np.divide(d, at_risk, out=np.zeros(grid.size), where=at_risk > 0))


def _grow_tree(X, time, event, grid, params: ForestParams, mtry: int, rng) -> SurvivalTree:
    n, p = X.shape
    event = event.astype(float)
    if params.bootstrap:
        sample = rng.integers(0, n, size=n)
    else:
        sample = np.arange(n)

    feature, threshold, left, right, leaf, curves = [], [], [], [], [], []

    def new_node():
        for lst, v in ((feature, -1), (threshold, np.nan), (left, -1), (right, -1), (leaf, -1)):
            lst.append(v)
        return len(feature) - 1

    stack = [(new_node(), sample)]
    while stack:
        node, idx = stack.pop()
        t, e = time[idx], event[idx]
        best = (-np.inf, -1, np.nan)
        if idx.size >= 2 * params.min_node_size and e.sum() >= 4 and mtry > 0:
            risk = _NodeRisk(t, e)
            for f in rng.choice(p, size=mtry, replace=False):
                xs = X[idx, f]
                cuts = candidate_thresholds(xs, params.max_thresholds)
                if cuts.size == 0:
                    continue
                scores = risk.scores(xs, cuts, params.min_node_size)
                k = int(np.argmax(scores))
                if scores[k] > best[0]:
                    best = (scores[k], int(f), float(cuts[k]))
        if np.isfinite(best[0]):
            _, f, c = best
            feature[node], threshold[node] = f, c
            go_left = X[idx, f] <= c
            lo, hi = new_node(), new_node()
            left[node], right[node] = lo, hi
            stack.append((hi, idx[~go_left]))
            stack.append((lo, idx[go_left]))
        else:
            leaf[node] = len(curves)
            curves.append(_leaf_cumhaz(t, e, grid))

    return SurvivalTree(np.array(feature), np.array(threshold), np.array(left), np.array(right),
                        np.array(leaf), np.array(curves))


def rsf_fit(train, params: ForestParams = ForestParams()) -> ForestModel:
    """Grow ``params.n_trees`` log-rank trees, each from its own seeded stream.

    Tree ``k`` draws from the k-th child of ``SeedSequence(params.seed)``, so
    the forest does not depend on ``n_jobs``.
    """
    if train.n_events < 1:
        raise ValidationError("random survival forest needs at least one event")
    X, time, event = train.X, train.time, train.status
    p = X.shape[1]
    mtry = min(p, params.mtry if params.mtry is not None else math.ceil(math.sqrt(p)))
    grid = np.unique(time[event == 1])
    seeds = np.random.SeedSequence(params.seed).spawn(params.n_trees)

    trees = Parallel(n_jobs=params.n_jobs)(
        delayed(_grow_tree)(X, time, event, grid, params, mtry, np.random.default_rng(ss))
        for ss in seeds)
    return ForestModel(tuple(trees), grid, params, p, train.feature_names)


def rsf_predict(model: ForestModel, data) -> CurveMatrix:
    """Average the trees' leaf cumulative hazards, then exponentiate."""
    if data.X.shape[1] != model.n_features:
        raise ValidationError(f"model expects {model.n_features} covariates, got {data.X.shape[1]}")
    H = np.zeros((len(data), model.grid.size))
    for tree in model.trees:
        H += tree.predict_cumhaz(data.X)
    H /= len(model.trees)
    return CurveMatrix(model.grid, np.exp(-H))
