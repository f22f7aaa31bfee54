"""Right-censored datasets: CSV ingestion, holdout splitting, simulation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import SchemaError, UnusableSplitError, ValidationError


@dataclass(frozen=True)
class SurvivalRecord:
    time: float
    status: int
    covariates: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented survival data.

    ``time[i]`` is the observed time min(event, censoring), ``status[i]`` is 1
    when the event was observed, and ``X[i]`` holds the encoded covariates.
    Arrays are made read-only on construction.
    """

    time: np.ndarray
    status: np.ndarray
    X: np.ndarray
    feature_names: tuple[str, ...] = ()
    # held-out partitions may lack events; every fitter still requires them
    allow_eventless: bool = field(default=False, repr=False)

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float).reshape(-1)
        status = np.asarray(self.status).reshape(-1)
        n = time.shape[0]
        X = np.asarray(self.X, dtype=float)
        if X.size == 0:
            X = np.zeros((n, 0))
        X = X.reshape(n, -1)
        names = tuple(self.feature_names) or tuple(f"x{k + 1}" for k in range(X.shape[1]))

        if n == 0:
            raise ValidationError("dataset is empty")
        if status.shape[0] != n:
            raise ValidationError("time and status lengths differ")
        if len(names) != X.shape[1]:
            raise ValidationError(f"{len(names)} feature names for {X.shape[1]} covariates")
        bad = np.flatnonzero(~(time > 0) | ~np.isfinite(time))
        if bad.size:
            raise ValidationError(f"non-positive or non-finite time at row {bad[0]}")
        if not np.all((status == 0) | (status == 1)):
            row = int(np.flatnonzero((status != 0) & (status != 1))[0])
            raise ValidationError(f"status must be 0 or 1 (row {row})")
        if status.sum() == 0 and not self.allow_eventless:
            raise ValidationError("dataset has no events")

        status = status.astype(np.int64)
        for arr in (time, status, X):
            arr.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "feature_names", names)

    def __len__(self) -> int:
        return self.time.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_events(self) -> int:
        return int(self.status.sum())

    @property
    def records(self) -> Iterator[SurvivalRecord]:
        for t, s, x in zip(self.time, self.status, self.X):
            yield SurvivalRecord(float(t), int(s), tuple(float(v) for v in x))

    def subset(self, idx, allow_eventless: bool = False) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.time[idx], self.status[idx], self.X[idx], self.feature_names,
                       allow_eventless=allow_eventless)

    def drop_features(self, names: Sequence[str]) -> "Dataset":
        unknown = set(names) - set(self.feature_names)
        if unknown:
            raise SchemaError(f"unknown covariate(s): {', '.join(sorted(unknown))}")
        keep = [k for k, nm in enumerate(self.feature_names) if nm not in names]
        return Dataset(self.time, self.status, self.X[:, keep],
                       tuple(self.feature_names[k] for k in keep))

    @classmethod
    def from_records(cls, records: Sequence[SurvivalRecord], feature_names=()) -> "Dataset":
        records = list(records)
        return cls(np.array([r.time for r in records], dtype=float),
                   np.array([r.status for r in records]),
                   np.array([r.covariates for r in records], dtype=float),
                   feature_names)


@dataclass(frozen=True)
class CsvSchema:
    time_col: str = "time"
    status_col: str = "status"
    drop_cols: tuple[str, ...] = ()


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 2 / 3
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValidationError("train_fraction must lie in (0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


def _parse_float(value: str):
    try:
        return float(value)
    except ValueError:
        return None


def _encode_column(name: str, values: list[str]) -> tuple[list[str], list[list[float]]]:
    """Encode one covariate column; returns (names, columns)."""
    parsed = [_parse_float(v) for v in values]
    if all(p is not None for p in parsed):
        return [name], [parsed]
    levels = sorted(set(values))
    if len(levels) <= 2:
        # lexicographically first level -> 0
        top = levels[-1]
        return [name], [[1.0 if v == top else 0.0 for v in values]]
    names, cols = [], []
    for level in levels[1:]:
        names.append(f"{name}={level}")
        cols.append([1.0 if v == level else 0.0 for v in values])
    return names, cols


def load_csv(path, schema: CsvSchema = CsvSchema(), allow_eventless: bool = False) -> Dataset:
    """Read a comma-delimited file with a header row into a :class:`Dataset`.

    Numeric covariate columns are used as-is. String columns with two levels
    become 0/1 in lexicographic order; more levels are one-hot encoded with
    the lexicographically first level dropped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = [row for row in reader if row]

    for col in (schema.time_col, schema.status_col, *schema.drop_cols):
        if col not in header:
            raise SchemaError(f"missing column {col!r}")
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValidationError(f"row {i}: expected {len(header)} fields, got {len(row)}")

    ti, si = header.index(schema.time_col), header.index(schema.status_col)
    times, status = [], []
    for i, row in enumerate(rows):
        t = _parse_float(row[ti])
        if t is None:
            raise ValidationError(f"row {i}: time {row[ti]!r} is not numeric")
        if not t > 0:
            raise ValidationError(f"row {i}: time must be positive, got {t}")
        s = _parse_float(row[si])
        if s not in (0.0, 1.0):
            raise ValidationError(f"row {i}: status must be 0 or 1, got {row[si]!r}")
        times.append(t)
        status.append(int(s))

    skip = {schema.time_col, schema.status_col, *schema.drop_cols}
    names, cols = [], []
    for k, col in enumerate(header):
        if col in skip:
            continue
        nm, cl = _encode_column(col, [row[k].strip() for row in rows])
        names += nm
        cols += cl
    X = np.array(cols, dtype=float).T if cols else np.zeros((len(rows), 0))
    return Dataset(np.array(times), np.array(status), X, tuple(names), allow_eventless)


def write_csv(data: Dataset, path) -> None:
    """Write ``data`` so that :func:`load_csv` reproduces it exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "status", *data.feature_names])
        for t, s, x in zip(data.time, data.status, data.X):
            w.writerow([repr(float(t)), int(s), *(repr(float(v)) for v in x)])


def holdout_split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Unstratified random split; the train size is round-half-up of n * fraction."""
    n = len(data)
    n_train = int(np.floor(n * spec.train_fraction + 0.5))
    if not 0 < n_train < n:
        raise UnusableSplitError(f"split of n={n} at {spec.train_fraction} leaves an empty partition")
    perm = np.random.default_rng(int(spec.seed)).permutation(n)
    train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    if data.status[train_idx].sum() == 0:
        raise UnusableSplitError("training partition contains no events")
    return data.subset(train_idx), data.subset(test_idx, allow_eventless=True)


def simulate_weibull_ph(n: int, beta, shape: float = 1.0, scale: float = 1.0,
                        censor_rate: float = 0.5, seed: int = 0) -> Dataset:
    """Draw Weibull proportional-hazards data with exponential censoring.

    Covariates are iid standard normal. The event time has cumulative hazard
    ``(t / scale) ** shape * exp(X @ beta)``; censoring is exponential with
    rate ``censor_rate``, independent of everything else.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if n < 1:
        raise ValidationError("n must be at least 1")
    if not (shape > 0 and scale > 0 and censor_rate > 0):
        raise ValidationError("shape, scale and censor_rate must be positive")
    sx, st, sc = np.random.SeedSequence(int(seed)).spawn(3)
    X = np.random.default_rng(sx).standard_normal((n, beta.size))
    eta = X @ beta
    e = np.random.default_rng(st).standard_exponential(n)
    t_event = scale * (e * np.exp(-eta)) ** (1.0 / shape)
    t_cens = np.random.default_rng(sc).standard_exponential(n) / censor_rate
    time = np.minimum(t_event, t_cens)
    status = (t_event <= t_cens).astype(int)
    if status.sum() == 0:
        raise ValidationError("simulation produced no events; lower censor_rate or raise n")
    return Dataset(time, status, X)
