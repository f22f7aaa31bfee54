"""Experiment driver: holdout split, reference models, and the model x method C grid."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .concordance import (ConcordanceResult, OutcomeView, antolini_c, harrell_c, uno_c)
from .errors import IncompatibleMeasureError, NumericalError, ValidationError
from .models import ForestParams, cox_fit, rsf_fit, smoothc_fit
from .reductions import ReductionSpec, RiskVector, expected_mortality, prob_at_time, summary_reduce
from .survdata import CsvSchema, Dataset, SplitSpec, holdout_split, load_csv

# grid rows in display order: (label, measure, reduction, prediction type needed)
ROWS = (
    ("Harrell", "harrell", "native", "risk"),
    ("Uno", "uno", "native", "risk"),
    ("Antolini", "antolini", "distribution", "distribution"),
    ("Prob (min)", "harrell", "prob_at_time", "distribution"),
    ("Prob (max)", "harrell", "prob_at_time", "distribution"),
    ("Prob (rand)", "harrell", "prob_at_time", "distribution"),
    ("Summary (naive)", "harrell", "mean_naive", "distribution"),
    ("Summary (extr)", "harrell", "mean_drop", "distribution"),
    ("ExpMort", "harrell", "expected_mortality", "distribution"),
)
ROW_LABELS = tuple(r[0] for r in ROWS)
ROW_NEEDS = {r[0]: r[3] for r in ROWS}
PREDICTION_TYPES = {"cox": frozenset({"risk", "distribution"}),
                    "rsf": frozenset({"distribution"}),
                    "smoothc": frozenset({"risk"})}
MODEL_DEFAULTS = {
    "cox": {"tol": 1e-9, "max_iter": 100, "on_separation": "raise"},
    "rsf": {"n_trees": 250, "mtry": None, "min_node_size": 5, "max_thresholds": 32},
    "smoothc": {"sigma": 0.1, "steps": 500, "lr": 0.1},
}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: str
    params: tuple[tuple[str, object], ...] = ()
    # explicit grid rows requested for this model; empty means every compatible row
    rows: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in PREDICTION_TYPES:
            raise ValidationError(f"model {self.name!r}: unknown kind {self.kind!r}")
        unknown = {k for k, _ in self.params} - set(MODEL_DEFAULTS[self.kind])
        if unknown:
            raise ValidationError(f"model {self.name!r}: unknown parameter(s) {sorted(unknown)}")
        if dict(self.params).get("on_separation", "raise") not in ("raise", "warn"):
            raise ValidationError(f"model {self.name!r}: on_separation must be raise or warn")
        for row in self.rows:
            if row not in ROW_NEEDS:
                raise ValidationError(f"model {self.name!r}: unknown grid row {row!r}")

    @property
    def prediction_types(self) -> frozenset:
        return PREDICTION_TYPES[self.kind]

    def options(self) -> dict:
        opts = dict(MODEL_DEFAULTS[self.kind])
        opts.update(self.params)
        return opts


DEFAULT_MODELS = (ModelSpec("CPH", "cox"), ModelSpec("RSF", "rsf"), ModelSpec("SmoothC", "smoothc"))


@dataclass(frozen=True)
class ScanSettings:
    full_grid: bool = True
    max_points: int = 50  # used when full_grid is off
    include_origin: bool = True  # scan a time before the first grid point too


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: Optional[str] = None
    schema: CsvSchema = CsvSchema()
    train_fraction: float = 2 / 3
    seed: int = 0
    models: tuple[ModelSpec, ...] = DEFAULT_MODELS
    scan: ScanSettings = ScanSettings()
    delta: float = 1.0
    output_prefix: str = "audit"

    @property
    def split(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.seed)

    def validate(self) -> None:
        """Type-check every requested (model, row) pair; raises before any fitting."""
        names = [m.name for m in self.models]
        if not names:
            raise ValidationError("no models configured")
        if len(set(names)) != len(names):
            raise ValidationError("model names must be unique")
        if not self.delta > 0:
            raise ValidationError("delta must be positive")
        self.split  # noqa: B018 - SplitSpec validates itself
        for m in self.models:
            for row in m.rows:
                need = ROW_NEEDS[row]
                if need not in m.prediction_types:
                    raise IncompatibleMeasureError(
                        f"{row} needs a {need} prediction but {m.name} ({m.kind}) only predicts "
                        f"{' and '.join(sorted(m.prediction_types))}")


@dataclass(frozen=True)
class ScanSummary:
    times: np.ndarray
    values: np.ndarray
    t_min: float
    c_min: float
    t_max: float
    c_max: float
    t_rand: float
    c_rand: float

    @property
    def spread(self) -> float:
        return self.c_max - self.c_min


@dataclass
class AuditGrid:
    models: tuple[str, ...]
    model_kinds: dict[str, str]
    cells: dict[tuple[str, str], Optional[ConcordanceResult]]
    scans: dict[str, ScanSummary] = field(default_factory=dict)
    naive_inverted: dict[str, float] = field(default_factory=dict)
    improper_counts: dict[str, int] = field(default_factory=dict)
    n_train: int = 0
    n_test: int = 0
    seed: int = 0
    delta: float = 1.0
    rows: tuple[str, ...] = ROW_LABELS

    def value(self, row: str, model: str) -> Optional[float]:
        cell = self.cells.get((row, model))
        return None if cell is None else cell.estimate

    def populated(self, model: str) -> list[str]:
        return [r for r in self.rows if self.cells.get((r, model)) is not None]


def row_provenance(row: str, delta: float = 1.0) -> str:
    label, measure, reduction, _ = next(r for r in ROWS if r[0] == row)
    if reduction == "mean_drop":
        reduction = ReductionSpec("mean_drop", delta=delta).describe()
    elif reduction == "prob_at_time":
        reduction = "prob_at_time;t=per-cell"
    return f"{measure} on {reduction}"


def model_prediction_types(kind: str) -> frozenset:
    return PREDICTION_TYPES[kind]


def fit_model(spec: ModelSpec, train: Dataset, seed: int):
    opts = spec.options()
    if spec.kind == "cox":
        return cox_fit(train, tol=opts["tol"], max_iter=int(opts["max_iter"]),
                       on_separation=opts["on_separation"])
    if spec.kind == "rsf":
        return rsf_fit(train, ForestParams(n_trees=int(opts["n_trees"]),
                                           mtry=None if opts["mtry"] is None else int(opts["mtry"]),
                                           min_node_size=int(opts["min_node_size"]),
                                           max_thresholds=int(opts["max_thresholds"]), seed=seed))
    return smoothc_fit(train, sigma=opts["sigma"], steps=int(opts["steps"]), lr=opts["lr"])


def scan_times(grid_times: np.ndarray, settings: ScanSettings) -> np.ndarray:
    times = np.asarray(grid_times, dtype=float)
    if not settings.full_grid and times.size > settings.max_points:
        times = times[np.unique(np.round(np.linspace(0, times.size - 1, settings.max_points)).astype(int))]
    if settings.include_origin:
        times = np.concatenate([[grid_times[0] / 2], times])
    return times


def prob_scan(curves, outcomes: OutcomeView, times, t_rand: float) -> ScanSummary:
    """Harrell's C of S(t) at every scan time; the random time is always included."""
    times = np.union1d(np.asarray(times, dtype=float), [t_rand])
    values = np.array([harrell_c(prob_at_time(curves, t), outcomes).estimate for t in times])
    k_min, k_max = int(np.argmin(values)), int(np.argmax(values))
    k_rand = int(np.searchsorted(times, t_rand))
    return ScanSummary(times, values, float(times[k_min]), float(values[k_min]),
                       float(times[k_max]), float(values[k_max]), float(t_rand), float(values[k_rand]))


def _with_source(result: ConcordanceResult, source: str) -> ConcordanceResult:
    return ConcordanceResult(result.estimate, result.comparable, result.concordant, result.tied,
                             result.measure, source, result.tau, result.weighted_concordant,
                             result.weighted_comparable)


def run_experiment(config: ExperimentConfig, data: Optional[Dataset] = None) -> AuditGrid:
    """Split, fit every configured model, and fill the grid.

    Cells a model cannot produce hold ``None``. Deterministic for a fixed
    ``config.seed``, which drives the split, the forest, and the random
    scan time.
    """
    config.validate()
    if data is None:
        if config.data_path is None:
            raise ValidationError("no data supplied")
        data = load_csv(config.data_path, config.schema)
    train, test = holdout_split(data, config.split)
    train_out, test_out = OutcomeView.of(train), OutcomeView.of(test)

    fitted = {}
    for spec in config.models:
        try:
            fitted[spec.name] = fit_model(spec, train, config.seed)
        except NumericalError as exc:
            raise type(exc)(f"fitting {spec.name}: {exc}") from exc

    distr = {name: m.predict_distribution(test) for name, m in fitted.items()
             if "distribution" in m.prediction_types}
    if distr:
        pool = np.unique(np.concatenate([c.times for c in distr.values()]))
        t_rand = float(np.random.default_rng([config.seed, 1]).choice(pool))

    grid = AuditGrid(tuple(s.name for s in config.models), {s.name: s.kind for s in config.models},
                     {}, n_train=len(train), n_test=len(test), seed=config.seed, delta=config.delta)
    for spec in config.models:
        model = fitted[spec.name]
        wanted = set(spec.rows) or set(ROW_LABELS)
        cells = {}
        if "risk" in model.prediction_types:
            risk = model.predict_risk(test)
            cells["Harrell"] = harrell_c(risk, test_out)
            cells["Uno"] = uno_c(risk, test_out, train_out)
        if spec.name in distr:
            S = distr[spec.name]
            cells["Antolini"] = antolini_c(S, test_out)
            scan = prob_scan(S, test_out, scan_times(S.times, config.scan), t_rand)
            grid.scans[spec.name] = scan
            for label, t in (("Prob (min)", scan.t_min), ("Prob (max)", scan.t_max),
                             ("Prob (rand)", scan.t_rand)):
                cells[label] = harrell_c(prob_at_time(S, t), test_out)
            naive = summary_reduce(S, ReductionSpec("mean_naive"))
            cells["Summary (naive)"] = harrell_c(naive, test_out)
            grid.naive_inverted[spec.name] = harrell_c(naive.mislabelled(), test_out).estimate
            grid.improper_counts[spec.name] = naive.improper_count
            cells["Summary (extr)"] = harrell_c(
                summary_reduce(S, ReductionSpec("mean_drop", delta=config.delta)), test_out)
            cells["ExpMort"] = harrell_c(expected_mortality(S), test_out)
        for row in ROW_LABELS:
            cell = cells.get(row) if row in wanted else None
            grid.cells[(row, spec.name)] = cell
    return grid


# ---------------------------------------------------------------- reporting

@dataclass(frozen=True)
class Report:
    markdown: str
    csv: str

    def write(self, prefix) -> tuple[str, str]:
        grid_path, md_path = f"{prefix}_grid.csv", f"{prefix}_report.md"
        with open(grid_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv)
        with open(md_path, "w", encoding="utf-8") as fh:
            fh.write(self.markdown)
        return grid_path, md_path


def _fmt(x: Optional[float], digits: int = 3) -> str:
    return "-" if x is None else f"{x:.{digits}f}"


def grid_csv(grid: AuditGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "model", *ConcordanceResult.CSV_HEADER])
    for row in grid.rows:
        for model in grid.models:
            cell = grid.cells.get((row, model))
            if cell is None:
                w.writerow([row, model, "incompatible", "", "", "", "", "", ""])
            else:
                w.writerow([row, model, *cell.csv_row()])
    return buf.getvalue()


def _ranking(grid: AuditGrid, row: str) -> list[tuple[str, float]]:
    vals = [(m, grid.value(row, m)) for m in grid.models if grid.value(row, m) is not None]
    return sorted(vals, key=lambda mv: (-mv[1], grid.models.index(mv[0])))


def _best_any(grid: AuditGrid) -> list[tuple[str, float, str]]:
    out = []
    for m in grid.models:
        rows = grid.populated(m)
        if rows:
            best = max(rows, key=lambda r: (grid.value(r, m), -grid.rows.index(r)))
            out.append((m, grid.value(best, m), best))
    return sorted(out, key=lambda t: (-t[1], grid.models.index(t[0])))


def _leaders(ranked) -> list[str]:
    return [m for m, v in ranked if v == ranked[0][1]]


def _ranking_sentence(ranked, row_desc: str, kind: str) -> Optional[str]:
    if len(ranked) < 2:
        return None
    lead = _leaders(ranked)
    top = lead[0] if len(lead) == 1 else " and ".join(lead) + " tie"
    rest = ranked[len(lead):]
    tail = f" (then {', '.join(f'{m} {v:.3f}' for m, v in rest)})" if rest else ""
    verb = "" if len(lead) > 1 else " ranks first"
    return f"For {kind} predictions under {row_desc}, {top}{verb} at {ranked[0][1]:.3f}{tail}."


def narratives(grid: AuditGrid) -> list[str]:
    """The ways one grid could be summarized, from most to least transparent."""
    out = []
    for row, desc, kind in (("Antolini", "Antolini's C", "distribution"),
                            ("ExpMort", "Harrell's C on expected mortality", "distribution"),
                            ("Uno", "Uno's C on the native risk", "risk")):
        s = _ranking_sentence(_ranking(grid, row), desc, kind)
        if s:
            out.append(s)
    best = _best_any(grid)
    if len(best) >= 2:
        parts = ", then ".join(f"{m} at {v:.3f}" for m, v, _ in best)
        out.append(f"Quoting each model's largest value from any row: {parts}. "
                   f"(Rows used: {', '.join(f'{m}: {r}' for m, _, r in best)}.)")
    return out


def chacking_flags(grid: AuditGrid) -> list[str]:
    """Rows whose leader differs from the leader of the any-row maximum."""
    best = _best_any(grid)
    if len(best) < 2:
        return []
    picked = {m: (v, r) for m, v, r in best}
    flags = []
    for row in grid.rows:
        ranked = _ranking(grid, row)
        if len(ranked) < 2:
            continue
        present = {m for m, _ in ranked}
        best_val = max(picked[m][0] for m in present)
        tops = [m for m, v, _ in best if m in present and v == best_val]
        if not set(tops) & set(_leaders(ranked)):
            top = tops[0]
            v, r = picked[top]
            flags.append(f"{row} ranks {ranked[0][0]} first ({ranked[0][1]:.3f}), but quoting each "
                         f"model's best row puts {top} ahead ({v:.3f} from {r}).")
    if flags:
        mixed = {ROW_NEEDS[r] for _, _, r in best}
        if len(mixed) > 1:
            flags.append("The any-row ranking compares risk-measure values with "
                         "distribution-measure values.")
    return flags


def audit_report(grid: AuditGrid) -> Report:
    lines = ["# C-index audit", "",
             f"Holdout split: {grid.n_train} train / {grid.n_test} test, seed {grid.seed}.", "",
             "## Grid", "",
             "Each row names the measure and the reduction used to obtain a risk. "
             "`-` marks a method the model's prediction type does not support.", "",
             "| Method | Provenance | " + " | ".join(f"{m} ({grid.model_kinds[m]})" for m in grid.models) + " |",
             "|---|---|" + "---|" * len(grid.models)]
    for row in grid.rows:
        cells = []
        for m in grid.models:
            v = grid.value(row, m)
            if v is not None and row.startswith("Prob") and m in grid.scans:
                sc = grid.scans[m]
                t = {"Prob (min)": sc.t_min, "Prob (max)": sc.t_max, "Prob (rand)": sc.t_rand}[row]
                cells.append(f"{v:.3f} (t={t:.6g})")
            else:
                cells.append(_fmt(v))
        lines.append(f"| {row} | {row_provenance(row, grid.delta)} | " + " | ".join(cells) + " |")

    lines += ["", "## Time-point scan", ""]
    if grid.scans:
        lines += ["| Model | min C (t) | max C (t) | random t C | spread |", "|---|---|---|---|---|"]
        for m, sc in grid.scans.items():
            lines.append(f"| {m} | {sc.c_min:.3f} ({sc.t_min:.6g}) | {sc.c_max:.3f} ({sc.t_max:.6g}) "
                         f"| {sc.c_rand:.3f} ({sc.t_rand:.6g}) | {sc.spread:.3f} |")
        picky = [m for m, sc in grid.scans.items() if sc.spread > 0]
        lines.append("")
        if picky:
            lines.append("**Warning:** Harrell's C on S(t) depends on the chosen t for "
                         f"{', '.join(picky)}; quoting the maximum over t is cherry-picking.")
        else:
            lines.append("Harrell's C on S(t) is the same at every scanned time.")
    else:
        lines.append("No distribution predictions; nothing to scan.")

    if grid.naive_inverted:
        lines += ["", "## Orientation check (Summary (naive))", "",
                  "| Model | proper orientation | inverted | improper rows |", "|---|---|---|---|"]
        for m, inv in grid.naive_inverted.items():
            lines.append(f"| {m} | **{_fmt(grid.value('Summary (naive)', m))}** | {inv:.3f} "
                         f"| {grid.improper_counts[m]} / {grid.n_test} |")
        lines += ["", "Mean survival time is larger for longer-lived subjects. Treating it as a "
                  "risk without negation yields the inverted column."]

    stories = narratives(grid)
    if stories:
        lines += ["", "## Possible summaries, most to least transparent", ""]
        lines += [f"{k}. {s}" for k, s in enumerate(stories, 1)]
    flags = chacking_flags(grid)
    if flags:
        lines += ["", "## C-hacking warning", "",
                  "The model ranking depends on which measure is quoted:", ""]
        lines += [f"- {f}" for f in flags]
    lines.append("")
    return Report("\n".join(lines), grid_csv(grid))
