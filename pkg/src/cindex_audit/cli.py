"""Command-line entry point: ``cindex-audit {simulate,fit,evaluate,audit}``.

Exit status is 0 on success, 1 on invalid input or configuration, and 2 when
a numerical routine fails.

Config file (INI, read by ``audit --config``); every key has a flag twin::

    [data]
    path = rats.csv           ; --data
    time_col = time           ; --time-col
    status_col = status       ; --status-col
    drop_cols = litter        ; --drop-cols (comma separated)

    [experiment]
    seed = 0                  ; --seed
    train_fraction = 0.6667   ; --train-fraction
    delta = 1                 ; --delta
    output_prefix = audit     ; --out-prefix

    [scan]
    full_grid = true          ; --scan-full-grid / --no-scan-full-grid
    max_points = 50           ; --scan-max-points
    include_origin = true     ; --scan-include-origin / --no-scan-include-origin

    [model CPH]               ; one section per model, named "model <label>"
    kind = cox                ; cox | rsf | smoothc
    tol = 1e-9                ; --cox-tol
    max_iter = 100            ; --cox-max-iter
    on_separation = raise     ; --cox-on-separation (raise | warn)
    rows = Harrell,Uno        ; optional explicit grid rows

    [model RSF]
    kind = rsf
    n_trees = 250             ; --rsf-n-trees
    mtry =                    ; --rsf-mtry (empty: ceil(sqrt(p)))
    min_node_size = 5         ; --rsf-min-node-size
    max_thresholds = 32       ; --rsf-max-thresholds

    [model SmoothC]
    kind = smoothc
    sigma = 0.1               ; --smoothc-sigma
    steps = 500               ; --smoothc-steps
    lr = 0.1                  ; --smoothc-lr

Flags override the file; ``--models`` replaces the file's model list.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from typing import Optional, Sequence

from .concordance import OutcomeView, antolini_c, auc_at_time, harrell_c, uno_c
from .errors import IncompatibleMeasureError, NumericalError, ValidationError
from .harness import (DEFAULT_MODELS, MODEL_DEFAULTS, PREDICTION_TYPES, ExperimentConfig,
                      ModelSpec, ScanSettings, audit_report, fit_model, run_experiment)
from .models import load_model, save_model
from .reductions import METHODS, ReductionSpec, reduce
from .survdata import CsvSchema, SplitSpec, holdout_split, load_csv, simulate_weibull_ph, write_csv

# flag dest -> (model kind, parameter, type)
MODEL_FLAGS = {
    "cox_tol": ("cox", "tol", float),
    "cox_max_iter": ("cox", "max_iter", int),
    "cox_on_separation": ("cox", "on_separation", str),
    "rsf_n_trees": ("rsf", "n_trees", int),
    "rsf_mtry": ("rsf", "mtry", int),
    "rsf_min_node_size": ("rsf", "min_node_size", int),
    "rsf_max_thresholds": ("rsf", "max_thresholds", int),
    "smoothc_sigma": ("smoothc", "sigma", float),
    "smoothc_steps": ("smoothc", "steps", int),
    "smoothc_lr": ("smoothc", "lr", float),
}
PARAM_TYPES = {(kind, name): typ for kind, name, typ in MODEL_FLAGS.values()}
MEASURES = ("harrell", "uno", "antolini", "auc")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_schema(p):
    g = p.add_argument_group("data schema ([data] section)")
    g.add_argument("--time-col", help="time column (time_col, default: time)")
    g.add_argument("--status-col", help="event indicator column (status_col, default: status)")
    g.add_argument("--drop-cols", type=_csv_list,
                   help="comma-separated columns to ignore (drop_cols, default: none)")


def _add_model_params(p):
    g = p.add_argument_group("model hyperparameters ([model <label>] sections)")
    for dest, (kind, name, typ) in MODEL_FLAGS.items():
        default = MODEL_DEFAULTS[kind][name]
        g.add_argument("--" + dest.replace("_", "-"), dest=dest, type=typ,
                       help=f"{kind} {name} (default: {default if default is not None else 'auto'})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cindex-audit",
                     description="Fit survival models and audit how the reported C-index "
                                 "depends on the measure and reduction chosen.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write Weibull proportional-hazards data to CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=_floats, required=True, help="comma-separated coefficients")
    p.add_argument("--shape", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--censor-rate", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit one model and save it as JSON")
    p.add_argument("--data", required=True)
    _add_schema(p)
    p.add_argument("--model", choices=sorted(PREDICTION_TYPES), required=True)
    _add_model_params(p)
    p.add_argument("--train-fraction", type=float,
                   help="fit on the training part of a seeded holdout split instead of all rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="compute one concordance measure for a saved model")
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True)
    _add_schema(p)
    p.add_argument("--measure", choices=MEASURES, required=True)
    p.add_argument("--reduction", choices=("native",) + METHODS, default="native",
                   help="how a distribution prediction is turned into a risk (default: native)")
    p.add_argument("--time-point", type=float, help="time for prob_at_time")
    p.add_argument("--delta", type=float, help="drop offset for mean_drop / median_drop")
    p.add_argument("--tau", type=float, help="truncation time for uno")
    p.add_argument("--auc-time", type=float, help="evaluation time for auc")
    p.add_argument("--train-data", help="training CSV for uno when the model file has no outcomes")
    p.add_argument("--out", help="write the result CSV here instead of stdout")

    p = sub.add_parser("audit", help="run the model x method grid and write the report",
                       epilog=__doc__[__doc__.index("Config file"):],
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="INI file; layout below")
    p.add_argument("--data", help="CSV path (path)")
    _add_schema(p)
    p.add_argument("--seed", type=int, help="seed for split, forest and random time (seed)")
    p.add_argument("--train-fraction", type=float, help="train share (train_fraction, default 2/3)")
    p.add_argument("--delta", type=float, help="drop offset for Summary (extr) (delta, default 1)")
    p.add_argument("--out-prefix", help="writes <prefix>_grid.csv and <prefix>_report.md "
                                        "(output_prefix, default: audit)")
    p.add_argument("--models", type=_csv_list,
                   help="comma-separated label=kind or kind entries (default: CPH=cox,RSF=rsf,"
                        "SmoothC=smoothc)")
    g = p.add_argument_group("time-point scan ([scan] section)")
    g.add_argument("--scan-full-grid", action=argparse.BooleanOptionalAction,
                   help="scan every grid time (full_grid, default: on)")
    g.add_argument("--scan-max-points", type=int, help="times scanned when full_grid is off "
                                                       "(max_points, default 50)")
    g.add_argument("--scan-include-origin", action=argparse.BooleanOptionalAction,
                   help="also scan a time before the first grid time (include_origin, default: on)")
    _add_model_params(p)
    return parser


def _schema(args, section=None) -> CsvSchema:
    section = section or {}
    drop = args.drop_cols
    if drop is None:
        drop = _csv_list(section.get("drop_cols", ""))
    return CsvSchema(args.time_col or section.get("time_col", "time"),
                     args.status_col or section.get("status_col", "status"), tuple(drop))


def _model_params(kind: str, args, base: dict) -> tuple:
    params = dict(base)
    for dest, (k, name, _) in MODEL_FLAGS.items():
        value = getattr(args, dest, None)
        if k == kind and value is not None:
            params[name] = value
    return tuple(sorted(params.items()))


def _parse_section_params(kind: str, label: str, section) -> tuple[dict, tuple[str, ...]]:
    params, rows = {}, ()
    for key, raw in section.items():
        if key == "kind":
            continue
        if key == "rows":
            rows = _csv_list(raw)
            continue
        typ = PARAM_TYPES.get((kind, key))
        if typ is None:
            raise ValidationError(f"[model {label}]: unknown key {key!r}")
        if raw.strip() == "":
            params[key] = None
            continue
        try:
            params[key] = typ(raw)
        except ValueError:
            raise ValidationError(f"[model {label}] {key}: cannot parse {raw!r}") from None
    return params, rows


def _bool(section, key, default):
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError:
        raise ValidationError(f"[scan] {key}: expected true/false") from None


def config_from_args(args) -> ExperimentConfig:
    """Merge defaults, the optional INI file, and flags (highest precedence)."""
    ini = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    ini.optionxform = str
    if args.config:
        if not ini.read(args.config, encoding="utf-8"):
            raise ValidationError(f"cannot read config file {args.config}")
    known = {"data", "experiment", "scan"}
    for name in ini.sections():
        if name not in known and not name.startswith("model "):
            raise ValidationError(f"unknown config section [{name}]")
    data_sec = ini["data"] if ini.has_section("data") else {}
    exp = ini["experiment"] if ini.has_section("experiment") else {}
    scan_sec = ini["scan"] if ini.has_section("scan") else {}

    try:
        seed = args.seed if args.seed is not None else int(exp.get("seed", 0))
        fraction = (args.train_fraction if args.train_fraction is not None
                    else float(exp.get("train_fraction", 2 / 3)))
        delta = args.delta if args.delta is not None else float(exp.get("delta", 1.0))
        max_points = (args.scan_max_points if args.scan_max_points is not None
                      else int(scan_sec.get("max_points", 50)))
    except ValueError as exc:
        raise ValidationError(f"config: {exc}") from None
    full = args.scan_full_grid
    if full is None:
        full = _bool(scan_sec, "full_grid", True)
    origin = args.scan_include_origin
    if origin is None:
        origin = _bool(scan_sec, "include_origin", True)

    if args.models:
        entries = []
        for item in args.models:
            label, _, kind = item.partition("=")
            if not kind:
                kind = label
                label = {"cox": "CPH", "rsf": "RSF", "smoothc": "SmoothC"}.get(kind, kind)
            entries.append((label, kind, {}, ()))
    else:
        entries = []
        for name in ini.sections():
            if name.startswith("model "):
                sec = ini[name]
                label = name[len("model "):].strip()
                kind = sec.get("kind")
                if kind not in PREDICTION_TYPES:
                    raise ValidationError(f"[{name}]: kind must be one of {sorted(PREDICTION_TYPES)}")
                params, rows = _parse_section_params(kind, label, sec)
                entries.append((label, kind, params, rows))
        if not entries:
            entries = [(m.name, m.kind, {}, ()) for m in DEFAULT_MODELS]
    models = tuple(ModelSpec(label, kind, _model_params(kind, args, params), rows)
                   for label, kind, params, rows in entries)

    return ExperimentConfig(
        data_path=args.data or data_sec.get("path"),
        schema=_schema(args, data_sec),
        train_fraction=fraction,
        seed=seed,
        models=models,
        scan=ScanSettings(full_grid=full, max_points=max_points, include_origin=origin),
        delta=delta,
        output_prefix=args.out_prefix or exp.get("output_prefix", "audit"),
    )


def cmd_simulate(args) -> int:
    data = simulate_weibull_ph(args.n, args.beta, args.shape, args.scale, args.censor_rate, args.seed)
    write_csv(data, args.out)
    print(f"wrote {len(data)} rows ({data.n_events} events) to {args.out}")
    return 0


def cmd_fit(args) -> int:
    data = load_csv(args.data, _schema(args))
    if args.train_fraction is not None:
        data, _ = holdout_split(data, SplitSpec(args.train_fraction, args.seed))
    spec = ModelSpec(args.model, args.model, _model_params(args.model, args, {}))
    model = fit_model(spec, data, args.seed)
    save_model(model, args.out, OutcomeView.of(data))
    print(f"fitted {args.model} on {len(data)} rows; saved to {args.out}")
    return 0


def _check_types(kind: str, types, measure: str, reduction: str) -> None:
    if measure == "antolini" and reduction != "native":
        raise ValidationError("antolini takes the predicted distribution; omit --reduction")
    need = "distribution" if measure == "antolini" or reduction != "native" else "risk"
    if need not in types:
        what = measure if measure == "antolini" else f"{measure} on {reduction}"
        raise IncompatibleMeasureError(
            f"{what} needs a {need} prediction but a {kind} model only predicts "
            f"{' and '.join(sorted(types))}")


def cmd_evaluate(args) -> int:
    model, train_out = load_model(args.model_file)
    _check_types(model.kind, model.prediction_types, args.measure, args.reduction)
    data = load_csv(args.data, _schema(args), allow_eventless=True)
    if tuple(data.feature_names) != tuple(model.feature_names):
        raise ValidationError(f"covariates {list(data.feature_names)} do not match the model's "
                              f"{list(model.feature_names)}")
    outcomes = OutcomeView.of(data)

    if args.measure == "antolini":
        risk = None
    elif args.reduction == "native":
        risk = model.predict_risk(data)
    else:
        spec = ReductionSpec(args.reduction, args.time_point, args.delta)
        risk = reduce(model.predict_distribution(data), spec)

    rows: list[list[str]]
    if args.measure == "auc":
        if args.auc_time is None:
            raise ValidationError("auc needs --auc-time")
        auc = auc_at_time(risk, outcomes, args.auc_time)
        header = ["measure", "risk_source", "time", "auc"]
        src = risk.source if isinstance(risk.source, str) else risk.source.describe()
        rows = [["auc", src, f"{args.auc_time:.12g}", f"{auc:.12g}"]]
    else:
        if args.measure == "harrell":
            result = harrell_c(risk, outcomes)
        elif args.measure == "uno":
            if args.train_data:
                train_out = OutcomeView.of(load_csv(args.train_data, _schema(args)))
            if train_out is None:
                raise ValidationError("uno needs training outcomes; pass --train-data")
            result = uno_c(risk, outcomes, train_out, args.tau)
        else:
            result = antolini_c(model.predict_distribution(data), outcomes)
        header, rows = list(result.CSV_HEADER), [result.csv_row()]

    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_audit(args) -> int:
    config = config_from_args(args)
    grid = run_experiment(config)
    report = audit_report(grid)
    grid_path, md_path = report.write(config.output_prefix)
    print(f"wrote {grid_path} and {md_path}")
    return 0


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "evaluate": cmd_evaluate, "audit": cmd_audit}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
