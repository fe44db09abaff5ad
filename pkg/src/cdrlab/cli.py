"""Command-line surface tying the pipeline together.

Every command is a pure function of (input files, flags, seed): fixed
inputs reproduce byte-identical outputs. All file outputs are CSV with
headers except fit's model JSON; `--svg PATH` additionally renders a
simple plot. Exit codes: 0 success, 1 usage error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import arima, cluster, ingest, mlp, scrub, svg, synth
from .errors import DataError, NumericalError
from .series import (ActivitySeries, Metric, bucketize, difference,
                     read_series, split, write_series)
from .timefmt import format_iso_utc

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route usage problems to exit code 1
        raise UsageError(message)


def _parse_spec(text: str) -> arima.ArimaSpec:
    try:
        p, d, q = (int(t) for t in text.split(","))
        return arima.ArimaSpec(p, d, q)
    except ValueError as exc:
        raise UsageError(f"bad --spec {text!r}: {exc}") from None


def _parse_zero_window(text: str) -> tuple[int, int]:
    try:
        lo_tok, hi_tok = text.split("-")
        lo = int(lo_tok.split(":")[0])
        hi = int(hi_tok.split(":")[0])
    except ValueError:
        raise UsageError(f"bad --zero-window {text!r}; expected HH:MM-HH:MM") from None
    if not (0 <= lo < hi <= 24):
        raise UsageError("zero window hours must satisfy 0 <= start < end <= 24")
    return lo, hi


def _load_series(path: str) -> ActivitySeries:
    with open(path, "r", encoding="utf-8") as fh:
        return read_series(fh)


def _write(path: str, writer) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer(fh)


def _maybe_svg(path: str | None, curves, points=(), title="") -> None:
    if path:
        _write(path, lambda fh: svg.render_lines(fh, curves, points, title))


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    prof = synth.profile(args.profile)
    events, truth = synth.generate_events(prof, seed=args.seed)
    events, report = ingest.preprocess(events)
    _write(args.out, lambda fh: ingest.write_canonical(events, fh))
    if args.truth:
        _write(args.truth, lambda fh: synth.write_truth(truth, prof, fh))
    print(f"profile={prof.name} seed={args.seed} events={len(events)} "
          f"anomalous_buckets={len(truth)}")
    print(report.summary())
    return EXIT_OK


def cmd_ingest(args) -> int:
    def load(path):
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
        if args.header and lines:
            lines = lines[1:]
        parser = ingest.PARSERS[args.format]
        return list(ingest.parse_lines(lines, parser, args.delimiter))

    if args.jobs > 1 and len(args.inputs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            per_file = list(pool.map(load, args.inputs))
    else:
        per_file = [load(path) for path in args.inputs]
    results = [row for rows in per_file for row in rows]
    events, report = ingest.preprocess(results)
    _write(args.out, lambda fh: ingest.write_canonical(events, fh))
    print(report.summary())
    return EXIT_OK


def _series_from_args(args) -> ActivitySeries:
    if getattr(args, "events", None):
        events, _ = ingest.load_events(args.events, "canonical")
        return bucketize(events, args.bucket_width, Metric(args.metric))
    return _load_series(args.series)


def cmd_bucketize(args) -> int:
    events, report = ingest.load_events(args.input, args.format,
                                        delimiter=args.delimiter,
                                        header=args.header)
    s = bucketize(events, args.width, Metric(args.metric))
    _write(args.out, lambda fh: write_series(s, fh))
    _maybe_svg(args.svg, [(args.metric, s.values)], title="activity series")
    print(f"buckets={len(s)} width_s={s.bucket_width_s} "
          f"start={format_iso_utc(s.start)}")
    print(report.summary())
    return EXIT_OK


def cmd_detect(args) -> int:
    s = _series_from_args(args)
    window = _parse_zero_window(args.zero_window) if args.zero_window else None
    report = cluster.detect_anomalies(s, k=args.k, restarts=args.restarts,
                                      zero_window=window, seed=args.seed)
    _write(args.out, lambda fh: cluster.write_report(report, s, fh))
    if args.series_out:
        _write(args.series_out, lambda fh: write_series(s, fh))
    flagged = [(i, s.values[i]) for i, _ in report.anomalous_buckets]
    _maybe_svg(args.svg, [("activity", s.values)], flagged, "anomaly detection")
    print(f"buckets={len(s)} anomalies={len(report.anomalous_buckets)} "
          f"anomalous_cluster={report.anomalous_cluster_index}")
    return EXIT_OK


def cmd_scrub(args) -> int:
    s = _load_series(args.series)
    with open(args.report, "r", encoding="utf-8") as fh:
        report = cluster.read_report(fh)
    scrubbed = scrub.make_anomaly_free(s, report)
    clean = s.with_values(scrubbed.values)
    _write(args.out, lambda fh: write_series(clean, fh))
    if args.replaced_out:
        _write(args.replaced_out,
               lambda fh: scrub.write_replaced_indices(scrubbed, s, fh))
    _maybe_svg(args.svg, [("raw", s.values), ("scrubbed", scrubbed.values)],
               title="anomaly-free preparation")
    print(f"replaced={len(scrubbed.replaced_indices)} "
          f"replacement_value={scrubbed.replacement_value!r}")
    return EXIT_OK


def cmd_nn_compare(args) -> int:
    raw = _load_series(args.raw)
    clean = _load_series(args.clean)
    cfg = mlp.TrainConfig(hidden=args.hidden, epochs=args.epochs,
                          learning_rate=args.learning_rate, seed=args.seed,
                          patience=args.patience)
    report_raw, report_clean = mlp.compare_anomaly_effect(raw, clean,
                                                          args.window, cfg)
    _write(args.out_raw, report_raw.write_csv)
    _write(args.out_clean, report_clean.write_csv)
    _maybe_svg(args.svg,
               [("val mse (raw)", [v for _, v in report_raw.curve]),
                ("val mse (clean)", [v for _, v in report_clean.curve])],
               title="training comparison")
    print(f"mse_raw={report_raw.mse_test!r} mse_clean={report_clean.mse_test!r}")
    print(f"mse_raw > mse_clean: {str(report_raw.mse_test > report_clean.mse_test).lower()}")
    return EXIT_OK


def cmd_adf(args) -> int:
    s = _load_series(args.series)
    values = list(s.values)
    if args.diff:
        values = list(difference(values, args.diff).values)
    result = arima.adf_test(values, max_lag=args.max_lag)
    print(result.summary())
    if args.out:
        _write(args.out, lambda fh: fh.write(
            "statistic,p_value,lags_used,regression,conclusion\n"
            f"{result.statistic!r},{result.p_value!r},{result.lags_used},"
            f"{result.regression.value},{result.conclusion.value}\n"))
    return EXIT_OK


def cmd_correlogram(args) -> int:
    s = _load_series(args.series)
    values = list(s.values)
    if args.diff:
        values = list(difference(values, args.diff).values)
    max_lag = args.max_lag or arima.default_max_lag(len(values))
    acf_res = arima.acf(values, max_lag)
    pacf_res = arima.pacf(values, max_lag)

    def dump(res, fh):
        fh.write("lag,value,conf_bound\n")
        for lag, value in enumerate(res.values):
            fh.write(f"{lag},{value!r},{res.conf_bound!r}\n")

    _write(args.out_acf, lambda fh: dump(acf_res, fh))
    _write(args.out_pacf, lambda fh: dump(pacf_res, fh))
    _maybe_svg(args.svg, [("acf", acf_res.values), ("pacf", pacf_res.values)],
               title=f"correlograms (max_lag={max_lag})")
    suggestion = arima.suggest_order(acf_res, pacf_res, args.diff)
    print(f"max_lag={max_lag} conf_bound={acf_res.conf_bound!r} "
          f"suggested_order={suggestion}")
    return EXIT_OK


def _choose_spec(args, values) -> arima.ArimaSpec:
    if args.spec:
        return _parse_spec(args.spec)
    # --auto: difference until the ADF test accepts stationarity (d <= 2),
    # then read p and q off the correlograms
    d = 0
    work = list(values)
    while d < 2 and arima.adf_test(work).conclusion is arima.Conclusion.NON_STATIONARY:
        d += 1
        work = list(difference(values, d).values)
    max_lag = arima.default_max_lag(len(work))
    return arima.suggest_order(arima.acf(work, max_lag),
                               arima.pacf(work, max_lag), d)


def cmd_fit(args) -> int:
    s = _load_series(args.series)
    if args.train_fraction < 1.0:
        train, test = split(s, args.train_fraction)
        train_values, test_values = train.values, test.values
    else:
        train_values, test_values = s.values, ()
    spec = _choose_spec(args, train_values)
    model = arima.fit(train_values, spec)
    _write(args.out, lambda fh: arima.model_to_json(model, fh))
    print(f"spec={model.spec} c={model.c!r} "
          f"phi={[round(float(v), 6) for v in model.phi]} "
          f"theta={[round(float(v), 6) for v in model.theta]} "
          f"sigma2={model.sigma2!r} converged={model.converged} "
          f"warnings={model.warnings}")
    if test_values:
        metrics = arima.evaluate(model, train_values, test_values)
        print(f"test_mse={metrics['mse']!r} test_mae={metrics['mae']!r}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    s = _load_series(args.series)
    if args.model:
        with open(args.model, "r", encoding="utf-8") as fh:
            model = arima.model_from_json(fh)
    elif args.spec:
        history = s.values if args.mode == "multi" else \
            split(s, args.train_fraction)[0].values
        model = arima.fit(history, _parse_spec(args.spec))
    else:
        raise UsageError("forecast needs --model or --spec")

    rows: list[tuple[int, str, float]] = []
    actual_curve: list[float] = []
    if args.mode == "multi":
        preds = arima.forecast(model, s.values, args.horizon)
        for h, pred in enumerate(preds, start=1):
            ts = s.start + (len(s.values) - 1 + h) * s.bucket_width_s
            rows.append((ts, "", pred))
    else:
        train, test = split(s, args.train_fraction)
        history = list(train.values)
        for i, actual in enumerate(test.values):
            pred = arima.forecast(model, history, 1)[0]
            rows.append((test.bucket_start(i), repr(actual), pred))
            history.append(actual)
        actual_curve = list(test.values)
        err = np.asarray(actual_curve) - np.asarray([p for _, _, p in rows])
        print(f"rolling_mse={float(np.mean(err ** 2))!r} "
              f"rolling_mae={float(np.mean(np.abs(err)))!r}")

    def dump(fh):
        fh.write("bucket_start_iso8601,actual_or_empty,forecast\n")
        for ts, actual, pred in rows:
            fh.write(f"{format_iso_utc(ts)},{actual},{pred!r}\n")

    _write(args.out, dump)
    curves = [("forecast", [pred for _, _, pred in rows])]
    if actual_curve:
        curves.insert(0, ("actual", actual_curve))
    _maybe_svg(args.svg, curves, title=f"forecast ({args.mode})")
    print(f"mode={args.mode} horizon={len(rows)} spec={model.spec}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="cdrlab",
                     description="CDR anomaly detection and traffic forecasting")
    commands = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, _Parser] = {}

    def sub(name, func, help_text):
        p = commands.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", default=None,
                       help="key=value defaults file; explicit flags win")
        subs[name] = p
        return p

    p = sub("synth", cmd_synth, "generate a synthetic corpus with known anomalies")
    p.add_argument("--profile", default="week-default",
                   choices=sorted(synth.PROFILES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="canonical events CSV")
    p.add_argument("--truth", default=None, help="ground-truth sidecar CSV")

    p = sub("ingest", cmd_ingest, "parse raw dataset files into canonical CSV")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", required=True, choices=sorted(ingest.PARSERS))
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", dest="header", action="store_false",
                   help="input files have no header line")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers across input files")
    p.add_argument("--out", required=True)

    p = sub("bucketize", cmd_bucketize, "aggregate events into an activity series")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", default="canonical", choices=sorted(ingest.PARSERS))
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", dest="header", action="store_false")
    p.add_argument("--width", type=int, default=3600, help="bucket width, seconds")
    p.add_argument("--metric", default=Metric.EVENT_COUNT.value,
                   choices=[m.value for m in Metric])
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)

    p = sub("detect", cmd_detect, "flag anomalous buckets by clustering")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--series", default=None, help="series CSV input")
    group.add_argument("--events", default=None,
                       help="canonical events CSV (bucketized on the fly)")
    p.add_argument("--bucket-width", type=int, default=3600)
    p.add_argument("--metric", default=Metric.EVENT_COUNT.value,
                   choices=[m.value for m in Metric])
    p.add_argument("--k", type=int, default=cluster.DEFAULT_K)
    p.add_argument("--restarts", type=int, default=cluster.DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-window", default=None,
                   help="active hours, e.g. 08:00-22:00")
    p.add_argument("--out", required=True, help="anomaly report CSV")
    p.add_argument("--series-out", default=None,
                   help="also write the (possibly derived) series CSV")
    p.add_argument("--svg", default=None)

    p = sub("scrub", cmd_scrub, "replace anomalous buckets with the clean mean")
    p.add_argument("--series", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--replaced-out", default=None)
    p.add_argument("--svg", default=None)

    p = sub("nn-compare", cmd_nn_compare,
            "train on raw vs scrubbed data and compare test MSE")
    p.add_argument("--raw", required=True)
    p.add_argument("--clean", required=True)
    p.add_argument("--window", type=int, default=24)
    p.add_argument("--hidden", type=int, default=10)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--patience", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-raw", required=True)
    p.add_argument("--out-clean", required=True)
    p.add_argument("--svg", default=None)

    p = sub("adf", cmd_adf, "augmented Dickey-Fuller stationarity test")
    p.add_argument("--series", required=True)
    p.add_argument("--diff", type=int, default=0,
                   help="difference the series this many times first")
    p.add_argument("--max-lag", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub("correlogram", cmd_correlogram, "ACF/PACF tables and order suggestion")
    p.add_argument("--series", required=True)
    p.add_argument("--diff", type=int, default=0)
    p.add_argument("--max-lag", type=int, default=None)
    p.add_argument("--out-acf", required=True)
    p.add_argument("--out-pacf", required=True)
    p.add_argument("--svg", default=None)

    p = sub("fit", cmd_fit, "fit an ARIMA model")
    p.add_argument("--series", required=True)
    p.add_argument("--spec", default=None, help="p,d,q (overrides --auto)")
    p.add_argument("--auto", action="store_true",
                   help="pick the order from ADF + correlograms")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--out", required=True, help="model JSON")

    p = sub("forecast", cmd_forecast, "forecast future activity")
    p.add_argument("--series", required=True)
    p.add_argument("--model", default=None, help="model JSON from fit")
    p.add_argument("--spec", default=None, help="p,d,q fitted on the fly")
    p.add_argument("--horizon", type=int, default=24)
    p.add_argument("--mode", default="multi", choices=["multi", "rolling"])
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)

    return parser, subs


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{line_no}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(sub_parser: _Parser, config: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub_parser._actions}
    defaults = {}
    for key, raw in config.items():
        if key not in actions or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        action = actions[key]
        if isinstance(action, (argparse._StoreTrueAction,
                               argparse._StoreFalseAction)):
            defaults[key] = raw.lower() in ("1", "true", "yes")
        elif action.type is not None:
            defaults[key] = action.type(raw)
        else:
            defaults[key] = raw
    sub_parser.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(subs[args.command], _read_config(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
