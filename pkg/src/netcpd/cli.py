"""Command line entry point: ``netcpd {detect,synth,bench}``.

Exit status is 0 on success, 2 on bad input or flags, 1 on internal errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import secrets
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import detector, evalbench, ingest, synth
from .degstats import EmptyWindow
from .detector import VERDICT_FIELDS, BootstrapConfig, ChangeVerdict
from .metrics import MetricKind

log = logging.getLogger("netcpd")


class InputError(Exception):
    """Bad flags, unreadable input or data the pipeline cannot process."""


# --- argument parsing -------------------------------------------------------

def _resample_size(text: str):
    if text in detector.RESAMPLE_MODES:
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected one of {detector.RESAMPLE_MODES} or a positive integer")
    if value < 1:
        raise argparse.ArgumentTypeError("explicit resample size must be >= 1")
    return value


def _duration(text: str):
    if text == "month":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected seconds or 'month'")
    if value < 1:
        raise argparse.ArgumentTypeError("window duration must be >= 1 second")
    return value


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("global")
    g.add_argument("--seed", type=int, help="RNG seed; drawn from system entropy and printed when omitted")
    g.add_argument("--config", help="key=value file of flag defaults; explicit flags win")
    g.add_argument("--format", choices=("jsonl", "csv"), default="jsonl", help="verdict output format")
    g.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")


def _metric_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("distance")
    g.add_argument("--metric", choices=("ks", "kl", "rh"), default="ks")
    g.add_argument("--kl-pseudocount", type=float, default=0.5)


def _bootstrap_flags(p: argparse.ArgumentParser, default_alpha: float):
    g = p.add_argument_group("bootstrap test")
    g.add_argument("--alpha", type=float, action="append",
                   help=f"confidence level (default {default_alpha}); repeat for a sensitivity profile")
    g.add_argument("--bootstrap", type=int, default=1000, help="number of bootstrap resamples")
    g.add_argument("--resample-size", type=_resample_size, default="effective",
                   help="effective (n*m/(n+m)), comp, base or an explicit size")
    g.add_argument("--subsample", type=int, help="compare this many randomly drawn nodes per window")


def _window_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("windows")
    w = g.add_mutually_exclusive_group()
    w.add_argument("--window-duration", type=_duration, help="window length in seconds, or 'month'")
    w.add_argument("--window-count", type=int, help="events per window")
    g.add_argument("--slide", type=int, default=1, help="base windows per analysis window")
    g.add_argument("--step", type=int, default=1, help="base windows the analysis window advances")
    g.add_argument("--align", choices=("origin", "calendar"), default="origin")
    g.add_argument("--origin", type=int, help="explicit start timestamp of window 0")
    g.add_argument("--strict", action="store_true", help="fail on the first malformed input line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcpd", description="Degree-distribution change point detection for interaction networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect change points in a timestamped edge list")
    d.add_argument("input", nargs="?", default="-", help="edge-list file ('-' for stdin)")
    d.add_argument("-o", "--output", help="write verdicts here instead of stdout")
    d.add_argument("--follow", action="store_true", help="keep reading lines appended to the input file")
    d.add_argument("--poll-interval", type=float, default=1.0, help="seconds between reads with --follow")
    _window_flags(d)
    _metric_flags(d)
    _bootstrap_flags(d, 0.95)
    _common(d)

    s = sub.add_parser("synth", help="write an alternating-model synthetic scenario")
    s.add_argument("--model", choices=("er", "caveman"), default="er")
    s.add_argument("--n", type=int, default=200, help="nodes per snapshot (fixed size, or mean for --size-dist normal)")
    s.add_argument("--p-a", type=float, required=True, help="model parameter of the first configuration")
    s.add_argument("--p-b", type=float, required=True, help="model parameter of the second configuration")
    s.add_argument("--communities", type=int, default=5)
    s.add_argument("--clique-size", type=int, help="caveman: fixed cave size; community count follows n")
    s.add_argument("--rewire-anchor", choices=synth.REWIRE_ANCHORS, default="first")
    s.add_argument("--changes", type=int, default=20)
    s.add_argument("--size-dist", choices=("fixed", "normal", "uniform"), default="fixed")
    s.add_argument("--size-var", type=float, default=10.0, help="variance for --size-dist normal")
    s.add_argument("--size-std", type=float, help="standard deviation for --size-dist normal (overrides --size-var)")
    s.add_argument("--size-lo", type=int, default=200, help="lower bound for --size-dist uniform")
    s.add_argument("--size-hi", type=int, default=1000, help="upper bound for --size-dist uniform")
    s.add_argument("--snapshot-seconds", type=int, default=1, help="timestamp spacing between snapshots")
    s.add_argument("--out-dir", default=".", help="directory for snapshots.edges and schedule.json")
    _common(s)

    b = sub.add_parser("bench", help="score detections and reproduce the designed experiments")
    mode = b.add_mutually_exclusive_group(required=True)
    mode.add_argument("--experiment", choices=("exp1", "exp2", "exp3"))
    mode.add_argument("--grid", choices=("er", "caveman"))
    mode.add_argument("--events", help="label,timestamp CSV of real events to match against --input")
    mode.add_argument("--schedule", help="schedule.json from synth, scored against --verdicts")
    b.add_argument("--input", help="edge list for --events")
    b.add_argument("--verdicts", help="JSONL verdicts for --schedule")
    b.add_argument("--trials", type=int, default=50)
    b.add_argument("--changes", type=int, default=20)
    b.add_argument("--slack", type=int, default=0)
    b.add_argument("--exp1-p-b", type=float, default=0.009, help="second exp1 configuration (0.009 or 0.01)")
    b.add_argument("--grid-values", type=_floats, help="comma-separated grid values (default 0.05..1.0)")
    b.add_argument("--size-var", type=float, default=10.0, help="grid snapshot size variance (mean 100)")
    b.add_argument("--size-std", type=float, help="grid snapshot size standard deviation")
    b.add_argument("--jobs", type=int, default=1, help="worker processes for trials/cells")
    b.add_argument("--out-dir", default=".", help="directory for results.csv, grid.csv and summary.json")
    _window_flags(b)
    _metric_flags(b)
    _bootstrap_flags(b, 0.90)
    _common(b)
    return parser


def _config_defaults(sub: argparse.ArgumentParser, path: str) -> dict:
    """Translate a key=value file into defaults for ``sub``'s actions."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    by_flag = {opt.lstrip("-"): a for a in sub._actions for opt in a.option_strings if opt.startswith("--")}
    by_dest = {a.dest: a for a in sub._actions}
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{n}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        action = by_flag.get(key) or by_dest.get(key.replace("-", "_"))
        if action is None:
            raise InputError(f"{path}:{n}: unknown key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            val = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            conv = action.type or str
            val = [conv(v) for v in value.split(",")]
        else:
            conv = action.type or str
            try:
                val = conv(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InputError(f"{path}:{n}: bad value for {key}: {exc}") from None
            if action.choices is not None and val not in action.choices:
                raise InputError(f"{path}:{n}: {key} must be one of {list(action.choices)}")
        out[action.dest] = val
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**_config_defaults(sub, args.config))
        args = parser.parse_args(argv)
    return args


# --- helpers ----------------------------------------------------------------

def _setup_logging(verbosity: int):
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr, flush=True)
    if args.seed < 0:
        raise InputError("--seed must be non-negative")
    return args.seed


def _window_spec(args) -> ingest.WindowSpec:
    try:
        if args.window_count is not None:
            return ingest.WindowSpec("count", None, args.window_count, args.slide, args.step, args.align)
        dur = args.window_duration if args.window_duration is not None else ingest.WEEK
        if dur == "month":
            return ingest.WindowSpec("month", None, None, args.slide, args.step, args.align)
        return ingest.WindowSpec("duration", dur, None, args.slide, args.step, args.align)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _bootstrap_config(args, default_alpha: float) -> tuple[BootstrapConfig, list[float]]:
    alphas = sorted(set(args.alpha or [default_alpha]))
    try:
        metric = MetricKind(args.metric, args.kl_pseudocount)
        cfg = BootstrapConfig(n_resamples=args.bootstrap, alpha=alphas[0], resample_size=args.resample_size,
                              seed=args.seed, metric=metric, subsample=args.subsample)
        for a in alphas:
            if not 0 < a < 1:
                raise ValueError(f"alpha must lie in (0, 1), got {a}")
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return cfg, alphas


def _open_lines(path: str):
    if path == "-":
        return sys.stdin
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def follow_lines(fh, poll_interval: float):
    """Yield complete lines from ``fh``, waiting for more when at end of file."""
    pending = ""
    while True:
        chunk = fh.readline()
        if not chunk:
            time.sleep(poll_interval)
            continue
        pending += chunk
        if pending.endswith("\n"):
            yield pending
            pending = ""


class VerdictWriter:
    """Line-buffered JSONL or CSV verdict output."""

    def __init__(self, fh, fmt: str):
        self.fh = fh
        self.fmt = fmt
        if fmt == "csv":
            self._csv = csv.writer(fh, lineterminator="\n")
            self._csv.writerow(VERDICT_FIELDS)
            fh.flush()

    def write(self, record: dict):
        if self.fmt == "csv":
            self._csv.writerow([_csv_value(record[k]) for k in VERDICT_FIELDS])
        else:
            self.fh.write(json.dumps({k: record[k] for k in VERDICT_FIELDS}) + "\n")
        self.fh.flush()


def _csv_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else v


def verdict_records(verdict: ChangeVerdict, null: detector.NullDistribution | None, alphas) -> list[dict]:
    if null is None or len(alphas) == 1:
        return [verdict.as_record()]
    out = []
    for a in alphas:
        rec = verdict.as_record()
        rec.update(alpha=a, threshold=null.threshold(a), rejected=null.rejects(a))
        out.append(rec)
    return out


def stream_detect(windows, cfg: BootstrapConfig, alphas):
    """Yield output records pair by pair as windows arrive."""
    samples = detector.window_samples(windows)
    for bi, base, ci, comp, gap in detector._pairs(samples):
        if gap:
            log.warning("bridging empty window(s) %s between %d and %d", list(gap), bi, ci)
        rng = detector.pair_rng(cfg.seed, bi, ci)
        base, comp = detector._prepare(base, comp, cfg, rng)
        null = detector.null_distribution(base, comp, cfg, rng)
        thr = null.threshold(cfg.alpha)
        v = ChangeVerdict(bi, ci, null.observed, thr, null.p_value(), bool(null.observed > thr),
                          base.node_count, comp.node_count, cfg.alpha, cfg.metric.tag, gap)
        yield from verdict_records(v, null, alphas)


# --- subcommands ------------------------------------------------------------

def detect_cmd(args) -> int:
    _seed(args)
    spec = _window_spec(args)
    cfg, alphas = _bootstrap_config(args, 0.95)
    fh = _open_lines(args.input)
    if args.follow:
        if args.input == "-":
            lines = iter(fh.readline, "")
        else:
            lines = follow_lines(fh, args.poll_interval)
        events = ingest.iter_events(lines, strict=args.strict)
    else:
        with fh if fh is not sys.stdin else _nullctx(fh):
            events = ingest.parse_events(fh, strict=args.strict)
        if not events:
            raise InputError("no events in input")
        events = ingest._sorted(events)
    windows = ingest.iter_aggregate(ingest.iter_windows(events, spec, args.origin), spec.slide_width, spec.step)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = VerdictWriter(out, args.format)
        n = 0
        for rec in stream_detect(windows, cfg, alphas):
            writer.write(rec)
            n += 1
        if n == 0:
            raise InputError("need at least two non-empty windows to compare")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


class _nullctx:
    def __init__(self, obj):
        self.obj = obj

    def __enter__(self):
        return self.obj

    def __exit__(self, *exc):
        return False


def synth_cmd(args) -> int:
    seed = _seed(args)
    if args.size_dist == "fixed":
        sizes = synth.SizeDist("fixed", args.n)
    elif args.size_dist == "normal":
        spread = args.size_std if args.size_std is not None else args.size_var
        sizes = synth.SizeDist("normal", args.n, spread, std=args.size_std is not None)
    else:
        sizes = synth.SizeDist("uniform", args.size_lo, args.size_hi)
    try:
        a = synth.ModelConfig(args.model, args.p_a, sizes, args.communities, args.clique_size, args.rewire_anchor)
        b = synth.ModelConfig(args.model, args.p_b, sizes, args.communities, args.clique_size, args.rewire_anchor)
        spec = synth.ScenarioSpec(a, b, args.changes, seed)
        graphs, schedule = synth.gen_scenario_graphs(spec)
    except synth.InvalidConfig as exc:
        raise InputError(str(exc)) from None
    if args.snapshot_seconds < 1:
        raise InputError("--snapshot-seconds must be >= 1")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dt = args.snapshot_seconds
    with open(out_dir / "snapshots.edges", "w", encoding="utf-8") as fh:
        fh.write(f"# netcpd synth seed={seed} model={args.model} p_a={args.p_a} p_b={args.p_b}\n")
        fh.write(f"# one snapshot per {dt}s window; detect with --window-duration {dt} --origin 0\n")
        for i, (edges, _) in enumerate(graphs):
            ts = i * dt
            fh.writelines(f"{u} {v} {ts}\n" for u, v in edges.tolist())
    record = {
        "seed": seed,
        "n_snapshots": len(schedule.labels),
        "window_duration": dt,
        "origin": 0,
        "labels": list(schedule.labels),
        "change_points": list(schedule.change_points),
        "node_counts": [n for _, n in graphs],
        "config_a": _config_record(a),
        "config_b": _config_record(b),
    }
    (out_dir / "schedule.json").write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(schedule.labels)} snapshots, {len(schedule.change_points)} changes to {out_dir}", file=sys.stderr)
    return 0


def _config_record(cfg: synth.ModelConfig) -> dict:
    rec = asdict(cfg)
    rec["n"] = asdict(cfg.n)
    return rec


def _write_results(out_dir: Path, rows: list[dict], name="results.csv"):
    with open(out_dir / name, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _experiment_trial(job):
    name, t, seed, kw = job
    summary = evalbench.run_experiment(name, trials=1, seed=evalbench.trial_seed(seed, t), **kw)
    return summary.trials[0]


def _grid_cell(job):
    grid, p1, p2, cfg = job
    return evalbench.run_cell(grid, p1, p2, cfg, cfg.seed)


def _map(fn, jobs, n_jobs: int):
    if n_jobs <= 1:
        return [fn(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, jobs))


def bench_cmd(args) -> int:
    seed = _seed(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg, alphas = _bootstrap_config(args, 0.90)
    if len(alphas) > 1 and not args.experiment:
        raise InputError("several --alpha values are only supported with --experiment")

    if args.experiment:
        summaries = {}
        rows = []
        for a in alphas:
            kw = dict(alpha=a, n_changes=args.changes, n_resamples=args.bootstrap, metric=cfg.metric,
                      resample_size=cfg.resample_size, slack=args.slack, exp1_p_b=args.exp1_p_b)
            trials = _map(_experiment_trial, [(args.experiment, t, seed, kw) for t in range(args.trials)], args.jobs)
            summaries[a] = evalbench.Summary(tuple(trials))
            rows += [{"experiment": args.experiment, "alpha": a, "trial": t, **r.as_record()} for t, r in enumerate(trials)]
        _write_results(out_dir, rows)
        summary = {
            "experiment": args.experiment, "seed": seed, "metric": cfg.metric.tag,
            "changes": args.changes, "slack": args.slack,
            "by_alpha": {f"{a:g}": s.as_record() for a, s in summaries.items()},
        }
        _dump(out_dir / "summary.json", summary)
        print(json.dumps(summary["by_alpha"]), flush=True)
        return 0

    if args.grid:
        values = tuple(args.grid_values) if args.grid_values else evalbench.GridSpec().values
        spread = args.size_std if args.size_std is not None else args.size_var
        sizes = synth.SizeDist("normal", 100, spread, std=args.size_std is not None)
        try:
            grid = evalbench.GridSpec(args.grid, values, sizes, args.trials, args.changes)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        cells = grid.cells()
        results = _map(_grid_cell, [(grid, p1, p2, cfg) for p1, p2 in cells], args.jobs)
        matrix = {c: s.f1 for c, s in zip(cells, results)}
        (out_dir / "grid.csv").write_text(evalbench.grid_csv(matrix), encoding="utf-8")
        rows = [{"p1": p1, "p2": p2, "trial": t, **r.as_record()}
                for (p1, p2), s in zip(cells, results) for t, r in enumerate(s.trials)]
        _write_results(out_dir, rows)
        f1s = list(matrix.values())
        summary = {"grid": args.grid, "seed": seed, "metric": cfg.metric.tag, "values": list(values),
                   "trials": args.trials, "mean_f1": sum(f1s) / len(f1s)}
        _dump(out_dir / "summary.json", summary)
        return 0

    if args.schedule:
        if not args.verdicts:
            raise InputError("--schedule needs --verdicts")
        try:
            sched = json.loads(Path(args.schedule).read_text(encoding="utf-8"))
            verdicts = [_verdict_from_record(json.loads(line))
                        for line in Path(args.verdicts).read_text(encoding="utf-8").splitlines() if line.strip()]
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot load schedule/verdicts: {exc}") from None
        schedule = synth.Schedule(tuple(sched["labels"]), tuple(sched["change_points"]))
        try:
            res = evalbench.score(verdicts, schedule, args.slack)
        except evalbench.IndexMismatch as exc:
            raise InputError(str(exc)) from None
        _finish_eval(out_dir, res, {"schedule": args.schedule, "slack": args.slack})
        return 0

    # --events
    if not args.input:
        raise InputError("--events needs --input <edge list>")
    try:
        labelled = evalbench.read_events_csv(Path(args.events).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read events: {exc}") from None
    spec = _window_spec(args)
    with _open_lines(args.input) as fh:
        events = ingest.parse_events(fh, strict=args.strict)
    if not events:
        raise InputError("no events in input")
    windows = ingest.windows_for(events, spec, args.origin)
    try:
        verdicts = detector.detect_sequence(windows, cfg)
        res = evalbench.match_events(verdicts, labelled, evalbench.window_locator(windows), args.slack)
    except (evalbench.EventOutOfRange, detector.TooFewWindows) as exc:
        raise InputError(str(exc)) from None
    _finish_eval(out_dir, res, {"events": args.events, "slack": args.slack, "alpha": cfg.alpha})
    return 0


def _verdict_from_record(rec: dict) -> ChangeVerdict:
    return ChangeVerdict(**{k: rec[k] for k in VERDICT_FIELDS})


def _finish_eval(out_dir: Path, res: evalbench.EvalResult, meta: dict):
    _write_results(out_dir, [res.as_record()])
    summary = {**meta, **res.as_record(), "matched_pairs": [list(p) for p in res.matched_pairs]}
    _dump(out_dir / "summary.json", summary)
    print(json.dumps(res.as_record()), flush=True)


COMMANDS = {"detect": detect_cmd, "synth": synth_cmd, "bench": bench_cmd}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InputError as exc:
        print(f"netcpd: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    _setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (InputError, ingest.MalformedLine, ingest.EmptyInput, EmptyWindow,
            detector.TooFewWindows, detector.EmptySample) as exc:
        print(f"netcpd: error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except BrokenPipeError:
        # downstream consumer went away (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except Exception:
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
