"""Scoring detections against ground truth, plus the designed experiments and sensitivity grids."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .detector import BootstrapConfig, ChangeVerdict, detect_samples
from .metrics import MetricKind
from .synth import ModelConfig, Schedule, ScenarioSpec, SizeDist, gen_scenario


class IndexMismatch(ValueError):
    pass


class EventOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class EvalResult:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    matched_pairs: tuple[tuple[int, int], ...] = ()

    def as_record(self) -> dict:
        return {
            "tp": self.true_positives, "fp": self.false_positives, "fn": self.false_negatives,
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
        }


@dataclass(frozen=True)
class Summary:
    """Mean and (population) std of precision, recall and F1 over trials."""

    trials: tuple[EvalResult, ...]

    def _stat(self, attr, fn):
        return float(fn([getattr(r, attr) for r in self.trials]))

    @property
    def precision(self):
        return self._stat("precision", np.mean)

    @property
    def recall(self):
        return self._stat("recall", np.mean)

    @property
    def f1(self):
        return self._stat("f1", np.mean)

    def as_record(self) -> dict:
        out = {"trials": len(self.trials)}
        for attr in ("precision", "recall", "f1"):
            out[f"{attr}_mean"] = self._stat(attr, np.mean)
            out[f"{attr}_std"] = self._stat(attr, np.std)
        return out


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if tp + fp == 0:
        precision = 1.0 if fn == 0 else 0.0
    else:
        precision = tp / (tp + fp)
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def score_indices(detected: Iterable[int], changes: Iterable[int], slack: int = 0) -> EvalResult:
    """Greedy one-to-one matching of detected indices to true change indices.

    Detections are visited in ascending order; each takes the earliest still
    unmatched change within ``slack`` of it.
    """
    if slack < 0:
        raise ValueError("slack must be >= 0")
    changes = sorted(set(changes))
    free = list(changes)
    matched = []
    fp = 0
    for d in sorted(detected):
        hit = next((c for c in free if abs(c - d) <= slack), None)
        if hit is None:
            fp += 1
        else:
            free.remove(hit)
            matched.append((hit, d))
    tp = len(matched)
    fn = len(changes) - tp
    return EvalResult(tp, fp, fn, *prf(tp, fp, fn), matched_pairs=tuple(matched))


def score(verdicts: Sequence[ChangeVerdict], schedule: Schedule, slack: int = 0) -> EvalResult:
    """Score rejected verdicts (by comparison index) against the schedule's change points.

    ``matched_pairs`` holds ``(change_index, verdict_position)``.
    """
    n = len(schedule.labels)
    for v in verdicts:
        if v.comp_index >= n or v.base_index >= n:
            raise IndexMismatch(f"verdict ({v.base_index}, {v.comp_index}) beyond schedule of length {n}")
    rejected = [(v.comp_index, k) for k, v in enumerate(verdicts) if v.rejected]
    res = score_indices([c for c, _ in rejected], schedule.change_points, slack)
    pos = {}
    for c, k in rejected:
        pos.setdefault(c, k)
    return replace(res, matched_pairs=tuple((c, pos[d]) for c, d in res.matched_pairs))


# --- designed experiments ---------------------------------------------------

def experiment_spec(name: str, n_changes: int = 20, seed: int = 0, exp1_p_b: float = 0.009) -> tuple[ScenarioSpec, int | None]:
    """Scenario for ``exp1``/``exp2``/``exp3`` and the subsample size it runs with."""
    if name == "exp1":
        fixed = SizeDist("fixed", 200)
        return ScenarioSpec(ModelConfig("er", 0.003, fixed), ModelConfig("er", exp1_p_b, fixed), n_changes, seed), None
    if name == "exp2":
        fixed = SizeDist("fixed", 200)
        return ScenarioSpec(ModelConfig("er", 0.1, fixed), ModelConfig("er", 0.15, fixed), n_changes, seed), None
    if name == "exp3":
        sizes = SizeDist("uniform", 200, 1000)
        # reference model is 200 nodes in 5 caves; larger snapshots add caves of the same size
        a = ModelConfig("caveman", 0.4, sizes, 5, clique_size=40)
        b = ModelConfig("caveman", 0.7, sizes, 5, clique_size=40)
        return ScenarioSpec(a, b, n_changes, seed), 200
    raise ValueError(f"unknown experiment {name!r}; expected exp1, exp2 or exp3")


def trial_seed(seed: int, *key: int) -> int:
    """Stable 63-bit seed derived from ``seed`` and an index path."""
    ss = np.random.SeedSequence([seed, *key])
    return int(ss.generate_state(2, dtype=np.uint32).astype(np.uint64) @ np.array([1, 2**32], dtype=np.uint64)) >> 1


def run_scenario(spec: ScenarioSpec, cfg: BootstrapConfig, slack: int = 0) -> EvalResult:
    samples, schedule = gen_scenario(spec)
    return score(detect_samples(samples, cfg), schedule, slack)


def run_experiment(name: str, trials: int = 50, seed: int = 0, *, alpha: float = 0.90,
                   n_changes: int = 20, n_resamples: int = 1000, metric: MetricKind | None = None,
                   resample_size: str | int = "effective", slack: int = 0,
                   exp1_p_b: float = 0.009, progress: Callable | None = None) -> Summary:
    """Repeat one designed experiment over independent trials and aggregate P/R/F1."""
    results = []
    for t in range(trials):
        s = trial_seed(seed, t)
        spec, sub = experiment_spec(name, n_changes, s, exp1_p_b)
        cfg = BootstrapConfig(n_resamples=n_resamples, alpha=alpha, seed=s, subsample=sub,
                              metric=metric or MetricKind(), resample_size=resample_size)
        results.append(run_scenario(spec, cfg, slack))
        if progress:
            progress(t, results[-1])
    return Summary(tuple(results))


# --- sensitivity grids ------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    model: str = "er"
    values: tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 21))
    sizes: SizeDist = field(default_factory=lambda: SizeDist("normal", 100, 10))
    trials: int = 20
    n_changes: int = 20
    communities: int = 5

    def __post_init__(self):
        vals = list(self.values)
        if any(not 0 <= v <= 1 for v in vals):
            raise ValueError("grid values must lie in [0, 1]")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("grid values must be strictly increasing")

    def cells(self):
        return [(a, b) for a in self.values for b in self.values if a != b]


def run_cell(grid: GridSpec, p1: float, p2: float, cfg: BootstrapConfig, seed: int) -> Summary:
    results = []
    for t in range(grid.trials):
        s = trial_seed(seed, int(round(p1 * 1e6)), int(round(p2 * 1e6)), t)
        spec = ScenarioSpec(
            ModelConfig(grid.model, p1, grid.sizes, grid.communities),
            ModelConfig(grid.model, p2, grid.sizes, grid.communities),
            grid.n_changes, s,
        )
        results.append(run_scenario(spec, replace(cfg, seed=s)))
    return Summary(tuple(results))


def run_grid(grid: GridSpec, metric: MetricKind, cfg: BootstrapConfig,
             cells: Iterable[tuple[float, float]] | None = None,
             progress: Callable | None = None) -> dict[tuple[float, float], float]:
    """Mean F1 for every ordered pair (p1, p2), p1 != p2, of the grid values.

    Scenarios start in configuration p1. Each cell's seed depends only on the
    pair, so any subset of cells reproduces the full-grid values.
    """
    cfg = replace(cfg, metric=metric)
    out = {}
    for p1, p2 in (cells if cells is not None else grid.cells()):
        if p1 == p2:
            continue
        out[(p1, p2)] = run_cell(grid, p1, p2, cfg, cfg.seed).f1
        if progress:
            progress((p1, p2), out[(p1, p2)])
    return out


def grid_csv(matrix: dict[tuple[float, float], float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p1", "p2", "mean_f1"])
    for (p1, p2), f1 in sorted(matrix.items()):
        w.writerow([f"{p1:g}", f"{p2:g}", f"{f1:.6f}"])
    return buf.getvalue()


# --- real-world events ------------------------------------------------------

def read_events_csv(text: str) -> list[tuple[str, int]]:
    """Parse ``label,timestamp`` rows; a header row and ``#`` comments are skipped."""
    out = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].lstrip().startswith("#"):
            continue
        label, ts = row[0].strip(), row[-1].strip()
        try:
            out.append((label, int(float(ts))))
        except ValueError:
            if out:
                raise
            # header
    return out


def window_locator(windows: Sequence) -> Callable[[int], int]:
    """Map a timestamp to the index of the window whose [start, end) contains it."""
    starts = np.array([w.start for w in windows])
    ends = np.array([w.end for w in windows])

    def index_of(ts: int) -> int:
        k = int(np.searchsorted(starts, ts, side="right")) - 1
        if k < 0 or ts >= ends[k]:
            raise EventOutOfRange(f"timestamp {ts} outside the windowed range")
        return int(windows[k].index)

    return index_of


def match_events(verdicts: Sequence[ChangeVerdict], events: Iterable[tuple[str, int]],
                 window_index_of: Callable[[int], int], slack: int = 0) -> EvalResult:
    """Score rejected verdicts against labelled real-world event timestamps."""
    changes = []
    for label, ts in events:
        try:
            changes.append(window_index_of(ts))
        except EventOutOfRange as exc:
            raise EventOutOfRange(f"event {label!r}: {exc}") from None
    rejected = [v.comp_index for v in verdicts if v.rejected]
    return score_indices(rejected, changes, slack)

