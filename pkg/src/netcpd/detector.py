"""Monte-Carlo bootstrap change test and the consecutive-window detection loop."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .degstats import DegreeSample, EmptyWindow, degree_sample, subsample
from .metrics import MetricKind, batched_distances, distance

log = logging.getLogger(__name__)

VERDICT_FIELDS = (
    "base_index", "comp_index", "base_nodes", "comp_nodes",
    "distance", "threshold", "p_value", "rejected", "alpha", "metric",
)


RESAMPLE_MODES = ("effective", "comp", "base")


class EmptySample(ValueError):
    pass


class TooFewWindows(ValueError):
    pass


@dataclass(frozen=True)
class BootstrapConfig:
    n_resamples: int = 1000
    alpha: float = 0.95
    # "effective", "comp", "base" or an explicit positive int
    resample_size: str | int = "effective"
    seed: int = 0
    metric: MetricKind = field(default_factory=MetricKind)
    subsample: int | None = None

    def __post_init__(self):
        if self.n_resamples < 100:
            raise ValueError(f"n_resamples must be >= 100, got {self.n_resamples}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        rs = self.resample_size
        if isinstance(rs, str):
            if rs not in RESAMPLE_MODES:
                raise ValueError(f"resample_size must be one of {RESAMPLE_MODES} or an int, got {rs!r}")
        elif int(rs) < 1:
            raise ValueError("explicit resample_size must be >= 1")
        if self.subsample is not None and self.subsample < 1:
            raise ValueError("subsample must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class ChangeVerdict:
    base_index: int
    comp_index: int
    distance: float
    threshold: float
    p_value: float
    rejected: bool
    base_nodes: int
    comp_nodes: int
    alpha: float
    metric: str
    skipped: tuple = ()

    def as_record(self) -> dict:
        return {k: getattr(self, k) for k in VERDICT_FIELDS}


@dataclass(frozen=True)
class NullDistribution:
    """Ascending bootstrap distances {d_k} for one base window plus the observed distance."""

    distances: np.ndarray
    observed: float

    def threshold(self, alpha: float) -> float:
        return threshold_at(self.distances, alpha)

    def p_value(self) -> float:
        n = self.distances.size
        exceed = n - int(np.searchsorted(self.distances, self.observed, side="left"))
        return (1 + exceed) / (n + 1)

    def rejects(self, alpha: float) -> bool:
        return self.observed > self.threshold(alpha)


def threshold_rank(alpha: float, n: int) -> int:
    """1-based rank ceil(alpha * n) into the sorted bootstrap distances."""
    # round first so 0.95 * 1000 does not drift past 950 in floating point
    return min(n, max(1, math.ceil(round(alpha * n, 9))))


def threshold_at(sorted_distances: np.ndarray, alpha: float) -> float:
    return float(sorted_distances[threshold_rank(alpha, sorted_distances.size) - 1])


def _resample_size(cfg: BootstrapConfig, base: DegreeSample, comp: DegreeSample) -> int:
    """Size of each bootstrap resample.

    ``effective`` uses n*m/(n+m): a one-sample distance at that size has the
    same sampling variance as a two-sample distance between windows of sizes
    n and m, which is what the observed distance is.
    """
    if cfg.resample_size == "effective":
        n, m = base.node_count, comp.node_count
        return max(1, round(n * m / (n + m)))
    if cfg.resample_size == "comp":
        return comp.node_count
    if cfg.resample_size == "base":
        return base.node_count
    return int(cfg.resample_size)


def null_distribution(base: DegreeSample, comp: DegreeSample, cfg: BootstrapConfig,
                      rng: np.random.Generator) -> NullDistribution:
    """Observed distance plus ``cfg.n_resamples`` distances from base to its own resamples.

    A with-replacement resample of size m from a multiset is a multinomial draw
    of m over its distinct values with the empirical frequencies, which is how
    resamples are generated here (one vectorised call instead of k index draws).
    """
    if base.node_count == 0 or comp.node_count == 0:
        raise EmptySample("both samples must be non-empty")
    observed = distance(cfg.metric, base, comp)
    size = _resample_size(cfg, base, comp)
    probs = base.counts / base.node_count
    draws = rng.multinomial(size, probs, size=cfg.n_resamples)
    d = batched_distances(cfg.metric, base, draws)
    return NullDistribution(distances=np.sort(d, kind="stable"), observed=observed)


def bootstrap_test(base: DegreeSample, comp: DegreeSample, cfg: BootstrapConfig,
                   rng: np.random.Generator, base_index: int = 0, comp_index: int = 1,
                   skipped: tuple = ()) -> ChangeVerdict:
    null = null_distribution(base, comp, cfg, rng)
    thr = null.threshold(cfg.alpha)
    return ChangeVerdict(
        base_index=base_index, comp_index=comp_index,
        distance=null.observed, threshold=thr, p_value=null.p_value(),
        rejected=bool(null.observed > thr),
        base_nodes=base.node_count, comp_nodes=comp.node_count,
        alpha=cfg.alpha, metric=cfg.metric.tag, skipped=tuple(skipped),
    )


def pair_rng(seed: int, base_index: int, comp_index: int) -> np.random.Generator:
    """Generator for one window pair; independent of the order pairs are processed in."""
    return np.random.default_rng([seed, base_index, comp_index])


def _pairs(samples: Iterable[DegreeSample | None]):
    """Yield (base_idx, base, comp_idx, comp, skipped) bridging over empty windows."""
    prev = None
    gap: list[int] = []
    for idx, s in enumerate(samples):
        if s is None or s.node_count == 0:
            gap.append(idx)
            if prev is not None:
                log.info("window %d is empty; bridging from window %d", idx, prev[0])
            continue
        if prev is not None:
            yield prev[0], prev[1], idx, s, tuple(gap)
        prev = (idx, s)
        gap = []


def _prepare(base, comp, cfg, rng):
    if cfg.subsample is not None:
        base = subsample(base, cfg.subsample, rng)
        comp = subsample(comp, cfg.subsample, rng)
    return base, comp


def iter_verdicts(samples: Iterable[DegreeSample | None], cfg: BootstrapConfig) -> Iterator[ChangeVerdict]:
    """Lazily compare each non-empty window with the previous non-empty one.

    ``None`` (or an empty sample) marks an empty window. Works on unbounded
    iterables, so verdicts can be consumed as windows close.
    """
    for bi, base, ci, comp, gap in _pairs(samples):
        rng = pair_rng(cfg.seed, bi, ci)
        base, comp = _prepare(base, comp, cfg, rng)
        yield bootstrap_test(base, comp, cfg, rng, bi, ci, gap)


def window_samples(windows: Iterable) -> Iterator[DegreeSample | None]:
    for w in windows:
        try:
            yield degree_sample(w)
        except EmptyWindow:
            yield None


def detect_samples(samples: Sequence[DegreeSample | None], cfg: BootstrapConfig) -> list[ChangeVerdict]:
    if sum(1 for s in samples if s is not None and s.node_count) < 2:
        raise TooFewWindows("need at least two non-empty windows")
    return list(iter_verdicts(samples, cfg))


def detect_sequence(windows: Sequence, cfg: BootstrapConfig) -> list[ChangeVerdict]:
    """One verdict per consecutive pair of non-empty windows, base = earlier window."""
    return detect_samples(list(window_samples(windows)), cfg)


def sensitivity_profile(samples: Sequence, cfg: BootstrapConfig,
                        alphas: Sequence[float]) -> list[tuple[ChangeVerdict, dict[float, bool]]]:
    """Evaluate several confidence levels against one bootstrap run per pair.

    ``samples`` may be windows or degree samples. The returned verdict carries
    ``cfg.alpha``; the map gives the decision at each requested alpha.
    """
    alphas = list(alphas)
    if alphas != sorted(alphas):
        raise ValueError("alphas must be sorted ascending")
    for a in alphas:
        if not 0 < a < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {a}")
    samples = list(samples)
    if samples and not all(s is None or isinstance(s, DegreeSample) for s in samples):
        samples = list(window_samples(samples))
    if sum(1 for s in samples if s is not None and s.node_count) < 2:
        raise TooFewWindows("need at least two non-empty windows")
    out = []
    for bi, base, ci, comp, gap in _pairs(samples):
        rng = pair_rng(cfg.seed, bi, ci)
        base, comp = _prepare(base, comp, cfg, rng)
        null = null_distribution(base, comp, cfg, rng)
        thr = null.threshold(cfg.alpha)
        verdict = ChangeVerdict(
            base_index=bi, comp_index=ci, distance=null.observed, threshold=thr,
            p_value=null.p_value(), rejected=bool(null.observed > thr),
            base_nodes=base.node_count, comp_nodes=comp.node_count,
            alpha=cfg.alpha, metric=cfg.metric.tag, skipped=gap,
        )
        out.append((verdict, {a: null.rejects(a) for a in alphas}))
    return out
