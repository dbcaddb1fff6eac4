"""Distances between two degree distributions: KS, smoothed KL and Relative Hausdorff.

Every metric is exposed twice: a scalar function over the natural
representation (ECDF, PMF, CCDH) and a batched form used by the bootstrap,
where the resamples arrive as count vectors over the base sample's support.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degstats import DegreeSample, EmpiricalCDF, ecdf

METRICS = ("ks", "kl", "rh")


@dataclass(frozen=True)
class MetricKind:
    tag: str = "ks"
    kl_pseudocount: float = 0.5

    def __post_init__(self):
        tag = self.tag.lower()
        if tag not in METRICS:
            raise ValueError(f"unknown metric {self.tag!r}; expected one of {METRICS}")
        if self.kl_pseudocount <= 0:
            raise ValueError("kl_pseudocount must be > 0")
        object.__setattr__(self, "tag", tag)


@dataclass(frozen=True)
class CCDH:
    """Complementary cumulative degree histogram: ``counts_at_least[j] = #{deg >= support[j]}``."""

    support: np.ndarray
    counts_at_least: np.ndarray


# --- Kolmogorov-Smirnov ---------------------------------------------------

def ks_distance(a: EmpiricalCDF, b: EmpiricalCDF) -> float:
    """Largest vertical gap between two step ECDFs, scanned over the union support."""
    xs = np.union1d(a.support, b.support)
    return float(np.max(np.abs(a(xs) - b(xs))))


# --- Kullback-Leibler -----------------------------------------------------

def smoothed_pmfs(p: DegreeSample, q: DegreeSample, pseudocount: float = 0.5):
    """PMFs of both samples over their union support after additive smoothing."""
    xs = np.union1d(p.support, q.support)
    cp = np.zeros(xs.size)
    cq = np.zeros(xs.size)
    cp[np.searchsorted(xs, p.support)] = p.counts
    cq[np.searchsorted(xs, q.support)] = q.counts
    cp += pseudocount
    cq += pseudocount
    return xs, cp / cp.sum(), cq / cq.sum()


def kl_divergence(p: DegreeSample, q: DegreeSample, pseudocount: float = 0.5) -> float:
    """D(P || Q) in nats. By convention P is the comparison window, Q the base."""
    if pseudocount <= 0:
        raise ValueError("pseudocount must be > 0")
    _, pp, qq = smoothed_pmfs(p, q, pseudocount)
    return float(np.sum(pp * np.log(pp / qq)))


# --- Relative Hausdorff ---------------------------------------------------

def ccdh(sample: DegreeSample) -> CCDH:
    counts = sample.counts
    at_least = np.cumsum(counts[::-1])[::-1]
    return CCDH(support=sample.support.astype(float), counts_at_least=at_least.astype(float))


def _nearest_gap(target: float, lo: float, hi: float, xs: np.ndarray, ys: np.ndarray) -> float:
    """min over d' in [lo, hi] of |target - G(d')| for the extended interpolated CCDH G.

    G is flat at ys[0] left of xs[0], linear between support points and 0 beyond
    xs[-1]. It is non-increasing, so the image of an interval is a closed range
    plus, when the interval crosses xs[-1], the isolated value 0.
    """
    xmax = xs[-1]
    best = np.inf
    if hi > xmax:
        best = abs(target)
    a, b = lo, min(hi, xmax)
    if a <= b:
        g_hi = float(np.interp(a, xs, ys))  # np.interp clamps left of xs[0] to ys[0]
        g_lo = float(np.interp(b, xs, ys))
        if g_lo <= target <= g_hi:
            return 0.0
        best = min(best, abs(target - g_lo), abs(target - g_hi))
    return best


def _close_at(d: float, fd: float, eps: float, xs: np.ndarray, ys: np.ndarray) -> bool:
    return _nearest_gap(fd, (1 - eps) * d, (1 + eps) * d, xs, ys) <= eps * fd


def _point_epsilon(d: float, fd: float, xs: np.ndarray, ys: np.ndarray, tol: float) -> float:
    if _close_at(d, fd, 0.0, xs, ys):
        return 0.0
    hi = max(1.0, xs[-1] / d)
    while not _close_at(d, fd, hi, xs, ys):
        hi *= 2.0
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _close_at(d, fd, mid, xs, ys):
            hi = mid
        else:
            lo = mid
    return hi


def _directed_rh(f: CCDH, g: CCDH, tol: float) -> float:
    xs, ys = g.support, g.counts_at_least
    return max(_point_epsilon(d, fd, xs, ys, tol) for d, fd in zip(f.support, f.counts_at_least))


def rh_distance(f: CCDH, g: CCDH, tol: float = 1e-6) -> float:
    """Smallest eps with F and G mutually (eps, eps)-close, to absolute tolerance ``tol``.

    For each degree d of one histogram some d' within a relative eps of d must
    satisfy |F(d) - G(d')| <= eps * F(d); the result is the worst point over
    both directions. Raw counts are used, so the value is invariant to scaling
    both histograms by a common factor but not to differing sample sizes.
    """
    return max(_directed_rh(f, g, tol), _directed_rh(g, f, tol))


# --- dispatch -------------------------------------------------------------

def distance(kind: MetricKind, base: DegreeSample, comp: DegreeSample) -> float:
    if kind.tag == "ks":
        return ks_distance(ecdf(base), ecdf(comp))
    if kind.tag == "kl":
        return kl_divergence(comp, base, kind.kl_pseudocount)
    return rh_distance(ccdh(base), ccdh(comp))


def batched_distances(kind: MetricKind, base: DegreeSample, draws: np.ndarray) -> np.ndarray:
    """Distances from ``base`` to each resample given as counts over ``base.support``.

    ``draws`` has shape ``(k, len(base.support))``. Resamples never leave the base
    support, so the union support of every pair is the base support itself.
    """
    draws = np.asarray(draws)
    sizes = draws.sum(axis=1)
    if kind.tag == "ks":
        base_cum = np.cumsum(base.counts) / base.node_count
        res_cum = np.cumsum(draws, axis=1) / sizes[:, None]
        return np.max(np.abs(base_cum[None, :] - res_cum), axis=1)
    if kind.tag == "kl":
        pc = kind.kl_pseudocount
        q = base.counts + pc
        q = q / q.sum()
        p = draws + pc
        p = p / p.sum(axis=1, keepdims=True)
        return np.sum(p * np.log(p / q[None, :]), axis=1)
    f = ccdh(base)
    out = np.empty(draws.shape[0])
    for k, row in enumerate(draws):
        keep = row > 0
        at_least = np.cumsum(row[::-1])[::-1]
        g = CCDH(support=base.support[keep].astype(float), counts_at_least=at_least[keep].astype(float))
        out[k] = rh_distance(f, g)
    return out
