"""Per-window degree samples and their empirical cumulative distributions."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np


class EmptyWindow(ValueError):
    """No interactions survive self-loop removal, so there is no degree sample."""


@dataclass(frozen=True)
class DegreeSample:
    """Multiset of node degrees observed in one window.

    Only interacting nodes appear, so every degree is >= 1.
    """

    degrees: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.degrees, dtype=np.int64).ravel()
        object.__setattr__(self, "degrees", arr)

    @property
    def node_count(self) -> int:
        return int(self.degrees.size)

    @cached_property
    def _unique(self):
        return np.unique(self.degrees, return_counts=True)

    @property
    def support(self) -> np.ndarray:
        """Sorted distinct degree values."""
        return self._unique[0]

    @property
    def counts(self) -> np.ndarray:
        """Multiplicity of each value in ``support``."""
        return self._unique[1]

    def __len__(self):
        return self.node_count

    def __repr__(self):
        return f"DegreeSample(node_count={self.node_count}, mean={self.degrees.mean() if self.node_count else 0:.3g})"


@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous step ECDF stored over the observed support only."""

    support: np.ndarray
    cum: np.ndarray

    def __call__(self, x):
        x = np.asarray(x)
        idx = np.searchsorted(self.support, x, side="right")
        padded = np.concatenate(([0.0], self.cum))
        return padded[idx]


def degree_sample(events: Iterable) -> DegreeSample:
    """Collapse interactions into a simple undirected graph and return its degrees.

    ``events`` may be a window (anything with an ``events`` attribute) or an
    iterable of objects with ``source``/``target`` attributes or of
    ``(source, target, ...)`` tuples. Direction and repeated pairs are collapsed,
    self-loops dropped; a node's degree is its number of distinct neighbours.
    """
    events = getattr(events, "events", events)
    neighbours: dict = {}
    for ev in events:
        if hasattr(ev, "source"):
            u, v = ev.source, ev.target
        else:
            u, v = ev[0], ev[1]
        if u == v:
            continue
        neighbours.setdefault(u, set()).add(v)
        neighbours.setdefault(v, set()).add(u)
    if not neighbours:
        raise EmptyWindow("no interactions left after dropping self-loops")
    return DegreeSample(np.fromiter((len(s) for s in neighbours.values()), dtype=np.int64, count=len(neighbours)))


def degrees_from_edges(edges: np.ndarray, n_nodes: int) -> DegreeSample:
    """Degree sample of a simple graph given as an ``(m, 2)`` integer edge array.

    Isolated nodes are excluded, matching what interaction data can show.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(edges.ravel(), minlength=n_nodes)
    return DegreeSample(deg[deg > 0])


def ecdf(sample: DegreeSample) -> EmpiricalCDF:
    support, counts = sample.support, sample.counts
    # integer cumsum divided once keeps the last value exactly 1.0
    cum = np.cumsum(counts) / sample.node_count
    return EmpiricalCDF(support=support, cum=cum)


def subsample(sample: DegreeSample, n: int, rng: np.random.Generator) -> DegreeSample:
    """Draw ``n`` node degrees without replacement; samples of size <= n pass through."""
    if n < 1:
        raise ValueError(f"subsample size must be >= 1, got {n}")
    if sample.node_count <= n:
        return sample
    return DegreeSample(rng.choice(sample.degrees, size=n, replace=False))
