"""Synthetic graph generators and alternating-model scenarios with a known change schedule."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .degstats import DegreeSample, degrees_from_edges

RUN_MEAN = 4.0
RUN_VAR = 2.0


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class SizeDist:
    """Node-count distribution for snapshots: fixed, normal or (inclusive) uniform.

    ``b`` is the variance for ``normal`` (set ``std=True`` to read it as a
    standard deviation) and the upper bound for ``uniform``.
    """

    kind: str = "fixed"
    a: float = 200
    b: float = 0.0
    std: bool = False

    def __post_init__(self):
        if self.kind not in ("fixed", "normal", "uniform"):
            raise InvalidConfig(f"unknown size distribution {self.kind!r}")
        if self.kind == "uniform" and self.b < self.a:
            raise InvalidConfig("uniform size distribution needs lo <= hi")
        if self.kind == "normal" and self.b < 0:
            raise InvalidConfig("normal size distribution needs a non-negative spread")

    def draw(self, rng: np.random.Generator) -> int:
        if self.kind == "fixed":
            return int(self.a)
        if self.kind == "uniform":
            return int(rng.integers(int(self.a), int(self.b), endpoint=True))
        sd = self.b if self.std else np.sqrt(self.b)
        return max(2, int(round(rng.normal(self.a, sd))))


@dataclass(frozen=True)
class ModelConfig:
    kind: str  # "er" or "caveman"
    p: float
    n: SizeDist = field(default_factory=SizeDist)
    communities: int = 5
    # Caveman only: hold clique size fixed and derive the community count from n
    clique_size: int | None = None
    anchor: str = "first"

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("er", "caveman"):
            raise InvalidConfig(f"unknown model {self.kind!r}")
        if not 0 <= self.p <= 1:
            raise InvalidConfig(f"p must lie in [0, 1], got {self.p}")
        if self.communities < 1:
            raise InvalidConfig("communities must be >= 1")
        if self.anchor not in REWIRE_ANCHORS:
            raise InvalidConfig(f"unknown rewire anchor {self.anchor!r}")
        if self.clique_size is not None and self.clique_size < 2:
            raise InvalidConfig("clique_size must be >= 2")
        object.__setattr__(self, "kind", kind)

    def caveman_shape(self, n: int) -> tuple[int, int]:
        """``(nodes, communities)`` actually used for a drawn size ``n``.

        With ``clique_size`` set, every cave has exactly that many members and
        ``n`` is rounded down to a whole number of caves (at least one).
        """
        if self.clique_size is None:
            return n, self.communities
        caves = max(1, n // self.clique_size)
        return caves * self.clique_size, caves

    def generate(self, rng: np.random.Generator):
        """Draw a size, then one graph. Returns ``(edges, n_nodes)``."""
        n = self.n.draw(rng)
        if self.kind == "er":
            return gen_er(n, self.p, rng), n
        n, caves = self.caveman_shape(n)
        return gen_caveman(n, caves, self.p, rng, self.anchor), n


@dataclass(frozen=True)
class ScenarioSpec:
    config_a: ModelConfig
    config_b: ModelConfig
    n_changes: int = 100
    seed: int = 0
    run_lengths: tuple[int, ...] | None = None  # forces the schedule when given

    def __post_init__(self):
        if self.n_changes < 1:
            raise InvalidConfig("n_changes must be >= 1")
        if self.run_lengths is not None:
            if len(self.run_lengths) != self.n_changes + 1 or min(self.run_lengths) < 1:
                raise InvalidConfig("run_lengths needs n_changes + 1 positive entries")


@dataclass(frozen=True)
class Schedule:
    labels: tuple[str, ...]
    change_points: tuple[int, ...]


# --- generators -------------------------------------------------------------

@lru_cache(maxsize=64)
def _pairs(n: int):
    return np.triu_indices(n, 1)


def gen_er(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """G(n, p): every unordered pair independently present with probability p."""
    if n < 2:
        raise InvalidConfig("ER needs n >= 2")
    if not 0 <= p <= 1:
        raise InvalidConfig(f"p must lie in [0, 1], got {p}")
    iu, ju = _pairs(n)
    keep = rng.random(iu.size) < p
    return np.column_stack([iu[keep], ju[keep]])


def caveman_blocks(n: int, communities: int) -> list[range]:
    """Clique memberships: floor(n / C) nodes each, remainder spread one per clique."""
    base, extra = divmod(n, communities)
    blocks, start = [], 0
    for c in range(communities):
        size = base + (1 if c < extra else 0)
        blocks.append(range(start, start + size))
        start += size
    return blocks


def connected_caveman(n: int, communities: int) -> np.ndarray:
    """Ring of cliques: in clique c the edge (s_c, s_c + 1) is replaced by (s_c + 1, s_{c+1})."""
    if communities < 1 or n < 2 * communities:
        raise InvalidConfig(f"caveman needs n >= 2 * communities, got n={n}, C={communities}")
    blocks = caveman_blocks(n, communities)
    edges = []
    for block in blocks:
        iu, ju = _pairs(len(block))
        edges.append(np.column_stack([iu + block.start, ju + block.start]))
    edges = np.concatenate(edges)
    if communities > 1:
        starts = np.array([b.start for b in blocks])
        keep = ~np.isin(edges[:, 0] * n + edges[:, 1], starts * n + starts + 1)
        links = np.sort(np.column_stack([starts + 1, np.roll(starts, -1)]), axis=1)
        edges = np.concatenate([edges[keep], links])
    return edges


REWIRE_ANCHORS = ("first", "uniform")


def rewire(edges: np.ndarray, n: int, p: float, rng: np.random.Generator,
           anchor: str = "first", max_rounds: int = 1000) -> np.ndarray:
    """Move one endpoint of each edge, with probability ``p``, to a uniformly chosen node.

    ``anchor`` picks the endpoint that stays: ``first`` keeps the lower-indexed
    node (so within a cave, low-index members keep their edges and high-index
    members lose them), ``uniform`` picks either endpoint at random. Proposals
    forming a self-loop or a duplicate edge are redrawn. All selected edges are resolved together in
    rounds: a proposal is accepted if it collides neither with an edge already
    in place nor with an earlier proposal of the same round. Edge count is
    preserved.
    """
    edges = np.sort(np.asarray(edges, dtype=np.int64), axis=1)
    m = edges.shape[0]
    if m == 0 or p == 0:
        return edges
    moving = np.flatnonzero(rng.random(m) < p)
    if moving.size == 0:
        return edges
    if anchor == "first":
        anchors = edges[moving, 0]
    elif anchor == "uniform":
        anchors = edges[moving, rng.integers(0, 2, size=moving.size)]
    else:
        raise InvalidConfig(f"unknown rewire anchor {anchor!r}; expected one of {REWIRE_ANCHORS}")
    still_fixed = np.ones(m, dtype=bool)
    still_fixed[moving] = False
    taken = np.sort(edges[still_fixed, 0] * n + edges[still_fixed, 1])
    out = edges.copy()
    pending = np.arange(moving.size)
    for _ in range(max_rounds):
        if pending.size == 0:
            break
        a = anchors[pending]
        b = rng.integers(0, n, size=pending.size)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * n + hi
        ok = (lo != hi) & ~np.isin(keys, taken, assume_unique=False)
        first = np.zeros(pending.size, dtype=bool)
        _, pos = np.unique(keys[ok], return_index=True)
        first[np.flatnonzero(ok)[pos]] = True
        out[moving[pending[first]]] = np.column_stack([lo[first], hi[first]])
        taken = np.sort(np.concatenate([taken, keys[first]]))
        pending = pending[~first]
    if pending.size:
        raise RuntimeError("rewiring could not place every edge; graph too dense")
    return out


def gen_caveman(n: int, communities: int, p_rewire: float, rng: np.random.Generator,
                anchor: str = "first") -> np.ndarray:
    """Connected caveman graph on ``n`` nodes followed by per-edge rewiring."""
    if not 0 <= p_rewire <= 1:
        raise InvalidConfig(f"p_rewire must lie in [0, 1], got {p_rewire}")
    return rewire(connected_caveman(n, communities), n, p_rewire, rng, anchor=anchor)


# --- scenarios --------------------------------------------------------------

def draw_run_lengths(n_changes: int, rng: np.random.Generator) -> list[int]:
    """n_changes + 1 run lengths from round(N(4, var 2)), floored at 1."""
    raw = rng.normal(RUN_MEAN, np.sqrt(RUN_VAR), size=n_changes + 1)
    return [max(1, int(round(x))) for x in raw]


def make_schedule(run_lengths) -> Schedule:
    labels: list[str] = []
    changes: list[int] = []
    for r, length in enumerate(run_lengths):
        if r:
            changes.append(len(labels))
        labels.extend(["a" if r % 2 == 0 else "b"] * int(length))
    return Schedule(labels=tuple(labels), change_points=tuple(changes))


def snapshot_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1, index])


def gen_scenario_graphs(spec: ScenarioSpec):
    """Like :func:`gen_scenario` but returns ``(edges, n_nodes)`` per snapshot."""
    runs = spec.run_lengths
    if runs is None:
        runs = draw_run_lengths(spec.n_changes, np.random.default_rng([spec.seed, 0]))
    schedule = make_schedule(runs)
    graphs = []
    for i, label in enumerate(schedule.labels):
        cfg = spec.config_a if label == "a" else spec.config_b
        graphs.append(cfg.generate(snapshot_rng(spec.seed, i)))
    return graphs, schedule


def gen_scenario(spec: ScenarioSpec) -> tuple[list[DegreeSample | None], Schedule]:
    """Degree samples for every snapshot plus the ground-truth schedule.

    A snapshot without edges yields ``None``, which the detector treats as an
    empty window.
    """
    graphs, schedule = gen_scenario_graphs(spec)
    samples = []
    for edges, n in graphs:
        samples.append(degrees_from_edges(edges, n) if len(edges) else None)
    return samples, schedule
