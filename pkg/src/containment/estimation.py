"""Monte Carlo and exact estimators of the expected misinformation spread.

Both estimators are averages over live-edge graphs: the Monte Carlo one over
sampled graphs with equal weights, the exact one over every graph that the
uncertain edges can produce, weighted by its probability.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from containment import _kernels
from containment.cascades import CascadeSystem, PriorityProfile
from containment.diffusion import (
    LiveEdgeGraph,
    check_profile_class,
    initial_state,
    seed_arrays,
    simulate,
    _MODE,
)
from containment.errors import CapacityError, ValidationError
from containment.graph import DirectedGraph

EVALUATORS = ("auto", "step_simulation", "fast_bfs", "reference")
EXACT_EDGE_LIMIT = 20
_CHUNK_CELLS = 1 << 24


@dataclass(frozen=True)
class EstimatorConfig:
    replications: int = 5000
    base_seed: int = 0
    common_random_numbers: bool = True
    evaluator: str = "auto"

    def __post_init__(self):
        if self.replications < 1:
            raise ValidationError("replications must be >= 1")
        if self.evaluator not in EVALUATORS:
            raise ValidationError(f"unknown evaluator {self.evaluator!r}; expected one of {EVALUATORS}")


@dataclass(frozen=True)
class Estimate:
    mean_not_m_active: float
    mean_m_active: float
    std_error: float
    replications: int


def replication_mask(g: DirectedGraph, base_seed: int, r: int, stream: tuple = ()) -> np.ndarray:
    """Edge coins of replication ``r``; they depend only on ``(base_seed, r, *stream)``."""
    return np.random.default_rng([base_seed, r, *stream]).random(g.edge_count) < g.prob


def sample_masks(g: DirectedGraph, base_seed: int, count: int, start: int = 0, stream: tuple = ()):
    masks = np.empty((count, g.edge_count), dtype=bool)
    for i in range(count):
        masks[i] = replication_mask(g, base_seed, start + i, stream)
    return masks


def _seed_salt(star_seeds) -> int:
    return zlib.crc32(",".join(map(str, sorted(star_seeds))).encode())


class LiveGraphEnsemble:
    """A weighted collection of live-edge graphs over one base graph."""

    def __init__(self, graph: DirectedGraph, masks: np.ndarray, weights: np.ndarray | None = None):
        self.graph = graph
        self.masks = np.ascontiguousarray(masks, dtype=bool)
        self.uniform = weights is None
        r = self.masks.shape[0]
        self.weights = np.full(r, 1.0 / r) if weights is None else np.asarray(weights, dtype=float)

    @classmethod
    def monte_carlo(cls, g: DirectedGraph, replications: int, base_seed: int = 0, stream: tuple = ()):
        return cls(g, sample_masks(g, base_seed, replications, 0, stream))

    @classmethod
    def exhaustive(cls, g: DirectedGraph, limit: int = EXACT_EDGE_LIMIT):
        """Every live graph over the edges with 0 < p < 1, with its probability."""
        p = g.prob
        uncertain = np.flatnonzero((p > 0) & (p < 1))
        u = uncertain.size
        if u > limit:
            raise CapacityError(f"{u} uncertain edges exceed the exact-enumeration limit of {limit}")
        bits = ((np.arange(1 << u)[:, None] >> np.arange(u)) & 1).astype(bool)
        masks = np.tile(p >= 1, (1 << u, 1))
        masks[:, uncertain] = bits
        pu = p[uncertain]
        weights = np.where(bits, pu, 1.0 - pu).prod(axis=1)
        return cls(g, masks, weights)

    def __len__(self):
        return self.masks.shape[0]

    def misinfo_counts(self, system, profile, star_seeds, evaluator: str = "step_simulation") -> np.ndarray:
        g = self.graph
        n = g.node_count
        if evaluator == "reference":
            return np.array(
                [simulate(g, system, profile, star_seeds, LiveEdgeGraph(g, m)).m_active_count for m in self.masks],
                dtype=np.int64,
            )
        if evaluator == "step_simulation":
            init = initial_state(system, profile, star_seeds, n)
            return _kernels.misinfo_counts(n, g.out_ptr, g.dst, self.masks, init, profile.rank, system.is_misinfo)
        if evaluator in _MODE:
            sp, sn = seed_arrays(system, star_seeds)
            grank = profile.rank[0] if n else np.arange(1, system.n_cascades + 1)
            return _kernels.fast_misinfo_counts(
                n, g.out_ptr, g.dst, self.masks, sp, sn, system.is_misinfo, grank, _MODE[evaluator]
            )
        raise ValidationError(f"unknown evaluator {evaluator!r}")

    def mean_not_m(self, system, profile, star_seeds) -> float:
        counts = self.misinfo_counts(system, profile, star_seeds)
        if self.uniform:
            return self.graph.node_count - counts.sum() / len(self)
        return self.graph.node_count - float(self.weights @ counts)

    @cached_property
    def csr(self):
        """Per-live-graph out- and in-adjacency in flat CSR form."""
        g = self.graph
        n, R = g.node_count, len(self)
        rows = np.repeat(np.arange(R), self.masks.sum(axis=1))
        slots = np.arange(R)[:, None] * n + np.arange(n + 1)

        def build(keep, heads, tails):
            counts = np.bincount(rows * n + np.tile(heads, R)[keep.ravel()], minlength=R * n)
            flat = np.concatenate([[0], np.cumsum(counts)])
            return flat[slots], np.tile(tails, R)[keep.ravel()]

        optr, odst = build(self.masks, g.src, g.dst)
        iptr, isrc = build(self.masks[:, g.in_eid], g.dst[g.in_eid], g.in_src)
        return optr, odst, iptr, isrc


def pick_evaluator(profile: PriorityProfile, system: CascadeSystem, requested: str = "auto") -> str:
    """Resolve ``auto``/``fast_bfs`` to a concrete profile class or the step evaluator."""
    if requested in ("step_simulation", "reference"):
        return requested
    classes = profile.classes(system)
    for cls in ("m_dominant", "p_dominant", "homogeneous"):
        if cls in classes:
            return cls
    if requested == "fast_bfs":
        raise ValidationError("fast_bfs evaluator needs an M-dominant, P-dominant or homogeneous profile")
    return "step_simulation"


def estimate(
    g: DirectedGraph,
    system: CascadeSystem,
    profile: PriorityProfile,
    star_seeds,
    cfg: EstimatorConfig = EstimatorConfig(),
) -> Estimate:
    """Sample-mean spread over ``cfg.replications`` live graphs.

    Replication ``r`` draws its edge coins from the stream ``(base_seed, r)``,
    so with common random numbers every seed set is scored on the same graphs.
    """
    star_seeds = sorted(set(int(v) for v in star_seeds))
    system.check_nodes(g.node_count, star_seeds)
    evaluator = pick_evaluator(profile, system, cfg.evaluator)
    if evaluator in _MODE:
        check_profile_class(profile, system, evaluator)
    stream = () if cfg.common_random_numbers else (0, _seed_salt(star_seeds))
    R = cfg.replications
    chunk = max(1, _CHUNK_CELLS // max(1, g.edge_count))
    counts = np.empty(R, dtype=np.int64)
    for start in range(0, R, chunk):
        stop = min(R, start + chunk)
        ens = LiveGraphEnsemble(g, sample_masks(g, cfg.base_seed, stop - start, start, stream))
        counts[start:stop] = ens.misinfo_counts(system, profile, star_seeds, evaluator)
    return summarize_counts(counts, g.node_count)


def summarize_counts(counts: np.ndarray, node_count: int) -> Estimate:
    R = counts.size
    mean_m = counts.sum() / R
    se = float(counts.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0
    return Estimate(float(node_count - mean_m), float(mean_m), se, R)


def exact_f(g: DirectedGraph, system: CascadeSystem, profile: PriorityProfile, star_seeds) -> tuple:
    """Exact ``(f_M, f_notM)`` by enumerating every live graph over the uncertain edges."""
    star_seeds = sorted(set(int(v) for v in star_seeds))
    system.check_nodes(g.node_count, star_seeds)
    ens = LiveGraphEnsemble.exhaustive(g)
    counts = ens.misinfo_counts(system, profile, star_seeds)
    f_m = float(ens.weights @ counts)
    return f_m, g.node_count - f_m
