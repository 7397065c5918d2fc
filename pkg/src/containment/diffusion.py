"""Time-stepped multi-cascade diffusion and its live-edge-graph evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from containment import _kernels
from containment.cascades import CascadeSystem, PriorityProfile
from containment.errors import ValidationError
from containment.graph import DirectedGraph

PROFILE_CLASSES = ("m_dominant", "p_dominant", "homogeneous")
_MODE = {"m_dominant": 0, "p_dominant": 1, "homogeneous": 2}


@dataclass(frozen=True)
class LiveEdgeGraph:
    """One realization of edge coins: ``kept[e]`` says whether edge ``e`` of ``graph`` passes."""

    graph: DirectedGraph
    kept: np.ndarray

    def __post_init__(self):
        kept = np.asarray(self.kept, dtype=bool).reshape(-1)
        if kept.size != self.graph.edge_count:
            raise ValidationError("live-edge mask length does not match edge count")
        object.__setattr__(self, "kept", kept)

    def kept_edges(self):
        g = self.graph
        return list(zip(g.src[self.kept].tolist(), g.dst[self.kept].tolist()))


@dataclass
class DiffusionOutcome:
    """Final activation state.

    ``state`` holds a cascade id per node (-1 for never activated); it is ``None``
    when the evaluator only determines the misinformation/other partition.
    ``activation_time`` is ``inf`` for nodes never activated.
    """

    state: Optional[np.ndarray]
    activation_time: np.ndarray
    m_active: np.ndarray

    @property
    def m_active_count(self) -> int:
        return int(self.m_active.sum())

    @property
    def not_m_active_count(self) -> int:
        return int(self.m_active.size - self.m_active.sum())

    def m_active_nodes(self) -> set:
        return set(np.flatnonzero(self.m_active).tolist())


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_live_edge_graph(g: DirectedGraph, rng) -> LiveEdgeGraph:
    """Keep every edge independently with its propagation probability."""
    u = _as_rng(rng).random(g.edge_count)
    return LiveEdgeGraph(g, u < g.prob)


def initial_state(system: CascadeSystem, profile: PriorityProfile, star_seeds, node_count: int) -> np.ndarray:
    """Time-0 state: each seeded node takes its highest-ranked seeding cascade."""
    state = np.full(node_count, -1, dtype=np.int64)
    rank = profile.rank
    for c, seeds in enumerate(system.seed_lists(star_seeds)):
        for v in seeds:
            if state[v] < 0 or rank[v, c] > rank[v, state[v]]:
                state[v] = c
    return state


def _check_inputs(g, system, profile, star_seeds):
    if profile.rank.shape != (g.node_count, system.n_cascades):
        raise ValidationError(
            f"priority table shape {profile.rank.shape} does not match "
            f"({g.node_count} nodes, {system.n_cascades} cascades)"
        )
    system.check_nodes(g.node_count, star_seeds)


def simulate(
    g: DirectedGraph,
    system: CascadeSystem,
    profile: PriorityProfile,
    star_seeds: Iterable[int],
    randomness: Union[int, np.random.Generator, LiveEdgeGraph, None] = None,
) -> DiffusionOutcome:
    """Run the discrete-time process step by step.

    With an integer seed or generator a live-edge graph is sampled first and
    the process then runs on it; every attempt along a kept edge succeeds.
    """
    star_seeds = set(int(v) for v in star_seeds)
    _check_inputs(g, system, profile, star_seeds)
    lg = randomness if isinstance(randomness, LiveEdgeGraph) else sample_live_edge_graph(g, randomness)
    if lg.graph is not g and lg.kept.size != g.edge_count:
        raise ValidationError("live-edge graph belongs to a different graph")
    n = g.node_count
    rank = profile.rank
    ptr, dst, kept = g.out_ptr, g.dst, lg.kept

    state = [-1] * n
    time = [math.inf] * n
    for v, c in enumerate(initial_state(system, profile, star_seeds, n).tolist()):
        if c >= 0:
            state[v] = c
            time[v] = 0
    newly = [v for v in range(n) if state[v] >= 0]
    t = 0
    while newly:
        t += 1
        arrivals: dict = {}
        for u in newly:
            for e in range(ptr[u], ptr[u + 1]):
                v = int(dst[e])
                if state[v] == -1 and kept[e]:
                    arrivals.setdefault(v, []).append(state[u])
        for v, cs in arrivals.items():
            state[v] = max(cs, key=lambda c: rank[v, c])
            time[v] = t
        newly = sorted(arrivals)

    state = np.array(state, dtype=np.int64)
    is_m = system.is_misinfo
    m_active = np.array([s >= 0 and is_m[s] for s in state], dtype=bool)
    return DiffusionOutcome(state, np.array(time, dtype=float), m_active)


def evaluate_on_live_graph(lg: LiveEdgeGraph, system, profile, star_seeds) -> DiffusionOutcome:
    """Compiled layered evaluation of the exact process on one live graph (any priorities)."""
    g = lg.graph
    star_seeds = set(int(v) for v in star_seeds)
    _check_inputs(g, system, profile, star_seeds)
    init = initial_state(system, profile, star_seeds, g.node_count)
    state, dist = _kernels.propagate(g.node_count, g.out_ptr, g.dst, lg.kept, init, profile.rank)
    is_m = system.is_misinfo
    m_active = (state >= 0) & is_m[np.maximum(state, 0)]
    return DiffusionOutcome(state, np.where(dist < 0, np.inf, dist).astype(float), m_active)


def seed_arrays(system: CascadeSystem, star_seeds):
    """Flattened per-cascade seed lists for the distance kernels."""
    lists = [sorted(s) for s in system.seed_lists(star_seeds)]
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(s) for s in lists])
    nodes = np.array([v for s in lists for v in s], dtype=np.int64)
    return ptr, nodes


def check_profile_class(profile: PriorityProfile, system: CascadeSystem, profile_class: str):
    if profile_class not in PROFILE_CLASSES:
        raise ValidationError(f"unknown profile class {profile_class!r}; expected one of {PROFILE_CLASSES}")
    if profile_class not in profile.classes(system):
        raise ValidationError(f"priority profile is not {profile_class}")


def evaluate_on_live_graph_fast(
    lg: LiveEdgeGraph,
    system: CascadeSystem,
    profile_class: str,
    profile: PriorityProfile,
    star_seeds: Iterable[int],
) -> DiffusionOutcome:
    """Decide each node's side from multi-source hop distances, without stepping.

    M-dominant: a node ends positive-or-inactive iff the positive seeds are
    strictly closer than the misinformation seeds. P-dominant: ties go to the
    positive side. Homogeneous: the highest-ranked cascade among those with a
    seed at the minimum distance wins. Only the homogeneous class yields
    per-node cascade ids; the other two return ``state=None``.
    """
    g = lg.graph
    star_seeds = set(int(v) for v in star_seeds)
    _check_inputs(g, system, profile, star_seeds)
    check_profile_class(profile, system, profile_class)
    sp, sn = seed_arrays(system, star_seeds)
    grank = profile.rank[0] if g.node_count else np.arange(1, system.n_cascades + 1)
    m_active, dmin = _kernels.fast_is_m(
        g.node_count, g.out_ptr, g.dst, lg.kept, sp, sn, system.is_misinfo, grank, _MODE[profile_class]
    )
    time = np.where(dmin < 0, np.inf, dmin).astype(float)
    state = None
    if profile_class == "homogeneous":
        state = _homogeneous_state(g, lg, system, grank, star_seeds, dmin)
    return DiffusionOutcome(state, time, m_active)


def _homogeneous_state(g, lg, system, grank, star_seeds, dmin):
    # winner per node: highest global rank among cascades whose own BFS distance equals dmin
    n = g.node_count
    state = np.full(n, -1, dtype=np.int64)
    for c, seeds in enumerate(system.seed_lists(star_seeds)):
        if not seeds:
            continue
        dc = _single_bfs(g, lg, seeds)
        hit = (dc >= 0) & (dc == dmin)
        better = hit & ((state < 0) | (grank[c] > grank[np.maximum(state, 0)]))
        state[better] = c
    return state


def _single_bfs(g, lg, sources) -> np.ndarray:
    dist = np.empty(g.node_count, dtype=np.int64)
    queue = np.empty(g.node_count, dtype=np.int64)
    _kernels._bfs(g.node_count, g.out_ptr, g.dst, lg.kept, True, np.array(sorted(sources), dtype=np.int64), dist, queue)
    return dist
