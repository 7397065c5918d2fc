"""Seed selection for the new positive cascade."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from containment import _kernels
from containment.cascades import CascadeSystem, PriorityProfile
from containment.diffusion import initial_state
from containment.errors import CapacityError, ValidationError
from containment.estimation import LiveGraphEnsemble
from containment.graph import DirectedGraph

BRUTE_FORCE_LIMIT = 1_000_000
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class TraceStep:
    node: int
    gain: float
    value: float


@dataclass
class SolveResult:
    seeds: tuple
    objective_value: float
    trace: list = field(default_factory=list)
    bound_ratio: Optional[float] = None
    # greedy: value of every prefix U_0..U_k; sandwich: the three component runs
    prefix_values: list = field(default_factory=list)
    components: dict = field(default_factory=dict)
    draws: list = field(default_factory=list)

    def truncated(self, budget: int) -> "SolveResult":
        """Greedy result for a smaller budget, read off this run's prefixes."""
        if not self.prefix_values:
            raise ValueError("only greedy results carry prefixes")
        vals = self.prefix_values[: budget + 1]
        best = _argmax_first(vals)
        order = [s.node for s in self.trace]
        return SolveResult(
            tuple(sorted(order[:best])), vals[best], self.trace[:budget], None, list(vals)
        )


class SpreadObjective:
    """Expected number of nodes not misinformation-active, over a live-graph ensemble.

    Values are cached per seed set. ``marginal_gains`` scores every candidate
    on the same live graphs by recomputing only the part of each graph whose
    outcome the new seed can change.
    """

    def __init__(self, ensemble: LiveGraphEnsemble, system: CascadeSystem, profile: PriorityProfile):
        g = ensemble.graph
        if profile.rank.shape != (g.node_count, system.n_cascades):
            raise ValidationError("priority table does not match graph and cascades")
        self.ensemble = ensemble
        self.system = system
        self.profile = profile
        self._cache: dict = {}
        self._base_key = None
        self._base = None

    @property
    def graph(self) -> DirectedGraph:
        return self.ensemble.graph

    def __call__(self, seeds: Iterable[int]) -> float:
        key = frozenset(int(v) for v in seeds)
        if key not in self._cache:
            self._cache[key] = self.ensemble.mean_not_m(self.system, self.profile, sorted(key))
        return self._cache[key]

    def _base_states(self, key):
        if self._base_key != key:
            g = self.graph
            optr, odst, _, _ = self.ensemble.csr
            init = initial_state(self.system, self.profile, key, g.node_count)
            self._base = _kernels.propagate_csr_batch(g.node_count, optr, odst, init, self.profile.rank)
            self._base_key = key
        return self._base

    def marginal_gains(self, current: Iterable[int], candidates: Iterable[int]) -> np.ndarray:
        key = frozenset(int(v) for v in current)
        cands = np.array(sorted(candidates), dtype=np.int64)
        if cands.size and (cands.min() < 0 or cands.max() >= self.graph.node_count):
            raise ValidationError("candidate outside the graph")
        states, dists = self._base_states(key)
        optr, odst, iptr, isrc = self.ensemble.csr
        ens = self.ensemble
        weights = np.ones(len(ens)) if ens.uniform else ens.weights
        gains = _kernels.greedy_gains(
            self.graph.node_count, optr, odst, iptr, isrc, states, dists, weights, cands,
            self.system.star_id, self.profile.rank, self.system.is_misinfo,
        )
        return gains / len(ens) if ens.uniform else gains


def _argmax_first(values) -> int:
    """Index of the maximum; near-ties (relative 1e-9) resolve to the earliest index."""
    vals = np.asarray(values, dtype=float)
    top = vals.max()
    tol = _TIE_TOL * max(1.0, abs(top))
    return int(np.flatnonzero(vals >= top - tol)[0])


def greedy(h: Callable, candidates: Iterable[int], k: int) -> SolveResult:
    """Add the best marginal-gain candidate k times and return the best prefix.

    ``h`` maps a frozenset of nodes to a value. If it also provides
    ``marginal_gains(current, candidates)`` that is used for the argmax.
    The empty prefix is eligible, so the result never scores below ``h(∅)``.
    """
    cands = sorted(set(int(c) for c in candidates))
    chosen: list = []
    values = [h(frozenset())]
    trace = []
    for _ in range(k):
        rest = [c for c in cands if c not in chosen]
        if not rest:
            break
        current = frozenset(chosen)
        if hasattr(h, "marginal_gains"):
            gains = np.asarray(h.marginal_gains(current, rest), dtype=float)
        else:
            base = values[-1]
            gains = np.array([h(current | {c}) - base for c in rest], dtype=float)
        i = _argmax_first(gains)
        chosen.append(rest[i])
        values.append(h(frozenset(chosen)))
        trace.append(TraceStep(rest[i], float(gains[i]), values[-1]))
    best = _argmax_first(values)
    return SolveResult(tuple(sorted(chosen[:best])), values[best], trace, None, values)


def select_sandwich(f: Callable, f_upper: Callable, upper: SolveResult, lower: SolveResult, plain: SolveResult):
    """Pick the best of three greedy answers under ``f`` and attach the data-dependent ratio."""
    runs = {"upper": upper, "lower": lower, "plain": plain}
    scored = [(name, r.seeds, f(frozenset(r.seeds))) for name, r in runs.items()]
    best = _argmax_first([s[2] for s in scored])
    name, seeds, value = scored[best]
    up_f = f(frozenset(upper.seeds))
    up_bound = f_upper(frozenset(upper.seeds))
    ratio = up_f / up_bound if up_bound > 0 else float("nan")
    res = SolveResult(tuple(seeds), value, list(runs[name].trace), ratio)
    res.components = dict(runs, chosen=name)
    return res


def sandwich(f: Callable, f_upper: Callable, f_lower: Callable, candidates: Iterable[int], k: int) -> SolveResult:
    """Greedy on the upper bound, the lower bound and ``f``; keep whichever scores best on ``f``."""
    cands = list(candidates)
    upper = greedy(f_upper, cands, k)
    lower = greedy(f_lower, cands, k)
    plain = greedy(f, cands, k)
    return select_sandwich(f, f_upper, upper, lower, plain)


def _ranked_by_weight(g: DirectedGraph, nodes) -> list:
    w = g.node_weights()
    return sorted(nodes, key=lambda v: (-w[v], v))


def _score(h, seeds):
    return float(h(frozenset(seeds))) if h is not None else math.nan


def baseline_high_weight(g: DirectedGraph, candidates: Iterable[int], k: int, h: Callable = None) -> SolveResult:
    """Top-k candidates by total out-edge probability, ties by smallest id."""
    seeds = _ranked_by_weight(g, set(int(c) for c in candidates))[:k]
    return SolveResult(tuple(sorted(seeds)), _score(h, seeds))


def baseline_proximity(
    g: DirectedGraph, system: CascadeSystem, candidates: Iterable[int], k: int, h: Callable = None
) -> SolveResult:
    """Heaviest out-neighbours of misinformation seeds, topped up by overall weight."""
    cands = set(int(c) for c in candidates)
    existing = system.existing_seed_nodes()
    pool = set()
    for u in system.misinfo_seed_nodes():
        pool.update(int(v) for v in g.out_neighbors(u))
    pool = (pool & cands) - existing
    seeds = _ranked_by_weight(g, pool)[:k]
    if len(seeds) < k:
        taken = set(seeds)
        seeds += [v for v in _ranked_by_weight(g, cands) if v not in taken][: k - len(seeds)]
    return SolveResult(tuple(sorted(seeds)), _score(h, seeds))


def random_subsets(candidates: Iterable[int], k: int, rng, trials: int = 1) -> list:
    cands = np.array(sorted(set(int(c) for c in candidates)), dtype=np.int64)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    k = min(k, cands.size)
    return [tuple(sorted(rng.choice(cands, size=k, replace=False).tolist())) for _ in range(trials)]


def baseline_random(
    g: DirectedGraph, candidates: Iterable[int], k: int, rng=0, trials: int = 1, h: Callable = None
) -> SolveResult:
    """A uniform k-subset; with ``h`` the value is the mean of ``h`` over ``trials`` draws."""
    draws = random_subsets(candidates, k, rng, trials)
    value = float(np.mean([h(frozenset(d)) for d in draws])) if h is not None else math.nan
    return SolveResult(draws[0], value, draws=draws)


def brute_force_opt(h: Callable, candidates: Iterable[int], k: int) -> SolveResult:
    """Best subset of size at most k by exhaustive search; ties go to the first found."""
    cands = sorted(set(int(c) for c in candidates))
    k = min(k, len(cands))
    total = sum(math.comb(len(cands), i) for i in range(k + 1))
    if total > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"{total} subsets exceed the brute-force limit of {BRUTE_FORCE_LIMIT}")
    best, best_val = (), h(frozenset())
    for size in range(1, k + 1):
        for combo in itertools.combinations(cands, size):
            val = h(frozenset(combo))
            if val > best_val + _TIE_TOL * max(1.0, abs(best_val)):
                best, best_val = combo, val
    return SolveResult(tuple(best), best_val)
