"""Property suites over small enumerable instances.

Each check returns a ``CheckResult``; ``run_suite`` runs them all and backs
the ``verify`` subcommand. Sizes default to the full acceptance settings and
``quick=True`` shrinks them for a fast smoke pass.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from containment.cascades import (
    CascadeSystem,
    PriorityProfile,
    induce_lower_priority,
    induce_upper_priority,
    random_node_ranks,
)
from containment.diffusion import LiveEdgeGraph, evaluate_on_live_graph_fast, simulate
from containment.estimation import EstimatorConfig, LiveGraphEnsemble, estimate, exact_f
from containment.graph import DirectedGraph
from containment.hardness import PspcInstance, verify_reduction_identity
from containment.instances import non_submodular_witness, three_cascade_trace
from containment.solvers import SpreadObjective, brute_force_opt, greedy, sandwich

TOL = 1e-9
GREEDY_FACTOR = 1.0 - 1.0 / math.e


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# instance generation


@dataclass
class SmallInstance:
    graph: DirectedGraph
    system: CascadeSystem
    candidates: tuple


def random_graph(rng, n: int, n_edges: int, probs=(0.3, 0.7, 1.0)) -> DirectedGraph:
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    idx = rng.choice(len(pairs), size=min(n_edges, len(pairs)), replace=False)
    edges = [pairs[i] for i in sorted(idx)]
    p = rng.choice(np.asarray(probs, dtype=float), size=len(edges))
    return DirectedGraph(n, [e[0] for e in edges], [e[1] for e in edges], p)


def random_small_instance(rng, max_nodes=10, max_edges=14, probs=(0.3, 0.7, 1.0), n_candidates=6) -> SmallInstance:
    """Up to three existing cascades (at least one misinformation) with one or two seeds each."""
    n_m = int(rng.integers(1, 3))
    n_p = int(rng.integers(0, 3 - n_m + 1))
    sizes = rng.integers(1, 3, size=n_m + n_p)
    need = min(n_candidates, max_nodes - n_m - n_p)
    while int(sizes.sum()) + need > max_nodes:
        sizes[np.argmax(sizes)] -= 1
    n = int(rng.integers(int(sizes.sum()) + need, max_nodes + 1))
    n_edges = int(rng.integers(max(1, n - 2), max_edges + 1))
    g = random_graph(rng, n, n_edges, probs)
    order = rng.permutation(n).tolist()
    blocks, pos = [], 0
    for s in sizes:
        blocks.append(order[pos : pos + int(s)])
        pos += int(s)
    system = CascadeSystem.build(blocks[:n_m], blocks[n_m:])
    rest = sorted(order[pos:])
    cands = tuple(sorted(rng.choice(rest, size=min(n_candidates, len(rest)), replace=False).tolist()))
    return SmallInstance(g, system, cands)


def class_profile(kind: str, system: CascadeSystem, n: int, rng) -> PriorityProfile:
    """A profile of the given class with per-node variation where the class allows it."""
    k = system.n_cascades
    if kind == "homogeneous":
        return PriorityProfile(np.tile(rng.permutation(k) + 1, (n, 1)))
    base = PriorityProfile(random_node_ranks(int(rng.integers(2**31)), n, k))
    if kind == "m_dominant":
        return induce_lower_priority(base, system)
    if kind == "p_dominant":
        return induce_upper_priority(base, system)
    return base


CLASSES = ("m_dominant", "p_dominant", "homogeneous")


def _all_subsets(items, max_size=None):
    items = list(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for r in range(top + 1):
        yield from (frozenset(c) for c in itertools.combinations(items, r))


# checks


@_timed
def check_three_cascade_trace() -> CheckResult:
    """Three-cascade trace: v4 takes cascade 0 at step 1, v6 ends with cascade 2; flipping v4 gives v6 cascade 1."""
    inst = three_cascade_trace()
    out = simulate(inst.graph, inst.system, inst.profile, inst.star_seeds, 0)
    flip = three_cascade_trace(flip_v4=True)
    out2 = simulate(flip.graph, flip.system, flip.profile, flip.star_seeds, 0)
    ok = (
        out.state[3] == 0
        and out.activation_time[3] == 1
        and out.state[5] == 2
        and out2.state[5] == 1
    )
    best = math.inf
    for _ in range(20):
        t0 = time.perf_counter()
        simulate(inst.graph, inst.system, inst.profile, inst.star_seeds, 0)
        best = min(best, time.perf_counter() - t0)
    ok = ok and best < 1e-3
    detail = (
        f"v4 cascade {out.state[3]} at t={out.activation_time[3]:g}, v6 cascade {out.state[5]}; "
        f"flipped v6 cascade {out2.state[5]}; best run {best * 1e6:.0f}us"
    )
    return CheckResult("three_cascade_trace", bool(ok), detail)


@_timed
def check_fast_evaluator_equivalence(n_graphs=200, max_edges=12, seed=0) -> CheckResult:
    """Distance-based evaluators against the step simulator on every live graph."""
    rng = np.random.default_rng([seed, 2])
    failures, live_total = [], 0
    for i in range(n_graphs):
        n = int(rng.integers(3, 9))
        n_edges = int(rng.integers(1, max_edges + 1))
        g = random_graph(rng, n, n_edges, (0.5,))
        order = rng.permutation(n).tolist()
        n_m = int(rng.integers(1, 3))
        n_p = int(rng.integers(0, 2))
        blocks = [[order[j]] for j in range(min(n, n_m + n_p))]
        system = CascadeSystem.build(blocks[:n_m], blocks[n_m:])
        free = order[len(blocks):]
        star = sorted(rng.choice(free, size=min(len(free), int(rng.integers(0, 3))), replace=False).tolist()) if free else []
        profiles = {kind: class_profile(kind, system, n, rng) for kind in CLASSES}
        for bits in range(1 << g.edge_count):
            kept = ((bits >> np.arange(g.edge_count)) & 1).astype(bool)
            lg = LiveEdgeGraph(g, kept)
            live_total += 1
            for kind, prof in profiles.items():
                ref = simulate(g, system, prof, star, lg)
                fast = evaluate_on_live_graph_fast(lg, system, kind, prof, star)
                same = np.array_equal(ref.m_active, fast.m_active)
                if kind == "homogeneous":
                    same = same and np.array_equal(ref.state, fast.state)
                if not same:
                    failures.append((i, bits, kind))
    detail = f"{n_graphs} graphs, {live_total} live graphs x 3 classes, {len(failures)} mismatches"
    return CheckResult("fast_evaluator_equivalence", not failures, detail, failures=failures[:10])


def _subset_values(inst: SmallInstance, profile: PriorityProfile, max_size=None) -> dict:
    ens = LiveGraphEnsemble.exhaustive(inst.graph)
    f = SpreadObjective(ens, inst.system, profile)
    return {s: f(s) for s in _all_subsets(inst.candidates, max_size)}


def monotone_submodular_violations(values: dict, candidates, tol=TOL) -> list:
    """Every (S, T, x) with S subset of T violating monotonicity or diminishing returns."""
    bad = []
    for t in values:
        for s in values:
            if not s <= t:
                continue
            if values[s] > values[t] + tol:
                bad.append(("monotone", sorted(s), sorted(t)))
            for x in candidates:
                if x in t:
                    continue
                gain_s = values[s | {x}] - values[s]
                gain_t = values[t | {x}] - values[t]
                if gain_t > gain_s + tol:
                    bad.append(("submodular", sorted(s), sorted(t), x))
    return bad


@_timed
def check_monotone_submodular(n_instances=200, seed=0) -> CheckResult:
    """Exact f is monotone and submodular under the three special priority classes."""
    rng = np.random.default_rng([seed, 3])
    failures, pairs = [], 0
    for i in range(n_instances):
        inst = random_small_instance(rng)
        for kind in CLASSES:
            prof = class_profile(kind, inst.system, inst.graph.node_count, rng)
            vals = _subset_values(inst, prof)
            pairs += 3 ** len(inst.candidates)
            for v in monotone_submodular_violations(vals, inst.candidates):
                failures.append((i, kind, v))
    detail = f"{n_instances} instances x 3 classes, {pairs} subset pairs, {len(failures)} violations"
    return CheckResult("monotone_submodular", not failures, detail, failures=failures[:10])


@_timed
def check_sandwich_bounds(n_instances=200, seed=0) -> CheckResult:
    """Upper-induced >= original >= lower-induced on every candidate subset of size <= 3."""
    rng = np.random.default_rng([seed, 4])
    failures, tested = [], 0
    for i in range(n_instances):
        inst = random_small_instance(rng)
        prof = class_profile("random", inst.system, inst.graph.node_count, rng)
        f = _subset_values(inst, prof, 3)
        up = _subset_values(inst, induce_upper_priority(prof, inst.system), 3)
        lo = _subset_values(inst, induce_lower_priority(prof, inst.system), 3)
        for s in f:
            tested += 1
            if not (up[s] >= f[s] - TOL and f[s] >= lo[s] - TOL):
                failures.append((i, sorted(s), up[s], f[s], lo[s]))
    detail = f"{n_instances} instances, {tested} subsets, {len(failures)} violations"
    return CheckResult("sandwich_bounds", not failures, detail, failures=failures[:10])


@_timed
def check_non_submodular_witness() -> CheckResult:
    inst = non_submodular_witness()
    f = {s: exact_f(inst.graph, inst.system, inst.profile, s)[1] for s in ((), (1,), (3,), (1, 3))}
    ok = (
        f[()] == 5
        and f[(1,)] == f[(3,)] == f[(1, 3)] == 4
        and f[(1,)] < f[()]
        and f[(1,)] + f[(3,)] < f[()] + f[(1, 3)]
    )
    detail = f"f(empty)={f[()]:g} f(v2)={f[(1,)]:g} f(v4)={f[(3,)]:g} f(v2,v4)={f[(1, 3)]:g}"
    return CheckResult("non_submodular_witness", bool(ok), detail)


def pspc_instances(max_x=3, max_y=2, max_phi=3):
    """Every instance up to the given sizes; Phi ranges over multisets of subsets of X and Y."""
    for nx_ in range(max_x + 1):
        for ny in range(max_y + 1):
            universe = [f"x{i}" for i in range(1, nx_ + 1)] + [f"y{j}" for j in range(1, ny + 1)]
            subsets = [frozenset(s) for s in _all_subsets(universe)]
            for m in range(max_phi + 1):
                for phi in itertools.combinations_with_replacement(range(len(subsets)), m):
                    yield PspcInstance(
                        frozenset(universe[:nx_]), frozenset(universe[nx_:]), tuple(subsets[j] for j in phi)
                    )


@_timed
def check_reduction_identity(max_x=3, max_y=2, max_phi=3) -> CheckResult:
    failures, n_inst, n_sel = [], 0, 0
    for inst in pspc_instances(max_x, max_y, max_phi):
        n_inst += 1
        for sel in _all_subsets(range(len(inst.Phi))):
            n_sel += 1
            lhs, rhs, ok = verify_reduction_identity(inst, sorted(sel))
            if not ok:
                failures.append((inst, sorted(sel), lhs, rhs))
    detail = f"{n_inst} instances, {n_sel} selections, {len(failures)} mismatches"
    return CheckResult("reduction_identity", not failures, detail, failures=failures[:10])


@_timed
def check_greedy_guarantee(n_instances=100, seed=0) -> CheckResult:
    """Greedy on exact f reaches (1 - 1/e) of the optimum; the sandwich certificate holds."""
    rng = np.random.default_rng([seed, 5])
    failures = []
    worst_ratio, worst_cert = math.inf, math.inf
    for i in range(n_instances):
        inst = random_small_instance(rng, n_candidates=10)
        n = inst.graph.node_count
        cands = [v for v in range(n) if v not in inst.system.existing_seed_nodes()]
        k = int(rng.integers(1, 4))
        ens = LiveGraphEnsemble.exhaustive(inst.graph)
        kind = CLASSES[i % 3]
        f = SpreadObjective(ens, inst.system, class_profile(kind, inst.system, n, rng))
        got = greedy(f, cands, k).objective_value
        opt = brute_force_opt(f, cands, k).objective_value
        worst_ratio = min(worst_ratio, got / opt if opt > 0 else 1.0)
        if got < GREEDY_FACTOR * opt - TOL:
            failures.append(("greedy", i, kind, got, opt))
        # certificate under unrestricted priorities
        prof = class_profile("random", inst.system, n, rng)
        fr = SpreadObjective(ens, inst.system, prof)
        fu = SpreadObjective(ens, inst.system, induce_upper_priority(prof, inst.system))
        fl = SpreadObjective(ens, inst.system, induce_lower_priority(prof, inst.system))
        res = sandwich(fr, fu, fl, cands, k)
        opt_r = brute_force_opt(fr, cands, k).objective_value
        bound = res.bound_ratio * GREEDY_FACTOR * opt_r
        worst_cert = min(worst_cert, res.objective_value - bound)
        if not (0 < res.bound_ratio <= 1 + TOL) or res.objective_value < bound - TOL:
            failures.append(("certificate", i, res.objective_value, res.bound_ratio, opt_r))
    detail = (
        f"{n_instances} instances, min greedy/opt {worst_ratio:.4f}, "
        f"min certificate slack {worst_cert:.4f}, {len(failures)} violations"
    )
    return CheckResult("greedy_guarantee", not failures, detail, failures=failures[:10])


def convergence_instance() -> SmallInstance:
    """Fixed six-node instance with a misinformation seed, a positive seed and one new seed."""
    edges = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (5, 4), (5, 2), (4, 1)]
    probs = [0.5, 0.3, 0.7, 0.5, 0.6, 0.4, 0.5, 0.3]
    g = DirectedGraph(6, [e[0] for e in edges], [e[1] for e in edges], probs)
    return SmallInstance(g, CascadeSystem.build([[0]], [[5]]), (2,))


@_timed
def check_estimator_convergence(runs=100, replications=10_000, seed=0) -> CheckResult:
    inst = convergence_instance()
    prof = PriorityProfile(random_node_ranks(seed, inst.graph.node_count, inst.system.n_cascades))
    exact_m, _ = exact_f(inst.graph, inst.system, prof, inst.candidates)
    inside = 0
    for r in range(runs):
        est = estimate(inst.graph, inst.system, prof, inst.candidates, EstimatorConfig(replications, base_seed=1000 * seed + r))
        inside += abs(est.mean_m_active - exact_m) <= 4 * est.std_error
    need = math.ceil(0.99 * runs)
    small = estimate(inst.graph, inst.system, prof, inst.candidates, EstimatorConfig(replications // 4, base_seed=seed))
    big = estimate(inst.graph, inst.system, prof, inst.candidates, EstimatorConfig(replications, base_seed=seed))
    ratio = big.std_error / small.std_error
    ok = inside >= need and 0.4 <= ratio <= 0.6
    detail = (
        f"exact f_M={exact_m:.4f}; {inside}/{runs} runs within 4 SE (need {need}); "
        f"SE({replications})/SE({replications // 4}) = {ratio:.3f}"
    )
    return CheckResult("estimator_convergence", bool(ok), detail)


def run_suite(quick: bool = True, seed: int = 0) -> list:
    if quick:
        return [
            check_three_cascade_trace(),
            check_fast_evaluator_equivalence(20, 10, seed),
            check_monotone_submodular(20, seed),
            check_sandwich_bounds(20, seed),
            check_non_submodular_witness(),
            check_reduction_identity(2, 1, 2),
            check_greedy_guarantee(20, seed),
            check_estimator_convergence(10, 10_000, seed),
        ]
    return [
        check_three_cascade_trace(),
        check_fast_evaluator_equivalence(200, 12, seed),
        check_monotone_submodular(200, seed),
        check_sandwich_bounds(200, seed),
        check_non_submodular_witness(),
        check_reduction_identity(3, 2, 3),
        check_greedy_guarantee(100, seed),
        check_estimator_convergence(100, 10_000, seed),
    ]
