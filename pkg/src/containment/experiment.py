"""Budget sweeps comparing the sandwich method against greedy variants and baselines."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from containment import _kernels
from containment.cascades import (
    CascadeSystem,
    induce_lower_priority,
    induce_upper_priority,
    make_priority_profile,
)
from containment.errors import ParseError, ValidationError
from containment.estimation import Estimate, LiveGraphEnsemble, sample_masks, summarize_counts
from containment.diffusion import initial_state
from containment.graph import (
    DirectedGraph,
    assign_probabilities,
    erdos_renyi,
    load_edge_list,
    parse_probability_mode,
    preferential_attachment,
)
from containment.solvers import (
    SpreadObjective,
    baseline_high_weight,
    baseline_proximity,
    greedy,
    random_subsets,
    select_sandwich,
)

log = logging.getLogger(__name__)

METHODS = ("sandwich", "greedy_f", "greedy_upper", "greedy_lower", "high_weight", "proximity", "random")
COLUMNS = (
    "method", "budget", "f_m_mean", "f_m_stderr", "f_notm_mean", "f_notm_stderr",
    "bound_ratio", "wall_ms", "rng_seed",
)
# stream tags keep the optimisation, evaluation and seeding draws apart
_OPT, _EVAL, _RANDOM_EVAL, _INFLUENCE, _RANDOM_PICK = (), (1,), (2,), (3,), 4


@dataclass
class CascadeLayout:
    misinfo: int = 1
    positive: int = 1
    seed_size: int = 20
    seeding: str = "influence"
    influence_replications: int = 1000

    def __post_init__(self):
        if self.misinfo < 0 or self.positive < 0:
            raise ValidationError("cascade counts must be non-negative")
        if self.seed_size < 1:
            raise ValidationError("seed size must be >= 1")
        if self.seeding not in ("influence", "random"):
            raise ValidationError(f"unknown seeding rule {self.seeding!r}")


@dataclass
class ExperimentConfig:
    graph: dict = field(default_factory=lambda: {"generator": "preferential_attachment", "n": 2000, "m": 3, "seed": 1})
    probability_mode: str = "uniform:0.1"
    cascades: CascadeLayout = field(default_factory=CascadeLayout)
    priority: dict = field(default_factory=lambda: {"mode": "random", "seed": 0})
    budgets: list = field(default_factory=lambda: list(range(1, 11)))
    candidates: object = "exclude_seeds"
    r_opt: int = 5000
    r_eval: int = 10000
    base_seed: int = 0
    methods: list = field(default_factory=lambda: list(METHODS))
    random_trials: int = 1000
    random_eval_replications: Optional[int] = None
    csv_path: Optional[str] = None
    json_path: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.cascades, dict):
            self.cascades = CascadeLayout(**self.cascades)
        b = list(self.budgets)
        if not b or any(x < 1 for x in b) or any(y <= x for x, y in zip(b, b[1:])):
            raise ValidationError(f"budgets must be strictly increasing positive integers, got {b}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValidationError(f"unknown methods {sorted(bad)}")
        if self.r_opt < 1 or self.r_eval < 1 or self.random_trials < 1:
            raise ValidationError("replication and trial counts must be >= 1")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("csv_path"), d.pop("json_path")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    @property
    def random_eval_r(self) -> int:
        return self.random_eval_replications or max(1, self.r_eval // 10)


@dataclass
class ExperimentReport:
    rows: list
    metadata: dict

    def to_json(self) -> str:
        return json.dumps({"columns": list(COLUMNS), "rows": self.rows, "metadata": self.metadata}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = json.loads(text)
        return cls(d["rows"], d["metadata"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow(["" if row[c] is None else row[c] for c in COLUMNS])
        return buf.getvalue()

    def row(self, method: str, budget: int) -> dict:
        for r in self.rows:
            if r["method"] == method and r["budget"] == budget:
                return r
        raise KeyError((method, budget))


def emit_report(report: ExperimentReport, fmt: str, path) -> Path:
    """Write the report as ``csv`` or ``json``; columns are always in ``COLUMNS`` order."""
    if fmt == "csv":
        text = report.to_csv()
    elif fmt == "json":
        text = report.to_json()
    else:
        raise ValidationError(f"unknown report format {fmt!r}")
    path = Path(path)
    path.write_text(text)
    return path


def build_graph(spec: dict, probability_mode: str) -> DirectedGraph:
    spec = dict(spec)
    if "path" in spec:
        g = load_edge_list(spec["path"], spec.get("directed", True), spec.get("third_column", "activity"))
    else:
        gen = spec.pop("generator", "preferential_attachment")
        if gen in ("preferential_attachment", "pa", "ba"):
            g = preferential_attachment(spec["n"], spec.get("m", 3), spec.get("seed", 0))
        elif gen in ("erdos_renyi", "er", "gnm"):
            g = erdos_renyi(spec["n"], spec["m"], spec.get("seed", 0))
        else:
            raise ValidationError(f"unknown graph generator {gen!r}")
    return assign_probabilities(g, parse_probability_mode(probability_mode))


def single_node_influence(g: DirectedGraph, replications: int, base_seed: int) -> np.ndarray:
    """Expected number of nodes reached by a lone cascade started at each node."""
    ens = LiveGraphEnsemble.monte_carlo(g, replications, base_seed, _INFLUENCE)
    optr, odst, _, _ = ens.csr
    return _kernels.reach_totals(g.node_count, optr, odst) / replications


def seed_existing_cascades(g: DirectedGraph, layout: CascadeLayout, rng=0) -> CascadeSystem:
    """Give each existing cascade a disjoint block of ``seed_size`` nodes.

    With the ``influence`` rule nodes are ranked by single-node influence
    (ties by id); misinformation cascades take the first blocks, positive
    cascades the next ones.
    """
    total = (layout.misinfo + layout.positive) * layout.seed_size
    if total > g.node_count:
        raise ValidationError(f"{total} seed nodes requested but the graph has {g.node_count} nodes")
    if layout.seeding == "influence":
        base_seed = rng if isinstance(rng, (int, np.integer)) else 0
        infl = single_node_influence(g, layout.influence_replications, int(base_seed))
        order = sorted(range(g.node_count), key=lambda v: (-infl[v], v))
    else:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        order = gen.permutation(g.node_count).tolist()
    blocks = [order[i * layout.seed_size : (i + 1) * layout.seed_size] for i in range(layout.misinfo + layout.positive)]
    return CascadeSystem.build(blocks[: layout.misinfo], blocks[layout.misinfo :])


def candidate_set(cfg: ExperimentConfig, g: DirectedGraph, system: CascadeSystem) -> list:
    rule = cfg.candidates
    if rule == "all":
        return list(range(g.node_count))
    if rule == "exclude_seeds":
        taken = system.existing_seed_nodes()
        return [v for v in range(g.node_count) if v not in taken]
    if isinstance(rule, (list, tuple)):
        cands = sorted(set(int(v) for v in rule))
        if any(not 0 <= v < g.node_count for v in cands):
            raise ValidationError("explicit candidate outside the graph")
        return cands
    raise ValidationError(f"unknown candidate rule {rule!r}")


class _Evaluator:
    """Scores final seed sets on a fixed set of fresh live graphs."""

    def __init__(self, g, system, profile, masks):
        self.g, self.system, self.profile, self.masks = g, system, profile, masks

    def counts(self, seeds, profile=None):
        prof = profile or self.profile
        init = initial_state(self.system, prof, seeds, self.g.node_count)
        return _kernels.misinfo_counts(
            self.g.node_count, self.g.out_ptr, self.g.dst, self.masks, init, prof.rank, self.system.is_misinfo
        )


def _row(method, budget, est, ratio, wall, seed):
    return {
        "method": method,
        "budget": budget,
        "f_m_mean": est.mean_m_active,
        "f_m_stderr": est.std_error,
        "f_notm_mean": est.mean_not_m_active,
        "f_notm_stderr": est.std_error,
        "bound_ratio": ratio,
        "wall_ms": round(wall * 1000.0, 3),
        "rng_seed": seed,
        "seeds": None,
    }


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    g = build_graph(cfg.graph, cfg.probability_mode)
    system = seed_existing_cascades(g, cfg.cascades, cfg.base_seed)
    pr = cfg.priority
    profile = make_priority_profile(
        pr.get("mode", "random"), system, g.node_count, perm=pr.get("perm"), seed=pr.get("seed", 0), table=pr.get("table")
    )
    upper_prof = induce_upper_priority(profile, system)
    lower_prof = induce_lower_priority(profile, system)
    cands = candidate_set(cfg, g, system)
    kmax = max(cfg.budgets)
    n = g.node_count
    log.info("graph: %d nodes, %d edges; %d candidates", n, g.edge_count, len(cands))

    opt = LiveGraphEnsemble.monte_carlo(g, cfg.r_opt, cfg.base_seed, _OPT)
    f = SpreadObjective(opt, system, profile)
    f_up = SpreadObjective(opt, system, upper_prof)
    f_lo = SpreadObjective(opt, system, lower_prof)
    evaluator = _Evaluator(g, system, profile, sample_masks(g, cfg.base_seed, cfg.r_eval, 0, _EVAL))

    needs = {
        "plain": {"sandwich", "greedy_f"},
        "upper": {"sandwich", "greedy_upper"},
        "lower": {"sandwich", "greedy_lower"},
    }
    objectives = {"plain": f, "upper": f_up, "lower": f_lo}
    runs, run_time = {}, {}
    for name, users in needs.items():
        if users & set(cfg.methods):
            t0 = time.perf_counter()
            runs[name] = greedy(objectives[name], cands, kmax)
            run_time[name] = time.perf_counter() - t0
            log.info("greedy on %s: %.1fs, order %s", name, run_time[name], [s.node for s in runs[name].trace])
    share = {k: v / len(cfg.budgets) for k, v in run_time.items()}

    rows = []
    chosen = {}
    random_masks = None
    for b in cfg.budgets:
        for method in METHODS:
            if method not in cfg.methods:
                continue
            t0 = time.perf_counter()
            ratio = None
            if method == "random":
                if random_masks is None:
                    random_masks = sample_masks(g, cfg.base_seed, cfg.random_eval_r, 0, _RANDOM_EVAL)
                draws = random_subsets(cands, b, [cfg.base_seed, _RANDOM_PICK, b], cfg.random_trials)
                rev = _Evaluator(g, system, profile, random_masks)
                means = np.array([rev.counts(d).mean() for d in draws])
                se = float(means.std(ddof=1) / math.sqrt(means.size)) if means.size > 1 else 0.0
                est = Estimate(float(n - means.mean()), float(means.mean()), se, cfg.random_eval_r)
                seeds = draws[0]
                extra = 0.0
            else:
                if method == "sandwich":
                    res = select_sandwich(
                        f, f_up, runs["upper"].truncated(b), runs["lower"].truncated(b), runs["plain"].truncated(b)
                    )
                    extra = share["upper"] + share["lower"] + share["plain"]
                    up_seeds = res.components["upper"].seeds
                    num = evaluator.counts(up_seeds)
                    den = evaluator.counts(up_seeds, upper_prof)
                    ratio = float((n - num.mean()) / (n - den.mean()))
                elif method.startswith("greedy_"):
                    key = {"greedy_f": "plain", "greedy_upper": "upper", "greedy_lower": "lower"}[method]
                    res = runs[key].truncated(b)
                    extra = share[key]
                elif method == "high_weight":
                    res = baseline_high_weight(g, cands, b)
                    extra = 0.0
                else:
                    res = baseline_proximity(g, system, cands, b)
                    extra = 0.0
                seeds = res.seeds
                est = summarize_counts(evaluator.counts(seeds), n)
            row = _row(method, b, est, ratio, time.perf_counter() - t0 + extra, cfg.base_seed)
            row["seeds"] = " ".join(map(str, seeds))
            rows.append(row)
            chosen[(method, b)] = list(seeds)
            log.info("%-12s k=%-3d f_notM=%.2f", method, b, est.mean_not_m_active)

    rows.sort(key=lambda r: (METHODS.index(r["method"]), r["budget"]))
    meta = {
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
        "node_count": n,
        "edge_count": g.edge_count,
        "cascade_groups": list(system.groups),
        "cascade_seeds": [sorted(s) for s in system.seeds],
        "star_id": system.star_id,
        "candidate_count": len(cands),
        "r_opt": cfg.r_opt,
        "r_eval": cfg.r_eval,
        "random_trials": cfg.random_trials,
        "random_eval_replications": cfg.random_eval_r,
        "random_stderr": "std of per-draw means / sqrt(trials)",
        "rng_streams": {"opt": [cfg.base_seed, "r"], "eval": [cfg.base_seed, "r", 1], "random_eval": [cfg.base_seed, "r", 2]},
    }
    report = ExperimentReport([{k: r[k] for k in COLUMNS} for r in rows], meta)
    report.metadata["seeds"] = {f"{m}@{b}": s for (m, b), s in sorted(chosen.items())}
    if cfg.csv_path:
        emit_report(report, "csv", cfg.csv_path)
    if cfg.json_path:
        emit_report(report, "json", cfg.json_path)
    return report
