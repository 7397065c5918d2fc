"""Command-line entry point: ``containment <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from containment.cascades import CascadeSystem, make_priority_profile
from containment.diffusion import simulate
from containment.errors import ContainmentError, ParseError, ValidationError
from containment.estimation import EVALUATORS, EstimatorConfig, LiveGraphEnsemble, estimate, exact_f
from containment.experiment import ExperimentConfig, build_graph, emit_report, run_experiment
from containment.hardness import build_reduction, load_pspc, pspc_cost, verify_reduction_identity
from containment.cascades import induce_lower_priority, induce_upper_priority
from containment.solvers import (
    SpreadObjective,
    baseline_high_weight,
    baseline_proximity,
    baseline_random,
    brute_force_opt,
    greedy,
    sandwich,
)

IO_EXIT = 6
SOLVE_METHODS = ("sandwich", "greedy_f", "greedy_upper", "greedy_lower", "high_weight", "proximity", "random", "brute_force")


def _node_list(text):
    if text is None or text.strip() == "":
        return []
    try:
        return sorted({int(t) for t in text.replace(",", " ").split()})
    except ValueError:
        raise ParseError(f"bad node list {text!r}") from None


def load_cascade_spec(path) -> CascadeSystem:
    """JSON: ``{"cascades": [{"id": 0, "group": "M", "seeds": [..]}, ...], "star_id": k}``."""
    try:
        data = json.loads(Path(path).read_text())
        cascades = sorted(data["cascades"], key=lambda c: c["id"])
        star = int(data["star_id"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: bad cascade spec ({exc})") from None
    if [c["id"] for c in cascades] != list(range(len(cascades))):
        raise ValidationError("cascade ids must be 0..n-1")
    groups = tuple(c["group"] for c in cascades)
    seeds = tuple(frozenset() if c["id"] == star else frozenset(c.get("seeds", [])) for c in cascades)
    return CascadeSystem(groups, seeds, star)


def load_priority(args, system, node_count):
    if args.priority_file:
        try:
            spec = json.loads(Path(args.priority_file).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.priority_file}: {exc}") from None
    else:
        spec = {"mode": args.priority, "seed": args.priority_seed}
    return make_priority_profile(
        spec.get("mode", "random"), system, node_count,
        perm=spec.get("perm"), seed=spec.get("seed", 0), table=spec.get("table"),
    )


def _graph_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--generate", help="synthetic graph, e.g. pa:2000:3:SEED or er:N:M:SEED")
    p.add_argument("--undirected", action="store_true", help="expand each line into two arcs")
    p.add_argument("--third-column", choices=("activity", "prob"), default="activity")
    p.add_argument("--prob-mode", default="uniform:0.1", help="uniform:P | wc | activity:PMAX:PBASE | file")
    p.add_argument("--cascades", required=True, help="cascade spec JSON")
    p.add_argument("--priority", default="random", help="homogeneous | m_dominant | p_dominant | random")
    p.add_argument("--priority-seed", type=int, default=0)
    p.add_argument("--priority-file", help="priority spec JSON (mode, perm, table, seed)")


def _instance(args):
    if args.graph:
        spec = {"path": args.graph, "directed": not args.undirected, "third_column": args.third_column}
    else:
        parts = args.generate.split(":")
        try:
            kind = parts[0]
            nums = [int(x) for x in parts[1:]]
        except ValueError:
            raise ParseError(f"bad generator spec {args.generate!r}") from None
        if kind in ("pa", "ba"):
            spec = {"generator": "pa", "n": nums[0], "m": nums[1] if len(nums) > 1 else 3, "seed": nums[2] if len(nums) > 2 else 0}
        elif kind in ("er", "gnm"):
            spec = {"generator": "er", "n": nums[0], "m": nums[1], "seed": nums[2] if len(nums) > 2 else 0}
        else:
            raise ParseError(f"unknown generator {kind!r}")
    g = build_graph(spec, args.prob_mode)
    system = load_cascade_spec(args.cascades)
    system.check_nodes(g.node_count)
    profile = load_priority(args, system, g.node_count)
    return g, system, profile


def _emit(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_simulate(args):
    g, system, profile = _instance(args)
    star = _node_list(args.star_seeds)
    res = simulate(g, system, profile, star, args.seed)
    times = [None if np.isinf(t) else int(t) for t in res.activation_time]
    _emit(
        {
            "state": [None if s < 0 else int(s) for s in res.state],
            "activation_time": times,
            "m_active_count": res.m_active_count,
            "not_m_active_count": res.not_m_active_count,
        },
        args.out,
    )


def cmd_estimate(args):
    g, system, profile = _instance(args)
    star = _node_list(args.star_seeds)
    if args.exact:
        f_m, f_not = exact_f(g, system, profile, star)
        _emit({"f_m": f_m, "f_not_m": f_not, "exact": True}, args.out)
        return
    cfg = EstimatorConfig(args.replications, args.base_seed, not args.no_crn, args.evaluator)
    est = estimate(g, system, profile, star, cfg)
    _emit(
        {
            "f_m": est.mean_m_active,
            "f_not_m": est.mean_not_m_active,
            "std_error": est.std_error,
            "replications": est.replications,
        },
        args.out,
    )


def cmd_solve(args):
    g, system, profile = _instance(args)
    if args.candidates:
        cands = _node_list(args.candidates)
    elif args.include_seeds:
        cands = list(range(g.node_count))
    else:
        taken = system.existing_seed_nodes()
        cands = [v for v in range(g.node_count) if v not in taken]
    if args.exact:
        ens = LiveGraphEnsemble.exhaustive(g)
    else:
        ens = LiveGraphEnsemble.monte_carlo(g, args.replications, args.base_seed)
    f = SpreadObjective(ens, system, profile)
    f_up = SpreadObjective(ens, system, induce_upper_priority(profile, system))
    f_lo = SpreadObjective(ens, system, induce_lower_priority(profile, system))
    k, m = args.budget, args.method
    if m == "sandwich":
        res = sandwich(f, f_up, f_lo, cands, k)
    elif m == "greedy_f":
        res = greedy(f, cands, k)
    elif m == "greedy_upper":
        res = greedy(f_up, cands, k)
    elif m == "greedy_lower":
        res = greedy(f_lo, cands, k)
    elif m == "high_weight":
        res = baseline_high_weight(g, cands, k, f)
    elif m == "proximity":
        res = baseline_proximity(g, system, cands, k, f)
    elif m == "random":
        res = baseline_random(g, cands, k, args.base_seed, args.trials, f)
    else:
        res = brute_force_opt(f, cands, k)
    _emit(
        {
            "method": m,
            "budget": k,
            "seeds": list(res.seeds),
            "f_not_m": res.objective_value,
            "f_m": g.node_count - res.objective_value,
            "bound_ratio": res.bound_ratio,
            "trace": [{"node": s.node, "gain": s.gain, "value": s.value} for s in res.trace],
        },
        args.out,
    )


def cmd_experiment(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.csv:
        cfg.csv_path = args.csv
    if args.json:
        cfg.json_path = args.json
    report = run_experiment(cfg)
    if not cfg.csv_path and not cfg.json_path:
        sys.stdout.write(report.to_csv())
    ratios = [r["bound_ratio"] for r in report.rows if r["bound_ratio"] is not None]
    if ratios:
        logging.getLogger("containment").info("bound ratio range: %.6f .. %.6f", min(ratios), max(ratios))


def cmd_reduce(args):
    inst = load_pspc(args.instance)
    red = build_reduction(inst)
    out = {
        "node_count": red.graph.node_count,
        "edges": [[int(u), int(v)] for u, v, _ in red.graph.edges()],
        "node_roles": {str(k): v for k, v in red.node_roles.items()},
        "candidate_set": list(red.candidate_set),
        "budget": red.budget,
    }
    if args.all:
        checks = []
        m = len(inst.Phi)
        for mask in range(1 << m):
            sel = [i for i in range(m) if mask >> i & 1]
            lhs, rhs, ok = verify_reduction_identity(inst, sel)
            checks.append({"selection": [i + 1 for i in sel], "f_m": lhs, "three_plus_cost": rhs, "ok": ok})
        out["identity_checks"] = checks
        out["all_ok"] = all(c["ok"] for c in checks)
    else:
        sel = [i - 1 for i in _node_list(args.selection)]
        lhs, rhs, ok = verify_reduction_identity(inst, sel)
        out["identity_check"] = {"selection": [i + 1 for i in sel], "f_m": lhs, "three_plus_cost": rhs, "ok": ok}
        out["all_ok"] = ok
    _emit(out, args.out)
    return 0 if out["all_ok"] else 1


def cmd_verify(args):
    from containment import checks

    results = checks.run_suite(quick=not args.full, seed=args.seed)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="containment", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one diffusion run")
    _graph_args(p)
    p.add_argument("--star-seeds", default="")
    p.add_argument("--seed", type=int, default=0, help="rng seed for the edge coins")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="expected spread for a seed set")
    _graph_args(p)
    p.add_argument("--star-seeds", default="")
    p.add_argument("--replications", "-R", type=int, default=10000)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--no-crn", action="store_true")
    p.add_argument("--evaluator", choices=EVALUATORS, default="auto")
    p.add_argument("--exact", action="store_true", help="enumerate live graphs instead of sampling")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("solve", help="one method, one budget")
    _graph_args(p)
    p.add_argument("--method", choices=SOLVE_METHODS, default="sandwich")
    p.add_argument("--budget", "-k", type=int, required=True)
    p.add_argument("--candidates")
    p.add_argument("--include-seeds", action="store_true", help="allow existing seed nodes as candidates")
    p.add_argument("--replications", "-R", type=int, default=5000)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="budget sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("reduce", help="set-cover instance to seed-selection instance, with identity check")
    p.add_argument("--instance", required=True)
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--selection", default="", help="1-based subset indices")
    sel.add_argument("--all", action="store_true", help="check every selection")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--full", action="store_true", help="full-size suites (minutes)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        rc = args.func(args)
    except ContainmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_EXIT
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
