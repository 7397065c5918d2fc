import csv
import io

import numpy as np
import pytest

from containment.cascades import CascadeSystem, make_priority_profile
from containment.errors import ValidationError
from containment.estimation import exact_f
from containment.experiment import (
    COLUMNS,
    CascadeLayout,
    ExperimentConfig,
    ExperimentReport,
    emit_report,
    run_experiment,
    seed_existing_cascades,
)
from containment.graph import DirectedGraph


def small_config(**kw):
    base = dict(
        graph={"generator": "er", "n": 40, "m": 120, "seed": 3},
        probability_mode="uniform:0.2",
        cascades={"misinfo": 1, "positive": 1, "seed_size": 2, "influence_replications": 100},
        budgets=[1, 2, 3],
        r_opt=100,
        r_eval=200,
        random_trials=20,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_empty_report_header_only():
    text = ExperimentReport([], {}).to_csv()
    assert text == ",".join(COLUMNS) + "\n"


def test_one_row_report(tmp_path):
    row = dict(zip(COLUMNS, ["greedy_f", 1, 2.0, 0.1, 8.0, 0.1, None, 1.5, 0]))
    path = emit_report(ExperimentReport([row], {}), "csv", tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].split(",")[0] == "greedy_f"


def test_json_round_trip(tmp_path):
    rep = run_experiment(small_config(methods=["sandwich", "random"], budgets=[1]))
    path = emit_report(rep, "json", tmp_path / "r.json")
    back = ExperimentReport.from_json(path.read_text())
    assert back.rows == rep.rows
    assert back.metadata == rep.metadata


def test_unknown_format(tmp_path):
    with pytest.raises(ValidationError):
        emit_report(ExperimentReport([], {}), "xml", tmp_path / "r")


def test_unwritable_path():
    with pytest.raises(OSError):
        emit_report(ExperimentReport([], {}), "csv", "/nonexistent-dir/r.csv")


def exact_reach(g):
    out = []
    for v in range(g.node_count):
        s = CascadeSystem.build([[v]])
        f_m, _ = exact_f(g, s, make_priority_profile("homogeneous", s, g.node_count), [])
        out.append(f_m)
    return np.array(out)


def test_influence_seeding_top_four():
    edges = [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (3, 7), (3, 8), (4, 9), (6, 9), (8, 9), (5, 0)]
    g = DirectedGraph.from_edges(10, edges, p=0.6)
    reach = exact_reach(g)
    top = sorted(range(10), key=lambda v: (-reach[v], v))
    assert reach[top[3]] - reach[top[4]] > 0.1  # well separated, so sampling cannot swap them
    layout = CascadeLayout(misinfo=1, positive=1, seed_size=2, influence_replications=20_000)
    s = seed_existing_cascades(g, layout, 0)
    chosen = s.seeds[0] | s.seeds[1]
    assert len(chosen) == 4
    assert chosen == set(top[:4])
    assert s.seeds[0] == set(top[:2])


def test_star_center_seeds_first_cascade():
    g = DirectedGraph.from_edges(6, [(0, i) for i in range(1, 6)], p=1.0)
    s = seed_existing_cascades(g, CascadeLayout(1, 1, 1, influence_replications=10), 0)
    assert s.seeds[0] == {0}


def test_three_cascade_layout():
    g = DirectedGraph.from_edges(6, [(0, i) for i in range(1, 6)], p=1.0)
    s = seed_existing_cascades(g, CascadeLayout(1, 1, 2, influence_replications=10), 0)
    assert s.groups == ("M", "P", "P")
    assert s.star_id == 2
    assert not s.seeds[0] & s.seeds[1]


def test_insufficient_nodes():
    g = DirectedGraph.from_edges(3, [(0, 1)], p=1.0)
    with pytest.raises(ValidationError):
        seed_existing_cascades(g, CascadeLayout(1, 1, 2), 0)


def test_config_validation():
    with pytest.raises(ValidationError):
        small_config(budgets=[2, 1])
    with pytest.raises(ValidationError):
        small_config(budgets=[0, 1])
    with pytest.raises(ValidationError):
        small_config(methods=["magic"])
    with pytest.raises(ValidationError):
        small_config(cascades={"seed_size": 0})


def test_config_unknown_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"budgetz": [1]}')
    with pytest.raises(ValidationError):
        ExperimentConfig.from_file(p)


def test_random_full_candidate_set():
    cfg = small_config(
        graph={"generator": "er", "n": 5, "m": 0, "seed": 0},
        cascades={"misinfo": 0, "positive": 1, "seed_size": 1, "influence_replications": 10},
        budgets=[4],
        methods=["random"],
    )
    rep = run_experiment(cfg)
    assert rep.row("random", 4)["f_notm_mean"] == 5


def test_sandwich_at_least_greedy_on_deterministic_instance():
    # all probabilities 1: every replication is the same live graph, so means are exact
    cfg = small_config(
        graph={"generator": "er", "n": 14, "m": 22, "seed": 5},
        probability_mode="uniform:1.0",
        priority={"mode": "random", "seed": 4},
        methods=["sandwich", "greedy_f"],
        budgets=[1, 2, 3, 4],
        r_opt=3,
        r_eval=3,
    )
    rep = run_experiment(cfg)
    for k in cfg.budgets:
        assert rep.row("sandwich", k)["f_notm_mean"] >= rep.row("greedy_f", k)["f_notm_mean"]


def test_report_invariants():
    rep = run_experiment(small_config())
    n = rep.metadata["node_count"]
    methods = {r["method"] for r in rep.rows}
    assert methods == {"sandwich", "greedy_f", "greedy_upper", "greedy_lower", "high_weight", "proximity", "random"}
    for r in rep.rows:
        assert r["f_m_mean"] + r["f_notm_mean"] == pytest.approx(n, abs=1e-9)
        if r["method"] == "sandwich":
            assert 0 < r["bound_ratio"] <= 1
        else:
            assert r["bound_ratio"] is None
    keys = [(r["method"], r["budget"]) for r in rep.rows]
    assert len(keys) == len(set(keys)) == 7 * 3
    assert rep.metadata["config_hash"] == small_config().digest()


def strip_wall(text):
    rows = list(csv.reader(io.StringIO(text)))
    col = rows[0].index("wall_ms")
    return [r[:col] + r[col + 1 :] for r in rows]


def test_repeat_runs_identical():
    a = run_experiment(small_config()).to_csv()
    b = run_experiment(small_config()).to_csv()
    assert strip_wall(a) == strip_wall(b)
