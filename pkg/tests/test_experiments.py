import json
from dataclasses import replace

import numpy as np
import pytest

from dimmsb.core import BiAdjacency, ConfigError, MembershipMatrix, ProbabilityMatrix, UnknownId
from dimmsb.experiments import (
    ExperimentConfig,
    builtin_config,
    concentration_ratio,
    bound_probe,
    real_data_table,
    rep_seed,
    run_experiment,
    worker_count,
)
from dimmsb.model import ModelParams, build_omega, sample_adjacency


def tiny(**kw):
    base = dict(id="tiny", n_r=60, n_c=80, K=3, grid_param="n0", grid=(8, 16), p_kind="explicit",
                p_matrix=((0.8, 0.1, 0.3), (0.2, 0.9, 0.4), (0.5, 0.2, 0.9)), repetitions=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_builtin_configs():
    c2 = builtin_config(2)
    assert (c2.n_r, c2.n_c, c2.n0, c2.grid_param) == (60, 80, 8, "rho")
    assert len(c2.grid) == 10
    c4 = builtin_config(4)
    assert c4.grid == tuple(range(40, 201, 20)) and len(c4.grid) == 9
    with pytest.raises(UnknownId):
        builtin_config(9)
    for i in range(1, 8):
        builtin_config(i).validate()


def test_tri_family_diagonal():
    P = builtin_config(7).probability_at(4)
    assert P.entries.shape == (4, 4)
    assert np.allclose(np.diag(P.entries), 0.5)
    assert P.entries[0, 1] == 0.2 and P.entries[1, 0] == 0.3


def test_beta_family():
    P = builtin_config(6).probability_at(0.3)
    assert np.allclose(P.entries, 0.3 * np.eye(3) + 0.7)


def test_non_identifiable_rejected():
    with pytest.raises(ConfigError):
        tiny(p_matrix=((0.5, 0.5, 0.5),) * 3).validate()
    with pytest.raises(ConfigError):
        tiny(grid=(0,)).validate()
    with pytest.raises(ConfigError):
        tiny(grid=(7,)).validate()  # 60 - 21 mixed rows do not split over four PMFs


def test_bad_config_fields():
    with pytest.raises(ConfigError):
        tiny(grid_param="gamma")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"id": "x", "nope": 1})


def test_config_round_trip(tmp_path):
    cfg = builtin_config(3)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(path) == cfg
    over = ExperimentConfig.from_dict({"builtin": 1, "repetitions": 2})
    assert over == replace(builtin_config(1), repetitions=2)


def test_run_is_deterministic_and_worker_independent():
    cfg = tiny()
    a = run_experiment(cfg)
    b = run_experiment(cfg, workers=3)
    assert [r.dimhamm for p in a.points for r in p.records] == [r.dimhamm for p in b.points for r in p.records]
    other = run_experiment(replace(cfg, base_seed=1))
    assert [s["mean_dimhamm"] for s in other.summaries()] != [s["mean_dimhamm"] for s in a.summaries()]


def test_result_outputs(tmp_path):
    res = run_experiment(tiny(), reps=2)
    res.write_csv(tmp_path / "s.csv", seed=0)
    res.write_long_csv(tmp_path / "l.csv", seed=0)
    res.write_json(tmp_path / "r.json")
    lines = [l for l in (tmp_path / "s.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 3
    long_lines = [l for l in (tmp_path / "l.csv").read_text().splitlines() if not l.startswith("#")]
    # Tidy layout: one line per (point, rep, metric).
    assert len(long_lines) == 1 + 2 * 2 * 4
    assert json.loads((tmp_path / "r.json").read_text())["config"]["id"] == "tiny"
    assert np.all(res.column("mean_dimhamm") >= 0)


def test_rep_seed_streams_differ():
    assert rep_seed(0, 0, 1).generate_state(2).tolist() != rep_seed(0, 1, 0).generate_state(2).tolist()


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("DIMMSB_THREADS", "2")
    assert worker_count(8) == 2
    monkeypatch.delenv("DIMMSB_THREADS")
    assert worker_count(None) == 1 and worker_count(4) == 4


def test_concentration_zero_matrix():
    rep = concentration_ratio(np.zeros((30, 40)), 0.5, reps=3)
    assert rep.max_ratio == 0.0


def test_concentration_assumption_warning():
    rep = concentration_ratio(np.full((10, 10), 0.01), 0.01, reps=2)
    assert not rep.assumption_ok and "assumption" in rep.warning


def test_bound_probe_dense_network():
    cfg = builtin_config(6)
    rep = bound_probe(cfg.params_at(4), reps=3, seed=5)
    assert rep.assumption_ok and rep.warning is None
    assert 0 < rep.max_ratio <= 4


def planted_square(seed, n=150):
    rng = np.random.default_rng(seed)
    K = 2
    w = np.vstack([np.repeat(np.eye(K), 30, axis=0), rng.dirichlet(np.ones(K), size=n - 60)])
    pi = MembershipMatrix(w)
    P = ProbabilityMatrix.from_entries([[0.4, 0.05], [0.05, 0.4]])
    omega = build_omega(ModelParams(P, pi, pi))
    labels = [f"v{i}" for i in range(n)]
    return sample_adjacency(omega, seed, labels, labels)


def test_real_data_table_on_planted_network():
    a = planted_square(0)
    rows = real_data_table(a, 2, [1, 3, 500])
    assert [r["matrix"] for r in rows] == ["A_1", "A_1,common", "A_3", "A_3,common", "A_500"]
    common = rows[1]
    assert common["n_r"] == common["n_c"]
    assert 0 <= common["mhamm"] < 0.5
    assert rows[0]["mhamm"] is None
    assert rows[-1]["note"].startswith("skipped")


def test_real_data_table_fits_core_when_common_has_isolated_nodes():
    labels = ["a", "b", "c", "d", "e"]
    dense = np.array([
        [1, 1, 0, 0, 1],
        [1, 1, 0, 1, 0],
        [0, 0, 1, 1, 0],
        [0, 1, 1, 1, 0],
        [1, 0, 0, 0, 0],
    ])
    rows = BiAdjacency.from_dense(dense[:4], labels[:4], labels)
    table = real_data_table(rows, 2, [1])
    common = table[1]
    assert (common["n_r"], common["n_c"]) == (4, 4)
    assert common["fit_n_r"] == common["fit_n_c"]
    assert common["note"] in ("", "fit on zero-degree-free core")
