import numpy as np
import pytest

from fdwiretap import bcd, harness
from fdwiretap.channel import SystemParams, db2lin, draw_channels
from fdwiretap.errors import ConfigError, UnknownStrategy
from fdwiretap.harness import (ExperimentConfig, ExperimentResult, TrialRow,
                               emit_results, load_results, run_experiment,
                               run_trial, strategy_dispatch)

DESK = dict(M_a=2, M_bt=2, M_br=2, M_e=2, N=2,
            kappa_db=-30.0, beta_db=-30.0)
OPTS = {"outer_tol": 1e-3, "inner_tol": 1e-4}


def desk_config(**overrides):
    raw = dict(DESK)
    raw.update(strategies=["Equal-FD", "Equal-HD"], trials=3,
               master_seed=7, outer_tol=1e-3, inner_tol=1e-4)
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


# --- configuration ----------------------------------------------------------


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        desk_config(typo_key=1)


def test_config_rejects_unknown_strategy():
    with pytest.raises(UnknownStrategy):
        desk_config(strategies=["Optimal-FD", "Maximal-FD"])


def test_config_requires_strategies():
    raw = dict(DESK, trials=2)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_config_rejects_bad_trials_and_sweep():
    with pytest.raises(ConfigError):
        desk_config(trials=0)
    with pytest.raises(ConfigError):
        desk_config(sweep_param="bandwidth_db")
    with pytest.raises(ConfigError):
        desk_config(sweep_values=[])


def test_config_from_yaml(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        "M_a: 2\nM_bt: 2\nM_br: 2\nM_e: 2\nN: 2\n"
        "strategies: [Equal-FD]\ntrials: 2\nmaster_seed: 5\n"
        "sweep_param: W_max_db\nsweep_values: [-10.0, 0.0]\n")
    cfg = ExperimentConfig.from_yaml(path)
    assert cfg.trials == 2
    assert cfg.master_seed == 5
    assert cfg.sweep_values == [-10.0, 0.0]
    assert cfg.params.M_a == 2


def test_config_from_yaml_rejects_non_mapping(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("- just\n- a\n- list\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_yaml(path)


# --- sweeps -----------------------------------------------------------------


def test_apply_sweep_w_max():
    p = SystemParams.from_db(**DESK)
    swept = harness._apply_sweep(p, "W_max_db", 10.0)
    assert swept.W_max == pytest.approx(10.0)
    assert swept.X_max == p.X_max


def test_apply_sweep_p_max_sets_all_budgets():
    p = SystemParams.from_db(**DESK)
    swept = harness._apply_sweep(p, "P_max_db", 10.0)
    for budget in (swept.X_max, swept.W_max, swept.P_A_max, swept.P_B_max):
        assert budget == pytest.approx(10.0)


def test_apply_sweep_kappa_beta():
    p = SystemParams.from_db(**DESK)
    swept = harness._apply_sweep(p, "kappa_beta_db", -10.0)
    assert swept.kappa["b"] == pytest.approx(0.1)
    assert swept.beta["a"] == pytest.approx(0.1)


def test_apply_sweep_antennas():
    p = SystemParams.from_db(**DESK)
    swept = harness._apply_sweep(p, "M_b", 3)
    assert swept.M_bt == 3 and swept.M_br == 3
    assert harness._apply_sweep(p, "M_e", 3).M_e == 3


def test_apply_sweep_none_is_identity():
    p = SystemParams.from_db(**DESK)
    assert harness._apply_sweep(p, "none", 0.0) is p


def test_csi_variance_mapping():
    assert harness._csi_variance("W_max_db", -20.0) == 0.0
    assert harness._csi_variance("csi_error_db", float("-inf")) == 0.0
    assert harness._csi_variance("csi_error_db", -20.0) == pytest.approx(0.01)


# --- trial counting and determinism -----------------------------------------


def test_row_counts_and_cells():
    cfg = desk_config(sweep_param="W_max_db",
                      sweep_values=[-10.0, 0.0, 10.0], trials=5)
    res = run_experiment(cfg)
    assert len(res.trial_rows) == 2 * 3 * 5
    aggs = res.aggregates()
    assert len(aggs) == 2 * 3
    keys = [(a.strategy, a.sweep_value) for a in aggs]
    assert keys == sorted(keys)


def test_reruns_are_bit_identical():
    cfg = desk_config(strategies=["Optimal-FD", "Equal-FD"], trials=2)
    rows1 = run_experiment(cfg).trial_rows
    rows2 = run_experiment(cfg).trial_rows
    for a, b in zip(rows1, rows2):
        assert a.bits == b.bits
        assert a.seed == b.seed
        assert a.iters == b.iters


def test_strategies_share_channel_within_trial():
    cfg = desk_config(trials=2)
    rows = run_experiment(cfg).trial_rows
    by_trial = {}
    for row in rows:
        by_trial.setdefault(row.trial, set()).add(row.seed)
    for seeds in by_trial.values():
        assert len(seeds) == 1


def test_equal_power_rows_do_not_iterate():
    cfg = desk_config(trials=2)
    for row in run_experiment(cfg).trial_rows:
        assert row.iters == 0
        assert row.status == "Converged"


def test_aggregate_statistics_by_hand():
    rows = [TrialRow("S", 0.0, t, 1, b, 4, "Converged")
            for t, b in enumerate([1.0, 2.0, 4.0])]
    res = ExperimentResult(config_echo={"sweep_param": "none"},
                           master_seed=0, trial_rows=rows)
    agg = res.cell("S", 0.0)
    assert agg.mean_bits == pytest.approx(7.0 / 3.0)
    assert agg.stderr_bits == pytest.approx(np.std([1, 2, 4], ddof=1)
                                            / np.sqrt(3))
    assert agg.mean_iters == pytest.approx(4.0)


def test_failed_trial_marks_result(monkeypatch):
    cfg = desk_config(strategies=["Optimal-FD"], trials=1)

    def boom(*args, **kwargs):
        raise FloatingPointError("synthetic failure")

    monkeypatch.setattr(bcd, "optimize", boom)
    rows = run_trial(cfg, 0.0, 0)
    assert rows[0].status == "NumericalTrouble"
    assert np.isnan(rows[0].bits)
    res = ExperimentResult(config_echo={}, master_seed=0, trial_rows=rows)
    assert res.any_failed()


# --- strategy semantics -----------------------------------------------------


def test_optimized_beats_equal_power():
    cfg = desk_config(strategies=["Optimal-HD", "Equal-HD"], trials=5)
    res = run_experiment(cfg)
    opt = res.cell("Optimal-HD", 0.0).mean_bits
    equal = res.cell("Equal-HD", 0.0).mean_bits
    assert opt >= equal - 1e-9


def test_bob_fd_matches_one_directional_at_default_budgets():
    """With X_max = P_A_max and W_max = P_B_max the single-pair FD strategy
    coincides with the plain optimized design."""
    p = SystemParams.from_db(**DESK)
    ch = draw_channels(p, 11)
    d1, it1, _ = strategy_dispatch("Optimal-FD", p, ch, OPTS)
    d2, it2, _ = strategy_dispatch("Bob-FD/Bob-Jam", p, ch, OPTS)
    assert it1 == it2
    np.testing.assert_allclose(d1.X, d2.X, atol=1e-12)
    np.testing.assert_allclose(d1.W, d2.W, atol=1e-12)


def test_swap_channels_is_involutive():
    p = SystemParams.from_db(**DESK)
    ch = draw_channels(p, 3)
    back = harness._swap_direction_channels(
        p, harness._swap_direction_channels(p, ch))
    for link in ch.H:
        np.testing.assert_array_equal(back.H[link], ch.H[link])


def test_both_hd_no_jam_is_half_of_standalone_links():
    p = SystemParams.from_db(**DESK)
    ch = draw_channels(p, 4)
    design, _, _ = strategy_dispatch("Both-HD/No-Jam", p, ch, OPTS)
    bits = harness._evaluate("Both-HD/No-Jam", p, design, ch)
    assert bits > 0
    assert np.all(design.W_a == 0) and np.all(design.W_b == 0)
    # Doubling only the forward allocation does not change the reverse half.
    half = harness._evaluate_both_hd(p, design, ch)
    assert bits == pytest.approx(half)


def test_hd_strategies_carry_no_jamming():
    p = SystemParams.from_db(**DESK)
    ch = draw_channels(p, 5)
    design, _, _ = strategy_dispatch("Optimal-HD", p, ch, OPTS)
    assert np.all(design.W == 0)
    design, _, _ = strategy_dispatch("Equal-HD", p, ch, OPTS)
    assert np.all(design.W == 0)


# --- emission and parsing ---------------------------------------------------


def test_emit_load_round_trip(tmp_path):
    cfg = desk_config(trials=2, sweep_param="W_max_db",
                      sweep_values=[-10.0, 0.0])
    res = run_experiment(cfg)
    emit_results(res, tmp_path / "out")
    loaded = load_results(tmp_path / "out")
    assert len(loaded.trial_rows) == len(res.trial_rows)
    for a, b in zip(loaded.trial_rows, res.trial_rows):
        assert a.bits == b.bits
        assert a.strategy == b.strategy
        assert a.status == b.status
    assert loaded.master_seed == res.master_seed


def test_emitted_files_are_byte_identical_across_reruns(tmp_path):
    cfg = desk_config(strategies=["Optimal-FD", "Equal-FD"], trials=2)
    emit_results(run_experiment(cfg), tmp_path / "a")
    emit_results(run_experiment(cfg), tmp_path / "b")
    for name in ("aggregate.csv", "trials.csv", "metadata.json"):
        assert ((tmp_path / "a" / name).read_bytes()
                == (tmp_path / "b" / name).read_bytes())


def test_empty_rows_emit_header_only(tmp_path):
    res = ExperimentResult(config_echo={"sweep_param": "none"},
                           master_seed=0, trial_rows=[])
    emit_results(res, tmp_path)
    agg_lines = (tmp_path / "aggregate.csv").read_text().strip().splitlines()
    trial_lines = (tmp_path / "trials.csv").read_text().strip().splitlines()
    assert agg_lines == [",".join(harness.AGGREGATE_HEADER)]
    assert trial_lines == [",".join(harness.TRIAL_HEADER)]
