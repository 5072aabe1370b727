"""Monte Carlo experiment runner: parameter sweeps, design strategies,
seeded trial generation, aggregation and CSV emission.

A run is fully determined by (config, master seed): every trial derives its
channel seed from the master seed and trial index, strategies within a
trial share the same channel realization, and aggregation is permutation
invariant, so repeated runs are byte-identical.
"""

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from . import bcd, system_model
from .channel import (SystemParams, db2lin, draw_channels, perturb_csi,
                      trial_seed)
from .errors import ConfigError, UnknownStrategy

ONE_DIRECTIONAL_STRATEGIES = (
    "Optimal-FD", "Optimal-HD", "Equal-FD", "Equal-HD",
    "Equal-X/Optimal-W", "Equal-W/Optimal-X",
)
BIDIRECTIONAL_STRATEGIES = (
    "Both-FD/No-Jam", "Both-FD/Bob-Jam", "Both-FD/Both-Jam",
    "Both-HD/No-Jam", "Bob-FD/Bob-Jam",
)
STRATEGIES = ONE_DIRECTIONAL_STRATEGIES + BIDIRECTIONAL_STRATEGIES

#: Recognized sweep parameter names and how they update the base params.
SWEEPABLE = ("W_max_db", "X_max_db", "kappa_beta_db", "noise_db",
             "M_b", "M_e", "P_max_db", "csi_error_db", "none")


@dataclass(eq=False)
class ExperimentConfig:
    """Everything needed to reproduce an experiment."""

    params: SystemParams
    strategies: list
    trials: int = 20
    master_seed: int = 0
    sweep_param: str = "none"
    sweep_values: list = field(default_factory=lambda: [0.0])
    outer_tol: float = 1e-4
    max_outer: int = 50
    inner_tol: float = 1e-6
    inner_max_iter: int = 200
    restarts: int = 20
    label: str = "experiment"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.sweep_param not in SWEEPABLE:
            raise ConfigError(
                f"sweep_param '{self.sweep_param}' not in {SWEEPABLE}")
        for name in self.strategies:
            if name not in STRATEGIES:
                raise UnknownStrategy(f"unknown strategy '{name}'")
        if not self.sweep_values:
            raise ConfigError("sweep_values must not be empty")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        param_keys = ("M_a", "M_bt", "M_br", "M_e", "N", "K_R", "eta_db",
                      "noise_db", "kappa_db", "beta_db", "x_max_db",
                      "w_max_db", "p_a_max_db", "p_b_max_db", "d",
                      "M_at", "M_ar")
        param_args = {k: raw.pop(k) for k in param_keys if k in raw}
        try:
            params = SystemParams.from_db(**param_args)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        known = {"strategies", "trials", "master_seed", "sweep_param",
                 "sweep_values", "outer_tol", "max_outer", "inner_tol",
                 "inner_max_iter", "restarts", "label"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unrecognized config keys: {sorted(unknown)}")
        if "strategies" not in raw:
            raise ConfigError("strategies: at least one strategy is required")
        return cls(params=params, **raw)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh)
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        return cls.from_dict(raw)


@dataclass(eq=False)
class TrialRow:
    strategy: str
    sweep_value: float
    trial: int
    seed: int
    bits: float
    iters: int
    status: str


@dataclass(eq=False)
class AggregateRow:
    strategy: str
    sweep_param: str
    sweep_value: float
    mean_bits: float
    stderr_bits: float
    mean_iters: float


@dataclass(eq=False)
class ExperimentResult:
    config_echo: dict
    master_seed: int
    trial_rows: list
    version: str = "fdwiretap-0.1.0"

    def aggregates(self) -> list:
        """Mean, standard error and mean iteration count per cell."""
        sweep_param = self.config_echo.get("sweep_param", "none")
        cells = {}
        for row in self.trial_rows:
            cells.setdefault((row.strategy, row.sweep_value), []).append(row)
        out = []
        for (strategy, value), rows in sorted(cells.items()):
            bits = np.array([r.bits for r in rows])
            stderr = (float(bits.std(ddof=1) / np.sqrt(bits.size))
                      if bits.size > 1 else 0.0)
            out.append(AggregateRow(
                strategy=strategy, sweep_param=sweep_param, sweep_value=value,
                mean_bits=float(bits.mean()), stderr_bits=stderr,
                mean_iters=float(np.mean([r.iters for r in rows]))))
        return out

    def cell(self, strategy: str, sweep_value: float) -> AggregateRow:
        for agg in self.aggregates():
            if agg.strategy == strategy and agg.sweep_value == sweep_value:
                return agg
        raise KeyError((strategy, sweep_value))

    def any_failed(self) -> bool:
        return any(r.status == "NumericalTrouble" for r in self.trial_rows)


def _apply_sweep(params: SystemParams, name: str, value) -> SystemParams:
    if name == "none":
        return params
    if name == "W_max_db":
        return params.with_updates(W_max=db2lin(value))
    if name == "X_max_db":
        return params.with_updates(X_max=db2lin(value))
    if name == "noise_db":
        lin = db2lin(value)
        return params.with_updates(noise={k: lin for k in ("a", "b", "e")})
    if name == "kappa_beta_db":
        lin = db2lin(value)
        return params.with_updates(kappa={"a": lin, "b": lin},
                                   beta={"a": lin, "b": lin})
    if name == "M_b":
        m = int(value)
        return params.with_updates(M_bt=m, M_br=m, D_corr={})
    if name == "M_e":
        return params.with_updates(M_e=int(value))
    if name == "P_max_db":
        lin = db2lin(value)
        return params.with_updates(P_A_max=lin, P_B_max=lin,
                                   X_max=lin, W_max=lin)
    if name == "csi_error_db":
        return params  # handled at the trial level
    raise ConfigError(f"unrecognized sweep parameter '{name}'")


def _csi_variance(sweep_param: str, sweep_value) -> float:
    """CSI error variance for a sweep cell; -inf dB means perfect CSI."""
    if sweep_param != "csi_error_db":
        return 0.0
    value = float(sweep_value)
    return 0.0 if np.isneginf(value) else db2lin(value)


def strategy_dispatch(name: str, params: SystemParams, ch,
                      opts: dict | None = None):
    """Run one strategy on one channel realization.

    Returns (design, iterations, status); the design is evaluated against
    whatever channel the caller chooses (the estimation channel here, the
    true channel in the CSI study).
    """
    opts = dict(opts or {})
    opt_kwargs = {k: opts[k] for k in ("outer_tol", "max_outer", "inner_tol",
                                       "inner_max_iter") if k in opts}
    if name == "Optimal-FD":
        result = bcd.optimize(params, ch, **opt_kwargs)
    elif name == "Optimal-HD":
        result = bcd.optimize(params, ch, optimize_w=False, **opt_kwargs)
    elif name == "Equal-FD":
        design = bcd.init_uniform(params, with_jamming=True)
        return design, 0, "Converged"
    elif name == "Equal-HD":
        design = bcd.init_uniform(params, with_jamming=False)
        return design, 0, "Converged"
    elif name == "Equal-X/Optimal-W":
        init = bcd.init_uniform(params, with_jamming=True)
        result = bcd.optimize(params, ch, init=init, optimize_x=False,
                              **opt_kwargs)
    elif name == "Equal-W/Optimal-X":
        init = bcd.init_uniform(params, with_jamming=True)
        result = bcd.optimize(params, ch, init=init, optimize_w=False,
                              **opt_kwargs)
    elif name == "Both-FD/No-Jam":
        result = bcd.optimize_bidirectional(params, ch, jam_a=False,
                                            jam_b=False, **opt_kwargs)
    elif name == "Both-FD/Bob-Jam":
        result = bcd.optimize_bidirectional(params, ch, jam_a=False,
                                            jam_b=True, **opt_kwargs)
    elif name == "Both-FD/Both-Jam":
        result = bcd.optimize_bidirectional(params, ch, jam_a=True,
                                            jam_b=True, **opt_kwargs)
    elif name == "Bob-FD/Bob-Jam":
        # One-directional proposed design with the per-node budgets.
        p = params.with_updates(X_max=params.P_A_max, W_max=params.P_B_max)
        result = bcd.optimize(p, ch, **opt_kwargs)
    elif name == "Both-HD/No-Jam":
        return _both_hd_no_jam(params, ch, opt_kwargs)
    else:
        raise UnknownStrategy(f"unknown strategy '{name}'")
    return result.design, result.state.iterations, result.state.status


def _both_hd_no_jam(params: SystemParams, ch, opt_kwargs):
    """Bidirectional half-duplex baseline: the two directions are optimized
    as separate interference-free links and time-share the channel, so each
    direction contributes half its standalone secrecy rate."""
    fwd = params.with_updates(X_max=params.P_A_max, W_max=params.P_B_max,
                              kappa={"a": 0.0, "b": 0.0},
                              beta={"a": 0.0, "b": 0.0}, D_corr={})
    res_fwd = bcd.optimize(fwd, ch, optimize_w=False, **opt_kwargs)
    swapped = _swap_direction_params(params)
    res_rev = bcd.optimize(swapped, _swap_direction_channels(params, ch),
                           optimize_w=False, **opt_kwargs)
    design = system_model.BidirectionalDesign.zeros(params)
    design.X_a[:] = res_fwd.design.X
    design.X_b[:] = res_rev.design.X
    iters = res_fwd.state.iterations + res_rev.state.iterations
    return design, iters, res_fwd.state.status


def _evaluate_both_hd(params: SystemParams, design, eval_ch) -> float:
    """Score the time-shared half-duplex baseline.

    Each direction gets the channel half the time with no concurrent
    transmission, so the sum is half of each direction's standalone
    (jamming-free, SI-free) secrecy rate.
    """
    fwd = params.with_updates(X_max=params.P_A_max, W_max=params.P_B_max,
                              kappa={"a": 0.0, "b": 0.0},
                              beta={"a": 0.0, "b": 0.0}, D_corr={})
    d_fwd = system_model.TransmitDesign.zeros(fwd)
    d_fwd.X[:] = design.X_a
    fwd_bits = system_model.secrecy_rates(fwd, eval_ch, d_fwd).I_sum
    rev_params = _swap_direction_params(params)
    rev_ch = _swap_direction_channels(params, eval_ch)
    d_rev = system_model.TransmitDesign.zeros(rev_params)
    d_rev.X[:] = design.X_b
    rev_bits = system_model.secrecy_rates(rev_params, rev_ch, d_rev).I_sum
    return 0.5 * (fwd_bits + rev_bits)


def _swap_direction_params(params: SystemParams) -> SystemParams:
    return params.with_updates(
        M_a=params.M_bt, M_at=params.M_bt, M_ar=params.M_bt,
        M_bt=params.M_at, M_br=params.M_ar,
        X_max=params.P_B_max, W_max=params.P_A_max,
        kappa={"a": 0.0, "b": 0.0}, beta={"a": 0.0, "b": 0.0}, D_corr={},
        noise={"a": params.noise["b"], "b": params.noise["a"],
               "e": params.noise["e"]},
        d=1)


def _swap_direction_channels(params: SystemParams, ch):
    from .channel import ChannelRealization
    h = dict(ch.H)
    h["ab"], h["ba"] = ch.H["ba"], ch.H["ab"]
    h["ae"], h["be"] = ch.H["be"], ch.H["ae"]
    h["bb"], h["aa"] = ch.H["aa"], ch.H["bb"]
    return ChannelRealization(H=h, seed=ch.seed)


def _evaluate(name: str, params: SystemParams, design, eval_ch) -> float:
    if name == "Both-HD/No-Jam":
        return _evaluate_both_hd(params, design, eval_ch)
    if isinstance(design, system_model.BidirectionalDesign):
        report = system_model.secrecy_rates_bidirectional(params, eval_ch,
                                                          design)
    else:
        eval_params = params
        if name == "Bob-FD/Bob-Jam":
            eval_params = params.with_updates(X_max=params.P_A_max,
                                              W_max=params.P_B_max)
        report = system_model.secrecy_rates(eval_params, eval_ch, design)
    return report.I_sum


def run_trial(cfg: ExperimentConfig, sweep_value, trial: int) -> list:
    """All strategy rows for one (sweep value, trial) cell."""
    params = _apply_sweep(cfg.params, cfg.sweep_param, sweep_value)
    seed = trial_seed(cfg.master_seed, trial)
    ch_true = draw_channels(params, seed)
    csi_var = _csi_variance(cfg.sweep_param, sweep_value)
    if csi_var > 0:
        ch_est = perturb_csi(ch_true, csi_var,
                             trial_seed(cfg.master_seed, trial, stream=1))
    else:
        ch_est = ch_true
    opts = {"outer_tol": cfg.outer_tol, "max_outer": cfg.max_outer,
            "inner_tol": cfg.inner_tol, "inner_max_iter": cfg.inner_max_iter}
    rows = []
    for name in cfg.strategies:
        try:
            design, iters, status = strategy_dispatch(name, params, ch_est,
                                                      opts)
            bits = _evaluate(name, params, design, ch_true)
        except Exception:
            rows.append(TrialRow(strategy=name,
                                 sweep_value=float(sweep_value), trial=trial,
                                 seed=seed, bits=float("nan"), iters=0,
                                 status="NumericalTrouble"))
            continue
        rows.append(TrialRow(strategy=name, sweep_value=float(sweep_value),
                             trial=trial, seed=seed, bits=bits, iters=iters,
                             status=status))
    return rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (sweep value, strategy, trial) cell and aggregate."""
    trial_rows = []
    for sweep_value in cfg.sweep_values:
        for trial in range(cfg.trials):
            trial_rows.extend(run_trial(cfg, sweep_value, trial))
    echo = {
        "label": cfg.label, "strategies": list(cfg.strategies),
        "trials": cfg.trials, "master_seed": cfg.master_seed,
        "sweep_param": cfg.sweep_param,
        "sweep_values": [float(v) for v in cfg.sweep_values],
        "outer_tol": cfg.outer_tol, "max_outer": cfg.max_outer,
        "inner_tol": cfg.inner_tol, "inner_max_iter": cfg.inner_max_iter,
        "restarts": cfg.restarts,
    }
    return ExperimentResult(config_echo=echo, master_seed=cfg.master_seed,
                            trial_rows=trial_rows)


# ---------------------------------------------------------------------------
# Emission and parsing.

AGGREGATE_HEADER = ("strategy", "sweep_param", "sweep_value", "mean_bits",
                    "stderr_bits", "mean_iters")
TRIAL_HEADER = ("strategy", "sweep_value", "trial", "seed", "bits", "iters",
                "status")


def emit_results(res: ExperimentResult, outdir) -> None:
    """Write aggregate and trial CSVs plus a JSON metadata sidecar.

    Overwrites existing files; float fields use repr so reruns with the
    same seed are byte-identical.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "aggregate.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(AGGREGATE_HEADER)
            for agg in res.aggregates():
                writer.writerow([agg.strategy, agg.sweep_param,
                                 repr(agg.sweep_value), repr(agg.mean_bits),
                                 repr(agg.stderr_bits), repr(agg.mean_iters)])
        with open(outdir / "trials.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRIAL_HEADER)
            for row in res.trial_rows:
                writer.writerow([row.strategy, repr(row.sweep_value),
                                 row.trial, row.seed, repr(row.bits),
                                 row.iters, row.status])
        with open(outdir / "metadata.json", "w") as fh:
            json.dump({"config": res.config_echo,
                       "master_seed": res.master_seed,
                       "version": res.version}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed writing results to {outdir}: {exc}") from exc


def load_results(outdir) -> ExperimentResult:
    """Parse results written by :func:`emit_results`."""
    outdir = Path(outdir)
    with open(outdir / "metadata.json") as fh:
        meta = json.load(fh)
    rows = []
    with open(outdir / "trials.csv", newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(TrialRow(
                strategy=rec["strategy"],
                sweep_value=float(rec["sweep_value"]),
                trial=int(rec["trial"]), seed=int(rec["seed"]),
                bits=float(rec["bits"]), iters=int(rec["iters"]),
                status=rec["status"]))
    return ExperimentResult(config_echo=meta["config"],
                            master_seed=meta["master_seed"],
                            trial_rows=rows, version=meta["version"])
