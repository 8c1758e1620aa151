"""Experiment pipelines: configuration, orchestration, persistence.

A RunConfig fully determines a run: (config, master_seed) fixes every
byte of output.  Monte Carlo trials draw their randomness from streams
derived per (trial, role), so any worker scheduling yields identical
aggregates.  Every run writes its artifacts plus a manifest with digests;
a manifest found without `complete: true` marks an interrupted run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dbm import ParticleSystem, ensemble_eigenvalues, sde_evolve
from .edgestats import (EdgeSampleSet, local_law_report, rescaled_edge_statistics,
                        rigidity_report, two_sample_compare)
from .errors import ConfigError
from .freeconv import (build_density_table, compute_profile, density_grid,
                       find_edge, quantiles)
from .initial_data import InitialData, check_eta_regular, quantile_initial_data
from .serialize import (atomic_write, save_density_table, save_initial_data,
                        save_quantile_table, save_report, save_sample_set)
from .shortrange import (ConstantGeneratorPath, LawPath, build_generator,
                         energy_decay_curve, finite_speed_probe,
                         semicircle_branch, short_range_topology)
from .streams import NoiseLedger, derive_stream

__all__ = ["RunConfig", "RunManifest", "run_experiment", "render_report",
           "parse_config_text", "replay_manifest", "EXPERIMENTS"]

EXPERIMENTS = ("edge-law", "regularity", "simulate", "universality", "couple",
               "rigidity", "local-law", "probe-finite-speed", "probe-energy")


@dataclass
class RunConfig:
    """Flat, typed experiment configuration.

    Exponent fields follow the scale hierarchy of the short-range
    construction; every one of them is a first-class key so sweeps can be
    scripted from config files alone.  Times are in matrix-variance
    units, energies in spectrum units.
    """

    experiment: str = "edge-law"
    N: int = 400
    t: float = 1.0
    t_factor: float = 3.0          # universality: t = t_factor * sqrt(eta_star)
    control_t_factor: float = 0.3  # below-threshold control run
    eta_star: float = 0.0          # 0 means derive from phi_star
    phi_star: float = 0.55
    trials: int = 100
    k: int = 2                     # number of edge statistics beyond the first
    profile: str = "sqrt"          # sqrt | point | two_point
    profile_param: float = 1.0
    t0: float = 0.0                # coupling regularization time (0: derive)
    omega_1: float = 0.05
    omega_ell: float = 0.15
    omega_A: float = 0.45
    omega_0: float = 0.3
    sigma: float = 0.1
    delta: float = 0.02
    i_star: int = 0                # 0 means N
    barrier_a: int = 15
    barrier_b: int = 1000
    envelope_const: float = 5.0
    ks_threshold: float = 0.05
    gap_threshold: float = 0.05
    ratio_threshold: float = 10.0  # local law: multiple of log N
    dt_max: float = 1e-3
    horizon_factor: float = 1.0    # probes: horizon = factor * t1
    t1_override: float = 0.0       # couple: explicit horizon (0: use t1())
    sde_depth: int = 6             # SDE halving depth before reflection
    master_seed: int = 20240
    workers: int = 1
    outdir: str = "runs"

    def eta_star_value(self) -> float:
        return self.eta_star if self.eta_star > 0 else self.N ** (-self.phi_star)

    def t1(self) -> float:
        return self.N ** self.omega_1 / self.N ** (1.0 / 3.0)

    def i_star_value(self) -> int:
        return self.i_star if self.i_star > 0 else self.N

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        for name in ("N", "trials", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("t", "dt_max", "master_seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if not (0 < self.omega_1 < self.omega_ell < self.omega_A):
            raise ConfigError("exponent hierarchy omega_1 < omega_ell < omega_A violated")
        return self

    def initial_data(self) -> InitialData:
        if self.profile == "sqrt":
            return quantile_initial_data(("sqrt", self.profile_param), self.N)
        if self.profile == "point":
            return quantile_initial_data(("point", self.profile_param), self.N)
        if self.profile == "two_point":
            return quantile_initial_data(("two_point", -self.profile_param,
                                          self.profile_param), self.N)
        raise ConfigError(f"unknown profile {self.profile!r}")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def parse_config_text(text: str) -> RunConfig:
    """Parse flat `key = value` lines (# comments allowed) into a config."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        ftype = _FIELD_TYPES[key]
        try:
            if ftype in ("int", int):
                kwargs[key] = int(val)
            elif ftype in ("float", float):
                kwargs[key] = float(val)
            else:
                kwargs[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return RunConfig(**kwargs).validate()


@dataclass
class RunManifest:
    """Reproducibility record of one run."""

    config: dict
    code_version: str
    trial_seeds: list
    wall_clock: float
    digests: dict
    verdicts: dict
    complete: bool

    def passed(self) -> bool:
        return self.complete and all(self.verdicts.values())


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _write_manifest(outdir: str, config: RunConfig, verdicts: dict,
                    files: list, t_start: float, complete: bool) -> RunManifest:
    manifest = RunManifest(
        config=dataclasses.asdict(config),
        code_version=__version__,
        trial_seeds=[[config.master_seed, m] for m in range(config.trials)],
        wall_clock=_time.time() - t_start,
        digests={os.path.basename(f): _digest(f) for f in files},
        verdicts=verdicts,
        complete=complete,
    )
    payload = dataclasses.asdict(manifest)
    atomic_write(os.path.join(outdir, "manifest.json"),
                 (json.dumps(payload, sort_keys=True, indent=1) + "\n").encode())
    return manifest


def _map_trials(fn, n_trials: int, workers: int):
    """Evaluate fn(trial) for all trials; merge is order-independent.

    fn must be picklable (a top-level callable) when workers > 1.
    """
    if workers <= 1:
        return [fn(m) for m in range(n_trials)]
    import multiprocessing as mp

    with mp.get_context("fork").Pool(workers) as pool:
        indexed = pool.map(_TrialCall(fn), range(n_trials),
                           chunksize=max(1, n_trials // (4 * workers)))
    return [res for _, res in sorted(indexed)]


class _TrialCall:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, m):
        return (m, self.fn(m))


class _RescaledTrial:
    """One matrix-route trial producing rescaled edge statistics."""

    def __init__(self, master_seed, role, V, t, prof, k):
        self.master_seed = master_seed
        self.role = role
        self.V = V
        self.t = t
        self.prof = prof
        self.k = k

    def __call__(self, m):
        stream = derive_stream(self.master_seed, m, self.role)
        lam = ensemble_eigenvalues(self.V, self.t, stream)
        return rescaled_edge_statistics(lam, self.prof, self.prof.i0, self.k)


class _SpectrumTrial:
    """One matrix-route trial producing the full sorted spectrum."""

    def __init__(self, master_seed, role, V, t):
        self.master_seed = master_seed
        self.role = role
        self.V = V
        self.t = t

    def __call__(self, m):
        return ensemble_eigenvalues(self.V, self.t,
                                    derive_stream(self.master_seed, m, self.role))


# ---------------------------------------------------------------------------
# pipelines


def _run_edge_law(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    prof = compute_profile(V, cfg.t)
    table = build_density_table(V, cfg.t)
    kap = np.geomspace(1e-4, 1e-2, 9) * cfg.t ** 2
    rho = density_grid(V, cfg.t, prof.E_minus + kap)
    slope = np.polyfit(np.log(kap), np.log(rho), 1)[0]
    coeff = float(np.mean(rho * np.pi / (prof.gamma0 ** 1.5 * np.sqrt(kap))))
    idx = np.arange(1, min(cfg.N, 50) + 1)
    gam = quantiles(V, cfg.t, idx)

    f_data = os.path.join(outdir, "initial_data.txt")
    f_dens = os.path.join(outdir, "density.csv")
    f_quant = os.path.join(outdir, "quantiles.csv")
    f_rep = os.path.join(outdir, "edge_law.json")
    save_initial_data(V, f_data)
    save_density_table(table, f_dens)
    save_quantile_table(idx, gam, f_quant)
    report = {
        "meta": {"experiment": cfg.experiment, "N": cfg.N, "t": cfg.t,
                 "profile": cfg.profile, "fingerprint": prof.data_fingerprint},
        "envelopes": {"slope_target": 0.5, "slope_tol": 0.02, "coeff_tol": 0.02},
        "per_trial": {"xi_minus": prof.xi_minus, "E_minus": prof.E_minus,
                      "gamma0": prof.gamma0, "edge_slope": float(slope),
                      "edge_coefficient_over_invpi": coeff,
                      "mass": table.total_mass},
        "verdicts": {"slope_ok": bool(abs(slope - 0.5) <= 0.02),
                     "coeff_ok": bool(abs(coeff - 1.0) <= 0.02),
                     "mass_ok": bool(abs(table.total_mass - 1.0) <= 1e-6)},
    }
    save_report(report, f_rep)
    return report["verdicts"], [f_data, f_dens, f_quant, f_rep]


def _run_regularity(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    rep = check_eta_regular(V, cfg.eta_star_value())
    f_rep = os.path.join(outdir, "regularity.json")
    report = {
        "meta": {"experiment": cfg.experiment, "N": cfg.N,
                 "eta_star": cfg.eta_star_value()},
        "envelopes": {"max_constant": 50.0},
        "per_trial": {"constant_found": rep.constant_found,
                      "violations": rep.window_violations[:100],
                      "gap_ok": rep.gap_ok, "norm_ok": rep.norm_ok},
        "verdicts": {"passed": rep.passed},
    }
    save_report(report, f_rep)
    return report["verdicts"], [f_rep]


def _run_simulate(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    sys0 = ParticleSystem(positions=V.values + 1e-9 * np.arange(cfg.N),
                          time=0.0, index_offset=1,
                          stream_id=f"simulate:{cfg.master_seed}")
    n_frames = 20
    dt_frame = cfg.t / n_frames
    lines = ["step,time,index,position"]
    sys_t = sys0
    for step in range(n_frames):
        sys_t = sde_evolve(sys_t, dt_frame, cfg.dt_max)
        for p, x in enumerate(sys_t.positions):
            lines.append(f"{step},{'%.17g' % sys_t.time},{p + 1},{'%.17g' % x}")
    f_traj = os.path.join(outdir, "trajectory.csv")
    atomic_write(f_traj, ("\n".join(lines) + "\n").encode())
    ordered = bool(np.all(np.diff(sys_t.positions) > 0))
    f_rep = os.path.join(outdir, "simulate.json")
    save_report({"meta": {"experiment": cfg.experiment, "N": cfg.N, "t": cfg.t},
                 "envelopes": {}, "per_trial": {"final_time": sys_t.time},
                 "verdicts": {"ordered": ordered}}, f_rep)
    return {"ordered": ordered}, [f_traj, f_rep]


def _sample_rescaled(cfg: RunConfig, V: InitialData, t: float, prof, role: str):
    fn = _RescaledTrial(cfg.master_seed, role, V, t, prof, cfg.k)
    rows = _map_trials(fn, cfg.trials, cfg.workers)
    return EdgeSampleSet(samples=np.array(rows),
                         meta={"N": cfg.N, "t": t, "gamma0": prof.gamma0,
                               "E_minus": prof.E_minus, "i0": prof.i0,
                               "fingerprint": prof.data_fingerprint,
                               "master_seed": cfg.master_seed, "role": role})


def _goe_profile(N: int):
    from .freeconv import FreeConvolutionProfile

    return FreeConvolutionProfile(t=1.0, xi_minus=-1.0, E_minus=-2.0, gamma0=1.0,
                                  solver_tol=0.0, i0=1, N=N, data_fingerprint="goe")


def _sample_goe(cfg: RunConfig):
    prof = _goe_profile(cfg.N)
    V0 = InitialData(values=np.zeros(cfg.N))
    fn = _RescaledTrial(cfg.master_seed, "goe-baseline", V0, 1.0, prof, cfg.k)
    rows = _map_trials(fn, cfg.trials, cfg.workers)
    return EdgeSampleSet(samples=np.array(rows),
                         meta={"N": cfg.N, "role": "goe-baseline",
                               "master_seed": cfg.master_seed})


def _run_universality(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    eta_star = cfg.eta_star_value()
    t_main = cfg.t_factor * np.sqrt(eta_star)
    t_ctrl = cfg.control_t_factor * np.sqrt(eta_star)
    prof_main = compute_profile(V, t_main)
    prof_ctrl = compute_profile(V, t_ctrl)

    A = _sample_rescaled(cfg, V, t_main, prof_main, "dbm-edge")
    B = _sample_goe(cfg)
    C = _sample_rescaled(cfg, V, t_ctrl, prof_ctrl, "dbm-edge-control")
    cmp_main = two_sample_compare(A, B, ks_threshold=cfg.ks_threshold,
                                  gap_threshold=cfg.gap_threshold)
    cmp_ctrl = two_sample_compare(C, B, ks_threshold=cfg.ks_threshold,
                                  gap_threshold=cfg.gap_threshold)

    f_a = os.path.join(outdir, "samples_main.csv")
    f_b = os.path.join(outdir, "samples_goe.csv")
    f_c = os.path.join(outdir, "samples_control.csv")
    save_sample_set(A, f_a)
    save_sample_set(B, f_b)
    save_sample_set(C, f_c)
    verdicts = {
        "ks_ok": bool(np.all(cmp_main.ks <= cfg.ks_threshold)),
        "gaps_ok": bool(all(abs(g) <= cfg.gap_threshold
                            for g, _ in cmp_main.fgaps.values())),
        "se_ok": bool(all(se <= 0.02 for _, se in cmp_main.fgaps.values())),
        "control_separates": bool(cmp_ctrl.ks[0] > max(cfg.ks_threshold,
                                                       cmp_main.ks[0])),
    }
    f_rep = os.path.join(outdir, "universality.json")
    save_report({
        "meta": {"experiment": cfg.experiment, "N": cfg.N, "trials": cfg.trials,
                 "t_main": t_main, "t_control": t_ctrl, "eta_star": eta_star,
                 "gamma0": prof_main.gamma0, "E_minus": prof_main.E_minus},
        "envelopes": {"ks_threshold": cfg.ks_threshold,
                      "gap_threshold": cfg.gap_threshold},
        "per_trial": {"ks_main": cmp_main.ks, "ks_control": cmp_ctrl.ks,
                      "fgaps_main": {k: list(v) for k, v in cmp_main.fgaps.items()}},
        "verdicts": verdicts,
    }, f_rep)
    return verdicts, [f_a, f_b, f_c, f_rep]


class _CoupleTrial:
    """One coupled lambda/mu run; returns edge differences at 0 and t1."""

    def __init__(self, cfg: "RunConfig", V, t0, g0, i0, E0, E_end, dur):
        self.cfg = cfg
        self.V = V
        self.t0 = t0
        self.g0 = g0
        self.i0 = i0
        self.E0 = E0
        self.E_end = E_end
        self.dur = dur

    def __call__(self, m):
        cfg, N, i0 = self.cfg, self.cfg.N, self.i0
        lam0 = self.g0 * ensemble_eigenvalues(
            self.V, self.t0, derive_stream(cfg.master_seed, m, "couple-lambda"))
        mu0 = ensemble_eigenvalues(InitialData(values=np.zeros(N)), 1.0,
                                   derive_stream(cfg.master_seed, m, "couple-mu"))
        n_steps = int(round(self.dur / cfg.dt_max))
        ledger = NoiseLedger(("couple", cfg.master_seed, m), t0=0.0,
                             dt_top=cfg.dt_max, n_steps=n_steps,
                             idx_lo=min(2 - i0, 1), idx_hi=N + 1)
        lam_sys = ParticleSystem(lam0, 0.0, index_offset=2 - i0,
                                 stream_id=f"lam{m}")
        mu_sys = ParticleSystem(mu0, 0.0, index_offset=1, stream_id=f"mu{m}")
        lam_t = sde_evolve(lam_sys, self.dur, cfg.dt_max, shared_noise=ledger,
                           max_depth=cfg.sde_depth)
        mu_t = sde_evolve(mu_sys, self.dur, cfg.dt_max, shared_noise=ledger,
                          max_depth=cfg.sde_depth)
        d0 = (lam0[i0 - 1] - self.E0) - (mu0[0] + 2.0)
        dt_ = ((lam_t.positions[i0 - 1] - self.E_end)
               - (mu_t.positions[0] + 2.0 * np.sqrt(1.0 + self.dur)))
        return d0, dt_


def _run_couple(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    t0 = cfg.t0 if cfg.t0 > 0 else cfg.N ** cfg.omega_0 / cfg.N ** (1.0 / 3.0)
    t1 = cfg.t1_override if cfg.t1_override > 0 else cfg.t1()
    edge0 = find_edge(V, t0)
    g0 = compute_profile(V, t0).gamma0
    i0 = V.edge_index(-0.5)
    n_steps = max(1, int(np.ceil(t1 / cfg.dt_max)))
    dur = n_steps * cfg.dt_max
    E0 = g0 * edge0[1]
    E_end = g0 * find_edge(V, t0 + dur / g0 ** 2)[1]
    fn = _CoupleTrial(cfg, V, t0, g0, i0, E0, E_end, dur)
    pairs = _map_trials(fn, cfg.trials, cfg.workers)
    d0 = np.array([p[0] for p in pairs])
    d1 = np.array([p[1] for p in pairs])
    med0 = float(np.median(np.abs(d0)))
    med1 = float(np.median(np.abs(d1)))
    verdicts = {"contracts_3x": bool(med1 <= med0 / 3.0),
                "below_scale": bool(med1 <= cfg.N ** (-2.0 / 3.0))}
    f_rep = os.path.join(outdir, "couple.json")
    save_report({
        "meta": {"experiment": cfg.experiment, "N": cfg.N, "trials": cfg.trials,
                 "t0": t0, "t1": t1, "gamma0": g0, "i0": i0},
        "envelopes": {"scale": cfg.N ** (-2.0 / 3.0)},
        "per_trial": {"initial": d0, "final": d1,
                      "median_initial": med0, "median_final": med1},
        "verdicts": verdicts,
    }, f_rep)
    return verdicts, [f_rep]


def _run_rigidity(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    prof = compute_profile(V, cfg.t)
    i_range = np.arange(1, cfg.N // 4 + 1)
    gam = quantiles(V, cfg.t, i_range)
    fn = _SpectrumTrial(cfg.master_seed, "rigidity", V, cfg.t)
    spectra = np.array(_map_trials(fn, cfg.trials, cfg.workers))
    rep = rigidity_report(spectra, gam, i_range, i0=prof.i0,
                          envelope_const=cfg.envelope_const)
    verdicts = {"fraction_ok": bool(rep.fraction_below >= 0.95)}
    f_rep = os.path.join(outdir, "rigidity.json")
    save_report({
        "meta": {"experiment": cfg.experiment, "N": cfg.N, "t": cfg.t,
                 "trials": cfg.trials, "i0": prof.i0},
        "envelopes": {"envelope": rep.envelope,
                      "envelope_const": cfg.envelope_const},
        "per_trial": {"max_normalized_dev": rep.per_trial_max,
                      "fraction_below": rep.fraction_below},
        "verdicts": verdicts,
    }, f_rep)
    return verdicts, [f_rep]


def _run_local_law(cfg: RunConfig, outdir: str):
    V = cfg.initial_data()
    fn = _SpectrumTrial(cfg.master_seed, "local-law", V, cfg.t)
    spectra = np.array(_map_trials(fn, cfg.trials, cfg.workers))
    rep = local_law_report(V, cfg.t, spectra, cfg.sigma)
    q95 = rep.quantile(0.95)
    bound = cfg.ratio_threshold * np.log(cfg.N)
    verdicts = {"right_ok": bool(q95[0] <= bound), "left_ok": bool(q95[1] <= bound)}
    f_rep = os.path.join(outdir, "local_law.json")
    save_report({
        "meta": {"experiment": cfg.experiment, "N": cfg.N, "t": cfg.t,
                 "trials": cfg.trials, "sigma": cfg.sigma},
        "envelopes": {"bound": float(bound)},
        "per_trial": {"sup_ratio_right": rep.sup_ratio_right,
                      "sup_ratio_left": rep.sup_ratio_left,
                      "q95_right": q95[0], "q95_left": q95[1]},
        "verdicts": verdicts,
    }, f_rep)
    return verdicts, [f_rep]


def _probe_system(cfg: RunConfig, law_branch, trial: int):
    """Rigidity-consistent shifted configuration for generator probes."""
    N = cfg.N
    idx = np.arange(1, N + 1)
    gam = law_branch.hat_gamma(idx, N)
    stream = derive_stream(cfg.master_seed, trial, "probe-config")
    noise = 0.1 * stream.standard_normal(N) / (N ** (2.0 / 3.0) * idx ** (1.0 / 3.0))
    pos = np.sort(gam + noise)
    if pos[0] <= 0:
        pos += (1e-6 - pos[0])
    return ParticleSystem(positions=pos, time=0.0, index_offset=1,
                          stream_id=f"probe{trial}")


def _probe_topology(cfg: RunConfig):
    return short_range_topology(cfg.N, cfg.omega_ell, cfg.omega_A,
                                cfg.i_star_value(), omega_1=cfg.omega_1,
                                omega_0=cfg.omega_0)


def _run_probe_finite_speed(cfg: RunConfig, outdir: str):
    if not (1 <= cfg.barrier_a < cfg.barrier_b <= cfg.N):
        raise ConfigError(
            f"barrier ({cfg.barrier_a}, {cfg.barrier_b}) outside [1, N={cfg.N}]")
    branch = semicircle_branch(1.0)
    law = LawPath([0.0], [(branch, branch)])
    topo = _probe_topology(cfg)
    sys0 = _probe_system(cfg, branch, 0)
    snap = build_generator(sys0, topo, law, alpha=0.0)
    path = ConstantGeneratorPath(snap)
    horizon = cfg.horizon_factor * cfg.t1()
    far = finite_speed_probe(path, cfg.barrier_a, cfg.barrier_b, horizon)
    near = finite_speed_probe(path, cfg.barrier_a, cfg.barrier_a + 1, horizon)
    verdicts = {"barrier_ok": bool(far <= 1e-6), "adjacent_ok": bool(near >= 1e-3)}
    f_rep = os.path.join(outdir, "finite_speed.json")
    save_report({
        "meta": {"experiment": cfg.experiment, "N": cfg.N,
                 "a": cfg.barrier_a, "b": cfg.barrier_b, "horizon": horizon,
                 "ell": topo.ell},
        "envelopes": {"barrier": 1e-6, "adjacent": 1e-3},
        "per_trial": {"cross_barrier": far, "adjacent": near},
        "verdicts": verdicts,
    }, f_rep)
    return verdicts, [f_rep]


def _run_probe_energy(cfg: RunConfig, outdir: str):
    branch = semicircle_branch(1.0)
    law = LawPath([0.0], [(branch, branch)])
    topo = _probe_topology(cfg)
    t_lo = cfg.N ** (-1.0 / 3.0)
    ts = cfg.horizon_factor * np.geomspace(t_lo, 12.0 * t_lo, 7)
    support = max(4, int(topo.ell ** 3 * cfg.N ** cfg.delta))
    slopes = []
    curves = []
    n_snapshots = min(cfg.trials, 6)
    for trial in range(n_snapshots):
        sys0 = _probe_system(cfg, branch, trial)
        snap = build_generator(sys0, topo, law, alpha=0.0)
        path = ConstantGeneratorPath(snap)
        stream = derive_stream(cfg.master_seed, trial, "probe-energy-w")
        w = np.zeros(cfg.N)
        w[:support] = np.abs(stream.standard_normal(support))
        w /= np.linalg.norm(w)
        ratios = energy_decay_curve(path, w, p=2, ts=ts)
        slopes.append(float(np.polyfit(np.log(ts), np.log(ratios), 1)[0]))
        curves.append(ratios)
    slopes = np.asarray(slopes)
    target = -1.5 * (1.0 - 0.3) + 0.3
    verdicts = {"decay_ok": bool(np.mean(slopes) <= target)}
    f_rep = os.path.join(outdir, "energy_decay.json")
    save_report({
        "meta": {"experiment": cfg.experiment, "N": cfg.N, "p": 2,
                 "support": support, "ts": ts},
        "envelopes": {"slope_bound": target},
        "per_trial": {"slopes": slopes, "curves": np.asarray(curves)},
        "verdicts": verdicts,
    }, f_rep)
    return verdicts, [f_rep]


_PIPELINES = {
    "edge-law": _run_edge_law,
    "regularity": _run_regularity,
    "simulate": _run_simulate,
    "universality": _run_universality,
    "couple": _run_couple,
    "rigidity": _run_rigidity,
    "local-law": _run_local_law,
    "probe-finite-speed": _run_probe_finite_speed,
    "probe-energy": _run_probe_energy,
}


def run_experiment(config: RunConfig) -> RunManifest:
    """Execute the configured pipeline and write artifacts plus manifest."""
    config.validate()
    outdir = config.outdir
    os.makedirs(outdir, exist_ok=True)
    t_start = _time.time()
    try:
        verdicts, files = _PIPELINES[config.experiment](config, outdir)
    except Exception:
        _write_manifest(outdir, config, {}, [], t_start, complete=False)
        raise
    return _write_manifest(outdir, config, verdicts, files, t_start, complete=True)


def replay_manifest(manifest_path: str, outdir: str) -> RunManifest:
    """Re-run the configuration recorded in a manifest into a new directory."""
    with open(manifest_path) as fh:
        payload = json.load(fh)
    cfg = RunConfig(**payload["config"])
    cfg.outdir = outdir
    return run_experiment(cfg)


def render_report(outdir: str):
    """Emit gnuplot-ready two-column data files and a text summary."""
    from .serialize import load_report, load_sample_set

    with open(os.path.join(outdir, "manifest.json")) as fh:
        manifest = json.load(fh)
    exp = manifest["config"]["experiment"]
    plot_dir = os.path.join(outdir, "plotdata")
    os.makedirs(plot_dir, exist_ok=True)
    written = []

    def put(name, lines):
        path = os.path.join(plot_dir, name)
        atomic_write(path, ("\n".join(lines) + "\n").encode())
        written.append(path)

    if exp == "universality":
        A = load_sample_set(os.path.join(outdir, "samples_main.csv"))
        B = load_sample_set(os.path.join(outdir, "samples_goe.csv"))
        from .edgestats import ecdf

        xa, fa = ecdf(A.samples[:, 0])
        xb, fb = ecdf(B.samples[:, 0])
        put("ecdf_main.dat", ["# x F(x)"] + [f"{x:.10g} {f:.10g}"
                                             for x, f in zip(xa, fa)])
        put("ecdf_goe.dat", ["# x F(x)"] + [f"{x:.10g} {f:.10g}"
                                            for x, f in zip(xb, fb)])
    if exp == "edge-law":
        rep = load_report(os.path.join(outdir, "edge_law.json"))
        rows = _read_density_csv(os.path.join(outdir, "density.csv"))
        put("density.dat", ["# E rho"] + [f"{e:.10g} {r:.10g}" for e, r in rows])
        _ = rep
    if exp == "probe-energy":
        rep = load_report(os.path.join(outdir, "energy_decay.json"))
        ts = rep["meta"]["ts"]
        curves = np.asarray(rep["per_trial"]["curves"])
        mean_curve = curves.mean(axis=0)
        slopes = np.asarray(rep["per_trial"]["slopes"])
        boot = _bootstrap_ci(slopes)
        put("decay.dat", ["# t ratio"] + [f"{t:.10g} {r:.10g}"
                                          for t, r in zip(ts, mean_curve)])
        put("decay_fit.dat", [f"# slope {slopes.mean():.6g} "
                              f"CI {boot[0]:.6g} {boot[1]:.6g}"])

    summary = [f"experiment: {exp}", f"complete: {manifest['complete']}"]
    for name, ok in manifest["verdicts"].items():
        summary.append(f"verdict {name}: {'pass' if ok else 'FAIL'}")
    put("summary.txt", summary)
    return written


def _read_density_csv(path: str):
    with open(path) as fh:
        lines = fh.read().splitlines()
    return [tuple(float(x) for x in ln.split(",")) for ln in lines[1:] if ln]


def _bootstrap_ci(values: np.ndarray, n_boot: int = 400, seed: int = 7):
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 0],
                                                            dtype=np.uint64)))
    means = [values[gen.integers(0, values.size, values.size)].mean()
             for _ in range(n_boot)]
    return (float(np.quantile(means, 0.025)), float(np.quantile(means, 0.975)))
