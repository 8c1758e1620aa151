"""Acceptance criteria, one test per criterion, at their stated tolerances.

Each test prints a single PASS/FAIL line (visible with pytest -s) before
asserting, so a full run doubles as the acceptance report.
"""

import time

import numpy as np
import pytest

from dbmedge.dbm import ParticleSystem, ensemble_eigenvalues
from dbmedge.edgestats import (local_law_report, rescaled_edge_statistics,
                               rigidity_report, two_sample_compare)
from dbmedge.experiments import (RunConfig, _map_trials, _RescaledTrial,
                                 _SpectrumTrial, run_experiment)
from dbmedge.edgestats import EdgeSampleSet
from dbmedge.freeconv import (compute_profile, density, density_grid,
                              find_edge, gamma0, quantiles)
from dbmedge.initial_data import InitialData, quantile_initial_data
from dbmedge.shortrange import (ConstantGeneratorPath, LawPath, build_generator,
                                energy_decay_curve, finite_speed_probe,
                                propagate_semigroup, semicircle_branch,
                                short_range_topology)
from dbmedge.streams import derive_stream

WORKERS = 2


def report(num, name, ok, detail):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} -- {detail}")
    return ok


def random_regular_data(rng):
    """Random square-root-edge density (optionally with a detached bump)."""
    b = rng.uniform(0.6, 1.8)
    x_edge = np.linspace(0, b, 384)
    cdf_edge = (x_edge / b) ** 1.5
    if rng.random() < 0.5:
        lo, hi = b + 0.2, b + rng.uniform(0.5, 1.0)
        w = rng.uniform(0.15, 0.35)
        x = np.concatenate((x_edge, np.linspace(lo, hi, 128)))
        cdf = np.concatenate(((1 - w) * cdf_edge,
                              1 - w + w * np.linspace(0, 1, 128)))
    else:
        x, cdf = x_edge, cdf_edge
    N = int(rng.integers(200, 400))
    return quantile_initial_data(("table", x, cdf), N)


class TestAcceptance:
    def test_01_point_mass_oracle(self):
        t_start = time.time()
        V = InitialData(values=np.zeros(16))
        xi_m, E_m = find_edge(V, 1.0)
        g0 = gamma0(V, 1.0, (xi_m, E_m))
        rho0 = density(V, 1.0, 0.0)
        xi_m2, E_m2 = find_edge(V, 0.25)
        g02 = gamma0(V, 0.25, (xi_m2, E_m2))
        elapsed = time.time() - t_start
        ok = (abs(E_m + 2.0) <= 1e-10 and abs(xi_m + 1.0) <= 1e-10
              and abs(g0 - 1.0) <= 1e-8 and abs(rho0 - 1 / np.pi) <= 1e-6
              and abs(E_m2 + 1.0) <= 1e-10 and abs(g02 - 2.0) <= 1e-8
              and elapsed < 1.0)
        assert report(1, "point-mass oracle", ok,
                      f"E-={E_m:.2e}+2, xi-={xi_m:.2e}+1, gamma0={g0:.10f}, "
                      f"rho(0)={rho0:.8f}, t={elapsed:.2f}s")

    def test_02_scaling_covariance(self):
        t_start = time.time()
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(20):
            V = random_regular_data(rng)
            t = rng.uniform(0.05, 0.25)
            e = find_edge(V, t)
            g = gamma0(V, t, e)
            for gam in (0.5, 2.0):
                Vs = InitialData(values=gam * V.values,
                                 norm_exponent=V.norm_exponent + 1)
                es = find_edge(Vs, gam * gam * t)
                gs = gamma0(Vs, gam * gam * t, es)
                worst = max(worst,
                            abs(es[1] / (gam * e[1]) - 1),
                            abs(es[0] / (gam * e[0]) - 1),
                            abs(gs / (g / gam) - 1))
        elapsed = time.time() - t_start
        ok = worst <= 1e-7 and elapsed < 10.0
        assert report(2, "scaling covariance", ok,
                      f"worst rel dev {worst:.2e}, t={elapsed:.1f}s")

    def test_03_edge_sqrt_and_gamma0_normalization(self):
        t_start = time.time()
        V = quantile_initial_data(("sqrt", 1.0), 1000)
        t = 0.1
        e = find_edge(V, t)
        g0 = gamma0(V, t, e)
        kap = np.geomspace(1e-4, 1e-2, 9) * t * t
        rho = density_grid(V, t, e[1] + kap)
        slope = np.polyfit(np.log(kap), np.log(rho), 1)[0]
        coeff = float(np.mean(rho * np.pi / (g0 ** 1.5 * np.sqrt(kap))))
        elapsed = time.time() - t_start
        ok = abs(slope - 0.5) <= 0.02 and abs(coeff - 1.0) <= 0.02 and elapsed < 30
        assert report(3, "edge square-root / gamma0 normalization", ok,
                      f"slope={slope:.4f}, coeff={coeff:.4f}, t={elapsed:.1f}s")

    def test_04_edge_universality_desk(self):
        t_start = time.time()
        N, M, k = 400, 4000, 2
        V = quantile_initial_data(("sqrt", 1.0), N)
        eta_star = N ** (-0.55)
        t_main = 3.0 * np.sqrt(eta_star)
        t_ctrl = 0.3 * np.sqrt(eta_star)
        prof_main = compute_profile(V, t_main)
        prof_ctrl = compute_profile(V, t_ctrl)
        goe_prof = compute_profile(InitialData(values=np.zeros(N)), 1.0)

        A = np.array(_map_trials(_RescaledTrial(1, "acc4-main", V, t_main,
                                                prof_main, k), M, WORKERS))
        B = np.array(_map_trials(_RescaledTrial(1, "acc4-goe",
                                                InitialData(values=np.zeros(N)),
                                                1.0, goe_prof, k), M, WORKERS))
        C = np.array(_map_trials(_RescaledTrial(1, "acc4-ctrl", V, t_ctrl,
                                                prof_ctrl, k), M, WORKERS))
        rep = two_sample_compare(EdgeSampleSet(A), EdgeSampleSet(B))
        rep_ctrl = two_sample_compare(EdgeSampleSet(C), EdgeSampleSet(B))
        gaps = [abs(g) for g, _ in rep.fgaps.values()]
        ses = [se for _, se in rep.fgaps.values()]
        elapsed = time.time() - t_start
        ok = (np.all(rep.ks <= 0.05) and max(gaps) <= 0.05
              and max(ses) <= 0.02
              and rep_ctrl.ks[0] > max(0.05, rep.ks[0]))
        assert report(4, "edge universality", ok,
                      f"KS={np.round(rep.ks, 4)}, max gap={max(gaps):.4f}, "
                      f"max SE={max(ses):.4f}, control KS0={rep_ctrl.ks[0]:.3f}, "
                      f"t={elapsed:.0f}s")

    def test_05_rigidity(self):
        t_start = time.time()
        N, M = 1000, 100
        V = InitialData(values=np.zeros(N))
        i_range = np.arange(1, N // 4 + 1)
        gam = quantiles(V, 1.0, i_range)
        spectra = np.array(_map_trials(_SpectrumTrial(2, "acc5", V, 1.0),
                                       M, WORKERS))
        rep = rigidity_report(spectra, gam, i_range, envelope_const=5.0)
        elapsed = time.time() - t_start
        ok = rep.fraction_below >= 0.95 and elapsed < 120
        assert report(5, "rigidity", ok,
                      f"fraction={rep.fraction_below:.3f} below 5logN={rep.envelope:.1f}, "
                      f"t={elapsed:.0f}s")

    def test_06_local_law(self):
        t_start = time.time()
        N, M, sigma = 2000, 50, 0.1
        V = InitialData(values=np.zeros(N))
        spectra = np.array(_map_trials(_SpectrumTrial(3, "acc6", V, 1.0),
                                       M, WORKERS))
        rep = local_law_report(V, 1.0, spectra, sigma)
        q_r, q_l = rep.quantile(0.95)
        bound = 10 * np.log(N)
        elapsed = time.time() - t_start
        ok = q_r <= bound and q_l <= bound and elapsed < 300
        assert report(6, "local law", ok,
                      f"q95 right={q_r:.1f}, left={q_l:.1f}, bound={bound:.0f}, "
                      f"t={elapsed:.0f}s")

    def test_07_coupling_contraction(self, tmp_path):
        t_start = time.time()
        cfg = RunConfig(experiment="couple", N=500, trials=25,
                        t1_override=1.0, dt_max=4e-3, sde_depth=4,
                        workers=WORKERS, outdir=str(tmp_path / "couple"))
        man = run_experiment(cfg)
        import json

        rep = json.load(open(tmp_path / "couple" / "couple.json"))
        med0 = rep["per_trial"]["median_initial"]
        med1 = rep["per_trial"]["median_final"]
        elapsed = time.time() - t_start
        ok = (man.verdicts["contracts_3x"] and man.verdicts["below_scale"]
              and elapsed < 600)
        assert report(7, "coupling contraction", ok,
                      f"median {med0:.5f} -> {med1:.5f} "
                      f"(ratio {med0 / med1:.2f}, scale {500 ** (-2 / 3):.5f}), "
                      f"t={elapsed:.0f}s")

    def _probe_setup(self, N=2000):
        branch = semicircle_branch(1.0)
        law = LawPath([0.0], [(branch, branch)])
        topo = short_range_topology(N, 0.10, 0.45, N)
        idx = np.arange(1, N + 1)
        gam = branch.hat_gamma(idx, N)
        noise = 0.1 * derive_stream(4, 0, "acc-probe").standard_normal(N) \
            / (N ** (2.0 / 3.0) * idx ** (1.0 / 3.0))
        pos = np.sort(gam + noise)
        sys0 = ParticleSystem(pos, 0.0, 1, "acc-probe")
        return branch, law, topo, build_generator(sys0, topo, law, alpha=0.0)

    def test_08_finite_speed(self):
        t_start = time.time()
        N = 2000
        _, _, _, snap = self._probe_setup(N)
        path = ConstantGeneratorPath(snap)
        t1 = N ** 0.05 / N ** (1.0 / 3.0)
        far = finite_speed_probe(path, 15, 1000, t1)
        near = finite_speed_probe(path, 15, 16, t1)
        elapsed = time.time() - t_start
        ok = far <= 1e-6 and near >= 1e-3 and elapsed < 120
        assert report(8, "finite speed", ok,
                      f"barrier(15,1000)={far:.2e}, adjacent={near:.2e}, "
                      f"t={elapsed:.0f}s")

    def test_09_semigroup_structure(self):
        t_start = time.time()
        rng = np.random.default_rng(9)
        branch = semicircle_branch(1.0)
        law = LawPath([0.0], [(branch, branch)])
        n_ok = 0
        n_snap = 200
        for s in range(n_snap):
            N = int(rng.integers(60, 140))
            om_l = rng.uniform(0.08, 0.20)
            om_A = rng.uniform(0.30, 0.50)
            topo = short_range_topology(N, om_l, om_A, N)
            idx = np.arange(1, N + 1)
            pos = branch.hat_gamma(idx, N)
            pos = np.sort(pos + 0.1 * rng.standard_normal(N)
                          / (N ** (2.0 / 3.0) * idx ** (1.0 / 3.0)))
            if pos[0] <= 0:
                pos += 1e-6 - pos[0]
            snap = build_generator(ParticleSystem(pos, 0.0, 1, f"a9-{s}"),
                                   topo, law, alpha=0.0)
            path = ConstantGeneratorPath(snap)
            t1 = N ** 0.05 / N ** (1.0 / 3.0)
            w = rng.standard_normal(N)
            wpos = np.abs(rng.standard_normal(N))
            v = propagate_semigroup(path, w, 0.0, t1)
            vpos = propagate_semigroup(path, wpos, 0.0, 10 * t1)
            good = True
            for p in (1, 2, np.inf):
                def norm(x):
                    return np.max(np.abs(x)) if np.isinf(p) \
                        else np.sum(np.abs(x) ** p) ** (1.0 / p)

                good &= norm(v) <= norm(w) * (1 + 1e-12)
            good &= bool(np.all(vpos >= -1e-15))
            good &= 0.5 * wpos.sum() <= vpos.sum() <= wpos.sum() * (1 + 1e-12)
            n_ok += good
        elapsed = time.time() - t_start
        ok = n_ok == n_snap and elapsed < 120
        assert report(9, "semigroup structure", ok,
                      f"{n_ok}/{n_snap} snapshots clean, t={elapsed:.0f}s")

    def test_10_energy_decay(self):
        t_start = time.time()
        N = 2000
        branch, law, topo, _ = self._probe_setup(N)
        t_lo = N ** (-1.0 / 3.0)
        ts = np.geomspace(t_lo, 12 * t_lo, 7)
        support = max(4, int(topo.ell ** 3 * N ** 0.02))
        slopes = []
        for trial in range(4):
            idx = np.arange(1, N + 1)
            gam = branch.hat_gamma(idx, N)
            noise = 0.1 * derive_stream(5, trial, "acc10").standard_normal(N) \
                / (N ** (2.0 / 3.0) * idx ** (1.0 / 3.0))
            pos = np.sort(gam + noise)
            snap = build_generator(ParticleSystem(pos, 0.0, 1, f"a10-{trial}"),
                                   topo, law, alpha=0.0)
            w = np.zeros(N)
            w[:support] = np.abs(derive_stream(5, trial, "acc10w")
                                 .standard_normal(support))
            w /= np.linalg.norm(w)
            r = energy_decay_curve(ConstantGeneratorPath(snap), w, 2, ts)
            slopes.append(np.polyfit(np.log(ts), np.log(r), 1)[0])
        mean_slope = float(np.mean(slopes))
        target = -1.5 * (1.0 - 0.3) + 0.3
        elapsed = time.time() - t_start
        ok = mean_slope <= target and elapsed < 300
        assert report(10, "energy decay", ok,
                      f"mean slope={mean_slope:.3f} <= {target:.2f}, "
                      f"t={elapsed:.0f}s")
