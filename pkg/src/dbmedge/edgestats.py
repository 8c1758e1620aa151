"""Rescaled edge statistics and their statistical verdicts.

Raw spectra become vectors gamma0 * N^(2/3) * (lambda_{i0+j} - E_minus);
sample sets of those vectors are compared to empirical GOE baselines by
two-sample Kolmogorov-Smirnov distances and bounded-Lipschitz test
function gaps, and checked against rigidity and local-law envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOverflow, ShapeMismatch
from .freeconv import FreeConvolutionProfile, solve_mfc
from .initial_data import InitialData

__all__ = [
    "EdgeSampleSet",
    "ComparisonReport",
    "rescaled_edge_statistics",
    "two_sample_compare",
    "default_test_functions",
    "rigidity_report",
    "local_law_report",
    "ecdf",
    "ks_distance",
]


@dataclass
class EdgeSampleSet:
    """Monte Carlo sample matrix of rescaled edge statistics.

    samples has shape (M, k+1); row m holds the rescaled first k+1 edge
    eigenvalues of trial m and is non-decreasing across columns.
    """

    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))

    @property
    def trials(self) -> int:
        return self.samples.shape[0]

    @property
    def k(self) -> int:
        return self.samples.shape[1] - 1


def rescaled_edge_statistics(spectrum, profile: FreeConvolutionProfile,
                             i0: int, k: int) -> np.ndarray:
    """gamma0 * N^(2/3) * (lambda_{i0+j} - E_minus) for j = 0..k."""
    spectrum = np.asarray(spectrum, dtype=float)
    N = spectrum.size
    if i0 < 1 or i0 + k > N:
        raise IndexOverflow(f"need 1 <= i0 and i0+k <= N; got i0={i0}, k={k}, N={N}")
    window = spectrum[i0 - 1: i0 + k]
    return profile.gamma0 * N ** (2.0 / 3.0) * (window - profile.E_minus)


def ecdf(samples):
    """Right-continuous empirical CDF as a (points, heights) step table."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("ecdf needs at least one sample")
    return x, np.arange(1, x.size + 1) / x.size


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate((a, b))
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def _smooth_indicator(x0: float, width: float = 0.5):
    def f(rows):
        return 0.5 * (1.0 + np.tanh((x0 - rows[:, 0]) / width))

    return f


def default_test_functions(k: int) -> dict:
    """Bounded test functions with bounded gradient: coordinatewise tanh,
    their product, and smoothed indicators of (-inf, x] at a few x."""
    fns = {}
    for j in range(k + 1):
        fns[f"tanh[{j}]"] = (lambda rows, j=j: np.tanh(rows[:, j]))
    fns["prod_tanh"] = lambda rows: np.prod(np.tanh(rows), axis=1)
    for x0 in (-2.0, -1.0, 0.0, 1.0):
        fns[f"ind[{x0:g}]"] = _smooth_indicator(x0)
    return fns


@dataclass
class ComparisonReport:
    """Per-coordinate KS distances and test-function gaps with errors."""

    ks: np.ndarray
    fgaps: dict
    pass_threshold_ks: float
    pass_threshold_gap: float
    passed: bool

    def worst_gap(self) -> float:
        return max((abs(g) for g, _ in self.fgaps.values()), default=0.0)


def two_sample_compare(A: EdgeSampleSet, B: EdgeSampleSet, F_list: dict | None = None,
                       ks_threshold: float = 0.05,
                       gap_threshold: float = 0.05) -> ComparisonReport:
    """Compare two sample sets coordinatewise and through test functions.

    Returns per-coordinate KS distances plus Monte Carlo estimates of
    |E F(A) - E F(B)| with standard errors for each test function, and a
    verdict at the supplied thresholds.
    """
    if A.k != B.k:
        raise ShapeMismatch(f"sample sets disagree in k: {A.k} vs {B.k}")
    if A.trials < 2 or B.trials < 2:
        raise ShapeMismatch("need at least two trials per set")
    ks = np.array([ks_distance(A.samples[:, j], B.samples[:, j])
                   for j in range(A.k + 1)])
    fns = default_test_functions(A.k) if F_list is None else F_list
    fgaps = {}
    for name, f in fns.items():
        va = np.asarray(f(A.samples), dtype=float)
        vb = np.asarray(f(B.samples), dtype=float)
        gap = float(np.mean(va) - np.mean(vb))
        se = float(np.sqrt(np.var(va, ddof=1) / va.size + np.var(vb, ddof=1) / vb.size))
        fgaps[name] = (gap, se)
    passed = bool(np.all(ks <= ks_threshold)
                  and all(abs(g) <= gap_threshold for g, _ in fgaps.values()))
    return ComparisonReport(ks=ks, fgaps=fgaps, pass_threshold_ks=ks_threshold,
                            pass_threshold_gap=gap_threshold, passed=passed)


@dataclass
class RigidityReport:
    """Normalized quantile deviations against a polylog envelope."""

    per_trial_max: np.ndarray
    envelope: float
    fraction_below: float
    worst_index: np.ndarray


def rigidity_report(spectra, gamma: np.ndarray, i_range, i0: int = 1,
                    envelope_const: float = 5.0) -> RigidityReport:
    """Check |lambda_{i0+i-1} - gamma_i| * i^(1/3) * N^(2/3) <= C log N.

    spectra is an (M, N) array of sorted trials; gamma holds the classical
    locations for the 1-based indices in i_range.
    """
    spectra = np.atleast_2d(np.asarray(spectra, dtype=float))
    i_range = np.asarray(i_range, dtype=int)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != i_range.shape:
        raise ShapeMismatch("gamma and i_range must align")
    M, N = spectra.shape
    cols = i0 + i_range - 2  # lambda_{i0+i-1} is 1-based
    if cols.min() < 0 or cols.max() >= N:
        raise IndexOverflow("i_range exceeds the spectrum window")
    dev = np.abs(spectra[:, cols] - gamma[None, :])
    norm = dev * i_range[None, :] ** (1.0 / 3.0) * N ** (2.0 / 3.0)
    per_trial = norm.max(axis=1)
    envelope = envelope_const * np.log(N)
    worst = i_range[np.argmax(norm, axis=1)]
    return RigidityReport(per_trial_max=per_trial, envelope=float(envelope),
                          fraction_below=float(np.mean(per_trial <= envelope)),
                          worst_index=worst)


@dataclass
class LocalLawReport:
    """Sup over a spectral grid of |m_N - m_fc| / envelope, per trial."""

    grid_right: np.ndarray
    grid_left: np.ndarray
    sup_ratio_right: np.ndarray
    sup_ratio_left: np.ndarray

    def quantile(self, q: float):
        return (float(np.quantile(self.sup_ratio_right, q)),
                float(np.quantile(self.sup_ratio_left, q)))


def local_law_grid(N: int, sigma: float, E_minus: float, kappa_max: float = 0.7,
                   n_kappa: int = 12, n_eta: int = 12):
    """Spectral grid respecting the admissible domain on both sides.

    Right of the edge: sqrt(kappa+eta) >= N^sigma/(N eta); left of it:
    eta >= N^(sigma-2/3).
    """
    eta_min_left = N ** (sigma - 2.0 / 3.0)
    etas = np.geomspace(eta_min_left, 1.0, n_eta)
    kappas = np.concatenate(([0.0], np.geomspace(1e-4, kappa_max, n_kappa - 1)))
    right, left = [], []
    for eta in etas:
        for kap in kappas:
            if np.sqrt(kap + eta) >= N ** sigma / (N * eta):
                right.append((E_minus + kap, eta))
            if eta >= eta_min_left and kap > 0:
                left.append((E_minus - kap, eta))
    return np.array(right), np.array(left)


def local_law_report(V: InitialData, t: float, spectra, sigma: float,
                     E_minus: float | None = None) -> LocalLawReport:
    """Envelope ratios of the empirical transform against the solved one.

    For each trial, m_N(z) = (1/N) sum 1/(lambda_i - z) is compared to
    m_fc,t(z) over the admissible grid; the envelope is 1/(N eta) right
    of the edge and 1/(N(kappa+eta)) + 1/((N eta)^2 sqrt(kappa+eta)) left
    of it.
    """
    spectra = np.atleast_2d(np.asarray(spectra, dtype=float))
    M, N = spectra.shape
    if E_minus is None:
        from .freeconv import find_edge

        E_minus = find_edge(V, t)[1]
    right, left = local_law_grid(N, sigma, E_minus)

    def m_fc_on(points):
        return np.array([solve_mfc(V, t, complex(E, eta)).m for E, eta in points])

    def m_N_on(points, lam):
        z = points[:, 0] + 1j * points[:, 1]
        return np.mean(1.0 / (lam[None, :] - z[:, None]), axis=1)

    mfc_r = m_fc_on(right)
    mfc_l = m_fc_on(left)
    env_r = 1.0 / (N * right[:, 1])
    kap_l = np.abs(left[:, 0] - E_minus)
    env_l = (1.0 / (N * (kap_l + left[:, 1]))
             + 1.0 / ((N * left[:, 1]) ** 2 * np.sqrt(kap_l + left[:, 1])))
    sup_r = np.empty(M)
    sup_l = np.empty(M)
    for m in range(M):
        lam = spectra[m]
        sup_r[m] = np.max(np.abs(m_N_on(right, lam) - mfc_r) / env_r)
        sup_l[m] = np.max(np.abs(m_N_on(left, lam) - mfc_l) / env_l)
    return LocalLawReport(grid_right=right, grid_left=left,
                          sup_ratio_right=sup_r, sup_ratio_left=sup_l)
