"""Free convolution with the semicircle law: solver, edge data, densities.

The Stieltjes transform of the time-t free convolution solves the fixed
point m = m_V(z + t*m) on the upper half-plane.  This module solves that
equation by Newton continuation, extracts the left spectral edge and its
scaling factor, recovers densities and quantiles by inversion, compares
free convolutions of matching measures, and builds the harmonic-mean
interpolating density between two square-root-edge laws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeCube,
    NoBracket,
    NoConvergence,
    NonMonotoneCDF,
    QuadratureFailure,
    StepCollapse,
)
from .initial_data import InitialData, stieltjes_transform

__all__ = [
    "SpectralPoint",
    "FreeConvolutionProfile",
    "solve_mfc",
    "F_map",
    "find_edge",
    "gamma0",
    "density",
    "density_grid",
    "DensityTable",
    "build_density_table",
    "quantiles",
    "stability_coefficients",
    "compute_profile",
    "matching_compare",
    "MatchingComparison",
    "interpolating_measure",
]

DEFAULT_TOL = 1e-12
ETA_EVAL_COEFF = 1e-9


@dataclass(frozen=True)
class SpectralPoint:
    """One solved point of the fixed-point equation."""

    z: complex
    m: complex
    xi: complex
    converged: bool
    iterations: int


def _newton_polish(V: InitialData, t: float, z: complex, m0: complex,
                   tol: float, max_iter: int = 60):
    """Damped Newton on f(m) = m - m_V(z + t m); keeps Im m > 0."""
    vals = V.values
    m = m0
    for it in range(1, max_iter + 1):
        xi = z + t * m
        inv = 1.0 / (vals - xi)
        f = m - np.mean(inv)
        if abs(f) <= tol:
            return m, it, True
        fp = 1.0 - t * np.mean(inv * inv)
        if fp == 0:
            fp = 1e-30
        step = f / fp
        lam = 1.0
        # near the real axis the Herglotz root has Im m = O(eta); allow the
        # iterates that much slack below zero without changing branch
        im_floor = -10.0 * z.imag
        for _ in range(25):
            cand = m - lam * step
            xi_c = z + t * cand
            if np.min(np.abs(vals - xi_c)) < 1e-300:
                lam *= 0.5
                continue
            f_c = cand - np.mean(1.0 / (vals - xi_c))
            if cand.imag > im_floor and abs(f_c) < abs(f):
                m = cand
                break
            lam *= 0.5
        else:
            return m, it, False
    xi = z + t * m
    return m, max_iter, abs(m - np.mean(1.0 / (vals - xi))) <= tol


def solve_mfc(V: InitialData, t: float, z: complex, tol: float = DEFAULT_TOL,
              m_start: complex | None = None) -> SpectralPoint:
    """Solve m = m_V(z + t m) on the Herglotz branch at Im z > 0.

    Continuation starts from the large-eta asymptotic regime where the
    damped iteration from m = -1/z contracts, then follows the solution
    down in eta (ratio 0.7, halving the step on Newton failure) with a
    Newton polish at every stage.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("solve_mfc requires Im z > 0; use density() on the real axis")
    if t == 0:
        m = stieltjes_transform(V, z)
        return SpectralPoint(z=z, m=m, xi=z, converged=True, iterations=0)

    total_it = 0
    if m_start is not None:
        m, it, ok = _newton_polish(V, t, z, m_start, tol)
        total_it += it
        if ok and m.imag > 0:
            return SpectralPoint(z=z, m=m, xi=z + t * m, converged=True,
                                 iterations=total_it)

    eta_target = z.imag
    eta = max(10.0, 2.0 * eta_target, 2.0 * np.sqrt(t))
    z_hi = complex(z.real, eta)
    m = -1.0 / z_hi
    for _ in range(8):
        m = 0.5 * m + 0.5 * stieltjes_transform(V, z_hi + t * m)
        total_it += 1
    m, it, ok = _newton_polish(V, t, z_hi, m, tol)
    total_it += it
    if not ok:
        raise NoConvergence("no convergence in asymptotic regime",
                            iterations=total_it)

    ratio = 0.7
    while eta > eta_target:
        eta_next = max(eta * ratio, eta_target)
        while True:
            z_try = complex(z.real, eta_next)
            m_try, it, ok = _newton_polish(V, t, z_try, m, tol)
            total_it += it
            if ok and m_try.imag > 0:
                m, eta = m_try, eta_next
                break
            eta_next = np.sqrt(eta * eta_next)
            if eta - eta_next < 1e-16 * eta:
                raise StepCollapse(f"continuation stalled at eta={eta:.3e}")
    return SpectralPoint(z=complex(z.real, eta_target), m=m, xi=z + t * m,
                         converged=True, iterations=total_it)


def F_map(V: InitialData, t: float, xi: complex, order: int = 0) -> complex:
    """Inverse map F(xi) = xi - t*m_V(xi) and its derivatives.

    order 0 gives F; order k >= 1 gives F^(k) = delta_{k,1} - t*m_V^(k).
    """
    if order == 0:
        return xi - t * stieltjes_transform(V, xi, 0)
    delta = 1.0 if order == 1 else 0.0
    return delta - t * stieltjes_transform(V, xi, order)


def find_edge(V: InitialData, t: float, tol: float = DEFAULT_TOL):
    """Locate the left edge: the critical point xi_minus with
    t*m_V'(xi_minus) = 1 in the gap left of the edge cluster, and the
    edge energy E_minus = F(xi_minus).

    The bracketing function h(xi) = t*m_V'(xi) - 1 rises monotonically
    toward the spectrum on the gap, so a sign change pins the root.
    """
    if t <= 0:
        raise ValueError("find_edge requires t > 0")
    vals = V.values
    i0 = V.edge_index(-0.5)
    v_edge = vals[i0 - 1]
    pole_eps = 4e-12 * (1.0 + abs(v_edge))

    def h(xi):
        return t * np.mean((vals - xi) ** -2) - 1.0

    b = v_edge - pole_eps
    left_block = vals[vals < -0.5]
    lo_limit = left_block[-1] + 2 * pole_eps if left_block.size else -np.inf
    a = min(-0.75, v_edge - 2.0 * np.sqrt(t))
    a = max(a, lo_limit)
    if a >= b or h(a) >= 0:
        raise NoBracket(
            f"h has no sign change in [{a:.6g}, {b:.6g}]; data irregular or t too large")
    if h(b) <= 0:
        raise NoBracket("h non-positive at the spectrum boundary")

    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if h(mid) < 0:
            a = mid
        else:
            b = mid
    xi_minus = 0.5 * (a + b)
    for _ in range(6):
        hp = 2.0 * t * np.mean((vals - xi_minus) ** -3)
        if hp == 0:
            break
        step = h(xi_minus) / hp
        cand = xi_minus - step
        if a < cand < b:
            xi_minus = cand
        else:
            break
    E_minus = float(F_map(V, t, xi_minus, 0).real)
    return float(xi_minus), E_minus


def gamma0(V: InitialData, t: float, edge) -> float:
    """Edge scaling factor gamma0 = (t^3 R_3(xi_minus))**(-1/3).

    R_3 is the third inverse-power sum at the critical point; it is real
    and positive on regular data, making the rescaled edge density match
    the semicircle coefficient sqrt(kappa)/pi.
    """
    xi_minus, _ = edge
    r3 = float(np.mean((V.values - xi_minus) ** -3))
    if r3 <= 0:
        raise NegativeCube(f"R_3(xi_minus) = {r3:.3e} <= 0")
    return float((t ** 3 * r3) ** (-1.0 / 3.0))


def _eta_eval(E: float) -> float:
    return ETA_EVAL_COEFF * (1.0 + abs(E))


def density(V: InitialData, t: float, E: float, tol: float = DEFAULT_TOL) -> float:
    """Free-convolution density at real energy E via Stieltjes inversion.

    Evaluates Im m at eta_eval = 1e-9*(1+|E|) and divides by pi; returns
    exactly 0 when the continuation lands on the real branch (the gap).
    """
    eta = _eta_eval(E)
    pt = solve_mfc(V, t, complex(E, eta), tol=tol)
    return _im_to_density(pt.m.imag, t, eta)


def _im_to_density(im_m: float, t: float, eta: float) -> float:
    # real branch: Im m stays O(eta); support: Im m ~ sqrt(kappa) >> eta
    if t * im_m <= 50.0 * eta:
        return 0.0
    return im_m / np.pi


def density_grid(V: InitialData, t: float, E_values, tol: float = DEFAULT_TOL):
    """Densities on a grid of energies, warm-starting the solver between
    neighbouring points (falls back to full continuation on failure)."""
    E_values = np.asarray(E_values, dtype=float)
    order = np.argsort(E_values)[::-1]  # sweep right to left
    rho = np.empty_like(E_values)
    m_prev = None
    for j in order:
        E = E_values[j]
        eta = _eta_eval(E)
        z = complex(E, eta)
        pt = None
        if m_prev is not None:
            m_try, _, ok = _newton_polish(V, t, z, m_prev, tol)
            if ok and m_try.imag > 0:
                pt = SpectralPoint(z=z, m=m_try, xi=z + t * m_try,
                                   converged=True, iterations=0)
        if pt is None:
            pt = solve_mfc(V, t, z, tol=tol)
        m_prev = pt.m
        rho[j] = _im_to_density(pt.m.imag, t, eta)
    return rho


def _upper_edge(V: InitialData, t: float):
    """Critical point and energy of the rightmost support edge."""
    vals = V.values
    v_max = vals[-1]
    pole_eps = 4e-12 * (1.0 + abs(v_max))

    def h(xi):
        return t * np.mean((vals - xi) ** -2) - 1.0

    a = v_max + pole_eps
    b = v_max + 2.0 * np.sqrt(t) + 1.0
    while h(b) >= 0:
        b *= 2.0
        if b > 1e12:
            raise NoBracket("upper edge bracket failed")
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if h(mid) > 0:
            a = mid
        else:
            b = mid
    xi_plus = 0.5 * (a + b)
    return float(xi_plus), float(F_map(V, t, xi_plus, 0).real)


class DensityTable:
    """Tabulated density with its cumulative counting function.

    nodes are strictly increasing energies; cum[j] is the mass below
    nodes[j].  Interpolation is linear in both directions, with exact
    hits returned at the table's own nodes/levels.
    """

    def __init__(self, nodes, rho, cum=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.rho = np.asarray(rho, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.rho.shape:
            raise ValueError("nodes and rho must be matching 1-d arrays")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if cum is None:
            seg = 0.5 * (self.rho[1:] + self.rho[:-1]) * np.diff(self.nodes)
            cum = np.concatenate(([0.0], np.cumsum(seg)))
        self.cum = np.asarray(cum, dtype=float)

    @property
    def total_mass(self) -> float:
        return float(self.cum[-1])

    @property
    def edge(self) -> float:
        return float(self.nodes[0])

    def density(self, E) -> np.ndarray:
        return np.interp(E, self.nodes, self.rho, left=0.0, right=0.0)

    def counting(self, E) -> np.ndarray:
        return np.interp(E, self.nodes, self.cum, left=0.0, right=self.total_mass)

    def require_strict(self):
        if np.any(np.diff(self.cum) <= 0):
            raise NonMonotoneCDF("counting function is not strictly increasing")

    def quantile_with_density(self, levels):
        """Invert the counting function, exact at stored levels."""
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        if np.any(levels < -1e-15) or np.any(levels > self.total_mass * (1 + 1e-12) + 1e-15):
            raise QuadratureFailure("quantile level outside available mass")
        pos = np.interp(levels, self.cum, self.nodes)
        rho = np.interp(levels, self.cum, self.rho)
        idx = np.searchsorted(self.cum, levels)
        idx = np.clip(idx, 0, self.cum.size - 1)
        exact = self.cum[idx] == levels
        pos[exact] = self.nodes[idx[exact]]
        rho[exact] = self.rho[idx[exact]]
        return pos, rho

    def quantile(self, levels):
        return self.quantile_with_density(levels)[0]


def build_density_table(V: InitialData, t: float, n_edge: int = 500,
                        n_bulk: int = 2000, tol: float = DEFAULT_TOL) -> DensityTable:
    """Tabulate the free-convolution density over its contiguous support.

    Square-root behaviour at both edges is resolved by nodes quadratic in
    the distance from each edge; cumulative mass is accumulated by the
    trapezoid rule in the square-root variable there (smooth integrand)
    and in energy across the bulk.
    """
    xi_m, E_minus = find_edge(V, t)
    xi_p, E_plus = _upper_edge(V, t)
    span = E_plus - E_minus
    if span <= 0:
        raise QuadratureFailure("degenerate support")
    kappa_edge = min(0.5 * t * t, span / 8.0)

    s_lo = np.sqrt(kappa_edge) * np.linspace(0.0, 1.0, n_edge)
    lo_nodes = E_minus + s_lo ** 2
    hi_nodes = E_plus - (np.sqrt(kappa_edge) * np.linspace(1.0, 0.0, n_edge)) ** 2
    bulk = np.linspace(lo_nodes[-1], hi_nodes[0], n_bulk + 2)[1:-1]
    nodes = np.concatenate((lo_nodes, bulk, hi_nodes))

    rho = density_grid(V, t, nodes, tol=tol)
    rho[0] = 0.0
    rho[-1] = 0.0

    cum = np.zeros_like(nodes)
    # low edge section: integrate rho(E_-+s^2) * 2s ds
    f_lo = rho[:n_edge] * 2.0 * s_lo
    cum[1:n_edge] = np.cumsum(0.5 * (f_lo[1:] + f_lo[:-1]) * np.diff(s_lo))
    # bulk section: plain trapezoid in E
    ib = slice(n_edge - 1, n_edge + n_bulk + 1)
    seg_nodes = nodes[ib]
    seg_rho = rho[ib]
    seg = 0.5 * (seg_rho[1:] + seg_rho[:-1]) * np.diff(seg_nodes)
    cum[n_edge:n_edge + n_bulk + 1] = cum[n_edge - 1] + np.cumsum(seg)
    # high edge section in the mirrored sqrt variable
    s_hi = np.sqrt(np.maximum(E_plus - nodes[-n_edge:], 0.0))
    f_hi = rho[-n_edge:] * 2.0 * s_hi
    inc = 0.5 * (f_hi[1:] + f_hi[:-1]) * (-np.diff(s_hi))
    cum[-n_edge + 1:] = cum[-n_edge] + np.cumsum(inc)

    table = DensityTable(nodes, rho, cum)
    table.xi_minus = xi_m
    table.xi_plus = xi_p
    return table


_table_cache: dict = {}


def _cached_table(V: InitialData, t: float) -> DensityTable:
    key = (V.fingerprint(), float(t))
    tab = _table_cache.get(key)
    if tab is None:
        tab = build_density_table(V, t)
        if len(_table_cache) > 32:
            _table_cache.clear()
        _table_cache[key] = tab
    return tab


def quantiles(V: InitialData, t: float, indices) -> np.ndarray:
    """Classical locations gamma_i solving i/N = mass between the edge
    and gamma_i, for 1-based indices within [1, N]."""
    indices = np.atleast_1d(np.asarray(indices, dtype=int))
    N = V.size
    if np.any(indices < 1) or np.any(indices > N):
        raise ValueError("indices must lie in [1, N]")
    table = _cached_table(V, t)
    levels = indices / N
    if np.any(levels > table.total_mass + 1e-9):
        raise QuadratureFailure(
            "requested mass beyond the contiguous support of the free convolution")
    return table.quantile(np.minimum(levels, table.total_mass))


def stability_coefficients(V: InitialData, t: float, z: complex,
                           ks=(1, 2, 3, 4), tol: float = DEFAULT_TOL) -> dict:
    """Stability coefficients R_k = (1/N) sum g_i^k with g = 1/(V - xi).

    Real z is interpreted as the boundary limit (evaluated at the standard
    tiny imaginary offset).  R_1 coincides with the transform itself; the
    identity is enforced as a consistency check.
    """
    z = complex(z)
    if z.imag <= 0:
        z = complex(z.real, _eta_eval(z.real))
    pt = solve_mfc(V, t, z, tol=tol)
    g = 1.0 / (V.values - pt.xi)
    out = {int(k): complex(np.mean(g ** int(k))) for k in ks}
    if 1 in out and abs(out[1] - pt.m) > max(1e-9, 1e3 * tol):
        raise NoConvergence("R_1 disagrees with the solved transform",
                            residual=abs(out[1] - pt.m))
    return out


@dataclass(frozen=True)
class FreeConvolutionProfile:
    """Cached analytic edge data for one (V, t) pair."""

    t: float
    xi_minus: float
    E_minus: float
    gamma0: float
    solver_tol: float
    i0: int
    N: int
    data_fingerprint: str
    R_edge: dict = field(default_factory=dict)


def compute_profile(V: InitialData, t: float, tol: float = DEFAULT_TOL) -> FreeConvolutionProfile:
    """Solve the edge data for (V, t) and bundle it into a profile."""
    edge = find_edge(V, t, tol=tol)
    g0 = gamma0(V, t, edge)
    xi_m = edge[0]
    g = 1.0 / (V.values - xi_m)
    r_edge = {k: complex(np.mean(g ** k)) for k in (1, 2, 3, 4)}
    return FreeConvolutionProfile(
        t=float(t), xi_minus=edge[0], E_minus=edge[1], gamma0=g0,
        solver_tol=tol, i0=V.edge_index(-0.5), N=V.size,
        data_fingerprint=V.fingerprint(), R_edge=r_edge)


@dataclass
class MatchingComparison:
    """Pointwise comparison of two free convolutions near their edges."""

    x: np.ndarray
    density_rel_dev: np.ndarray
    re_m_dev: np.ndarray
    edge_gap: float
    density_envelope: np.ndarray
    re_m_envelope: np.ndarray
    edge_envelope: float
    density_ok: bool
    re_m_ok: bool
    edge_ok: bool


def matching_compare(V1: InitialData, V2: InitialData, t: float, t0: float,
                     x_grid, envelope_const: float = 10.0) -> MatchingComparison:
    """Compare the time-t free convolutions of two measures whose densities
    match near the edge on the scale t0**2.

    Reports per-x relative density deviation, the deviation of the edge-
    anchored real parts of the transforms, and the gap between the two
    edges, each against its proportional envelope with the supplied
    constant: K*t/t0 for densities, K*|x|/t0 for Re m, and
    K*(t^3 + t/sqrt(N)) for the edge gap.
    """
    x = np.asarray(x_grid, dtype=float)
    e1 = find_edge(V1, t)
    e2 = find_edge(V2, t)
    edge_gap = abs(e1[1] - e2[1])

    rho1 = density_grid(V1, t, e1[1] + x)
    rho2 = density_grid(V2, t, e2[1] + x)
    floor = 1e-300
    dens_dev = np.abs(rho1 - rho2) / np.maximum(rho2, floor)

    def re_m_anchor(V, E_minus):
        pts = [solve_mfc(V, t, complex(E_minus + xx, _eta_eval(E_minus + xx))).m.real
               for xx in x]
        base = solve_mfc(V, t, complex(E_minus, _eta_eval(E_minus))).m.real
        return np.asarray(pts) - base

    re_dev = np.abs(re_m_anchor(V1, e1[1]) - re_m_anchor(V2, e2[1]))

    dens_env = np.full_like(x, envelope_const * t / t0)
    rem_env = envelope_const * np.abs(x) / t0
    edge_env = envelope_const * (t ** 3 + t / np.sqrt(min(V1.size, V2.size)))
    return MatchingComparison(
        x=x, density_rel_dev=dens_dev, re_m_dev=re_dev, edge_gap=edge_gap,
        density_envelope=dens_env, re_m_envelope=rem_env, edge_envelope=edge_env,
        density_ok=bool(np.all(dens_dev <= dens_env)),
        re_m_ok=bool(np.all(re_dev <= rem_env + 1e-12)),
        edge_ok=bool(edge_gap <= edge_env))


def interpolating_measure(rho_x: DensityTable, rho_y: DensityTable,
                          alpha: float) -> DensityTable:
    """Harmonic-mean interpolation between two square-root-edge densities.

    Quantile positions interpolate linearly in alpha at fixed mass level,
    so the interpolated density is the harmonic mean of the endpoints read
    at their own quantiles.  Endpoints alpha in {0, 1} reproduce the
    inputs exactly at their nodes.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    rho_x.require_strict()
    rho_y.require_strict()
    s_max = min(rho_x.total_mass, rho_y.total_mass)
    levels = np.unique(np.concatenate((
        rho_x.cum[rho_x.cum <= s_max], rho_y.cum[rho_y.cum <= s_max], [s_max])))
    phi_x, dx = rho_x.quantile_with_density(levels)
    phi_y, dy = rho_y.quantile_with_density(levels)
    nodes = alpha * phi_x + (1.0 - alpha) * phi_y
    if alpha == 1.0:
        rho = dx.copy()
    elif alpha == 0.0:
        rho = dy.copy()
    else:
        rho = np.zeros_like(dx)
        ok = (dx > 0) & (dy > 0)
        rho[ok] = 1.0 / (alpha / dx[ok] + (1.0 - alpha) / dy[ok])
    keep = np.concatenate(([True], np.diff(nodes) > 0))
    return DensityTable(nodes[keep], rho[keep], levels[keep])
