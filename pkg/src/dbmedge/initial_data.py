"""Deterministic initial spectra and their Stieltjes-transform diagnostics.

The central object is :class:`InitialData`, an immutable sorted spectrum
with a norm-bound exponent.  On top of it live the transform evaluators,
the square-root-edge regularity certification on a dyadic grid, and the
weighted moments used by the two-sided edge comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDensity, PoleProximity

__all__ = [
    "InitialData",
    "RegularityReport",
    "stieltjes_transform",
    "check_eta_regular",
    "quantile_initial_data",
    "weighted_moment",
]

_FACTORIALS = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0]


@dataclass(frozen=True)
class InitialData:
    """Sorted deterministic spectrum with norm metadata.

    values must be finite and ascending (ties allowed); the norm bound
    max |values| <= N**norm_exponent is checked at construction.
    """

    values: np.ndarray
    norm_exponent: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("values must be sorted ascending")
        if self.norm_exponent < 0:
            raise ValueError("norm_exponent must be >= 0")
        if np.max(np.abs(v)) > self.size ** self.norm_exponent + 1e-12:
            raise ValueError("norm bound max|V_i| <= N**C_V violated")

    @property
    def size(self) -> int:
        return int(self.values.size)

    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(self.values.tobytes()).hexdigest()[:16]

    def edge_index(self, threshold: float = -0.5) -> int:
        """1-based index of the first entry >= threshold."""
        pos = int(np.searchsorted(self.values, threshold, side="left"))
        if pos >= self.size:
            raise ValueError(f"no entry >= {threshold}")
        return pos + 1


def _pole_guard(V: InitialData, z: complex):
    gap = np.min(np.abs(V.values - z))
    if gap < 1e-12 * (1.0 + abs(z)):
        raise PoleProximity(f"z={z} within {gap:.3e} of the spectrum")


def stieltjes_transform(V: InitialData, z: complex, order: int = 0) -> complex:
    """k-th derivative of m_V(z) = (1/N) sum 1/(V_i - z).

    order 0 gives m_V itself; order k gives (k!/N) sum (V_i - z)**-(k+1).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    _pole_guard(V, z)
    fact = _FACTORIALS[order] if order < len(_FACTORIALS) else float(math.factorial(order))
    inv = 1.0 / (V.values - z)
    return fact * np.mean(inv ** (order + 1))


def weighted_moment(V: InitialData, a: float, b: float, p: float) -> float:
    """(1/N) sum |V_i - a - ib|**-p, the p-th inverse-distance moment."""
    if b < 0:
        raise ValueError("b must be >= 0")
    if p < 2:
        raise ValueError("p must be >= 2")
    _pole_guard(V, complex(a, b))
    d2 = (V.values - a) ** 2 + b * b
    return float(np.mean(d2 ** (-p / 2.0)))


@dataclass
class RegularityReport:
    """Outcome of the square-root-edge regularity check."""

    eta_star: float
    phi_star: float
    constant_found: float
    window_violations: list = field(default_factory=list)
    gap_ok: bool = True
    norm_ok: bool = True
    passed: bool = False

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return (f"{state}: eta*={self.eta_star:.3e} C={self.constant_found:.2f} "
                f"violations={len(self.window_violations)} gap_ok={self.gap_ok} "
                f"norm_ok={self.norm_ok}")


def _log_grid(lo: float, hi: float, per_octave: int) -> np.ndarray:
    n = max(2, int(np.ceil(np.log2(hi / lo) * per_octave)) + 1)
    return np.geomspace(lo, hi, n)


def check_eta_regular(V: InitialData, eta_star: float, grid_density: int = 8,
                      max_constant: float = 50.0, eta_max: float = 10.0) -> RegularityReport:
    """Certify square-root-edge regularity of V at scale eta_star on a grid.

    Two windows are scanned with at least grid_density points per octave:
    left of the edge (-1 <= E <= 0, eta between eta_star and eta_max) the
    target is eta/sqrt(|E|+eta); right of it (0 <= E <= 1, eta down to
    sqrt(eta_star*|E|)+eta_star) the target is sqrt(|E|+eta).  The report
    records the smallest two-sided constant observed; pointwise constants
    above max_constant are listed as violations.  Assumptions 2 and 3 (no
    spectrum in [-1, -eta_star], norm bound) are checked directly.
    """
    if not (0 < eta_star <= 1):
        raise ValueError("eta_star must lie in (0, 1]")
    if grid_density < 8:
        raise ValueError("grid_density must be >= 8")
    N = V.size
    phi_star = -np.log(eta_star) / np.log(N) if N > 1 else float("nan")

    worst = 1.0
    violations = []

    def scan(E_vals, eta_lo_fn, target_fn):
        nonlocal worst
        for E in E_vals:
            eta_lo = eta_lo_fn(E)
            if eta_lo >= eta_max:
                continue
            for eta in _log_grid(eta_lo, eta_max, grid_density):
                im = stieltjes_transform(V, complex(E, eta)).imag
                target = target_fn(E, eta)
                if im <= 0 or target <= 0:
                    c_here = np.inf
                else:
                    ratio = im / target
                    c_here = max(ratio, 1.0 / ratio)
                worst = max(worst, c_here)
                if c_here > max_constant:
                    violations.append((float(E), float(eta), float(im / target if target > 0 else np.inf)))

    # left window: -1 <= E <= 0
    E_left = -np.concatenate(([0.0], _log_grid(eta_star, 1.0, grid_density)))
    scan(E_left, lambda E: eta_star, lambda E, eta: eta / np.sqrt(abs(E) + eta))
    # right window: 0 <= E <= 1
    E_right = np.concatenate(([0.0], _log_grid(eta_star, 1.0, grid_density)))
    scan(E_right, lambda E: np.sqrt(eta_star * abs(E)) + eta_star,
         lambda E, eta: np.sqrt(abs(E) + eta))

    gap_ok = not np.any((V.values >= -1.0) & (V.values <= -eta_star))
    norm_ok = bool(np.max(np.abs(V.values)) <= N ** V.norm_exponent + 1e-12)
    report = RegularityReport(
        eta_star=float(eta_star),
        phi_star=float(phi_star),
        constant_found=float(worst),
        window_violations=violations,
        gap_ok=gap_ok,
        norm_ok=norm_ok,
    )
    report.passed = (not violations) and gap_ok and norm_ok
    return report


def quantile_initial_data(density_spec, N: int, norm_exponent: float = 1.0) -> InitialData:
    """Spectrum of N quantiles V_i = F^{-1}((i - 1/2)/N) for a named density.

    density_spec is one of
      ("sqrt", b)          -- density c*sqrt(x) on [0, b], c fixed by mass 1
      ("point", x0)        -- unit mass at x0
      ("two_point", x0, x1)-- half mass at each of x0, x1
      ("table", x, cdf)    -- user-supplied monotone CDF samples
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    u = (np.arange(1, N + 1) - 0.5) / N
    kind = density_spec[0]
    if kind == "sqrt":
        b = float(density_spec[1])
        if b <= 0 or not np.isfinite(b):
            raise InvalidDensity("sqrt profile needs finite b > 0")
        vals = b * u ** (2.0 / 3.0)
    elif kind == "point":
        vals = np.full(N, float(density_spec[1]))
    elif kind == "two_point":
        lo, hi = sorted(float(x) for x in density_spec[1:3])
        vals = np.where(u <= 0.5, lo, hi)
    elif kind == "table":
        x = np.asarray(density_spec[1], dtype=float)
        cdf = np.asarray(density_spec[2], dtype=float)
        if x.shape != cdf.shape or x.ndim != 1 or x.size < 2:
            raise InvalidDensity("table spec needs matching 1-d x and cdf arrays")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(cdf)):
            raise InvalidDensity("table support/CDF must be bounded and finite")
        if np.any(np.diff(cdf) < 0) or abs(cdf[0]) > 1e-9 or abs(cdf[-1] - 1.0) > 1e-9:
            raise InvalidDensity("table CDF must rise monotonically from 0 to 1")
        vals = np.interp(u, cdf, x)
    else:
        raise InvalidDensity(f"unknown density spec {kind!r}")
    return InitialData(values=np.sort(vals), norm_exponent=norm_exponent)
