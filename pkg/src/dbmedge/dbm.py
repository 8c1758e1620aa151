"""Dyson Brownian motion: sampling, eigenvalue routes, coupled SDE flow.

Two routes to the spectrum of V + sqrt(t)*G coexist.  The matrix route
diagonalizes a sampled ensemble and is exact in law; the SDE route
integrates the repelling particle system pathwise and supports exact
coupling of two systems through a shared noise ledger.  Marginal
statistics always use the matrix route; the SDE route is for coupling
and short-range experiments where the pathwise structure matters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EigenFailure, IndexOverflow, StepUnderflow
from .initial_data import InitialData
from .streams import NoiseLedger

__all__ = [
    "ParticleSystem",
    "sample_gaussian_ensemble",
    "ensemble_eigenvalues",
    "sde_evolve",
    "pad_system",
    "strip_sentinels",
]

MIN_STEP = 1e-16


@dataclass(frozen=True)
class ParticleSystem:
    """Ordered particle configuration with noise-stream identity.

    Array position p carries ledger/paper index p + index_offset, so two
    systems whose offsets align share Brownian motions particle by
    particle when driven by one ledger.
    """

    positions: np.ndarray
    time: float
    index_offset: int
    stream_id: str

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def size(self) -> int:
        return int(self.positions.size)

    def indices(self) -> np.ndarray:
        return np.arange(self.size) + self.index_offset


def sample_gaussian_ensemble(N: int, beta: int, stream: np.random.Generator) -> np.ndarray:
    """One GOE (beta=1) or GUE (beta=2) matrix, spectrum scaled to [-2, 2].

    beta=1: real symmetric, off-diagonal variance 1/N, diagonal 2/N.
    beta=2: complex Hermitian, E|h_ij|^2 = 1/N off-diagonal, real diagonal
    of variance 1/N.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if beta == 1:
        X = stream.standard_normal((N, N))
        return (X + X.T) / np.sqrt(2.0 * N)
    if beta == 2:
        A = stream.standard_normal((N, N))
        B = stream.standard_normal((N, N))
        X = A + 1j * B
        return (X + X.conj().T) / (2.0 * np.sqrt(N))
    raise ValueError("beta must be 1 or 2")


def ensemble_eigenvalues(V: InitialData, t: float, stream: np.random.Generator,
                         beta: int = 1) -> np.ndarray:
    """Sorted spectrum of diag(V) + sqrt(t)*G via a dense symmetric solver."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return V.values.copy()
    H = sample_gaussian_ensemble(V.size, beta, stream)
    H = np.sqrt(t) * H
    idx = np.arange(V.size)
    H[idx, idx] = H[idx, idx].real + V.values
    try:
        return np.linalg.eigvalsh(H)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc


def _dyson_drift(pos: np.ndarray) -> np.ndarray:
    """(1/N) sum_{j != i} 1/(x_i - x_j), vectorized."""
    diff = pos[:, None] - pos[None, :]
    np.fill_diagonal(diff, np.inf)
    return np.sum(1.0 / diff, axis=1) / pos.size


def _reflect_order(cand: np.ndarray) -> np.ndarray:
    """Restore strict ordering by reflection (sorting the candidate)."""
    out = np.sort(cand)
    ties = np.diff(out) <= 0
    if np.any(ties):
        eps = 1e-14 * (1.0 + np.abs(out[:-1]))
        out[1:][ties] = out[:-1][ties] + eps[ties]
    return out


def _capped_step(pos, h, drift, noise):
    """Depth-limit fallback: displacement clipped to half the local gap,
    then reflection.  Bounded regardless of how singular the drift is."""
    gaps = np.diff(pos)
    left = np.concatenate(([np.inf], gaps))
    right = np.concatenate((gaps, [np.inf]))
    cap = 0.5 * np.minimum(left, right)
    disp = np.clip(h * drift, -cap, cap)
    return _reflect_order(pos + disp + noise)


def _em_recursive(pos, t_rel, k, d, m, ledger, sl, noise_coeff, depth_limit,
                  drift=None):
    """Advance one dyadic interval by Euler-Maruyama, halving on rejection.

    A candidate step is accepted only if ordering is preserved and the
    drift displacement stays below half the smallest adjacent gap.  The
    singular repulsion makes adverse noise bridges occasionally
    unresolvable by halving alone: at the depth limit a crossing is
    settled by a gap-capped reflected step, which keeps the run alive at
    a displacement scale far below the gap resolution.  A hard floor of
    1e-16 still underflows.  The left half of a split reuses the parent's
    drift (same positions).
    """
    h = ledger.dt_top / (1 << d)
    if drift is None:
        drift = _dyson_drift(pos)
    gaps = np.diff(pos)
    min_gap = gaps.min() if gaps.size else np.inf
    dB = ledger.increment(k, d, m)[sl]
    cand = pos + h * drift + noise_coeff * dB
    drift_ok = h * np.max(np.abs(drift)) <= 0.5 * min_gap
    order_ok = cand.size < 2 or np.all(np.diff(cand) > 0)
    if drift_ok and order_ok:
        return cand
    if h / 2 < MIN_STEP:
        raise StepUnderflow(
            f"step underflow at t={t_rel:.6g} (h={h:.3e}); near-collision beyond resolution")
    if d >= depth_limit:
        return _capped_step(pos, h, drift, noise_coeff * dB)
    half = _em_recursive(pos, t_rel, k, d + 1, 2 * m, ledger, sl, noise_coeff,
                         depth_limit, drift=drift)
    return _em_recursive(half, t_rel + h / 2, k, d + 1, 2 * m + 1, ledger, sl,
                         noise_coeff, depth_limit)


def sde_evolve(system: ParticleSystem, duration: float, dt_max: float,
               shared_noise: NoiseLedger | None = None,
               noise_variance: float = 2.0, max_depth: int = 20) -> ParticleSystem:
    """Integrate dx_i = sqrt(c/N) dB_i + (1/N) sum_j dt/(x_i - x_j).

    noise_variance is the coefficient c; the default c = 2 makes the flow
    started from V reach the law of V + sqrt(t)G for GOE G, matching the
    matrix route.  With a shared ledger the Brownian increments are read
    from (or drawn into) the ledger keyed by aligned particle index, so
    two systems evolved against one ledger are exactly coupled.  Steps
    halve adaptively down to dt_max/2**max_depth before a crossing is
    resolved by reflection; see _em_recursive.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    pos = system.positions.copy()
    if pos.size > 1 and not np.all(np.diff(pos) > 0):
        raise ValueError("initial positions must be strictly increasing")
    if duration == 0:
        return system

    if shared_noise is None:
        n_steps = max(1, int(np.ceil(duration / dt_max - 1e-12)))
        ledger = NoiseLedger(system.stream_id, t0=system.time,
                             dt_top=duration / n_steps, n_steps=n_steps,
                             idx_lo=system.index_offset,
                             idx_hi=system.index_offset + pos.size - 1)
    else:
        ledger = shared_noise
        if ledger.dt_top > dt_max * (1 + 1e-12):
            raise ValueError("ledger grid coarser than dt_max")
    k0 = int(round((system.time - ledger.t0) / ledger.dt_top))
    if abs(ledger.t0 + k0 * ledger.dt_top - system.time) > 1e-9 * max(1.0, ledger.dt_top):
        raise ValueError("system time is not aligned with the ledger grid")
    n_advance = int(round(duration / ledger.dt_top))
    if abs(n_advance * ledger.dt_top - duration) > 1e-9 * max(1.0, duration):
        raise ValueError("duration is not a whole number of ledger steps")
    if k0 + n_advance > ledger.n_steps:
        raise ValueError("ledger does not cover the requested horizon")

    sl = ledger.slice_for(system.index_offset, pos.size)
    noise_coeff = np.sqrt(noise_variance / pos.size)
    t_rel = 0.0
    for k in range(k0, k0 + n_advance):
        pos = _em_recursive(pos, t_rel, k, 0, 0, ledger, sl, noise_coeff, max_depth)
        t_rel += ledger.dt_top
    return replace(system, positions=pos, time=system.time + duration)


def pad_system(core: ParticleSystem, i0: int, N: int, C_V: float,
               side_layout: str) -> ParticleSystem:
    """Embed an N-particle core into the 2N+1-index window [-N, N] with
    far sentinel blocks at +-3*N**C_V + i*N.

    x_style places the core at indices 2-i0 .. N+1-i0 (so array index 1
    holds the i0-th core particle); y_style places it at 1 .. N.
    """
    if not (1 <= i0 <= N):
        raise IndexOverflow(f"i0={i0} outside [1, {N}]")
    if core.size != N:
        raise IndexOverflow("core size does not match N")
    scale = 3.0 * N ** C_V
    idx = np.arange(-N, N + 1, dtype=float)
    if side_layout == "x_style":
        lo_cut, hi_cut = 1 - i0, N + 1 - i0
    elif side_layout == "y_style":
        lo_cut, hi_cut = 0, N
    else:
        raise ValueError("side_layout must be 'x_style' or 'y_style'")
    pos = np.where(idx <= lo_cut, -scale + idx * N, scale + idx * N)
    pos[int(lo_cut) + N + 1: int(hi_cut) + N + 1] = core.positions
    if not np.all(np.diff(pos) > 0):
        raise IndexOverflow("sentinel layout does not bracket the core positions")
    return ParticleSystem(positions=pos, time=core.time, index_offset=-N,
                          stream_id=core.stream_id)


def strip_sentinels(padded: ParticleSystem, i0: int, N: int,
                    side_layout: str) -> np.ndarray:
    """Recover the core positions from a padded system."""
    lo_cut = 1 - i0 if side_layout == "x_style" else 0
    start = lo_cut + N + 1
    return padded.positions[start: start + N].copy()
