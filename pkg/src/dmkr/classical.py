"""Classical dissipative kicked map: one-step dynamics, tangent map,
Lyapunov exponents and bifurcation scans.

All bulk iteration is delegated to the kernel backend (compiled or numpy,
see kernels.py); this module owns the single-point reference semantics and
the sampling conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .params import NO_NOISE, MapParams, NoiseSpec

TWO_PI = 2.0 * math.pi

# Lyapunov-averaging sampling region: q uniform in [0, 2pi], p in [-pi, pi].
SAMPLE_Q_RANGE = (0.0, TWO_PI)
SAMPLE_P_RANGE = (-math.pi, math.pi)

DEFAULT_TRANSIENT = 1_000
DEFAULT_STEPS = 100_000


class DivergentTrajectoryError(RuntimeError):
    """Trajectory left the representable range (non-finite momentum)."""


@dataclass(frozen=True)
class PhasePoint:
    """Angle q in [0, 2pi) and unbounded scaled momentum p."""

    q: float
    p: float

    def __post_init__(self):
        if not 0.0 <= self.q < TWO_PI:
            object.__setattr__(self, "q", self.q % TWO_PI)


def force(q, params: MapParams):
    """Kick impulse per unit K: sin(q) + a*sin(2q + phi).

    Accepts scalars or arrays.  The second-harmonic weight follows the kick
    potential gradient unless params.force_unit_second_harmonic is set.
    """
    a2 = params.second_harmonic_weight
    return np.sin(q) + a2 * np.sin(2.0 * q + params.phi)


def force_derivative(q, params: MapParams):
    """d(force)/dq = cos(q) + 2a*cos(2q + phi)."""
    a2 = params.second_harmonic_weight
    return np.cos(q) + 2.0 * a2 * np.cos(2.0 * q + params.phi)


def map_step(
    x: PhasePoint,
    params: MapParams,
    noise: NoiseSpec = NO_NOISE,
    rng: np.random.Generator | None = None,
) -> PhasePoint:
    """One map period: p' = gamma*p + K*f(q) (+ xi), q' = (q + p') mod 2pi.

    Noise, when enabled, is Gaussian with std noise.sigma (hbar_eff if
    unset), drawn from `rng` and added to p' before the drift.  Without
    noise the step is a pure function: identical inputs give bit-identical
    outputs.
    """
    p_new = params.gamma * x.p + params.K * float(force(x.q, params))
    if noise.enabled:
        if rng is None:
            raise ValueError("noise is enabled but no rng was provided")
        p_new += rng.normal(0.0, noise.resolve_sigma(params))
    q_new = (x.q + p_new) % TWO_PI
    return PhasePoint(q_new, p_new)


def jacobian(x: PhasePoint, params: MapParams) -> np.ndarray:
    """Tangent map [[dq'/dq, dq'/dp], [dp'/dq, dp'/dp]]; det = gamma."""
    kfp = params.K * float(force_derivative(x.q, params))
    g = params.gamma
    return np.array([[1.0 + kfp, g], [kfp, g]])


def _check_ok(ok: np.ndarray, what: str) -> None:
    if not np.all(ok):
        bad = int(np.count_nonzero(~ok))
        raise DivergentTrajectoryError(
            f"{bad} {what} trajectories became non-finite; parameters are divergent"
        )


def max_lyapunov(
    x0: PhasePoint,
    params: MapParams,
    t_transient: int = DEFAULT_TRANSIENT,
    t_total: int = DEFAULT_STEPS,
) -> float:
    """Largest Lyapunov exponent from one initial condition.

    Propagates a unit tangent vector with per-step renormalization,
    accumulating log growth for t_total - t_transient steps.
    """
    if not t_total > t_transient >= 0:
        raise ValueError("need t_total > t_transient >= 0")
    lam, ok = kernels.lyapunov_max_batch(
        np.array([x0.q]), np.array([x0.p]),
        params.K, params.gamma, params.second_harmonic_weight, params.phi,
        t_transient, t_total,
    )
    _check_ok(ok, "lyapunov")
    return float(lam[0])


def lyapunov_spectrum(
    x0: PhasePoint,
    params: MapParams,
    t_transient: int = DEFAULT_TRANSIENT,
    t_total: int = DEFAULT_STEPS,
) -> tuple[float, float]:
    """Both exponents via per-step QR; they sum to ln(gamma)."""
    if not t_total > t_transient >= 0:
        raise ValueError("need t_total > t_transient >= 0")
    l1, l2, ok = kernels.lyapunov_spectrum_batch(
        np.array([x0.q]), np.array([x0.p]),
        params.K, params.gamma, params.second_harmonic_weight, params.phi,
        t_transient, t_total,
    )
    _check_ok(ok, "lyapunov")
    return float(l1[0]), float(l2[0])


@dataclass
class LyapunovAverage:
    """Mean of the largest exponent over uniform initial conditions."""

    mean: float
    values: np.ndarray
    n_failed: int


def sample_initial_conditions(M: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """M uniform points in [0, 2pi] x [-pi, pi], deterministic per seed."""
    rng = np.random.default_rng(seed)
    q0 = rng.uniform(*SAMPLE_Q_RANGE, size=M)
    p0 = rng.uniform(*SAMPLE_P_RANGE, size=M)
    return q0, p0


def averaged_max_lyapunov(
    params: MapParams,
    M: int = 1_000,
    seed: int = 0,
    t_transient: int = DEFAULT_TRANSIENT,
    t_total: int = DEFAULT_STEPS,
) -> LyapunovAverage:
    """Arithmetic mean of max_lyapunov over M uniform initial conditions.

    Non-finite trajectories are excluded from the mean and counted in
    n_failed.  Deterministic for a fixed seed.
    """
    if M < 1:
        raise ValueError("need M >= 1")
    q0, p0 = sample_initial_conditions(M, seed)
    lam, ok = kernels.lyapunov_max_batch(
        q0, p0,
        params.K, params.gamma, params.second_harmonic_weight, params.phi,
        t_transient, t_total,
    )
    good = lam[ok]
    if good.size == 0:
        raise DivergentTrajectoryError("all trajectories diverged")
    return LyapunovAverage(float(good.mean()), good, int(M - good.size))


@dataclass
class BifurcationResult:
    """Scatter set of recorded momenta per kick strength."""

    K: np.ndarray          # shape (n_samples,), one entry per recorded p
    p: np.ndarray
    K_grid: np.ndarray
    t_transient: int
    t_record: int
    n_ics: int


def bifurcation_scan(
    K_grid,
    params_base: MapParams,
    t_transient: int = 500,
    t_record: int = 64,
    n_ics: int = 24,
    seed: int = 0,
) -> BifurcationResult:
    """For each K: run n_ics trajectories past the transient, then record p.

    Initial conditions are drawn once (shared across the K grid) from the
    standard sampling region.
    """
    K_grid = np.asarray(K_grid, dtype=np.float64)
    if K_grid.size == 0:
        raise ValueError("K grid must be non-empty")
    q0, p0 = sample_initial_conditions(n_ics, seed)
    K_col = []
    p_col = []
    for K in K_grid:
        samples = kernels.bifurcation_record_batch(
            q0, p0,
            float(K), params_base.gamma, params_base.second_harmonic_weight,
            params_base.phi, t_transient, t_record,
        )
        if not np.all(np.isfinite(samples)):
            raise DivergentTrajectoryError(f"divergent trajectories at K={K}")
        flat = samples.ravel()
        K_col.append(np.full(flat.size, K))
        p_col.append(flat)
    return BifurcationResult(
        K=np.concatenate(K_col),
        p=np.concatenate(p_col),
        K_grid=K_grid,
        t_transient=t_transient,
        t_record=t_record,
        n_ics=n_ics,
    )


def cluster_count(samples: np.ndarray, gap: float = 1e-3) -> int:
    """Number of gap-separated clusters among 1-d attractor samples."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    if s.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(s) > gap))


def classify_regular(samples: np.ndarray, gap: float = 1e-3, max_clusters: int = 50) -> bool:
    """Heuristic: few distinct momentum clusters means a periodic attractor."""
    return cluster_count(samples, gap) <= max_clusters
