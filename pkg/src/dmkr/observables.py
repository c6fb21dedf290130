"""Scrambling and localization observables: commutator-square decay series,
inverse participation ratio, long-time invariant state and phase-space
(Husimi) distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import MapParams
from .quantum import (
    DEFAULT_CONFIG,
    HilbertSpace,
    PropagatorConfig,
    build_observables,
    check_boundary_leakage,
    coherent_state,
    density_from_state,
    evolve_period,
    mom_to_pos_vec,
)

TWO_PI = 2.0 * math.pi


@dataclass
class TimeSeries:
    """Observable values at integer kick counts."""

    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times)
        self.values = np.asarray(self.values, dtype=np.float64)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must be finite")


def _canonical_phase(psi: np.ndarray) -> np.ndarray:
    """Normalize and rotate the global phase so results are gauge-fixed."""
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    ref = psi[int(np.argmax(np.abs(psi)))]
    return psi * (np.conj(ref) / abs(ref))


def otoc_series(
    psi0: np.ndarray,
    space: HilbertSpace,
    params: MapParams,
    config: PropagatorConfig = DEFAULT_CONFIG,
    T: int = 100,
    A: np.ndarray | None = None,
) -> TimeSeries:
    """Commutator-square series C(t) = <[A, B(t)] [A, B(t)]^dag> in psi0.

    B(0) is the momentum operator; B(t) is advanced with the adjoint
    (Heisenberg) period map, and the expectation is taken in the fixed
    initial state.  C(0) equals hbar_eff^2 for any state supported away
    from the momentum truncation edge.  A defaults to the unit shift
    operator; pass e.g. a two-step shift to probe operator robustness.

    With config.check_leakage the initial state is co-evolved in the
    Schrodinger picture and its edge population monitored.
    """
    if T < 1:
        raise ValueError("need horizon T >= 1")
    psi0 = _canonical_phase(psi0)
    obs = build_observables(space)
    if A is None:
        A = obs.A
    B = obs.P.copy()
    rho = density_from_state(psi0) if config.check_leakage else None

    values = np.empty(T + 1)
    values[0] = _commutator_square(A, B, psi0)
    for t in range(1, T + 1):
        B = evolve_period(B, "heisenberg", space, params, config)
        values[t] = _commutator_square(A, B, psi0)
        if rho is not None:
            rho = evolve_period(rho, "schrodinger", space, params, config)
            check_boundary_leakage(rho, config.leakage_levels, config.leakage_threshold)
    meta = {
        "K": params.K, "gamma": params.gamma, "hbar_eff": space.hbar_eff,
        "N": space.N, "a": params.a, "phi": params.phi,
    }
    return TimeSeries(times=np.arange(T + 1), values=values, metadata=meta)


def _commutator_square(A: np.ndarray, B: np.ndarray, psi: np.ndarray) -> float:
    M = A @ B - B @ A
    w = M.conj().T @ psi
    c = np.vdot(psi, M @ w)
    if abs(c.imag) > 1e-9 * max(1.0, abs(c.real)):
        raise ArithmeticError(f"commutator square has imaginary part {c.imag:.3e}")
    return float(c.real)


def ipr(rho: np.ndarray) -> float:
    """Inverse participation ratio (sum_i rho_ii^2)^-1 / N of the momentum
    diagonal; 1 for the maximally mixed state, 1/N for a basis state."""
    d = np.diagonal(rho).real
    tr = d.sum()
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(f"density matrix trace {tr:.8f} is not 1")
    return float(1.0 / (np.sum(d * d) * d.size))


@dataclass
class EquilibriumResult:
    rho: np.ndarray
    residual: float
    iterations: int
    converged: bool


def equilibrium_state(
    space: HilbertSpace,
    params: MapParams,
    config: PropagatorConfig = DEFAULT_CONFIG,
    tol: float = 1e-8,
    t_max: int = 5000,
    q0: float = math.pi,
    p0: float = 0.0,
) -> EquilibriumResult:
    """Iterate the period map from a coherent state until the trace-norm
    period-to-period change falls below tol.

    Requires gamma < 1 (a contracting channel).  On hitting t_max the last
    state is returned with converged=False.
    """
    if params.gamma >= 1.0:
        raise ValueError("equilibrium state needs gamma < 1")
    rho = density_from_state(coherent_state(q0, p0, space))
    residual = math.inf
    for t in range(1, t_max + 1):
        rho_next = evolve_period(rho, "schrodinger", space, params, config)
        residual = trace_norm(rho_next - rho)
        rho = rho_next
        if residual < tol:
            return EquilibriumResult(rho, residual, t, True)
    return EquilibriumResult(rho, residual, t_max, False)


def trace_norm(X: np.ndarray) -> float:
    """Sum of singular values; for Hermitian X the sum of |eigenvalues|."""
    H = 0.5 * (X + X.conj().T)
    if np.abs(X - H).max() < 1e-12:
        return float(np.abs(np.linalg.eigvalsh(H)).sum())
    return float(np.linalg.svd(X, compute_uv=False).sum())


@dataclass
class HusimiMap:
    """Non-negative coherent-state quasi-probability on a (q, p) grid.

    normalization "area": the Riemann sum times the cell area is ~1 for a
    state contained in the grid window.
    """

    q_centers: np.ndarray
    p_centers: np.ndarray
    values: np.ndarray      # shape (len(p_centers), len(q_centers))
    normalization: str = "area"

    @property
    def cell_area(self) -> float:
        dq = self.q_centers[1] - self.q_centers[0]
        dp = self.p_centers[1] - self.p_centers[0]
        return float(dq * dp)

    def support_area(self, rel_threshold: float = 0.01) -> float:
        """Total area of cells above rel_threshold * max value."""
        mask = self.values > rel_threshold * self.values.max()
        return float(mask.sum() * self.cell_area)


def husimi_grid(space: HilbertSpace, n_q: int = 200, n_p: int = 200,
                p_min: float = -math.pi, p_max: float = math.pi):
    q = (np.arange(n_q) + 0.5) * TWO_PI / n_q
    p = p_min + (np.arange(n_p) + 0.5) * (p_max - p_min) / n_p
    return q, p


def husimi(
    state: np.ndarray,
    space: HilbertSpace,
    q_centers: np.ndarray | None = None,
    p_centers: np.ndarray | None = None,
    chunk: int = 4096,
) -> HusimiMap:
    """Coherent-state overlap distribution H(q,p) = <z|rho|z> / (2 pi hbar).

    Accepts a state vector or a density matrix.  Grid points whose momentum
    center lies outside the truncation window are rejected.
    """
    if q_centers is None or p_centers is None:
        qd, pd = husimi_grid(space)
        q_centers = qd if q_centers is None else q_centers
        p_centers = pd if p_centers is None else p_centers
    q_centers = np.asarray(q_centers, dtype=np.float64)
    p_centers = np.asarray(p_centers, dtype=np.float64)
    if np.abs(p_centers).max() >= space.p_max:
        raise ValueError("husimi grid extends beyond the momentum window")
    hbar = space.hbar_eff
    n = space.n_values.astype(np.float64)
    state = np.asarray(state, dtype=np.complex128)
    pure = state.ndim == 1

    qq, pp = np.meshgrid(q_centers, p_centers)   # shape (n_p, n_q)
    qf = qq.ravel()
    pf = pp.ravel()
    out = np.empty(qf.size)
    for lo in range(0, qf.size, chunk):
        hi = min(lo + chunk, qf.size)
        n0 = pf[lo:hi] / hbar
        Z = np.exp(-0.5 * hbar * (n[:, None] - n0[None, :]) ** 2
                   - 1j * np.outer(n, qf[lo:hi]))
        Z /= np.linalg.norm(Z, axis=0)
        if pure:
            amp = Z.conj().T @ state
            out[lo:hi] = np.abs(amp) ** 2
        else:
            W = state @ Z
            out[lo:hi] = np.real(np.sum(np.conj(Z) * W, axis=0))
    values = out.reshape(len(p_centers), len(q_centers)) / (TWO_PI * hbar)
    values = np.maximum(values, 0.0)
    return HusimiMap(q_centers=q_centers, p_centers=p_centers, values=values)


def position_distribution(psi: np.ndarray) -> np.ndarray:
    """|psi(q_j)|^2 on the position grid (sums to 1)."""
    amp = mom_to_pos_vec(psi)
    w = np.abs(amp) ** 2
    return w / w.sum()
