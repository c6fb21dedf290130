"""Leading eigenvalues of the one-period quantum channel and of the cell
transfer matrix, and spectral-gap decay rates.

The quantum channel is applied matrix-free (one period evolution per
Krylov matrix-vector product, on vectorized density matrices); the
classical side runs the same Arnoldi solver on the sparse matrix.  A dense
superoperator path is available for small N as the reference route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .params import MapParams
from .quantum import DEFAULT_CONFIG, HilbertSpace, PropagatorConfig, evolve_period
from .ulam import TransitionMatrix

DENSE_N_LIMIT = 64


class SolverConvergenceError(RuntimeError):
    """Krylov iteration did not converge to the requested accuracy."""


class GapNotResolvedError(RuntimeError):
    """No decaying eigenvalue below the modulus-1 cluster in the result."""


@dataclass
class SpectrumResult:
    """Eigenvalues sorted by descending modulus, with solver diagnostics."""

    eigenvalues: np.ndarray
    n_requested: int
    residuals: np.ndarray
    method: str
    iterations: int = 0
    metadata: dict = field(default_factory=dict)
    vectors: np.ndarray | None = None    # columns match eigenvalues when kept

    def __post_init__(self):
        order = np.argsort(-np.abs(self.eigenvalues), kind="stable")
        self.eigenvalues = np.asarray(self.eigenvalues)[order]
        self.residuals = np.asarray(self.residuals)[order]
        if self.vectors is not None:
            self.vectors = np.asarray(self.vectors)[:, order]


def _arnoldi(op, dim: int, n_eigs: int, seed: int, tol: float, maxiter: int | None):
    ncv = min(dim, max(3 * n_eigs, n_eigs + 2))
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    try:
        vals, vecs = spla.eigs(op, k=n_eigs, which="LM", v0=v0, ncv=ncv,
                               tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        raise SolverConvergenceError(
            f"Arnoldi converged only {len(exc.eigenvalues)}/{n_eigs} "
            f"eigenvalues (ncv={ncv})") from exc
    res = np.empty(n_eigs)
    for i in range(n_eigs):
        v = vecs[:, i]
        res[i] = np.linalg.norm(op.matvec(v) - vals[i] * v) / np.linalg.norm(v)
    return vals, vecs, res, ncv


def channel_matvec(space: HilbertSpace, params: MapParams,
                   config: PropagatorConfig = DEFAULT_CONFIG):
    """LinearOperator applying one Schrodinger period to vectorized matrices."""
    N = space.N
    cfg = replace(config, check_leakage=False)

    def mv(x):
        rho = x.reshape(N, N)
        return evolve_period(rho, "schrodinger", space, params, cfg).ravel()

    return spla.LinearOperator((N * N, N * N), matvec=mv, dtype=np.complex128)


def dense_superoperator(space: HilbertSpace, params: MapParams,
                        config: PropagatorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Materialize the N^2 x N^2 channel by propagating basis matrices."""
    N = space.N
    if N > DENSE_N_LIMIT:
        raise ValueError(f"dense superoperator limited to N <= {DENSE_N_LIMIT}")
    op = channel_matvec(space, params, config)
    S = np.empty((N * N, N * N), dtype=np.complex128)
    e = np.zeros(N * N, dtype=np.complex128)
    for j in range(N * N):
        e[j] = 1.0
        S[:, j] = op.matvec(e)
        e[j] = 0.0
    return S


def channel_spectrum(
    space: HilbertSpace,
    params: MapParams,
    config: PropagatorConfig = DEFAULT_CONFIG,
    n_eigs: int = 100,
    method: str = "auto",
    seed: int = 7,
    tol: float = 1e-10,
    maxiter: int | None = None,
    keep_vectors: bool = False,
) -> SpectrumResult:
    """Largest-modulus eigenvalues of the one-period quantum channel.

    method "krylov" runs restarted Arnoldi on the matrix-free channel;
    "dense" materializes the superoperator (N <= 64); "auto" picks dense
    for small problems.
    """
    N = space.N
    dim = N * N
    if n_eigs >= dim:
        raise ValueError("n_eigs must be below N^2")
    if method == "auto":
        method = "dense" if (N <= 32 or n_eigs > dim // 4) else "krylov"
    meta = {"K": params.K, "gamma": params.gamma, "N": N, "hbar_eff": space.hbar_eff}
    if method == "dense":
        S = dense_superoperator(space, params, config)
        if keep_vectors:
            vals, vecs = np.linalg.eig(S)
        else:
            vals, vecs = np.linalg.eigvals(S), None
        order = np.argsort(-np.abs(vals), kind="stable")[:n_eigs]
        return SpectrumResult(vals[order], n_eigs, np.zeros(len(order)), "dense",
                              metadata=meta,
                              vectors=None if vecs is None else vecs[:, order])
    op = channel_matvec(space, params, config)
    vals, vecs, res, ncv = _arnoldi(op, dim, n_eigs, seed, tol, maxiter)
    return SpectrumResult(vals, n_eigs, res, "krylov", iterations=ncv, metadata=meta,
                          vectors=vecs if keep_vectors else None)


def matrix_spectrum(
    T: TransitionMatrix | sp.spmatrix,
    n_eigs: int = 100,
    seed: int = 7,
    tol: float = 1e-10,
    maxiter: int | None = None,
) -> SpectrumResult:
    """Largest-modulus eigenvalues of the sparse cell transfer matrix."""
    M = T.matrix if isinstance(T, TransitionMatrix) else sp.csc_matrix(T)
    dim = M.shape[0]
    if n_eigs >= dim - 1:
        vals = np.linalg.eigvals(M.toarray())
        order = np.argsort(-np.abs(vals), kind="stable")
        vals = vals[order][:n_eigs]
        return SpectrumResult(vals, n_eigs, np.zeros(len(vals)), "dense")
    op = spla.aslinearoperator(M.astype(np.complex128))
    vals, _, res, ncv = _arnoldi(op, dim, n_eigs, seed, tol, maxiter)
    return SpectrumResult(vals, n_eigs, res, "krylov", iterations=ncv)


def spectral_gap_rate(spec: SpectrumResult, gap_tol: float = 1e-6) -> float:
    """-2 ln |lambda_1| with lambda_1 the largest-modulus decaying eigenvalue.

    The whole modulus-1 cluster (the invariant state and any long-lived
    attractor cycle partners) is excluded by requiring |lambda| < 1 - gap_tol.
    """
    mods = np.abs(spec.eigenvalues)
    if len(mods) < 2:
        raise ValueError("need at least 2 eigenvalues")
    if abs(mods[0] - 1.0) > 1e-6:
        raise ValueError(f"leading eigenvalue modulus {mods[0]:.8f} is not 1")
    decaying = mods[mods < 1.0 - gap_tol]
    if decaying.size == 0:
        raise GapNotResolvedError(
            f"all {len(mods)} computed eigenvalues sit in the modulus-1 "
            f"cluster; request more eigenvalues")
    lam1 = float(decaying.max())
    return -2.0 * math.log(lam1)


def conjugation_pairing_defect(spec: SpectrumResult) -> float:
    """Max distance from each eigenvalue to the nearest conjugate partner."""
    vals = spec.eigenvalues
    worst = 0.0
    for v in vals:
        worst = max(worst, float(np.min(np.abs(vals - np.conj(v)))))
    return worst
