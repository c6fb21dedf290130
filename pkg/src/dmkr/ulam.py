"""Cell-to-cell transfer matrix of the classical map (Ulam discretization).

Phase space is tiled with square-ish cells; each cell is seeded with uniform
sample points, mapped one period, and the landing fractions form a
column-stochastic matrix approximating the density propagator.  Momentum is
an open window with escape accounting: if too much mass leaves, the window
is enlarged (or an error raised).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .params import NO_NOISE, MapParams, NoiseSpec

TWO_PI = 2.0 * math.pi

DEFAULT_CELL_SIDE = 0.15    # transfer-operator resolution scale
_CHUNK_SAMPLES = 4_000_000


class WindowTooSmallError(RuntimeError):
    """Sampled dynamics escapes the momentum window; widen p_min/p_max."""


class PowerIterationError(RuntimeError):
    """Stationary-density iteration failed to converge."""


@dataclass(frozen=True)
class UlamGrid:
    """Half-open cell partition of [q_min, q_max) x [p_min, p_max)."""

    p_min: float = -math.pi
    p_max: float = math.pi
    cell_side: float = DEFAULT_CELL_SIDE
    q_min: float = 0.0
    q_max: float = TWO_PI

    def __post_init__(self):
        if self.cell_side <= 0:
            raise ValueError("cell_side must be positive")
        if self.n_q * self.n_p < 2:
            raise ValueError("grid needs at least 2 cells")

    @property
    def n_q(self) -> int:
        return max(1, math.ceil((self.q_max - self.q_min) / self.cell_side))

    @property
    def n_p(self) -> int:
        return max(1, math.ceil((self.p_max - self.p_min) / self.cell_side))

    @property
    def n_cells(self) -> int:
        return self.n_q * self.n_p

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n_q

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.n_p

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(q, p) centers for every flat cell index iq * n_p + ip."""
        iq, ip = np.divmod(np.arange(self.n_cells), self.n_p)
        q = self.q_min + (iq + 0.5) * self.dq
        p = self.p_min + (ip + 0.5) * self.dp
        return q, p

    def enlarged(self, p_lo: float, p_hi: float) -> "UlamGrid":
        pad = 2.0 * self.cell_side
        return replace(self, p_min=min(self.p_min, p_lo - pad),
                       p_max=max(self.p_max, p_hi + pad))


@dataclass
class TransitionMatrix:
    """Sparse column-stochastic cell transfer matrix.

    matrix[j, i] is the fraction of cell i's samples that landed in cell j
    (renormalized over the non-escaping samples); escaped_mass records the
    overall fraction that left the momentum window before renormalization.
    """

    matrix: sp.csc_matrix
    grid: UlamGrid
    samples_per_cell: int
    escaped_mass: float
    noise_sigma: float = 0.0
    seed: int = 0

    @property
    def n_cells(self) -> int:
        return self.matrix.shape[0]

    def save_coo(self, path) -> None:
        """Write the matrix as 'row col value' text lines."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# row col value\n")
            for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{r} {c} {float(v)!r}\n")


def _one_step(q, p, params: MapParams, sigma: float, rng) -> tuple[np.ndarray, np.ndarray]:
    a2 = params.second_harmonic_weight
    p_new = params.gamma * p + params.K * (np.sin(q) + a2 * np.sin(2.0 * q + params.phi))
    if sigma > 0.0:
        p_new = p_new + rng.normal(0.0, sigma, size=p_new.shape)
    q_new = (q + p_new) % TWO_PI
    return q_new, p_new


def _sample_grid(params, grid, samples_per_cell, sigma, seed):
    """One full sampling pass; returns (counts csc, landed, escaped stats)."""
    rng = np.random.default_rng(seed)
    n_cells = grid.n_cells
    counts = sp.csc_matrix((n_cells, n_cells), dtype=np.float64)
    escaped = 0
    p_lo, p_hi = math.inf, -math.inf
    cells_per_chunk = max(1, _CHUNK_SAMPLES // samples_per_cell)
    for start in range(0, n_cells, cells_per_chunk):
        stop = min(start + cells_per_chunk, n_cells)
        idx = np.arange(start, stop)
        iq, ip = np.divmod(idx, grid.n_p)
        m = idx.size * samples_per_cell
        u = rng.random((idx.size, samples_per_cell))
        v = rng.random((idx.size, samples_per_cell))
        q = grid.q_min + (iq[:, None] + u) * grid.dq
        p = grid.p_min + (ip[:, None] + v) * grid.dp
        q2, p2 = _one_step(q.ravel(), p.ravel(), params, sigma, rng)
        src = np.repeat(idx, samples_per_cell)
        ip2 = np.floor((p2 - grid.p_min) / grid.dp).astype(np.int64)
        iq2 = np.floor((q2 - grid.q_min) / grid.dq).astype(np.int64)
        iq2 = np.clip(iq2, 0, grid.n_q - 1)
        inside = (ip2 >= 0) & (ip2 < grid.n_p)
        out = ~inside
        if np.any(out):
            escaped += int(out.sum())
            p_lo = min(p_lo, float(p2[out].min()))
            p_hi = max(p_hi, float(p2[out].max()))
        dst = iq2[inside] * grid.n_p + ip2[inside]
        block = sp.coo_matrix(
            (np.ones(dst.size), (dst, src[inside])), shape=(n_cells, n_cells)
        )
        counts = counts + block.tocsc()
        del u, v, q, p, q2, p2
    return counts, escaped, p_lo, p_hi


def build_ulam_matrix(
    params: MapParams,
    grid: UlamGrid | None = None,
    samples_per_cell: int = 1000,
    noise: NoiseSpec = NO_NOISE,
    seed: int = 0,
    escape_threshold: float = 1e-3,
    auto_enlarge: bool = True,
    max_enlarge: int = 8,
) -> TransitionMatrix:
    """Monte-Carlo transfer matrix: map samples_per_cell uniform points from
    every cell one period and bin the destinations.

    Escaping mass above escape_threshold triggers a window enlargement and a
    clean resample (same seed), up to max_enlarge times; with
    auto_enlarge=False it raises WindowTooSmallError instead.
    """
    if samples_per_cell < 1:
        raise ValueError("need samples_per_cell >= 1")
    if grid is None:
        grid = UlamGrid()
    sigma = noise.resolve_sigma(params) if noise.enabled else 0.0
    for _ in range(max_enlarge + 1):
        counts, escaped, p_lo, p_hi = _sample_grid(
            params, grid, samples_per_cell, sigma, seed)
        total = grid.n_cells * samples_per_cell
        escaped_mass = escaped / total
        landed = np.asarray(counts.sum(axis=0)).ravel()
        if escaped_mass <= escape_threshold and landed.min() > 0:
            break
        if not auto_enlarge:
            raise WindowTooSmallError(
                f"escaped mass {escaped_mass:.2e} exceeds {escape_threshold:.1e} "
                f"for window [{grid.p_min:.2f}, {grid.p_max:.2f}]")
        grid = grid.enlarged(p_lo, p_hi)
    else:
        raise WindowTooSmallError(
            f"escaped mass {escaped_mass:.2e} still above threshold after "
            f"{max_enlarge} enlargements (window [{grid.p_min:.2f}, {grid.p_max:.2f}])")
    inv = sp.diags(1.0 / landed)
    matrix = (counts @ inv).tocsc()
    return TransitionMatrix(
        matrix=matrix, grid=grid, samples_per_cell=samples_per_cell,
        escaped_mass=escaped_mass, noise_sigma=sigma, seed=seed)


def stationary_density(
    T: TransitionMatrix | sp.spmatrix,
    tol: float = 1e-12,
    max_iter: int = 20000,
) -> np.ndarray:
    """Eigenvector at eigenvalue 1 by power iteration, normalized to sum 1.

    The matrix must be column-stochastic; entries are clipped to be
    non-negative (floor -1e-12).
    """
    M = T.matrix if isinstance(T, TransitionMatrix) else T
    n = M.shape[0]
    col_sums = np.asarray(M.sum(axis=0)).ravel()
    if np.abs(col_sums - 1.0).max() > 1e-8:
        raise ValueError("matrix is not column-stochastic")
    v = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        w = M @ v
        w_sum = w.sum()
        if w_sum <= 0 or not np.isfinite(w_sum):
            raise PowerIterationError("power iteration produced invalid mass")
        w /= w_sum
        delta = np.abs(w - v).sum()
        v = w
        if delta < tol:
            break
    else:
        raise PowerIterationError(
            f"stationary density not converged after {max_iter} iterations "
            f"(residual {delta:.2e})")
    if v.min() < -1e-12:
        raise PowerIterationError(f"negative density entry {v.min():.2e}")
    v = np.maximum(v, 0.0)
    return v / v.sum()


def density_histogram(q: np.ndarray, p: np.ndarray, grid: UlamGrid) -> np.ndarray:
    """Bin trajectory samples onto the grid cells, normalized to sum 1.

    Samples outside the momentum window are dropped.
    """
    iq = np.floor((q - grid.q_min) / grid.dq).astype(np.int64)
    iq = np.clip(iq, 0, grid.n_q - 1)
    ip = np.floor((p - grid.p_min) / grid.dp).astype(np.int64)
    inside = (ip >= 0) & (ip < grid.n_p)
    flat = iq[inside] * grid.n_p + ip[inside]
    h = np.bincount(flat, minlength=grid.n_cells).astype(np.float64)
    return h / h.sum()
