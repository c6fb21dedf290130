"""Fitting and K-sweep comparison pipelines.

Builds the per-K tables that overlay the commutator-square decay rate with
the classical Lyapunov exponent, the inverse participation ratio and the
spectral-gap rates of the quantum channel and of the classical transfer
operator (noiseless and with hbar_eff-sized Gaussian noise).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import classical, observables, spectra, ulam
from .params import MapParams, NoiseSpec
from .quantum import HilbertSpace, PropagatorConfig, coherent_state

# Presentation-layer rescaling constants for comparison plots: the Lyapunov
# exponent is drawn as 0.55*l + 0.605 (so l = 0 sits at 0.605, the
# regular/chaotic border) and the IPR as 3.5*IPR.  They enter comparison
# outputs only, never the physics.
LYAPUNOV_SCALE = 0.55
LYAPUNOV_OFFSET = 0.605
IPR_SCALE = 3.5


class FitWindowError(ValueError):
    """The requested window contains non-positive values (numerical floor)."""


@dataclass
class FitResult:
    """Log-linear fit of an exponentially decaying series."""

    rate: float                  # minus the slope of ln C vs t
    intercept: float
    window: tuple[int, int]      # window actually used
    residual_rms: float
    confidence_half_width: float
    n_points: int
    window_shrunk: bool = False


def log_linear_fit(series: observables.TimeSeries, t_min: int, t_max: int) -> FitResult:
    """Least-squares line through (t, ln C(t)) on [t_min, t_max].

    All values in the window must be positive; a non-positive value means
    the series reached its numerical floor and the caller should shrink the
    window (see fit_decay_rate for the auto-shrinking variant).
    """
    mask = (series.times >= t_min) & (series.times <= t_max)
    t = np.asarray(series.times)[mask].astype(np.float64)
    v = series.values[mask]
    if t.size < 2:
        raise FitWindowError(f"window [{t_min}, {t_max}] has {t.size} points")
    if np.any(v <= 0.0):
        raise FitWindowError(
            f"non-positive values in window [{t_min}, {t_max}]; series reached "
            f"the numerical floor, shrink the window")
    y = np.log(v)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    denom = float(np.sum((t - t.mean()) ** 2))
    if t.size > 2:
        se = math.sqrt(float(np.sum(resid**2)) / (t.size - 2) / denom)
    else:
        se = 0.0
    return FitResult(
        rate=float(-slope), intercept=float(intercept),
        window=(int(t[0]), int(t[-1])), residual_rms=rms,
        confidence_half_width=1.96 * se, n_points=int(t.size))


def fit_decay_rate(series: observables.TimeSeries, t_min: int = 5,
                   t_max: int = 100, floor_rel: float = 1e-24) -> FitResult:
    """Decay-rate fit that shrinks t_max down to the numerical floor.

    The floor is floor_rel times the series maximum; the fit stops at the
    last time before the first floored (or non-positive) value.
    """
    floor = float(series.values.max()) * floor_rel
    mask = (series.times >= t_min) & (series.times <= t_max)
    t = np.asarray(series.times)[mask]
    v = series.values[mask]
    bad = np.nonzero(v <= floor)[0]
    shrunk = False
    if bad.size:
        t_max_eff = int(t[bad[0]]) - 1
        shrunk = True
    else:
        t_max_eff = t_max
    fit = log_linear_fit(series, t_min, t_max_eff)
    fit.window_shrunk = shrunk
    return fit


def growth_rate(series: observables.TimeSeries) -> float:
    """ln C(1) - ln C(0), the one-kick log growth."""
    if series.times[0] != 0 or 1 not in series.times:
        raise ValueError("series must contain t = 0 and t = 1")
    c0 = series.values[series.times == 0][0]
    c1 = series.values[series.times == 1][0]
    if c0 <= 0 or c1 <= 0:
        raise FitWindowError("non-positive values at t = 0 or 1")
    return float(math.log(c1) - math.log(c0))


def rescale(lyapunov: float, ipr_value: float) -> tuple[float, float]:
    """Affine presentation rescaling of (Lyapunov, IPR) for overlays."""
    return (LYAPUNOV_SCALE * lyapunov + LYAPUNOV_OFFSET, IPR_SCALE * ipr_value)


# ---------------------------------------------------------------------------
# K sweeps


@dataclass(frozen=True)
class SweepConfig:
    """Resources and resolutions for one comparison sweep."""

    N: int = 256
    hbar_eff: float = 0.062
    gamma: float = 0.2
    a: float = 0.5
    phi: float = math.pi / 2
    T: int = 100
    fit_t_min: int = 5
    fit_t_max: int = 100
    lyapunov_M: int = 1000
    lyapunov_transient: int = 1000
    lyapunov_steps: int = 100_000
    ipr_tol: float = 1e-8
    ipr_t_max: int = 2000
    n_eigs: int = 10
    gap_tol: float = 1e-6
    cell_side: float = 0.15
    samples_per_cell: int = 1000
    substeps: int | None = None
    seed: int = 0
    jobs: int = 1

    def params(self, K: float) -> MapParams:
        return MapParams(K=K, gamma=self.gamma, hbar_eff=self.hbar_eff,
                         a=self.a, phi=self.phi)

    def space(self) -> HilbertSpace:
        return HilbertSpace(N=self.N, hbar_eff=self.hbar_eff)

    def propagator(self) -> PropagatorConfig:
        # sweeps cross parameter regions where the state legitimately
        # reaches the truncation edge, so the hard leakage stop stays off;
        # the closed-form dissipator map keeps long sweeps affordable
        return PropagatorConfig(substeps=self.substeps, method="exact",
                                check_leakage=False)


GROWTH_SWEEP = SweepConfig(T=1, fit_t_min=0, fit_t_max=1)
DECAY_SWEEP = SweepConfig()
GAP_SWEEP = SweepConfig(N=128, hbar_eff=0.15)

PIPELINES = ("growth", "decay", "gap")


@dataclass
class ComparisonRow:
    """One K point of a comparison table; unset columns stay None."""

    K: float
    otoc_decay_rate: float | None = None
    otoc_growth_rate: float | None = None
    rescaled_lyapunov: float | None = None
    rescaled_ipr: float | None = None
    quantum_gap_rate: float | None = None
    classical_gap_rate_noiseless: float | None = None
    classical_gap_rate_noisy: float | None = None
    status: str = "ok"
    error: str = ""
    provenance: dict = field(default_factory=dict)

    COLUMNS = (
        "K", "otoc_decay_rate", "otoc_growth_rate", "rescaled_lyapunov",
        "rescaled_ipr", "quantum_gap_rate", "classical_gap_rate_noiseless",
        "classical_gap_rate_noisy", "status",
    )


def _row_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((base_seed, index)).generate_state(1)[0])


def sweep_row(pipeline: str, K: float, cfg: SweepConfig, index: int = 0) -> ComparisonRow:
    """Compute the columns of one sweep row; failures land in row.status."""
    row = ComparisonRow(K=float(K))
    params = cfg.params(float(K))
    seed = _row_seed(cfg.seed, index)
    row.provenance = {"pipeline": pipeline, "seed": seed, "N": cfg.N,
                      "hbar_eff": cfg.hbar_eff, "gamma": cfg.gamma}
    try:
        lyap = classical.averaged_max_lyapunov(
            params, M=cfg.lyapunov_M, seed=seed,
            t_transient=cfg.lyapunov_transient, t_total=cfg.lyapunov_steps)
        row.rescaled_lyapunov = rescale(lyap.mean, 0.0)[0]
        row.provenance["lyapunov_raw"] = lyap.mean
        row.provenance["lyapunov_failed"] = lyap.n_failed

        if pipeline in ("growth", "decay", "gap"):
            space = cfg.space()
            prop = cfg.propagator()
            psi0 = coherent_state(math.pi, 0.0, space)
            series = observables.otoc_series(psi0, space, params, prop, T=cfg.T)
            if pipeline == "growth":
                row.otoc_growth_rate = growth_rate(series)
            else:
                fit = fit_decay_rate(series, cfg.fit_t_min, cfg.fit_t_max)
                row.otoc_decay_rate = fit.rate
                row.provenance["fit_window"] = fit.window
                row.provenance["fit_window_shrunk"] = fit.window_shrunk

        if pipeline == "decay":
            eq = observables.equilibrium_state(
                space, params, prop, tol=cfg.ipr_tol, t_max=cfg.ipr_t_max)
            row.rescaled_ipr = rescale(0.0, observables.ipr(eq.rho))[1]
            row.provenance["ipr_raw"] = observables.ipr(eq.rho)
            row.provenance["equilibrium_converged"] = eq.converged

        if pipeline == "gap":
            spec_q = spectra.channel_spectrum(
                space, params, prop, n_eigs=cfg.n_eigs, method="krylov",
                seed=seed, tol=1e-9)
            row.quantum_gap_rate = spectra.spectral_gap_rate(spec_q, cfg.gap_tol)
            grid = ulam.UlamGrid(cell_side=cfg.cell_side)
            for noisy in (False, True):
                T = ulam.build_ulam_matrix(
                    params, grid, samples_per_cell=cfg.samples_per_cell,
                    noise=NoiseSpec(enabled=noisy), seed=seed)
                spec_c = spectra.matrix_spectrum(T, n_eigs=cfg.n_eigs, seed=seed)
                rate = spectra.spectral_gap_rate(spec_c, cfg.gap_tol)
                if noisy:
                    row.classical_gap_rate_noisy = rate
                else:
                    row.classical_gap_rate_noiseless = rate
    except Exception as exc:  # noqa: BLE001 - per-row capture is the contract
        row.status = "error"
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _worker(args):
    pipeline, K, cfg, index = args
    return sweep_row(pipeline, K, cfg, index)


def k_sweep(
    pipeline: str,
    K_grid,
    cfg: SweepConfig | None = None,
) -> list[ComparisonRow]:
    """Run one comparison pipeline over a K grid.

    Rows are independent work items executed in a process pool of cfg.jobs
    workers; results are keyed by K so the table is order-independent, and
    per-row seeds derive from (cfg.seed, row index) so the table is
    reproducible for a fixed config.
    """
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    if cfg is None:
        cfg = {"growth": GROWTH_SWEEP, "decay": DECAY_SWEEP, "gap": GAP_SWEEP}[pipeline]
    K_grid = np.asarray(K_grid, dtype=np.float64)
    tasks = [(pipeline, float(K), cfg, i) for i, K in enumerate(K_grid)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_worker, tasks))
    else:
        rows = [_worker(t) for t in tasks]
    rows.sort(key=lambda r: r.K)
    return rows


def regular_windows(K_grid: np.ndarray, lyapunov: np.ndarray) -> list[tuple[int, int]]:
    """Maximal index runs where the Lyapunov exponent is negative."""
    neg = np.asarray(lyapunov) < 0.0
    runs = []
    start = None
    for i, flag in enumerate(neg):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(neg) - 1))
    return runs


def window_has_local_minimum(values: np.ndarray, lo: int, hi: int) -> bool:
    """True if the min of `values` over [lo-1, hi+1] is attained inside [lo, hi]."""
    values = np.asarray(values)
    a = max(0, lo - 1)
    b = min(len(values) - 1, hi + 1)
    seg = values[a:b + 1]
    argmin = a + int(np.argmin(seg))
    return lo <= argmin <= hi
