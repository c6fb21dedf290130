import math

import numpy as np
import pytest

from dmkr.analysis import (
    ComparisonRow,
    FitWindowError,
    SweepConfig,
    fit_decay_rate,
    growth_rate,
    k_sweep,
    log_linear_fit,
    regular_windows,
    rescale,
    sweep_row,
    window_has_local_minimum,
)
from dmkr.observables import TimeSeries


def series_from(values):
    return TimeSeries(times=np.arange(len(values)), values=np.asarray(values))


def test_fit_recovers_pure_exponential():
    t = np.arange(0, 101)
    s = series_from(5.0 * np.exp(-0.3 * t))
    fit = log_linear_fit(s, 0, 100)
    assert fit.rate == pytest.approx(0.3, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(5.0), abs=1e-12)
    assert fit.residual_rms < 1e-13
    assert fit.confidence_half_width < 1e-13


def test_fit_constant_series():
    s = series_from(np.full(50, 2.5))
    fit = log_linear_fit(s, 0, 49)
    assert fit.rate == pytest.approx(0.0, abs=1e-14)
    assert fit.residual_rms == pytest.approx(0.0, abs=1e-14)


def test_fit_perturbed_exponential():
    t = np.arange(0, 101)
    s = series_from(np.exp(-0.3 * t) * (1.0 + 0.01 * np.sin(t)))
    fit = log_linear_fit(s, 0, 100)
    assert fit.rate == pytest.approx(0.3, abs=0.01)


def test_fit_rejects_nonpositive_window():
    v = np.exp(-np.arange(20.0))
    v[12] = 0.0
    s = TimeSeries(times=np.arange(20), values=v)
    with pytest.raises(FitWindowError):
        log_linear_fit(s, 5, 19)
    fit = fit_decay_rate(s, 5, 19)
    assert fit.window_shrunk
    assert fit.window[1] <= 11


def test_fit_needs_two_points():
    s = series_from(np.exp(-np.arange(10.0)))
    with pytest.raises(FitWindowError):
        log_linear_fit(s, 4, 4)


def test_growth_rate_is_log_ratio():
    s = series_from([0.04, 0.11, 0.2])
    assert growth_rate(s) == pytest.approx(math.log(0.11 / 0.04), abs=1e-14)


def test_rescale_reference_values():
    assert rescale(0.0, 0.0)[0] == pytest.approx(0.605, abs=1e-15)
    assert rescale(1.0, 0.0)[0] == pytest.approx(1.155, abs=1e-15)
    assert rescale(0.0, 0.2)[1] == pytest.approx(0.7, abs=1e-15)


def test_rescale_preserves_minima_locations():
    rng = np.random.default_rng(3)
    lam = rng.normal(size=200)
    scaled = np.array([rescale(v, 0.0)[0] for v in lam])
    interior = slice(1, -1)
    raw_min = (lam[interior] < lam[:-2]) & (lam[interior] < lam[2:])
    sc_min = (scaled[interior] < scaled[:-2]) & (scaled[interior] < scaled[2:])
    np.testing.assert_array_equal(raw_min, sc_min)


def test_regular_window_helpers():
    lam = np.array([0.5, -0.1, -0.2, 0.3, -0.4, 0.6])
    assert regular_windows(np.arange(6.0), lam) == [(1, 2), (4, 4)]
    vals = np.array([3.0, 1.0, 2.0, 5.0, 0.5, 4.0])
    assert window_has_local_minimum(vals, 1, 2)
    assert window_has_local_minimum(vals, 4, 4)
    assert not window_has_local_minimum(np.array([1.0, 5.0, 6.0, 2.0]), 1, 2)


def _tiny_cfg(jobs=1):
    return SweepConfig(N=64, hbar_eff=0.2, gamma=0.2, T=12, fit_t_min=2,
                       fit_t_max=12, lyapunov_M=20, lyapunov_transient=100,
                       lyapunov_steps=2000, ipr_t_max=400, n_eigs=5,
                       cell_side=0.4, samples_per_cell=50, seed=5, jobs=jobs)


def test_sweep_row_decay_columns():
    row = sweep_row("decay", 5.4, _tiny_cfg())
    assert row.status == "ok", row.error
    assert row.otoc_decay_rate is not None and row.otoc_decay_rate > 0
    assert row.rescaled_lyapunov is not None
    assert row.rescaled_ipr is not None
    assert row.quantum_gap_rate is None


def test_sweep_row_gap_columns():
    row = sweep_row("gap", 5.4, _tiny_cfg())
    assert row.status == "ok", row.error
    assert row.quantum_gap_rate is not None
    assert row.classical_gap_rate_noiseless is not None
    assert row.classical_gap_rate_noisy is not None


def test_sweep_row_captures_errors():
    cfg = SweepConfig(N=64, hbar_eff=0.2, gamma=1.0, lyapunov_M=5,
                      lyapunov_steps=500, lyapunov_transient=50, T=3)
    row = sweep_row("decay", 1.0, cfg)   # gamma=1 has no equilibrium state
    assert row.status == "error"
    assert "gamma" in row.error or "Error" in row.error


def test_k_sweep_deterministic_and_parallel_equivalent():
    grid = [2.0, 5.4]
    a = k_sweep("growth", grid, _tiny_cfg(jobs=1))
    b = k_sweep("growth", grid, _tiny_cfg(jobs=2))
    assert [r.K for r in a] == [r.K for r in b]
    for ra, rb in zip(a, b):
        assert ra.otoc_growth_rate == rb.otoc_growth_rate
        assert ra.rescaled_lyapunov == rb.rescaled_lyapunov


def test_k_sweep_rejects_unknown_pipeline():
    with pytest.raises(ValueError):
        k_sweep("nope", [1.0])


def test_comparison_row_columns_match_fields():
    row = ComparisonRow(K=1.0)
    for col in ComparisonRow.COLUMNS:
        assert hasattr(row, col)
