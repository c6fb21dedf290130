"""Backend equivalence: the compiled kernels and the numpy fallback must
implement the same arithmetic.  Chaotic orbits amplify last-ulp libm
differences exponentially, so elementwise comparisons use short horizons
and statistical quantities get statistical tolerances."""

import math

import numpy as np
import pytest

from dmkr import kernels
from dmkr.kernels import python_backend

pytestmark = pytest.mark.skipif(
    not kernels.HAVE_COMPILED, reason="compiled kernel backend not built")

ARGS = dict(K=5.4, gamma=0.2, a2=0.5, phi=math.pi / 2)


def test_iterate_batch_matches_python_short():
    q0 = np.linspace(0.1, 6.0, 16)
    p0 = np.linspace(-2.0, 2.0, 16)
    qc, pc = kernels.iterate_batch(q0, p0, steps=25, **ARGS)
    qp, pp = python_backend.iterate_batch(q0, p0, steps=25, **ARGS)
    np.testing.assert_allclose(qc, qp, rtol=0, atol=1e-8)
    np.testing.assert_allclose(pc, pp, rtol=0, atol=1e-8)


def test_iterate_batch_matches_python_long_regular():
    # contracting regular dynamics: backend rounding differences die out
    q0 = np.linspace(0.1, 6.0, 8)
    p0 = np.zeros(8)
    qc, pc = kernels.iterate_batch(q0, p0, steps=2000, K=8.0, gamma=0.2,
                                   a2=0.5, phi=math.pi / 2)
    qp, pp = python_backend.iterate_batch(q0, p0, steps=2000, K=8.0, gamma=0.2,
                                          a2=0.5, phi=math.pi / 2)
    np.testing.assert_allclose(pc, pp, rtol=0, atol=1e-10)


def test_trajectory_record_consistent_with_iterate():
    qs, ps = kernels.trajectory_record(1.0, 0.5, steps=100, **ARGS)
    qf, pf = kernels.iterate_batch(np.array([1.0]), np.array([0.5]), steps=100, **ARGS)
    assert qs[-1] == qf[0]
    assert ps[-1] == pf[0]
    assert qs.shape == (100,)
    assert np.all((qs >= 0) & (qs < 2 * math.pi))


def test_noise_array_path_matches():
    rng = np.random.default_rng(5)
    noise = rng.normal(0, 0.1, size=(30, 4))
    q0 = np.array([0.5, 1.5, 2.5, 3.5])
    p0 = np.zeros(4)
    qc, pc = kernels.iterate_batch(q0, p0, steps=30, noise=noise, **ARGS)
    qp, pp = python_backend.iterate_batch(q0, p0, steps=30, noise=noise, **ARGS)
    np.testing.assert_allclose(pc, pp, rtol=0, atol=1e-9)
    # single-trajectory record with the same noise column
    qs, ps = kernels.trajectory_record(0.5, 0.0, steps=30, noise=noise[:, 0], **ARGS)
    assert ps[-1] == pytest.approx(pc[0], abs=1e-12)


def test_lyapunov_batch_backends_agree_statistically():
    q0 = np.linspace(0.2, 6.0, 32)
    p0 = np.linspace(-3.0, 3.0, 32)
    lc, okc = kernels.lyapunov_max_batch(q0, p0, t_transient=200, t_total=20_000, **ARGS)
    lp, okp = python_backend.lyapunov_max_batch(q0, p0, t_transient=200,
                                                t_total=20_000, **ARGS)
    assert okc.all() and okp.all()
    assert lc.mean() == pytest.approx(lp.mean(), rel=0.02)


def test_lyapunov_spectrum_batch_sum_rule_both_backends():
    q0 = np.array([1.0, 2.0])
    p0 = np.array([0.0, 0.5])
    for impl in (kernels, python_backend):
        l1, l2, ok = impl.lyapunov_spectrum_batch(q0, p0, t_transient=200,
                                                  t_total=20_000, **ARGS)
        assert ok.all()
        np.testing.assert_allclose(l1 + l2, math.log(0.2), atol=1e-3)


def test_bifurcation_record_backends_agree_regular():
    q0 = np.linspace(0.5, 5.5, 6)
    p0 = np.zeros(6)
    rc = kernels.bifurcation_record_batch(q0, p0, K=8.0, gamma=0.2, a2=0.5,
                                          phi=math.pi / 2, t_transient=400,
                                          t_record=16)
    rp = python_backend.bifurcation_record_batch(q0, p0, K=8.0, gamma=0.2,
                                                 a2=0.5, phi=math.pi / 2,
                                                 t_transient=400, t_record=16)
    np.testing.assert_allclose(rc, rp, rtol=0, atol=1e-10)
    assert rc.shape == (6, 16)
