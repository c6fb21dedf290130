"""Pure-numpy fallback for the hot classical-map kernels.

Same call signatures and the same arithmetic, formula for formula, as the
compiled backend in _kernels.pyx; trajectories are advanced in lockstep so
each one sees the identical sequence of floating-point operations.  The
compiled module is preferred at import time (see kernels.py).
"""

import numpy as np

TWO_PI = 2.0 * np.pi

BACKEND = "python"


def _wrap(q):
    return q - TWO_PI * np.floor(q / TWO_PI)


def iterate_batch(q, p, K, gamma, a2, phi, steps, noise=None):
    """Advance a batch of phase points `steps` map periods.

    q, p: 1-d float arrays (modified copies are returned).
    noise: optional (steps, len(q)) array of momentum kicks, added to p
    before the drift each step.
    """
    q = np.array(q, dtype=np.float64, copy=True)
    p = np.array(p, dtype=np.float64, copy=True)
    for t in range(steps):
        p = gamma * p + K * (np.sin(q) + a2 * np.sin(2.0 * q + phi))
        if noise is not None:
            p = p + noise[t]
        q = _wrap(q + p)
    return q, p


def trajectory_record(q0, p0, K, gamma, a2, phi, steps, noise=None):
    """Iterate a single trajectory, recording (q, p) after every step."""
    q_out = np.empty(steps, dtype=np.float64)
    p_out = np.empty(steps, dtype=np.float64)
    q = float(q0)
    p = float(p0)
    for t in range(steps):
        p = gamma * p + K * (np.sin(q) + a2 * np.sin(2.0 * q + phi))
        if noise is not None:
            p = p + noise[t]
        q = _wrap(q + p)
        q_out[t] = q
        p_out[t] = p
    return q_out, p_out


def lyapunov_max_batch(q0, p0, K, gamma, a2, phi, t_transient, t_total):
    """Largest Lyapunov exponent for each initial condition.

    Tangent vectors are renormalized every step; log growth is accumulated
    after the transient.  Returns (lam, ok) where ok flags trajectories that
    stayed finite.
    """
    q = np.array(q0, dtype=np.float64, copy=True)
    p = np.array(p0, dtype=np.float64, copy=True)
    n = q.shape[0]
    v0 = np.ones(n)
    v1 = np.zeros(n)
    acc = np.zeros(n)
    for t in range(t_total):
        fp = K * (np.cos(q) + 2.0 * a2 * np.cos(2.0 * q + phi))
        p = gamma * p + K * (np.sin(q) + a2 * np.sin(2.0 * q + phi))
        q = _wrap(q + p)
        # tangent map [[1 + K f', gamma], [K f', gamma]]
        w0 = (1.0 + fp) * v0 + gamma * v1
        w1 = fp * v0 + gamma * v1
        norm = np.sqrt(w0 * w0 + w1 * w1)
        v0 = w0 / norm
        v1 = w1 / norm
        if t >= t_transient:
            acc = acc + np.log(norm)
    ok = np.isfinite(p) & np.isfinite(acc)
    lam = acc / float(t_total - t_transient)
    return lam, ok


def lyapunov_spectrum_batch(q0, p0, K, gamma, a2, phi, t_transient, t_total):
    """Both Lyapunov exponents per initial condition, via per-step 2x2 QR."""
    q = np.array(q0, dtype=np.float64, copy=True)
    p = np.array(p0, dtype=np.float64, copy=True)
    n = q.shape[0]
    # orthonormal frame columns (v0, v1) as four component arrays
    a00 = np.ones(n)
    a10 = np.zeros(n)
    a01 = np.zeros(n)
    a11 = np.ones(n)
    acc1 = np.zeros(n)
    acc2 = np.zeros(n)
    for t in range(t_total):
        fp = K * (np.cos(q) + 2.0 * a2 * np.cos(2.0 * q + phi))
        p = gamma * p + K * (np.sin(q) + a2 * np.sin(2.0 * q + phi))
        q = _wrap(q + p)
        b00 = (1.0 + fp) * a00 + gamma * a10
        b10 = fp * a00 + gamma * a10
        b01 = (1.0 + fp) * a01 + gamma * a11
        b11 = fp * a01 + gamma * a11
        # Gram-Schmidt: r11 = |b_0|, r12 = <e_0, b_1>, r22 = |b_1 - r12 e_0|
        r11 = np.sqrt(b00 * b00 + b10 * b10)
        a00 = b00 / r11
        a10 = b10 / r11
        r12 = a00 * b01 + a10 * b11
        c01 = b01 - r12 * a00
        c11 = b11 - r12 * a10
        r22 = np.sqrt(c01 * c01 + c11 * c11)
        a01 = c01 / r22
        a11 = c11 / r22
        if t >= t_transient:
            acc1 = acc1 + np.log(r11)
            acc2 = acc2 + np.log(r22)
    ok = np.isfinite(p) & np.isfinite(acc1) & np.isfinite(acc2)
    span = float(t_total - t_transient)
    return acc1 / span, acc2 / span, ok


def bifurcation_record_batch(q0, p0, K, gamma, a2, phi, t_transient, t_record):
    """Discard t_transient steps, then record p for t_record further steps.

    Returns an array of shape (len(q0), t_record).
    """
    q = np.array(q0, dtype=np.float64, copy=True)
    p = np.array(p0, dtype=np.float64, copy=True)
    out = np.empty((q.shape[0], t_record), dtype=np.float64)
    for t in range(t_transient + t_record):
        p = gamma * p + K * (np.sin(q) + a2 * np.sin(2.0 * q + phi))
        q = _wrap(q + p)
        if t >= t_transient:
            out[:, t - t_transient] = p
    return out
