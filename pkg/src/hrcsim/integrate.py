"""Fixed-step explicit integration used by every solver in the package."""

from __future__ import annotations

import numpy as np

from .errors import NumericalDivergenceError


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of size h (h < 0 integrates backward)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def grid_size(t0: float, tf: float, h: float) -> int:
    """Number of steps N such that N*h spans [t0, tf]; h must divide the horizon."""
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    span = tf - t0
    n = int(round(span / h))
    if n < 1 or abs(n * h - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"step {h} does not divide horizon [{t0}, {tf}]")
    return n


def rk4_path(f, t0: float, y0: np.ndarray, h: float, n_steps: int) -> np.ndarray:
    """Integrate forward on a uniform grid, returning all n_steps+1 samples.

    Raises NumericalDivergenceError as soon as a sample stops being finite.
    """
    out = np.empty((n_steps + 1, y0.size))
    out[0] = y0
    y = y0
    for k in range(n_steps):
        y = rk4_step(f, t0 + k * h, y, h)
        if not np.all(np.isfinite(y)):
            raise NumericalDivergenceError(
                f"state became non-finite at t={t0 + (k + 1) * h:.6g}"
            )
        out[k + 1] = y
    return out


def interp_sample(t0: float, h: float, values: np.ndarray, t: float) -> np.ndarray:
    """Linear interpolation of uniformly gridded samples; clamps to the grid ends."""
    n_last = values.shape[0] - 1
    s = (t - t0) / h
    i = int(np.floor(s))
    if i < 0:
        return values[0]
    if i >= n_last:
        return values[n_last]
    a = s - i
    return (1.0 - a) * values[i] + a * values[i + 1]
