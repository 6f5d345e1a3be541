"""Pure numpy fallback with the same contract as the compiled ``_rk4`` module."""

import numpy as np


def rk4_steps(mats, y, h, stride, out):
    """Advance ``y`` in place; see ``arlat._rk4.rk4_steps``."""
    # overflow is reported through the returned step count
    with np.errstate(over="ignore", invalid="ignore"):
        return _steps(mats, y, h, stride, out)


def _steps(mats, y, h, stride, out):
    nsteps = (mats.shape[0] - 1) // 2
    half = 0.5 * h
    sixth = h / 6.0
    slot = 0
    for s in range(nsteps):
        m0, mh, m1 = mats[2 * s], mats[2 * s + 1], mats[2 * s + 2]
        k1 = -1j * (m0 @ y)
        k2 = -1j * (mh @ (y + half * k1))
        k3 = -1j * (mh @ (y + half * k2))
        k4 = -1j * (m1 @ (y + h * k3))
        y += sixth * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(y).all():
            return s
        if (s + 1) % stride == 0:
            out[slot] = y
            slot += 1
    return nsteps
