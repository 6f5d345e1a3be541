"""Evolution of ``i da/dz = M(z) a`` across one waveguide segment.

Integration is fixed-step classical RK4 on a uniform grid. ``M`` is
tabulated at the stage abscissae ``z``, ``z + h/2`` and ``z + h`` in chunks,
and the stepping itself runs in :mod:`arlat.kernels` (compiled when
available). Constant chips may instead use the matrix exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import kernels
from .errors import DomainError, InvalidInputError, NumericalOverflowError
from .model import ChipSpec, tabulate_generator

__all__ = [
    "IntegratorConfig",
    "Propagator",
    "evolve",
    "evolve_path",
    "propagator_matrix",
    "expm_oracle",
]

SCHEMES = ("rk4", "expm")
# steps per tabulated chunk; bounds the (2*chunk+1, n, n) generator table
_CHUNK = 256


@dataclass(frozen=True)
class IntegratorConfig:
    """``step=None`` means ``tau / 1000`` of the chip being integrated."""

    step: Optional[float] = None
    scheme: str = "rk4"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.step is not None:
            step = float(self.step)
            if not (math.isfinite(step) and step > 0):
                raise InvalidInputError(f"step must be positive, got {self.step!r}")
            object.__setattr__(self, "step", step)

    def n_steps(self, span: float, tau: float, multiple_of: int = 1) -> int:
        """Step count whose uniform step divides ``span`` exactly."""
        if span <= 0:
            return 0
        base = self.step if self.step is not None else tau / 1000.0
        n = max(1, round(span / base))
        if multiple_of > 1:
            n = multiple_of * max(1, round(n / multiple_of))
        return n


@dataclass(frozen=True, eq=False)
class Propagator:
    """``U(z1, z0)`` for a chip, with the grid step that produced it."""

    matrix: np.ndarray
    z_span: tuple
    step: float
    chip: ChipSpec = None
    config: IntegratorConfig = None

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _check_span(chip: ChipSpec, z0: float, z1: float):
    z0, z1 = float(z0), float(z1)
    slack = 1e-12 * chip.tau
    if not (-slack <= z0 <= z1 <= chip.tau + slack):
        raise DomainError(f"need 0 <= z0 <= z1 <= tau={chip.tau}, got z0={z0}, z1={z1}")
    return min(max(z0, 0.0), chip.tau), min(max(z1, 0.0), chip.tau)


def _as_state(chip: ChipSpec, a0) -> np.ndarray:
    a0 = np.asarray(a0, dtype=complex)
    if a0.shape[0] != chip.n_modes:
        raise InvalidInputError(f"state has length {a0.shape[0]}, chip has {chip.n_modes} modes")
    if not np.isfinite(a0).all():
        raise InvalidInputError("initial state must be finite")
    return a0


def _rk4(chip: ChipSpec, y0: np.ndarray, z0: float, z1: float, nsteps: int, stride: int) -> np.ndarray:
    """States every ``stride`` steps, shape ``(nsteps // stride + 1, n, m)``."""
    y = np.array(y0, dtype=complex, order="C", copy=True)
    out = np.empty((nsteps // stride + 1,) + y.shape, dtype=complex)
    out[0] = y
    if nsteps == 0:
        return out
    h = (z1 - z0) / nsteps
    step_fn = kernels.rk4_steps
    if stride <= _CHUNK:
        chunk, inner = (_CHUNK // stride) * stride, stride
    else:
        # record from Python at chunk ends; chunk must divide stride
        chunk = max(d for d in range(1, _CHUNK + 1) if stride % d == 0)
        inner = chunk + 1
    done, slot = 0, 1
    while done < nsteps:
        count = min(chunk, nsteps - done)
        stages = z0 + h * (done + 0.5 * np.arange(2 * count + 1))
        mats = np.ascontiguousarray(tabulate_generator(chip, stages))
        n_rec = count // inner
        completed = step_fn(mats, y, h, inner, out[slot: slot + n_rec])
        if completed < count:
            raise NumericalOverflowError(z0 + h * (done + completed + 1))
        done += count
        slot += n_rec
        if inner > chunk and done % stride == 0:
            out[slot] = y
            slot += 1
    return out


def _expm_path(chip: ChipSpec, y0: np.ndarray, z0: float, z1: float, nsteps: int, stride: int):
    if not chip.is_constant:
        raise InvalidInputError("the expm scheme needs a chip with constant profiles")
    m = tabulate_generator(chip, [z0])[0]
    n_out = nsteps // stride + 1 if nsteps else 1
    dz = (z1 - z0) / nsteps * stride if nsteps else 0.0
    out = np.empty((n_out,) + y0.shape, dtype=complex)
    out[0] = y0
    if n_out > 1:
        u = scipy.linalg.expm(-1j * m * dz)
        for k in range(1, n_out):
            out[k] = u @ out[k - 1]
    if not np.isfinite(out).all():
        raise NumericalOverflowError(z1)
    return out


def evolve_path(chip: ChipSpec, a0, z0: float, z1: float, cfg: IntegratorConfig = None, samples: int = None):
    """``(z_grid, states)`` with ``samples`` uniform intervals over ``[z0, z1]``.

    ``states`` has shape ``(samples + 1,) + a0.shape``. The integration grid
    is refined to a multiple of ``samples`` so every sample is a grid node.
    """
    cfg = cfg or IntegratorConfig()
    z0, z1 = _check_span(chip, z0, z1)
    y0 = _as_state(chip, a0)
    mat = y0.reshape(chip.n_modes, -1)
    if samples is None:
        nsteps = cfg.n_steps(z1 - z0, chip.tau)
        stride = max(nsteps, 1)
    else:
        samples = int(samples)
        if samples < 1:
            raise InvalidInputError("samples must be >= 1")
        nsteps = cfg.n_steps(z1 - z0, chip.tau, multiple_of=samples)
        stride = max(nsteps // samples, 1)
    if cfg.scheme == "expm":
        if samples is not None and nsteps:
            nsteps, stride = samples, 1
        states = _expm_path(chip, mat, z0, z1, nsteps, stride)
    else:
        states = _rk4(chip, mat, z0, z1, nsteps, stride)
    grid = np.linspace(z0, z1, states.shape[0])
    return grid, states.reshape((states.shape[0],) + y0.shape)


def evolve(chip: ChipSpec, a0, z0: float = 0.0, z1: float = None, cfg: IntegratorConfig = None) -> np.ndarray:
    """``a(z1)`` from ``a(z0) = a0`` (``z1`` defaults to ``tau``)."""
    z1 = chip.tau if z1 is None else z1
    _, states = evolve_path(chip, a0, z0, z1, cfg)
    return states[-1]


def propagator_matrix(chip: ChipSpec, z0: float = 0.0, z1: float = None, cfg: IntegratorConfig = None) -> Propagator:
    """``U(z1, z0)``; column ``j`` is :func:`evolve` applied to ``e_j``."""
    cfg = cfg or IntegratorConfig()
    z1 = chip.tau if z1 is None else z1
    z0, z1 = _check_span(chip, z0, z1)
    u = evolve(chip, np.eye(chip.n_modes, dtype=complex), z0, z1, cfg)
    nsteps = cfg.n_steps(z1 - z0, chip.tau)
    step = (z1 - z0) / nsteps if nsteps else 0.0
    return Propagator(matrix=u, z_span=(z0, z1), step=step, chip=chip, config=cfg)


def expm_oracle(m) -> np.ndarray:
    """``exp(-1j * m)`` by scaling and squaring (scipy's Pade-based ``expm``)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expm_oracle needs a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidInputError("expm_oracle needs a finite matrix")
    return scipy.linalg.expm(-1j * m)
