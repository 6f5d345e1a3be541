"""Coefficient profiles: z-dependent propagation constants and couplings.

Every profile is an immutable dataclass that evaluates vectorised over a
numpy array of propagation distances and always returns complex values.
Profiles compare by value, which the model layer relies on when it checks
coupling relations by identity rather than numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidModelError

__all__ = [
    "Constant",
    "Cosine",
    "PiecewiseLinear",
    "Phased",
    "Profile",
    "as_profile",
    "integrate",
]

# Gauss-Legendre rule used by ``integrate``; 8 nodes is exact for degree 15.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_MAX_PANEL = 0.125


def _complex(value, what="value") -> complex:
    try:
        c = complex(value)
    except (TypeError, ValueError) as exc:
        raise InvalidModelError(f"{what} must be a complex scalar, got {value!r}") from exc
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise InvalidModelError(f"{what} must be finite, got {c!r}")
    return c


def _real(value, what="value") -> float:
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidModelError(f"{what} must be a real scalar, got {value!r}") from exc
    if not math.isfinite(x):
        raise InvalidModelError(f"{what} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class Constant:
    value: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "value", _complex(self.value, "Constant.value"))

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return np.full(z.shape, self.value, dtype=complex)

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0.0

    @property
    def breakpoints(self) -> tuple:
        return ()

    def conjugate(self) -> "Constant":
        return Constant(self.value.conjugate())

    def scaled(self, factor) -> "Constant":
        return Constant(factor * self.value)


@dataclass(frozen=True)
class Cosine:
    """``base + amplitude * cos(frequency * z + phase)``."""

    base: complex = 0.0
    amplitude: complex = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "base", _complex(self.base, "Cosine.base"))
        object.__setattr__(self, "amplitude", _complex(self.amplitude, "Cosine.amplitude"))
        object.__setattr__(self, "frequency", _real(self.frequency, "Cosine.frequency"))
        object.__setattr__(self, "phase", _real(self.phase, "Cosine.phase"))

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.base + self.amplitude * np.cos(self.frequency * z + self.phase) + 0j

    @property
    def is_real(self) -> bool:
        return self.base.imag == 0.0 and self.amplitude.imag == 0.0

    @property
    def breakpoints(self) -> tuple:
        return ()

    def conjugate(self) -> "Cosine":
        return Cosine(self.base.conjugate(), self.amplitude.conjugate(), self.frequency, self.phase)

    def scaled(self, factor) -> "Cosine":
        return Cosine(factor * self.base, factor * self.amplitude, self.frequency, self.phase)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through ``(z_k, value_k)`` samples.

    Outside the sampled range the profile is held at its end values.
    """

    samples: tuple

    def __post_init__(self):
        pts = tuple((_real(z, "sample position"), _complex(v, "sample value")) for z, v in self.samples)
        if not pts:
            raise InvalidModelError("PiecewiseLinear needs at least one sample")
        zs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(zs, zs[1:])):
            raise InvalidModelError("PiecewiseLinear sample positions must be strictly increasing")
        object.__setattr__(self, "samples", pts)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        xp = np.array([p[0] for p in self.samples])
        fp = np.array([p[1] for p in self.samples])
        return np.interp(z, xp, fp.real) + 1j * np.interp(z, xp, fp.imag)

    @property
    def is_real(self) -> bool:
        return all(v.imag == 0.0 for _, v in self.samples)

    @property
    def breakpoints(self) -> tuple:
        return tuple(z for z, _ in self.samples)

    def conjugate(self) -> "PiecewiseLinear":
        return PiecewiseLinear(tuple((z, v.conjugate()) for z, v in self.samples))

    def scaled(self, factor) -> "PiecewiseLinear":
        return PiecewiseLinear(tuple((z, factor * v) for z, v in self.samples))


@dataclass(frozen=True)
class Phased:
    """``base(z) * exp(1j * sign * phi(z))`` with ``phi(z) = int_0^z phase_of``.

    Produced by the Bloch gauge transform; ``phi`` is obtained by quadrature.
    """

    base: "Profile"
    phase_of: "Profile"
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidModelError("Phased.sign must be +1 or -1")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.base(z) * np.exp(1j * self.sign * integrate(self.phase_of, z))

    @property
    def is_real(self) -> bool:
        return False

    @property
    def breakpoints(self) -> tuple:
        return tuple(sorted(set(self.base.breakpoints) | set(self.phase_of.breakpoints)))

    def conjugate(self) -> "Phased":
        return Phased(self.base.conjugate(), self.phase_of.conjugate(), -self.sign)

    def scaled(self, factor) -> "Phased":
        return Phased(self.base.scaled(factor), self.phase_of, self.sign)


Profile = Union[Constant, Cosine, PiecewiseLinear, Phased]
_PROFILE_TYPES = (Constant, Cosine, PiecewiseLinear, Phased)


def as_profile(value) -> Profile:
    """Accept a profile or a bare number (wrapped as ``Constant``)."""
    if isinstance(value, _PROFILE_TYPES):
        return value
    return Constant(value)


def integrate(profile: Profile, z) -> np.ndarray:
    """Return ``int_0^z profile(s) ds`` for every entry of ``z >= 0``.

    Composite 8-point Gauss-Legendre over the sorted evaluation points, with
    panels split at the profile's breakpoints and capped at width 1/8 so that
    a single far-away point is integrated as accurately as a dense grid.
    """
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    if flat.size == 0:
        return np.zeros(z.shape, dtype=complex)
    if np.any(flat < 0) or not np.all(np.isfinite(flat)):
        raise InvalidModelError("integrate expects finite z >= 0")
    top = float(flat.max())
    knots = [0.0, *flat.tolist(), *(b for b in profile.breakpoints if 0.0 < b < top)]
    if top > 0:
        knots.extend(np.linspace(0.0, top, int(math.ceil(top / _MAX_PANEL)) + 1).tolist())
    knots = np.unique(np.asarray(knots))
    lo, hi = knots[:-1], knots[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    panel = (profile(nodes) * _GL_WEIGHTS[None, :]).sum(axis=1) * half
    cumulative = np.concatenate([[0.0 + 0j], np.cumsum(panel)])
    return cumulative[np.searchsorted(knots, flat)].reshape(z.shape)
