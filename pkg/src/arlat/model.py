"""Lattice data model and the builders for each advanced-retarded variant.

Modes are numbered from 1 in every public structure (coupling lists,
feedback entries, concatenation maps), matching the waveguide labels
j = 1..N. Arrays handed to numpy are of course 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, InvalidModelError
from .profiles import Constant, Phased, Profile, as_profile

__all__ = [
    "ChipSpec",
    "FeedbackMap",
    "SourceVector",
    "build_chain",
    "build_single_guide",
    "build_qubit",
    "build_two_time",
    "build_bloch_chain",
    "bloch_transform",
    "coupling_matrix",
    "tabulate_generator",
]

# Factors with |f| up to 1 + _PASSIVE_SLACK are accepted as passive.
_PASSIVE_SLACK = 1e-12


def _is_zero(profile: Profile) -> bool:
    return isinstance(profile, Constant) and profile.value == 0


@dataclass(frozen=True)
class ChipSpec:
    """A waveguide lattice of ``n_modes`` guides of common length ``tau``.

    ``couplings`` holds directed entries ``(j, j2, profile)`` placing
    ``profile(z)`` at ``M[j, j2]``; every entry needs its reverse partner with
    an identical (or, for complex gauge phases, conjugate) profile.
    ``concat_map[j-1]`` is the ``(variable, segment)`` pair that mode ``j``
    represents in the concatenated solution.
    """

    n_modes: int
    tau: float
    diagonal: tuple
    couplings: tuple
    rails: int
    concat_map: tuple
    topology: str = field(default="custom", compare=False)

    def __post_init__(self):
        n = self.n_modes
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidModelError(f"n_modes must be a positive integer, got {n!r}")
        tau = float(self.tau)
        if not (math.isfinite(tau) and tau > 0):
            raise InvalidModelError(f"tau must be positive and finite, got {self.tau!r}")
        object.__setattr__(self, "tau", tau)

        diagonal = tuple(as_profile(p) for p in self.diagonal)
        if len(diagonal) != n:
            raise InvalidModelError(f"expected {n} diagonal profiles, got {len(diagonal)}")
        object.__setattr__(self, "diagonal", diagonal)

        seen = {}
        for entry in self.couplings:
            j, k, p = entry
            j, k = int(j), int(k)
            if not (1 <= j <= n and 1 <= k <= n):
                raise InvalidModelError(f"coupling ({j}, {k}) outside modes 1..{n}")
            if j == k:
                raise InvalidModelError(f"self-coupling on mode {j}; use the diagonal")
            if (j, k) in seen:
                raise InvalidModelError(f"duplicate coupling ({j}, {k})")
            seen[(j, k)] = as_profile(p)
        for (j, k), p in seen.items():
            partner = seen.get((k, j))
            if partner is None:
                raise InvalidModelError(f"coupling ({j}, {k}) has no reverse partner")
            if partner != p and partner != p.conjugate():
                raise InvalidModelError(f"couplings ({j}, {k}) and ({k}, {j}) differ")
        object.__setattr__(self, "couplings", tuple((j, k, p) for (j, k), p in seen.items()))

        rails = self.rails
        if not isinstance(rails, (int, np.integer)) or rails < 1 or n % rails:
            raise InvalidModelError(f"rails={rails!r} must be a positive divisor of n_modes={n}")
        cmap = tuple((int(v), int(s)) for v, s in self.concat_map)
        if len(cmap) != n or len(set(cmap)) != n:
            raise InvalidModelError("concat_map must assign a distinct (variable, segment) to every mode")
        n_seg = n // rails
        expected = {(v, s) for v in range(1, rails + 1) for s in range(1, n_seg + 1)}
        if set(cmap) != expected:
            raise InvalidModelError(
                f"concat_map must cover variables 1..{rails} and segments 1..{n_seg} exactly"
            )
        object.__setattr__(self, "concat_map", cmap)

    @property
    def n_segments(self) -> int:
        return self.n_modes // self.rails

    @property
    def is_real(self) -> bool:
        return all(p.is_real for p in self.diagonal) and all(p.is_real for _, _, p in self.couplings)

    @property
    def is_constant(self) -> bool:
        return all(isinstance(p, Constant) for p in self.diagonal) and all(
            isinstance(p, Constant) for _, _, p in self.couplings
        )

    def mode_of(self, variable: int, segment: int) -> int:
        """Mode index (1-based) carrying ``variable`` on ``segment``."""
        return self.concat_map.index((variable, segment)) + 1

    def coupling(self, j: int, k: int):
        for a, b, p in self.couplings:
            if a == j and b == k:
                return p
        return None


@dataclass(frozen=True)
class FeedbackMap:
    """Fiber links ``a_row(0) += factor * a_col(connection_time)``."""

    entries: tuple
    connection_time: float

    def __post_init__(self):
        t = float(self.connection_time)
        if not (math.isfinite(t) and t > 0):
            raise InvalidModelError(f"connection_time must be positive, got {self.connection_time!r}")
        object.__setattr__(self, "connection_time", t)
        out = []
        rows = set()
        for entry in self.entries:
            row, col = int(entry[0]), int(entry[1])
            factor = complex(entry[2]) if len(entry) > 2 else 1 + 0j
            if row < 1 or col < 1:
                raise InvalidModelError(f"feedback entry ({row}, {col}) must use 1-based modes")
            if not (math.isfinite(factor.real) and math.isfinite(factor.imag)):
                raise InvalidModelError(f"feedback factor must be finite, got {factor!r}")
            if abs(factor) > 1 + _PASSIVE_SLACK:
                raise InvalidModelError(f"feedback factor {factor!r} would amplify (|f| > 1)")
            if row in rows:
                raise InvalidModelError(f"chip input {row} is fed by more than one output")
            rows.add(row)
            out.append((row, col, factor))
        object.__setattr__(self, "entries", tuple(out))

    @property
    def rows(self) -> frozenset:
        return frozenset(r for r, _, _ in self.entries)

    def matrix(self, n_modes: int) -> np.ndarray:
        f = np.zeros((n_modes, n_modes), dtype=complex)
        for row, col, factor in self.entries:
            if row > n_modes or col > n_modes:
                raise InvalidModelError(f"feedback entry ({row}, {col}) exceeds {n_modes} modes")
            f[row - 1, col - 1] = factor
        return f

    def scaled(self, s) -> "FeedbackMap":
        """Every factor multiplied by ``s`` (uniform fiber loss or phase)."""
        return FeedbackMap(tuple((r, c, s * f) for r, c, f in self.entries), self.connection_time)

    def subset(self, rows) -> "FeedbackMap":
        rows = set(rows)
        return FeedbackMap(tuple(e for e in self.entries if e[0] in rows), self.connection_time)


@dataclass(frozen=True)
class SourceVector:
    """Externally injected amplitudes, one per mode."""

    alpha: tuple

    def __post_init__(self):
        values = tuple(complex(a) for a in np.asarray(self.alpha, dtype=complex).ravel())
        if not values:
            raise InvalidModelError("source vector is empty")
        if not all(math.isfinite(a.real) and math.isfinite(a.imag) for a in values):
            raise InvalidModelError("source vector must be finite")
        if not any(values):
            raise InvalidModelError("source vector needs at least one nonzero entry")
        object.__setattr__(self, "alpha", values)

    @classmethod
    def unit(cls, n_modes: int, mode: int = 1) -> "SourceVector":
        a = [0j] * n_modes
        a[mode - 1] = 1 + 0j
        return cls(tuple(a))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.alpha, dtype=complex)

    def __len__(self):
        return len(self.alpha)


def _per_mode(value, count: int, what: str) -> list:
    if isinstance(value, (list, tuple)):
        if len(value) != count:
            raise InvalidModelError(f"{what}: expected {count} profiles, got {len(value)}")
        return [as_profile(v) for v in value]
    return [as_profile(value)] * count


def _symmetric(pairs) -> tuple:
    out = []
    for j, k, p in pairs:
        if _is_zero(p):
            continue
        out.append((j, k, p))
        out.append((k, j, p))
    return tuple(out)


def _shift_feedback(chains, tau: float) -> FeedbackMap:
    """Unit links from each mode to the next one along every chain."""
    entries = []
    for chain in chains:
        for prev, cur in zip(chain, chain[1:]):
            entries.append((cur, prev, 1 + 0j))
    entries.sort()
    return FeedbackMap(tuple(entries), tau)


def build_chain(n: int, tau: float, beta, kappa):
    """Single-variable chain: ``n`` guides, nearest-neighbour coupling ``kappa``.

    ``beta`` may be one profile or a list of ``n``; ``kappa`` one profile or
    a list of ``n - 1`` bond profiles. Returns ``(chip, feedback, source)``
    with the unit source on waveguide 1.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidModelError(f"a chain needs n >= 2 waveguides, got {n!r}")
    diagonal = _per_mode(beta, n, "beta")
    bonds = _per_mode(kappa, n - 1, "kappa")
    chip = ChipSpec(
        n_modes=n,
        tau=tau,
        diagonal=tuple(diagonal),
        couplings=_symmetric((j, j + 1, bonds[j - 1]) for j in range(1, n)),
        rails=1,
        concat_map=tuple((1, j) for j in range(1, n + 1)),
        topology="chain",
    )
    return chip, _shift_feedback([list(range(1, n + 1))], chip.tau), SourceVector.unit(n)


def build_single_guide(tau: float, beta):
    """One uncoupled waveguide with no fiber links; the degenerate one-segment chain."""
    chip = ChipSpec(
        n_modes=1,
        tau=tau,
        diagonal=(as_profile(beta),),
        couplings=(),
        rails=1,
        concat_map=((1, 1),),
        topology="chain",
    )
    return chip, FeedbackMap((), chip.tau), SourceVector.unit(1)


def build_two_time(n: int, tau: float, beta, kappa1, kappa2):
    """Zig-zag chain with nearest (``kappa1``) and next-nearest (``kappa2``) coupling."""
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise InvalidModelError(f"a two-time chain needs n >= 3 waveguides, got {n!r}")
    diagonal = _per_mode(beta, n, "beta")
    near = _per_mode(kappa1, n - 1, "kappa1")
    far = _per_mode(kappa2, n - 2, "kappa2")
    pairs = [(j, j + 1, near[j - 1]) for j in range(1, n)]
    pairs += [(j, j + 2, far[j - 1]) for j in range(1, n - 1)]
    pairs.sort(key=lambda e: (e[0], e[1]))
    chip = ChipSpec(
        n_modes=n,
        tau=tau,
        diagonal=tuple(diagonal),
        couplings=_symmetric(pairs),
        rails=1,
        concat_map=tuple((1, j) for j in range(1, n + 1)),
        topology="two_time",
    )
    return chip, _shift_feedback([list(range(1, n + 1))], chip.tau), SourceVector.unit(n)


def build_qubit(n_segments: int, tau: float, beta_x, beta_y, kappa_x, kappa_y, q, d, crossed=False):
    """Two stacked chains (rails x and y) encoding a two-component state.

    Modes ``1..N`` form rail x and ``N+1..2N`` rail y. ``q`` couples the two
    rails within a segment, ``d`` couples each guide to the other rail's guide
    in the adjacent segments. With ``crossed`` the connectors swap rails, so
    variable 1 runs x1, y2, x3, ... and variable 2 runs y1, x2, y3, ...
    """
    n = n_segments
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidModelError(f"a qubit chip needs n_segments >= 2, got {n!r}")
    bx, by = _per_mode(beta_x, n, "beta_x"), _per_mode(beta_y, n, "beta_y")
    kx, ky = _per_mode(kappa_x, n - 1, "kappa_x"), _per_mode(kappa_y, n - 1, "kappa_y")
    qv = _per_mode(q, n, "q")
    dv = _per_mode(d, n - 1, "d")

    def x(j):
        return j

    def y(j):
        return n + j

    pairs = []
    for j in range(1, n + 1):
        pairs.append((x(j), y(j), qv[j - 1]))
        if j < n:
            pairs.append((x(j), x(j + 1), kx[j - 1]))
            pairs.append((y(j), y(j + 1), ky[j - 1]))
            pairs.append((x(j), y(j + 1), dv[j - 1]))
            pairs.append((y(j), x(j + 1), dv[j - 1]))
    pairs.sort(key=lambda e: (e[0], e[1]))

    if crossed:
        first = [x(j) if j % 2 else y(j) for j in range(1, n + 1)]
        second = [y(j) if j % 2 else x(j) for j in range(1, n + 1)]
    else:
        first = [x(j) for j in range(1, n + 1)]
        second = [y(j) for j in range(1, n + 1)]
    cmap = [None] * (2 * n)
    for var, path in ((1, first), (2, second)):
        for seg, mode in enumerate(path, start=1):
            cmap[mode - 1] = (var, seg)

    chip = ChipSpec(
        n_modes=2 * n,
        tau=tau,
        diagonal=tuple(bx + by),
        couplings=_symmetric(pairs),
        rails=2,
        concat_map=tuple(cmap),
        topology="qubit_crossed" if crossed else "qubit",
    )
    return chip, _shift_feedback([first, second], chip.tau), SourceVector.unit(2 * n)


def build_bloch_chain(n: int, tau: float, beta, kappa):
    """Chain whose guide ``j`` carries the ramped propagation constant ``j * beta(z)``."""
    chip, feedback, source = build_chain(n, tau, Constant(0), kappa)
    beta = as_profile(beta)
    chip = replace(chip, diagonal=tuple(beta.scaled(j) for j in range(1, n + 1)), topology="bloch")
    return chip, feedback, source


def bloch_transform(chip: ChipSpec) -> ChipSpec:
    """Gauge away a site-proportional diagonal ``j * beta(z)``.

    With ``a_j = b_j exp(-1j * j * phi(z))`` and ``phi = int_0^z beta`` the
    ramp cancels and each bond ``(j, j+1)`` picks up ``exp(-1j * phi)``
    (its reverse ``exp(+1j * phi)``). Intensities ``|a_j|^2`` are unchanged.
    """
    n = chip.n_modes
    if chip.rails != 1 or any(abs(j - k) != 1 for j, k, _ in chip.couplings):
        raise InvalidModelError("bloch_transform needs a single-rail nearest-neighbour chain")
    beta = chip.diagonal[0]
    if any(chip.diagonal[j - 1] != beta.scaled(j) for j in range(1, n + 1)):
        raise InvalidModelError("bloch_transform needs a site-proportional diagonal j * beta(z)")
    if _is_zero(beta):
        return chip
    couplings = tuple(
        (j, k, Phased(p, beta, -1 if k == j + 1 else 1)) for j, k, p in chip.couplings
    )
    return replace(chip, diagonal=(Constant(0),) * n, couplings=couplings, topology="bloch_gauged")


def tabulate_generator(chip: ChipSpec, z) -> np.ndarray:
    """Stack of coupling matrices ``M(z_k)``, shape ``(len(z), n, n)``.

    No range check; callers that accept user input go through
    :func:`coupling_matrix`.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    n = chip.n_modes
    out = np.zeros((z.size, n, n), dtype=complex)
    idx = np.arange(n)
    # profiles are shared between many entries; evaluate each distinct one once
    cache = {}

    def values(p):
        key = id(p)
        if key not in cache:
            cache[key] = (p, p(z))
        return cache[key][1]

    diag = np.stack([values(p) for p in chip.diagonal], axis=-1)
    out[:, idx, idx] = diag
    for j, k, p in chip.couplings:
        out[:, j - 1, k - 1] = values(p)
    return out


def coupling_matrix(chip: ChipSpec, z: float) -> np.ndarray:
    """The generator ``M(z)`` of ``i da/dz = M(z) a`` for ``0 <= z <= tau``."""
    z = float(z)
    if not (0.0 <= z <= chip.tau):
        raise DomainError(f"z={z!r} outside [0, {chip.tau}]")
    return tabulate_generator(chip, [z])[0]

