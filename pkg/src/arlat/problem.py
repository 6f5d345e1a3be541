"""Abstract advanced-retarded problems and their derivation from a chip.

A problem with ``n_vars`` unknowns ``x_v(t)`` on ``[0, n_segments * tau]``
is a sum of terms

    i dx_v/dt = sum over terms  c(t) * x_w(t + shift * tau)

where ``shift = 0`` carries the local coefficients (propagation constants,
inter-rail ``q``) and ``shift = +-k`` the advanced and retarded couplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, UnsupportedConversionError
from .model import ChipSpec, FeedbackMap, SourceVector

__all__ = [
    "ARProblem",
    "ARTerm",
    "SegmentCoefficient",
    "from_chip",
    "coupling_relations_hold",
]


@dataclass(frozen=True)
class SegmentCoefficient:
    """Piecewise coefficient: ``pieces[j-1](t - (j-1) tau)`` on segment ``j``.

    A ``None`` piece is an identically zero coefficient there (a support
    mask). At an interior junction node the two one-sided limits are
    averaged, which keeps centered collocation second-order across jumps.
    """

    tau: float
    pieces: tuple

    @property
    def n_segments(self) -> int:
        return len(self.pieces)

    def _piece(self, j, s):
        p = self.pieces[j]
        return np.zeros(np.shape(s), dtype=complex) if p is None else p(s)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        n = self.n_segments
        j = np.clip(np.ceil(t / self.tau - 1e-12).astype(int), 1, n) - 1
        s = t - j * self.tau
        out = np.zeros(t.shape, dtype=complex)
        for seg in np.unique(j):
            mask = j == seg
            out[mask] = self._piece(seg, s[mask])
        return out

    def nodes(self, per_segment: int) -> np.ndarray:
        """Values on the grid ``t_m = m * tau / per_segment``, m = 0..N*per_segment."""
        S = per_segment
        h = self.tau / S
        local = np.arange(S + 1) * h
        out = np.zeros(self.n_segments * S + 1, dtype=complex)
        for j in range(self.n_segments):
            vals = self._piece(j, local)
            if j == 0:
                out[0:S + 1] = vals
            else:
                out[j * S] = 0.5 * (out[j * S] + vals[0])
                out[j * S + 1:(j + 1) * S + 1] = vals[1:]
        return out


@dataclass(frozen=True)
class ARTerm:
    out_var: int
    in_var: int
    shift: int
    coefficient: Callable

    def nodes(self, tau: float, per_segment: int, n_nodes: int) -> np.ndarray:
        if isinstance(self.coefficient, SegmentCoefficient):
            return self.coefficient.nodes(per_segment)
        t = np.arange(n_nodes) * (tau / per_segment)
        return np.broadcast_to(np.asarray(self.coefficient(t), dtype=complex), t.shape).copy()


@dataclass(frozen=True)
class ARProblem:
    """Mixed-type functional differential equation on ``[0, n_segments * tau]``.

    ``initial`` is the datum ``x(0)``, one value per variable; variables are
    numbered from 1.
    """

    n_vars: int
    tau: float
    n_segments: int
    terms: tuple
    initial: tuple
    label: str = "custom"

    def __post_init__(self):
        if self.n_vars < 1 or self.n_segments < 1:
            raise InvalidInputError("ARProblem needs n_vars >= 1 and n_segments >= 1")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise InvalidInputError(f"tau must be positive, got {self.tau!r}")
        init = tuple(complex(x) for x in self.initial)
        if len(init) != self.n_vars:
            raise InvalidInputError(f"initial datum needs {self.n_vars} values, got {len(init)}")
        object.__setattr__(self, "initial", init)
        for term in self.terms:
            if not (1 <= term.out_var <= self.n_vars and 1 <= term.in_var <= self.n_vars):
                raise InvalidInputError(f"term references variable outside 1..{self.n_vars}")
            if abs(term.shift) >= self.n_segments:
                raise InvalidInputError(f"shift {term.shift} reaches beyond the horizon")

    @property
    def horizon(self) -> float:
        return self.n_segments * self.tau

    @property
    def delays(self) -> tuple:
        return tuple(sorted({abs(t.shift) * self.tau for t in self.terms if t.shift}))

    def term(self, out_var: int, in_var: int, shift: int) -> Optional[ARTerm]:
        for t in self.terms:
            if (t.out_var, t.in_var, t.shift) == (out_var, in_var, shift):
                return t
        return None

    def beta(self, var: int = 1):
        t = self.term(var, var, 0)
        return None if t is None else t.coefficient


def from_chip(chip: ChipSpec, feedback: FeedbackMap, source: SourceVector) -> ARProblem:
    """The A-R problem whose solution the chip's stationary state encodes.

    Requires unit fiber links from each mode to its predecessor along every
    variable, no other links, and a source confined to first segments.
    """
    n, N = chip.n_modes, chip.n_segments
    alpha = source.array
    if alpha.size != n:
        raise UnsupportedConversionError(f"source has {alpha.size} entries, chip has {n} modes")
    expected = {}
    for v in range(1, chip.rails + 1):
        for j in range(2, N + 1):
            expected[chip.mode_of(v, j)] = chip.mode_of(v, j - 1)
    links = {r: (c, f) for r, c, f in feedback.entries}
    if abs(feedback.connection_time - chip.tau) > 1e-12 * chip.tau:
        raise UnsupportedConversionError("fiber links must act at the segment end z = tau")
    if set(links) != set(expected):
        raise UnsupportedConversionError("feedback rows do not follow the concatenation map")
    for row, (col, factor) in links.items():
        if col != expected[row]:
            raise UnsupportedConversionError(f"mode {row} is fed from {col}, expected {expected[row]}")
        if factor != 1:
            raise UnsupportedConversionError(f"non-unit fiber factor {factor!r} on mode {row}")
    for v in range(1, chip.rails + 1):
        for j in range(2, N + 1):
            if alpha[chip.mode_of(v, j) - 1] != 0:
                raise UnsupportedConversionError("source must only excite first-segment modes")

    pieces = {}

    def put(key, seg, profile):
        pieces.setdefault(key, [None] * N)[seg - 1] = profile

    for m in range(1, n + 1):
        v, j = chip.concat_map[m - 1]
        put((v, v, 0), j, chip.diagonal[m - 1])
    for m, m2, p in chip.couplings:
        v, j = chip.concat_map[m - 1]
        w, j2 = chip.concat_map[m2 - 1]
        put((v, w, j2 - j), j, p)

    terms = tuple(
        ARTerm(v, w, k, SegmentCoefficient(chip.tau, tuple(ps)))
        for (v, w, k), ps in sorted(pieces.items())
    )
    initial = tuple(complex(alpha[chip.mode_of(v, 1) - 1]) for v in range(1, chip.rails + 1))
    return ARProblem(chip.rails, chip.tau, N, terms, initial, label=chip.topology)


def coupling_relations_hold(problem: ARProblem) -> bool:
    """Check ``c_{v,w,+k}(t) = c_{w,v,-k}(t + k tau)`` and the support masks.

    Profiles are compared for equality (conjugates allowed for complex
    gauge phases), not sampled, so a True answer is exact.
    """
    N = problem.n_segments
    for term in problem.terms:
        if term.shift == 0:
            continue
        coef = term.coefficient
        if not isinstance(coef, SegmentCoefficient):
            raise InvalidInputError("relations can only be checked on segment coefficients")
        mirror = problem.term(term.in_var, term.out_var, -term.shift)
        if mirror is None:
            return False
        other = mirror.coefficient.pieces
        k = term.shift
        for j in range(1, N + 1):
            p = coef.pieces[j - 1]
            if not 1 <= j + k <= N:
                if p is not None:
                    return False
                continue
            q = other[j + k - 1]
            if p is None or q is None:
                if p is not q:
                    return False
            elif q != p and q != p.conjugate():
                return False
    return True
