"""Stationary state of a chip with fiber feedback, and the A-R solution it encodes.

The chip input satisfies ``a(0) = F a(tau) + alpha``; with ``a(tau) = U a(0)``
this is the dense linear system ``(1 - F U) a(0) = alpha``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import InvalidInputError, ResonanceError
from .model import ChipSpec, FeedbackMap, SourceVector
from .problem import ARProblem
from .propagator import IntegratorConfig, Propagator, evolve_path, propagator_matrix

__all__ = [
    "SteadyState",
    "ARSolution",
    "solve_fixed_point",
    "solve_multi",
    "concatenate",
    "check_symmetry",
    "check_periodicity",
    "phase_ratio",
    "residual_check",
    "RCOND_MIN",
    "SAMPLES_PER_SEGMENT",
]

RCOND_MIN = 1e-12
SAMPLES_PER_SEGMENT = 200

# centered first-derivative stencils, coefficients for offsets -p..p
_STENCILS = {
    2: np.array([-1 / 2, 0, 1 / 2]),
    4: np.array([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12]),
    6: np.array([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60]),
}


@dataclass(frozen=True, eq=False)
class SteadyState:
    a0: np.ndarray
    z: np.ndarray
    trajectory: np.ndarray
    condition_estimate: float
    residual: float
    chip: ChipSpec = None

    @property
    def a_end(self) -> np.ndarray:
        return self.trajectory[-1]


@dataclass(frozen=True, eq=False)
class ARSolution:
    """Concatenated solution on a uniform grid over ``[0, n_segments * tau]``.

    ``values[v-1]`` is ``x_v`` sampled on ``t``; ``mode`` and ``segment`` give
    per-sample provenance (mode 0 when the solution did not come from a chip).
    """

    t: np.ndarray
    values: np.ndarray
    mode: np.ndarray
    segment: np.ndarray
    tau: float
    n_segments: int
    junction_gaps: np.ndarray = None
    params: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return self.values.shape[0]

    @property
    def z_c(self) -> float:
        return 0.5 * self.n_segments * self.tau

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def per_segment(self) -> int:
        ratio = self.tau / self.step
        s = int(round(ratio))
        if abs(ratio - s) > 1e-9 * ratio:
            raise InvalidInputError("solution grid does not divide the segment length")
        return s

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def _rcond(lu, anorm: float) -> float:
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info < 0:
        raise InvalidInputError(f"zgecon rejected argument {-info}")
    return float(rcond)


def _solve_system(system: np.ndarray, alpha: np.ndarray, rcond_min: float):
    # ``system`` is ``1 - F U``: measure conditioning against the identity's
    # scale, so a system that cancels down to rounding level counts as singular
    anorm = max(float(np.abs(system).sum(axis=0).max()), 1.0)
    with warnings.catch_warnings():
        # an exactly singular system is reported through rcond below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(system, check_finite=True)
    rcond = _rcond(lu, anorm)
    if not rcond >= rcond_min:
        raise ResonanceError(rcond, rcond_min)
    return scipy.linalg.lu_solve((lu, piv), alpha), rcond


def _trajectory(chip, a0, cfg, samples):
    if chip is None:
        return np.array([0.0]), a0[None, :]
    return evolve_path(chip, a0, 0.0, chip.tau, cfg, samples=samples)


def _alpha(alpha, n):
    a = alpha.array if isinstance(alpha, SourceVector) else np.asarray(alpha, dtype=complex)
    if a.shape != (n,):
        raise InvalidInputError(f"source has shape {a.shape}, expected ({n},)")
    return a


def solve_fixed_point(
    u: Propagator,
    f: FeedbackMap,
    alpha,
    samples: int = SAMPLES_PER_SEGMENT,
    rcond_min: float = RCOND_MIN,
) -> SteadyState:
    """Solve ``(1 - F U(tau)) a0 = alpha`` and re-integrate the trajectory.

    Raises ``ResonanceError`` when the 1-norm reciprocal condition estimate
    of ``1 - F U`` drops below ``rcond_min``.
    """
    n = u.n_modes
    z0, z1 = u.z_span
    if z0 != 0.0 or abs(z1 - f.connection_time) > 1e-12 * max(1.0, z1):
        raise InvalidInputError(
            f"propagator spans {u.z_span}, feedback acts at {f.connection_time}"
        )
    a = _alpha(alpha, n)
    fu = f.matrix(n) @ u.matrix
    a0, rcond = _solve_system(np.eye(n) - fu, a, rcond_min)
    residual = float(np.linalg.norm(a0 - fu @ a0 - a))
    z, traj = _trajectory(u.chip, a0, u.config, samples)
    return SteadyState(a0, z, traj, rcond, residual, u.chip)


def solve_multi(
    chip: ChipSpec,
    groups,
    alpha,
    cfg: IntegratorConfig = None,
    samples: int = SAMPLES_PER_SEGMENT,
    rcond_min: float = RCOND_MIN,
    propagators=None,
) -> SteadyState:
    """Fiber links acting at several distances: ``(1 - sum F_i U(tau_i)) a0 = alpha``.

    ``groups`` holds ``FeedbackMap`` objects (each with its own
    ``connection_time``) or ``(FeedbackMap, tau_i)`` pairs. Precomputed
    ``propagators`` (one per group) skip the integration.
    """
    groups = [g if isinstance(g, FeedbackMap) else FeedbackMap(g[0].entries, g[1]) for g in groups]
    if not groups:
        raise InvalidInputError("solve_multi needs at least one feedback group")
    seen = set()
    for g in groups:
        if g.rows & seen:
            raise InvalidInputError(f"input rows {sorted(g.rows & seen)} fed by several groups")
        seen |= g.rows
        if not 0 < g.connection_time <= chip.tau * (1 + 1e-12):
            raise InvalidInputError(f"connection time {g.connection_time} outside (0, tau]")
    n = chip.n_modes
    a = _alpha(alpha, n)
    if propagators is None:
        propagators = [propagator_matrix(chip, 0.0, min(g.connection_time, chip.tau), cfg) for g in groups]
    total = None
    for g, u in zip(groups, propagators):
        term = g.matrix(n) @ u.matrix
        total = term if total is None else total + term
    a0, rcond = _solve_system(np.eye(n) - total, a, rcond_min)
    residual = float(np.linalg.norm(a0 - total @ a0 - a))
    z, traj = _trajectory(chip, a0, cfg or IntegratorConfig(), samples)
    return SteadyState(a0, z, traj, rcond, residual, chip)


def concatenate(chip: ChipSpec, ss: SteadyState) -> ARSolution:
    """Place mode ``mode_of(v, j)`` on ``[(j-1) tau, j tau)`` for each variable ``v``.

    The sample at each junction comes from the segment that starts there;
    the mismatch with the previous segment's end is kept in ``junction_gaps``.
    """
    traj = np.asarray(ss.trajectory)
    if traj.ndim != 2 or traj.shape[0] < 2 or traj.shape[1] != chip.n_modes:
        raise InvalidInputError("steady state has no trajectory over [0, tau]")
    S = traj.shape[0] - 1
    N, V = chip.n_segments, chip.rails
    total = N * S + 1
    values = np.empty((V, total), dtype=complex)
    mode = np.empty((V, total), dtype=int)
    segment = np.empty((V, total), dtype=int)
    gaps = np.zeros((V, N - 1))
    for v in range(1, V + 1):
        for j in range(1, N + 1):
            m = chip.mode_of(v, j)
            lo = (j - 1) * S
            hi = lo + S + (1 if j == N else 0)
            values[v - 1, lo:hi] = traj[: hi - lo, m - 1]
            mode[v - 1, lo:hi] = m
            segment[v - 1, lo:hi] = j
            if j > 1:
                prev = chip.mode_of(v, j - 1)
                gaps[v - 1, j - 2] = abs(traj[-1, prev - 1] - traj[0, m - 1])
    t = np.arange(total) * (chip.tau / S)
    return ARSolution(
        t=t,
        values=values,
        mode=mode,
        segment=segment,
        tau=chip.tau,
        n_segments=N,
        junction_gaps=gaps,
        params={"topology": chip.topology, "n_modes": chip.n_modes, "samples_per_segment": S},
    )


def check_symmetry(sol: ARSolution) -> float:
    """``max |(|x(z_c + z)|^2 - |x(z_c - z)|^2)|`` over the grid and all variables."""
    t = sol.t
    if not np.allclose(t + t[::-1], 2 * sol.z_c, rtol=0, atol=1e-9 * max(1.0, sol.z_c)):
        raise InvalidInputError("grid is not symmetric about z_c")
    inten = sol.intensity()
    return float(np.max(np.abs(inten - inten[:, ::-1])))


def check_periodicity(sol: ARSolution) -> float:
    """``max_v | |x_v(0)| - |x_v(N tau)| |`` (global phase ignored)."""
    v = sol.values
    return float(np.max(np.abs(np.abs(v[:, 0]) - np.abs(v[:, -1]))))


def phase_ratio(sol: ARSolution) -> np.ndarray:
    """``x_v(N tau) / x_v(0)`` per variable; nan where ``x_v(0) = 0``."""
    start, end = sol.values[:, 0], sol.values[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(start != 0, end / np.where(start != 0, start, 1), np.nan + 0j)


def residual_check(sol: ARSolution, problem: ARProblem, order: int = 4, exclude: int = 2) -> float:
    """Largest residual ``|i x' - rhs|`` over interior grid nodes.

    ``x'`` uses the centered stencil of the given order. Nodes within
    ``exclude`` steps of a segment junction are skipped, as are nodes whose
    stencil would leave the horizon.
    """
    if order not in _STENCILS:
        raise InvalidInputError(f"order must be one of {sorted(_STENCILS)}")
    if sol.n_vars != problem.n_vars:
        raise InvalidInputError(f"solution has {sol.n_vars} variables, problem {problem.n_vars}")
    if abs(sol.tau - problem.tau) > 1e-12 * problem.tau or sol.n_segments != problem.n_segments:
        raise InvalidInputError("solution and problem horizons differ")
    S = sol.per_segment
    h = problem.tau / S
    M = problem.n_segments * S
    if sol.values.shape[1] != M + 1:
        raise InvalidInputError("solution grid does not cover the horizon")
    stencil = _STENCILS[order]
    p = len(stencil) // 2
    x = sol.values
    m = np.arange(p, M - p + 1)
    dist = np.abs(m - S * np.round(m / S))
    interior_junction = (np.round(m / S) > 0) & (np.round(m / S) < problem.n_segments)
    m = m[~(interior_junction & (dist <= exclude))]
    if m.size == 0:
        return 0.0
    worst = 0.0
    for v in range(1, problem.n_vars + 1):
        xv = x[v - 1]
        deriv = sum(c * xv[m + k - p] for k, c in enumerate(stencil) if c) / h
        rhs = np.zeros(m.size, dtype=complex)
        for term in problem.terms:
            if term.out_var != v:
                continue
            coef = term.nodes(problem.tau, S, M + 1)[m]
            target = m + term.shift * S
            ok = (target >= 0) & (target <= M)
            if np.any(coef[~ok] != 0):
                raise InvalidInputError("coefficient nonzero where its argument leaves the horizon")
            rhs[ok] += coef[ok] * x[term.in_var - 1, target[ok]]
        worst = max(worst, float(np.max(np.abs(1j * deriv - rhs))))
    return worst
