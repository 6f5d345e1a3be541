"""Finite-difference boundary-value oracle for advanced-retarded problems.

Independent of the lattice route: the whole horizon is discretised at once
and the resulting sparse linear system is factorised directly.

Collocation at node ``m`` (``t_m = m h``)::

    i (x_{m+1} - x_{m-1}) / (2h) = sum_terms c(t_m) x_w(t_m + shift*tau)

for ``m = 1..M-1``, the datum ``x_0 = x(0)`` and a first-order backward
difference at ``m = M`` to close the system.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import InvalidInputError, OracleResonanceError
from .problem import ARProblem
from .steady import RCOND_MIN, ARSolution

__all__ = ["fd_solve", "max_gap", "assemble"]


def _per_segment(problem: ARProblem, h: float) -> int:
    if not h > 0:
        raise InvalidInputError(f"step must be positive, got {h!r}")
    ratio = problem.tau / h
    S = int(round(ratio))
    if abs(ratio - S) > 1e-9 * ratio:
        raise InvalidInputError(f"step {h} does not divide tau={problem.tau}")
    if S < 8:
        raise InvalidInputError(f"tau / h = {S} must be at least 8")
    return S


def assemble(problem: ARProblem, S: int):
    """Sparse system ``(A, b)`` for ``S`` nodes per segment; unknown ``(v, m)`` at ``v*(M+1)+m``."""
    V, tau = problem.n_vars, problem.tau
    M = problem.n_segments * S
    h = tau / S
    n = V * (M + 1)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    m_int = np.arange(1, M)
    for v in range(V):
        base = v * (M + 1)
        add(np.array([base]), np.array([base]), np.array([1.0 + 0j]))
        add(base + m_int, base + m_int + 1, np.full(m_int.size, 1j / (2 * h)))
        add(base + m_int, base + m_int - 1, np.full(m_int.size, -1j / (2 * h)))
        add(np.array([base + M]), np.array([base + M]), np.array([1j / h]))
        add(np.array([base + M]), np.array([base + M - 1]), np.array([-1j / h]))

    m_all = np.arange(1, M + 1)
    for term in problem.terms:
        coef = term.nodes(tau, S, M + 1)[m_all]
        target = m_all + term.shift * S
        inside = (target >= 0) & (target <= M)
        if np.any(coef[~inside] != 0):
            raise InvalidInputError(
                f"term ({term.out_var}, {term.in_var}, shift {term.shift}) is nonzero where "
                "its argument leaves the horizon; mask it there"
            )
        keep = inside & (coef != 0)
        add(
            (term.out_var - 1) * (M + 1) + m_all[keep],
            (term.in_var - 1) * (M + 1) + target[keep],
            -coef[keep],
        )

    A = scipy.sparse.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    b = np.zeros(n, dtype=complex)
    b[np.arange(V) * (M + 1)] = problem.initial
    return A, b


def fd_solve(problem: ARProblem, h: float, rcond_min: float = RCOND_MIN) -> ARSolution:
    """Solve ``problem`` on the uniform grid of step ``h`` (second order).

    The reciprocal 1-norm condition number is estimated from the sparse LU
    factors; below ``rcond_min`` the discrete system counts as singular.
    """
    S = _per_segment(problem, h)
    A, b = assemble(problem, S)
    try:
        lu = scipy.sparse.linalg.splu(A)
    except RuntimeError as exc:  # SuperLU: "Factor is exactly singular"
        raise OracleResonanceError(0.0, 0.0, f"oracle system is singular: {exc}") from exc
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise OracleResonanceError(0.0, 0.0, "oracle solution is not finite")

    anorm = scipy.sparse.linalg.norm(A, 1)
    inv = scipy.sparse.linalg.LinearOperator(
        A.shape, matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="H"), dtype=complex
    )
    rcond = 1.0 / (anorm * scipy.sparse.linalg.onenormest(inv))
    if not rcond >= rcond_min:
        raise OracleResonanceError(rcond, rcond_min)

    V, M = problem.n_vars, problem.n_segments * S
    values = x.reshape(V, M + 1)
    t = np.arange(M + 1) * (problem.tau / S)
    seg = np.clip(np.arange(M + 1) // S + 1, 1, problem.n_segments)
    return ARSolution(
        t=t,
        values=values,
        mode=np.zeros((V, M + 1), dtype=int),
        segment=np.broadcast_to(seg, (V, M + 1)).copy(),
        tau=problem.tau,
        n_segments=problem.n_segments,
        params={"method": "finite-difference", "h": problem.tau / S, "rcond": float(rcond), "label": problem.label},
    )


def max_gap(a: ARSolution, b: ARSolution) -> float:
    """Max-norm difference on the nodes the two grids share.

    One grid step must be an integer multiple of the other.
    """
    if a.n_vars != b.n_vars or a.n_segments != b.n_segments or abs(a.tau - b.tau) > 1e-12 * a.tau:
        raise InvalidInputError("solutions describe different problems")
    sa, sb = a.per_segment, b.per_segment
    fine, coarse = (a, b) if sa >= sb else (b, a)
    ratio = max(sa, sb) // min(sa, sb)
    if ratio * min(sa, sb) != max(sa, sb):
        raise InvalidInputError(f"grids with {sa} and {sb} nodes per segment do not nest")
    return float(np.max(np.abs(fine.values[:, ::ratio] - coarse.values)))
