"""Pass-by-pass build-up of the stationary state.

Each recirculation pass maps the chip input through ``F U(tau)`` and adds
the fresh injection, ``a_{k+1}(0) = F U a_k(0) + alpha``; from ``a_0 = alpha``
the iterates are the partial Neumann sums of ``(1 - F U)^{-1} alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError, ResonanceError
from .model import FeedbackMap
from .propagator import Propagator
from .steady import RCOND_MIN, _alpha, _solve_system

__all__ = ["TransientTrace", "SpectralEstimate", "iterate_passes", "power_iteration", "spectral_radius", "decay_rate"]

# passes of consecutive growth (or no decrease) before giving up
_PATIENCE = 5


class SpectralEstimate(NamedTuple):
    radius: float
    eigenvalue: complex
    converged: bool
    iterations: int

    def __float__(self):
        return float(self.radius)


@dataclass(frozen=True, eq=False)
class TransientTrace:
    iterates: np.ndarray
    errors: np.ndarray
    remaining_population: np.ndarray
    spectral_radius: float
    status: str
    rho_converged: bool = True
    a_inf: Optional[np.ndarray] = None

    @property
    def passes(self) -> int:
        return len(self.errors) - 1

    @property
    def diverged(self) -> bool:
        return self.status in ("diverged", "stagnated")


def _matrices(u, f):
    um = u.matrix if isinstance(u, Propagator) else np.asarray(u, dtype=complex)
    n = um.shape[0]
    fm = f.matrix(n) if isinstance(f, FeedbackMap) else np.asarray(f, dtype=complex)
    if um.shape != (n, n) or fm.shape != (n, n):
        raise InvalidInputError(f"propagator {um.shape} and feedback {fm.shape} must be equal squares")
    return um, fm


def power_iteration(a, tol: float = 1e-10, max_iter: int = 100_000, seed: int = 0, block: int = 2) -> SpectralEstimate:
    """Dominant eigenvalue of ``a`` by block power iteration from a seeded random start.

    A block of two vectors with Rayleigh-Ritz extraction keeps converging when
    the two leading eigenvalues share a modulus (common for ``F U``, whose
    spectrum is often paired), where single-vector iteration oscillates.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    p = max(1, min(block, n))
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p)))
    lam = 0j
    dead = 1e-13 * max(np.linalg.norm(a), np.finfo(float).tiny)
    for it in range(1, max_iter + 1):
        q, r = np.linalg.qr(a @ q)
        # directions annihilated by ``a`` (nilpotent parts) leave the block
        q = q[:, np.abs(np.diag(r)) > dead]
        if q.shape[1] == 0:
            return SpectralEstimate(0.0, 0j, True, it)
        ritz = np.linalg.eigvals(q.conj().T @ a @ q)
        lam_new = ritz[np.argmax(np.abs(ritz))]
        if it > 1 and abs(abs(lam_new) - abs(lam)) <= tol * abs(lam_new):
            return SpectralEstimate(float(abs(lam_new)), complex(lam_new), True, it)
        lam = lam_new
    return SpectralEstimate(float(abs(lam)), complex(lam), False, max_iter)


def spectral_radius(u, f, tol: float = 1e-10, max_iter: int = 100_000, seed: int = 0) -> SpectralEstimate:
    """``rho(F U(tau))`` by power iteration; ``converged=False`` flags a weak estimate."""
    um, fm = _matrices(u, f)
    return power_iteration(fm @ um, tol=tol, max_iter=max_iter, seed=seed)


def iterate_passes(
    u,
    f,
    alpha,
    k_max: int = 1000,
    tol: float = 1e-14,
    start=None,
    rcond_min: float = RCOND_MIN,
) -> TransientTrace:
    """Iterate ``a_{k+1} = F U a_k + alpha`` until the error drops below ``tol``.

    ``errors[k] = ||a_k - a_inf||`` against the direct solve; when no fixed
    point exists the pass increments stand in for the error. Five passes in
    a row of growth end the run as ``"diverged"``, of no decrease as
    ``"stagnated"``.
    """
    if k_max < 1 or not tol > 0:
        raise InvalidInputError("k_max must be >= 1 and tol > 0")
    um, fm = _matrices(u, f)
    n = um.shape[0]
    a = _alpha(alpha, n)
    fu = fm @ um
    try:
        a_inf, _ = _solve_system(np.eye(n) - fu, a, rcond_min)
    except ResonanceError:
        a_inf = None
    rho = spectral_radius(um, fm)

    x = a.copy() if start is None else np.asarray(start, dtype=complex).copy()
    iterates = [x.copy()]
    errors, remaining = [], []
    status = "max_passes"
    grow = flat = 0
    for k in range(k_max + 1):
        nxt = fu @ x + a
        step = float(np.linalg.norm(nxt - x))
        err = float(np.linalg.norm(x - a_inf)) if a_inf is not None else step
        errors.append(err)
        remaining.append(step)
        if err < tol:
            status = "converged"
            break
        if len(errors) > 1:
            prev = errors[-2]
            grow = grow + 1 if err > prev else 0
            flat = flat + 1 if err >= prev * (1 - 1e-9) else 0
            if grow >= _PATIENCE:
                status = "diverged"
                break
            if flat >= _PATIENCE:
                status = "stagnated"
                break
        if k == k_max:
            break
        x = nxt
        iterates.append(x.copy())
    return TransientTrace(
        iterates=np.array(iterates),
        errors=np.array(errors),
        remaining_population=np.array(remaining),
        spectral_radius=rho.radius,
        status=status,
        rho_converged=rho.converged,
        a_inf=a_inf,
    )


def decay_rate(errors, burn_in: int = 6, floor: float = 1e-13) -> float:
    """Per-pass error ratio from a least-squares fit of ``log10(error)`` against pass.

    Only passes after ``burn_in`` with errors above ``floor`` enter the fit.
    """
    e = np.asarray(errors, dtype=float)
    k = np.arange(e.size)
    sel = (k >= burn_in) & (e > floor)
    if sel.sum() < 2:
        return 0.0
    slope = np.polyfit(k[sel], np.log10(e[sel]), 1)[0]
    return float(10.0 ** slope)
