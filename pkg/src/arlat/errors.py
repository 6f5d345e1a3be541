"""Exception hierarchy shared by every arlat module.

The CLI maps these onto its exit codes (1 invalid input, 2 resonance,
3 verification failure), so new errors should subclass one of them.
"""


class ArlatError(Exception):
    """Base class for all arlat errors."""


class InvalidInputError(ArlatError, ValueError):
    """Malformed arguments: wrong shapes, non-finite values, bad grids."""


class InvalidModelError(InvalidInputError):
    """A chip, feedback map or builder argument violates its invariants."""


class DomainError(InvalidInputError):
    """An evaluation point lies outside the admissible propagation range."""


class UnsupportedConversionError(InvalidInputError):
    """The chip cannot be mapped onto an advanced-retarded problem."""


class NumericalOverflowError(ArlatError, ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, z, message=None):
        self.z = float(z)
        super().__init__(message or f"non-finite state encountered at z={self.z:.6g}")


class ResonanceError(ArlatError):
    """``1 - F U(tau)`` is numerically singular (a resonance of the lattice)."""

    def __init__(self, rcond, threshold, message=None):
        self.rcond = float(rcond)
        self.threshold = float(threshold)
        super().__init__(
            message
            or f"feedback system is singular: reciprocal condition {self.rcond:.3e} "
            f"below threshold {self.threshold:.1e}"
        )


class OracleResonanceError(ResonanceError):
    """The finite-difference system of the oracle is singular."""
