"""
Exception hierarchy of the solver library.
"""


class VrpsdError(Exception):
    """Base class for every error raised by the library."""
    pass


class InstanceFormatError(VrpsdError):
    """The instance file could not be parsed under its declared format."""
    pass


class InstanceValidationError(VrpsdError):
    """The instance parsed but violates a data-model invariant."""
    pass


class InvalidPathError(VrpsdError):
    """A path is empty, repeats a customer, or references an unknown node."""
    pass


class InfeasibleInstanceError(VrpsdError):
    """No admissible fleet size yields a feasible partition of the customers."""
    pass


class BoundNotApplicableError(VrpsdError):
    """A lower bound was requested on demands it is not defined for."""
    pass


class OracleSizeError(VrpsdError):
    """The brute-force oracle refuses inputs beyond its size guard."""
    pass


class SuperadditivityError(VrpsdError):
    """The recourse function failed the superadditivity check; DL mode refused."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedVariantError(VrpsdError):
    """Raised when an operation requires a fixed fleet size (|M| = 1)."""
    pass


class LpError(VrpsdError):
    """The LP subsystem failed to return an optimal or infeasible verdict."""
    pass
