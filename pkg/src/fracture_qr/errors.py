"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FractureQRError(Exception):
    """Base class for all package errors."""


class NonPositiveDeterminant(FractureQRError, ValueError):
    """Deformation gradient with det F <= 0."""


class DegenerateFrame(FractureQRError, ValueError):
    """Frame vectors are not orthonormal."""


class NotUnit(FractureQRError, ValueError):
    """A vector expected to have unit length does not."""


class DimensionMismatch(FractureQRError, ValueError):
    """Material family and deformation gradient dimensions disagree."""


class NonPositive(FractureQRError, ValueError):
    """A quantity required to be strictly positive is not."""


class RelaxationDiverged(FractureQRError, RuntimeError):
    """Numerical inner minimization of the crack energy failed."""


class NotPositiveDefinite(FractureQRError, ValueError):
    """Elasticity tensor is not positive definite on symmetric matrices."""


class SingularSystem(FractureQRError, ValueError):
    """A small linear system could not be solved."""


class ElementInverted(FractureQRError, ValueError):
    """An element has det(grad y) <= 0."""

    def __init__(self, element: int, det: float):
        super().__init__(f"element {element} inverted (det = {det:.3e})")
        self.element = element
        self.det = det


class LineSearchFailed(FractureQRError, RuntimeError):
    """Backtracking could not find an admissible descent step."""


class NotConverged(FractureQRError, RuntimeError):
    """An iterative solve hit its iteration cap."""

    def __init__(self, message: str, residual: float = float("nan"), step: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.step = step


class EmptyMesh(FractureQRError, ValueError):
    """Attempt to write or use a mesh without nodes or cells."""


class ConfigError(FractureQRError, ValueError):
    """Invalid scenario configuration."""
