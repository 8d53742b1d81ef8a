"""Exception hierarchy shared by the numeric modules and the CLI."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .classical import Trajectory


class BiorthoError(Exception):
    """Base class for every failure raised by liouville-biortho."""


class ExceptionalPointError(BiorthoError, ArithmeticError):
    """A recursion denominator vanished with a nonzero numerator."""

    def __init__(self, message: str, *, n: int | None = None, index: int | None = None) -> None:
        super().__init__(message)
        self.n = n
        self.index = index


class ExcludedOrderError(BiorthoError, ValueError):
    """Order or flux parameter outside the admissible set (Gamma poles, ν ∈ ℤ<0)."""


class ZeroArgumentError(BiorthoError, ZeroDivisionError):
    """Neumann-type polynomial evaluated at the origin."""


class ConvergenceError(BiorthoError, ArithmeticError):
    """An ascending series did not meet its tail criterion within max_terms."""


class RegionError(BiorthoError, ValueError):
    """Evaluation point outside the validity region of an expansion or quadrature."""


class ModelMismatchError(BiorthoError, ValueError):
    """Operation only defined for a specific Hamiltonian."""


class ZeroNormError(BiorthoError, ZeroDivisionError):
    """Average requested for a state with vanishing norm."""


class NonRealEnergyError(BiorthoError, ValueError):
    """Trial energy is not real for the requested zero-mode shift."""


class TrajectoryEscape(BiorthoError, OverflowError):
    """|x| or |p| left the configured bound; the samples so far are attached."""

    def __init__(self, message: str, trajectory: Trajectory) -> None:
        super().__init__(message)
        self.trajectory = trajectory


class ConfigError(BiorthoError, ValueError):
    """Run config could not be read or parsed."""
