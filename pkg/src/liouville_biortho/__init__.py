"""liouville-biortho: biorthogonal eigen-systems for complex periodic Hamiltonians."""

__version__ = "0.1.0"

from .errors import (
    BiorthoError,
    ConfigError,
    ConvergenceError,
    ExceptionalPointError,
    ExcludedOrderError,
    ModelMismatchError,
    NonRealEnergyError,
    RegionError,
    TrajectoryEscape,
    ZeroArgumentError,
    ZeroNormError,
)
from .laurent import HamiltonianSpec, KernelGrid, LaurentPoly, Sector
from .biortho import (
    BiorthogonalSystem,
    Method,
    StateVector,
    build_dual,
    build_eigenfunction,
    build_system,
    eigen_residual,
    expand_state,
    pairing,
)
from .classical import PhasePoint, Trajectory, TrajectoryConfig, integrate
from .models import ModelReport, darboux_system, single_exp_system
from .qft import QftTrialParams, ScanResult, instability_scan, trial_energy
from .config import RunConfig
from .verify import CheckResult, VerificationResult, verify_system

__all__ = [
    "BiorthoError",
    "ConfigError",
    "ConvergenceError",
    "ExceptionalPointError",
    "ExcludedOrderError",
    "ModelMismatchError",
    "NonRealEnergyError",
    "RegionError",
    "TrajectoryEscape",
    "ZeroArgumentError",
    "ZeroNormError",
    "HamiltonianSpec",
    "KernelGrid",
    "LaurentPoly",
    "Sector",
    "BiorthogonalSystem",
    "Method",
    "StateVector",
    "build_dual",
    "build_eigenfunction",
    "build_system",
    "eigen_residual",
    "expand_state",
    "pairing",
    "PhasePoint",
    "Trajectory",
    "TrajectoryConfig",
    "integrate",
    "ModelReport",
    "darboux_system",
    "single_exp_system",
    "QftTrialParams",
    "ScanResult",
    "instability_scan",
    "trial_energy",
    "RunConfig",
    "CheckResult",
    "VerificationResult",
    "verify_system",
]
