"""Trial-state energy density of the exponential field theory and its instability threshold."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import NonRealEnergyError

logger = logging.getLogger(__name__)

IMAG_TOL = 1e-12
MARGINAL_TOL = 1e-12


@dataclass(frozen=True)
class QftTrialParams:
    mu: complex
    beta: float
    xi: float
    M: float
    m: float

    def __post_init__(self) -> None:
        if self.M <= 0:
            raise ValueError(f"M must be > 0, got {self.M}")
        if self.m <= 0:
            raise ValueError(f"m must be > 0, got {self.m}")

    @property
    def effective_coupling(self) -> complex:
        return effective_coupling(self.mu, self.beta, self.xi)

    @property
    def exponent(self) -> float:
        """β²/2π, the power of M² carried by the interaction term."""
        return self.beta**2 / (2 * math.pi)


def effective_coupling(mu: complex, beta: float, xi: float) -> complex:
    return complex(mu) * cmath.exp(2j * beta * xi)


def trial_energy(p: QftTrialParams) -> complex:
    """μe^{2iβξ}(M²/m²)^{β²/2π} + (M²−m²)/8π."""
    ratio = (p.M / p.m) ** 2
    return p.effective_coupling * ratio**p.exponent + (p.M**2 - p.m**2) / (8 * math.pi)


def _real_coupling(mu: complex, beta: float, xi: float) -> float:
    c = effective_coupling(mu, beta, xi)
    if abs(c.imag) > IMAG_TOL:
        raise NonRealEnergyError(
            f"mu*exp(2i*beta*xi) = {c.real:.6g}{c.imag:+.6g}j is not real; choose xi to make it real"
        )
    return c.real


def analytic_bounded(coupling: float, exponent: float, m: float) -> bool:
    """Exponent comparison on M²: the interaction grows like M^{2·exponent}, the mass term like M²."""
    if coupling >= 0 or exponent < 1 - MARGINAL_TOL:
        return True
    if exponent <= 1 + MARGINAL_TOL:
        return coupling / m**2 + 1 / (8 * math.pi) >= 0
    return False


@dataclass
class ScanResult:
    bounded_below: bool
    min_value: float
    argmin_M: float
    coupling: float = 0.0
    exponent: float = 0.0
    top_decade_decreasing: bool = False
    samples: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "bounded_below": self.bounded_below,
            "min_value": self.min_value,
            "argmin_M": self.argmin_M,
            "coupling": self.coupling,
            "exponent": self.exponent,
            "top_decade_decreasing": self.top_decade_decreasing,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ScanResult:
        return cls(
            bounded_below=bool(d["bounded_below"]),
            min_value=float(d["min_value"]),
            argmin_M=float(d["argmin_M"]),
            coupling=float(d.get("coupling", 0.0)),
            exponent=float(d.get("exponent", 0.0)),
            top_decade_decreasing=bool(d.get("top_decade_decreasing", False)),
        )


def _mass_grid(m: float, M_max: float, samples: int) -> np.ndarray:
    if m <= 0:
        raise ValueError(f"m must be > 0, got {m}")
    if M_max <= m:
        raise ValueError(f"M_max must be > m, got {M_max}")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    return np.logspace(math.log10(m), math.log10(M_max), samples)


def _top_decade_decreasing(masses: np.ndarray, values: np.ndarray) -> bool:
    top = values[masses >= masses[-1] / 10]
    return len(top) >= 2 and bool(np.all(np.diff(top) < 0))


def _witness(masses: np.ndarray, values: np.ndarray) -> tuple[float, float, bool]:
    i = int(np.argmin(values))
    return float(values[i]), float(masses[i]), _top_decade_decreasing(masses, values)


def instability_scan(
    mu: complex, beta: float, xi: float, m: float = 1.0, M_max: float = 1e3, samples: int = 400
) -> ScanResult:
    """Minimum of the trial energy over log-spaced M ∈ [m, M_max], certified by exponent comparison."""
    coupling = _real_coupling(mu, beta, xi)
    exponent = beta**2 / (2 * math.pi)
    masses = _mass_grid(m, M_max, samples)
    values = coupling * (masses / m) ** (2 * exponent) + (masses**2 - m**2) / (8 * math.pi)
    min_value, argmin, decreasing = _witness(masses, values)
    bounded = analytic_bounded(coupling, exponent, m)
    if not bounded and not decreasing:
        logger.warning(
            "unbounded by exponent comparison but the scan witness is not decreasing up to M=%g", M_max
        )
    logger.debug("qft scan beta=%g coupling=%g: min %.6g at M=%.6g", beta, coupling, min_value, argmin)
    return ScanResult(
        bounded_below=bounded,
        min_value=min_value,
        argmin_M=argmin,
        coupling=coupling,
        exponent=exponent,
        top_decade_decreasing=decreasing,
        samples=list(zip(masses.tolist(), values.tolist())),
    )


@dataclass
class MultiScanResult:
    terms: dict[int, ScanResult]
    unstable_modes: list[int]
    bounded_below: bool
    min_value: float
    argmin_M: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "bounded_below": self.bounded_below,
            "min_value": self.min_value,
            "argmin_M": self.argmin_M,
            "unstable_modes": list(self.unstable_modes),
            "terms": {str(k): r.to_dict() for k, r in self.terms.items()},
        }


def multi_exponential_scan(
    couplings: dict[int, complex], xi: float, m: float = 1.0, M_max: float = 1e3, samples: int = 400
) -> MultiScanResult:
    """Scan Σₖ μₖe^{ikξ}(M²/m²)^{k²/8π} + (M²−m²)/8π, one term per k = 2β."""
    active = {int(k): complex(v) for k, v in couplings.items() if v != 0}
    if not active:
        raise ValueError("couplings must contain at least one nonzero entry")
    if any(k <= 0 for k in active):
        raise ValueError(f"harmonics must be > 0, got {sorted(active)}")
    masses = _mass_grid(m, M_max, samples)
    terms = {k: instability_scan(mu, k / 2, xi, m, M_max, samples) for k, mu in sorted(active.items())}
    unstable = [k for k, r in terms.items() if k > 5 and r.coupling < 0]
    if unstable:
        logger.warning("negative couplings above the threshold harmonic: %s", unstable)

    total = (masses**2 - m**2) / (8 * math.pi)
    for k, r in terms.items():
        total = total + r.coupling * (masses / m) ** (2 * r.exponent)
    dominant = max(terms)
    bounded = analytic_bounded(terms[dominant].coupling, terms[dominant].exponent, m)
    min_value, argmin, _ = _witness(masses, total)
    return MultiScanResult(
        terms=terms, unstable_modes=unstable, bounded_below=bounded, min_value=min_value, argmin_M=argmin
    )
