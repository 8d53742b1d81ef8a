"""Named model assemblies checked against their closed forms.

Builds use the generic recursion (leading coefficient 1); every closed form
is brought to that normalization by its analytically known leading factor
before comparison.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .biortho import (
    BiorthogonalSystem,
    apply_hamiltonian,
    biorthonormality_deviation,
    build_system,
    eigen_residual,
    gamma_inhomogeneity,
    max_eigen_residual,
)
from .errors import ExcludedOrderError
from .kernels import norm_choice_z2
from .laurent import HamiltonianSpec, LaurentPoly, Sector
from .specfun import bessel_i_reduced, bessel_j_reduced, gamma_real, gegenbauer_a, kummer_m

logger = logging.getLogger(__name__)

# comparison grid, kept off x = ±π where principal powers switch branch
_GRID = np.linspace(-3.0, 3.0, 16)


@dataclass
class ModelReport:
    """Deviations found while certifying one model."""
    model: str
    n_max: int
    max_biorth_dev: float = 0.0
    max_eigen_residual: float = 0.0
    max_closedform_dev: float = 0.0
    exceptional_flags: list[str] = field(default_factory=list)
    details: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("max_biorth_dev", "max_eigen_residual", "max_closedform_dev"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "n_max": self.n_max,
            "max_biorth_dev": self.max_biorth_dev,
            "max_eigen_residual": self.max_eigen_residual,
            "max_closedform_dev": self.max_closedform_dev,
            "exceptional_flags": list(self.exceptional_flags),
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ModelReport:
        return cls(
            model=d["model"],
            n_max=int(d["n_max"]),
            max_biorth_dev=float(d.get("max_biorth_dev", 0.0)),
            max_eigen_residual=float(d.get("max_eigen_residual", 0.0)),
            max_closedform_dev=float(d.get("max_closedform_dev", 0.0)),
            exceptional_flags=list(d.get("exceptional_flags", [])),
            details={k: float(v) for k, v in d.get("details", {}).items()},
        )


@dataclass(frozen=True)
class MagneticSpectrum:
    right: list[float]
    left: list[float]
    degeneracies: list[tuple[int, int]]
    melded: bool


def _relative_dev(ours: NDArray[np.complex128], closed: NDArray[np.complex128]) -> float:
    scale = float(np.max(np.abs(closed)))
    return float(np.max(np.abs(ours - closed))) / (scale if scale else 1.0)


def _certify(system: BiorthogonalSystem, model: str) -> ModelReport:
    return ModelReport(
        model=model,
        n_max=system.n_max,
        max_biorth_dev=biorthonormality_deviation(system),
        max_eigen_residual=max_eigen_residual(system),
    )


def magnetic_spectrum(nu: float, n_max: int) -> MagneticSpectrum:
    """E_{±n} = (ν ± n)², degenerate pairs (n, −(n+2ν)) when ν − ½ ∈ ℤ, melding when ν ∈ ℤ."""
    right = [(nu + n) ** 2 for n in range(n_max + 1)]
    left = [(nu - n) ** 2 for n in range(n_max + 1)]
    melded = float(nu).is_integer()
    pairs: list[tuple[int, int]] = []
    if float(nu - 0.5).is_integer():
        shift = int(round(2 * nu))
        for n in range(n_max + 1):
            partner = n + shift
            if 0 <= partner <= n_max:
                pairs.append((n, -partner))
    return MagneticSpectrum(right=right, left=left, degeneracies=pairs, melded=melded)


def _spectrum_flags(nu: float, n_max: int) -> list[str]:
    spectrum = magnetic_spectrum(nu, n_max)
    flags = [f"degenerate E_{a},E_{b}" for a, b in spectrum.degeneracies]
    if spectrum.melded:
        flags.append("melded sectors (integer nu)")
    return flags


def addition_theorem_scales(m: float, nu: float, n_max: int) -> NDArray[np.complex128]:
    """Z_n mⁿ / (2^{ν+n} Γ(ν+n+1)): turns leading-coefficient-1 builds into Z_n w^{-ν}J_{ν+n}(w).

    At ν = 0 these give √ε_n Jₙ(m e^{ix}).
    """
    return np.array(
        [
            math.sqrt(norm_choice_z2(nu, n)) * m**n / (2.0 ** (nu + n) * gamma_real(nu + n + 1.0))
            for n in range(n_max + 1)
        ],
        dtype=np.complex128,
    )


def single_exp_system(
    m: float, nu: float = 0.0, n_max: int = 12, trunc: int = 60
) -> tuple[BiorthogonalSystem, ModelReport]:
    """Build mu={2: m²} with flux ν and compare against e^{-iνx}J_{ν+n} and m e^{ix}A_{n,ν}."""
    if nu < 0 and float(nu).is_integer():
        raise ExcludedOrderError(f"nu must not be a negative integer, got {nu:g}")
    spec = HamiltonianSpec.single_exponential(m, nu)
    system = build_system(spec, n_max, trunc)
    return system, single_exp_report(system, m)


def single_exp_report(system: BiorthogonalSystem, m: float) -> ModelReport:
    """Certify an already built right-sector mu={2: m²} system."""
    nu = system.spec.nu
    report = _certify(system, system.spec.label or "single_exp")
    report.exceptional_flags = _spectrum_flags(nu, system.n_max)

    z = np.exp(1j * _GRID)
    worst = 0.0
    for n, (psi, chi) in enumerate(zip(system.psi, system.chi)):
        if m == 0:
            worst = max(
                worst,
                (psi - LaurentPoly.monomial(n)).sup_norm(),
                (chi - LaurentPoly.monomial(-n)).sup_norm(),
            )
            continue
        w = m * z
        # e^{-iνx}J_{ν+n}(w) / leading = z^n Γ(ν+n+1) Σ(−w²/4)^k/(k!Γ(ν+n+k+1))
        closed_psi = gamma_real(nu + n + 1.0) * z**n * np.asarray(bessel_j_reduced(nu + n, w))
        worst = max(worst, _relative_dev(np.asarray(psi.evaluate(z)), closed_psi))
        leading = 2.0 ** (nu + n) * gamma_real(nu + n + 1.0) / m**n
        closed_chi = w * np.asarray(gegenbauer_a(n, nu, w)) / leading
        worst = max(worst, _relative_dev(np.asarray(chi.evaluate(z)), closed_chi))
    report.max_closedform_dev = worst
    logger.debug("single-exponential m=%g nu=%g: closed-form deviation %.3e", m, nu, worst)
    return report


def left_sector_report(m: float, nu: float, n_max: int = 8, trunc: int = 60) -> ModelReport:
    """Left-sector single-exponential build, certified by residual, pairing and spectrum only."""
    spec = HamiltonianSpec.single_exponential(m, nu)
    system = build_system(spec, n_max, trunc, sector=Sector.LEFT)
    report = _certify(system, f"{spec.label} left")
    report.exceptional_flags = _spectrum_flags(nu, n_max)
    report.max_closedform_dev = max(
        abs(e - (nu - n) ** 2) for n, e in enumerate(system.energies)
    )
    return report


def two_exp_eigenfunction(
    mu1: complex, mu2: complex, nu: float, sqrtE: float, branch: str, x: ArrayLike
) -> Any:
    """e^{(−ν±√E)ix} e^{−r e^{ix}} M(½ ± √E − μ₁/(2r), 1 ± 2√E, 2r e^{ix}), r = √(−μ₂) principal."""
    if mu2 == 0:
        raise ValueError("mu2 must be nonzero")
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    s = 1 if branch == "+" else -1
    r = cmath.sqrt(-complex(mu2))
    xx = np.asarray(x, dtype=np.complex128)
    z = np.exp(1j * xx)
    a = 0.5 + s * sqrtE - complex(mu1) / (2 * r)
    b = 1 + s * 2 * sqrtE
    values = np.exp((-nu + s * sqrtE) * 1j * xx) * np.exp(-r * z) * np.asarray(kummer_m(a, b, 2 * r * z))
    return complex(values) if xx.ndim == 0 else values


def two_exp_ode_residual(
    mu1: complex, mu2: complex, nu: float, sqrtE: float, branch: str, xs: ArrayLike, h: float = 1e-2
) -> float:
    """max |(H − E)ψ| on xs with sixth-order central differences."""
    x = np.asarray(xs, dtype=float)

    def f(k: int) -> NDArray[np.complex128]:
        return np.asarray(two_exp_eigenfunction(mu1, mu2, nu, sqrtE, branch, x + k * h))

    vals = {k: f(k) for k in range(-3, 4)}
    d1 = (-vals[-3] + 9 * vals[-2] - 45 * vals[-1] + 45 * vals[1] - 9 * vals[2] + vals[3]) / (60 * h)
    d2 = (
        2 * vals[-3] - 27 * vals[-2] + 270 * vals[-1] - 490 * vals[0]
        + 270 * vals[1] - 27 * vals[2] + 2 * vals[3]
    ) / (180 * h * h)
    psi = vals[0]
    # (p+ν)² = −d² − 2iν d + ν²
    h_psi = -d2 - 2j * nu * d1 + nu * nu * psi + (mu1 * np.exp(1j * x) + mu2 * np.exp(2j * x)) * psi
    return float(np.max(np.abs(h_psi - sqrtE**2 * psi)))


def darboux_factorized_apply(m: float, f: LaurentPoly) -> LaurentPoly:
    """(−i d/dx − m e^{ix})(−i d/dx + m e^{ix}) f, the right factor applied first."""
    right = f.momentum() + f.shift(1) * m
    return right.momentum() - right.shift(1) * m


def darboux_alpha_beta(n: int, z_n: complex = 1.0) -> tuple[complex, complex]:
    """(αₙ, βₙ) of the dual inhomogeneity αₙm²e^{2ix} + βₙme^{ix}."""
    k = n // 2
    alpha = (-1) ** (k + 1) * gamma_real(k + 0.5) / (math.factorial(k) * z_n)
    beta = -(2 * k + 1) * alpha if n % 2 == 0 else 2 * k * alpha
    return alpha, beta


def _darboux_psi_closed(n: int, m: float, z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """√(w/2){I_{n−½}(w) − I_{n+½}(w)} at w = mz, over its leading factor (m/2)ⁿ/Γ(n+½).

    In reduced form the quotient is Γ(n+½)zⁿ{R_{n−½}(w) − (w/2)R_{n+½}(w)}.
    """
    w = m * z
    body = np.asarray(bessel_i_reduced(n - 0.5, w)) - w / 2 * np.asarray(bessel_i_reduced(n + 0.5, w))
    return gamma_real(n + 0.5) * z**n * body


def _darboux_chi_closed(n: int, m: float, z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """(w/√2){iⁿA_{n,½}(w)/(n+½) + i^{n−1}A_{n−1,½}(w)/(n−½)} at w = imz, over (2/m)ⁿΓ(n+½)."""
    w = 1j * m * z
    total = 1j**n / (n + 0.5) * np.asarray(gegenbauer_a(n, 0.5, w))
    if n >= 1:
        total = total + 1j ** (n - 1) / (n - 0.5) * np.asarray(gegenbauer_a(n - 1, 0.5, w))
    return w / math.sqrt(2) * total / ((2 / m) ** n * gamma_real(n + 0.5))


def darboux_system(m: float, n_max: int = 12, trunc: int = 60) -> tuple[BiorthogonalSystem, ModelReport]:
    """Build mu={1: m, 2: −m²} and compare ψₙ, χₙ and the (αₙ, βₙ) inhomogeneity with closed forms."""
    system = build_system(HamiltonianSpec.darboux(m), n_max, trunc)
    return system, darboux_report(system, m)


def darboux_report(system: BiorthogonalSystem, m: float) -> ModelReport:
    """Certify an already built mu={1: m, 2: −m²} system."""
    spec = system.spec
    n_max = system.n_max
    report = _certify(system, spec.label or "darboux")
    report.details["ground_state_residual"] = eigen_residual(spec, system.psi[0], 0.0)
    factor_dev = max(
        (darboux_factorized_apply(m, p) - apply_hamiltonian(spec, p)).sup_norm() for p in system.psi
    )
    report.details["factorization_dev"] = factor_dev
    if m == 0:
        return report

    z = np.exp(1j * _GRID)
    worst = 0.0
    for n, (psi, chi) in enumerate(zip(system.psi, system.chi)):
        worst = max(worst, _relative_dev(np.asarray(psi.evaluate(z)), _darboux_psi_closed(n, m, z)))
        worst = max(worst, _relative_dev(np.asarray(chi.evaluate(z)), _darboux_chi_closed(n, m, z)))

    inhom = 0.0
    for n in range(min(n_max, 8) + 1):
        gamma = gamma_inhomogeneity(spec, n)
        leading = (2 / m) ** n * gamma_real(n + 0.5)
        alpha, beta = darboux_alpha_beta(n)
        scale = max(abs(alpha), abs(beta))
        inhom = max(
            inhom,
            abs(leading * gamma.get(2, 0j) / m**2 - alpha) / scale,
            abs(leading * gamma.get(1, 0j) / m - beta) / scale,
        )
    report.details["inhomogeneity_dev"] = inhom
    report.max_closedform_dev = max(worst, inhom)
    return report


def _sum_i_half(n: int, w: NDArray[np.complex128], z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """I_{n+½}(w) I_{n+½}(z) / √(wz) = ½ (wz/4)ⁿ Rₙ(w) Rₙ(z)."""
    return 0.5 * (w * z / 4) ** n * np.asarray(bessel_i_reduced(n + 0.5, w)) * np.asarray(bessel_i_reduced(n + 0.5, z))


def j2exp_partial_kernels(m: float, n_max: int, x: ArrayLike, y: ArrayLike) -> tuple[Any, Any]:
    """π Σ (n+½) I I/√(wz) and π Σ (n+½)n(n+1) I I/√(wz), with w = m e^{-ix}, z = m e^{iy}."""
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    w, z = m * np.exp(-1j * xx), m * np.exp(1j * yy)
    half = np.zeros(w.shape, dtype=np.complex128)
    nnp1 = np.zeros(w.shape, dtype=np.complex128)
    for n in range(n_max + 1):
        term = math.pi * (n + 0.5) * _sum_i_half(n, w, z)
        half = half + term
        nnp1 = nnp1 + n * (n + 1) * term
    if half.ndim == 0:
        return complex(half), complex(nnp1)
    return half, nnp1


def j2exp_closed_forms(m: float, x: ArrayLike, y: ArrayLike) -> tuple[Any, Any]:
    """sinh(s)/s and (cosh s − sinh s/s)·2wz/s², s = w + z, with series near s = 0."""
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    w, z = m * np.exp(-1j * xx), m * np.exp(1j * yy)
    s = w + z
    small = np.abs(s) < 1e-4
    safe = np.where(small, 1.0, s)
    sinhc = np.where(small, 1 + s * s / 6, np.sinh(safe) / safe)
    # (cosh s − sinh s / s)/s² → 1/3 + s²/30
    tail = np.where(small, 1 / 3 + s * s / 30, (np.cosh(safe) - np.sinh(safe) / safe) / safe**2)
    second = 2 * w * z * tail
    if sinhc.ndim == 0:
        return complex(sinhc), complex(second)
    return sinhc, second


def isospectral_draws(
    nu: float = 0.0, draws: int = 5, seed: int = 0, n_max: int = 6, trunc: int = 60
) -> list[ModelReport]:
    """Certify {(ν+n)²} for random complex (μ₁, μ₂) with |μᵢ| ≤ 2."""
    rng = np.random.default_rng(seed)
    reports = []
    for i in range(draws):
        radius = rng.uniform(0.2, 2.0, size=2)
        angle = rng.uniform(0.0, 2 * np.pi, size=2)
        mu1, mu2 = radius * np.exp(1j * angle)
        spec = HamiltonianSpec.two_exponential(complex(mu1), complex(mu2), nu)
        system = build_system(spec, n_max, trunc)
        report = _certify(system, f"two_exp draw {i}")
        report.details.update({"mu1_re": mu1.real, "mu1_im": mu1.imag, "mu2_re": mu2.real, "mu2_im": mu2.imag})
        reports.append(report)
    return reports
