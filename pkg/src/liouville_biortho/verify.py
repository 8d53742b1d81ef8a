"""Verification suite: run a built system through its residual, pairing, closed-form and kernel checks."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .biortho import (
    BiorthogonalSystem,
    assemble_bilocal,
    biorthonormality_deviation,
    ehrenfest_residual,
    max_eigen_residual,
)
from .config import Tolerances
from .kernels import ham_kernel_H_nu, norm_kernel_J_nu
from .laurent import HamiltonianSpec, Sector
from .models import ModelReport, addition_theorem_scales, darboux_report, single_exp_report

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    """One named deviation measured against its tolerance."""
    name: str
    value: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CheckResult:
        return cls(name=d["name"], value=float(d["value"]), tolerance=float(d["tolerance"]), detail=d.get("detail", ""))


@dataclass
class VerificationResult:
    """Outcome of a verification run."""
    model: str
    checks: list[CheckResult] = field(default_factory=list)
    report: ModelReport | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> CheckResult | None:
        return next((c for c in self.checks if not c.passed), None)

    @property
    def summary(self) -> str:
        failed = self.first_failure
        if failed is None:
            return f"{self.model}: all {len(self.checks)} checks pass"
        return f"{self.model}: {failed.name} failed ({failed.value:.3e} > {failed.tolerance:.1e})"

    def to_dict(self) -> dict[str, Any]:
        failed = self.first_failure
        return {
            "model": self.model,
            "passed": self.passed,
            "first_failure": failed.name if failed else None,
            "summary": self.summary,
            "checks": [c.to_dict() for c in self.checks],
            "report": self.report.to_dict() if self.report else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> VerificationResult:
        report = d.get("report")
        return cls(
            model=d["model"],
            checks=[CheckResult.from_dict(c) for c in d.get("checks", [])],
            report=ModelReport.from_dict(report) if report else None,
        )


def classify(spec: HamiltonianSpec) -> tuple[str, float]:
    """("single_exp" | "darboux" | "free" | "generic", m)."""
    if spec.is_free:
        return "free", 0.0
    if set(spec.mu) == {2}:
        m2 = spec.mu[2]
        if m2.imag == 0 and m2.real > 0:
            return "single_exp", math.sqrt(m2.real)
    if set(spec.mu) == {1, 2} and spec.nu == 0:
        m = spec.mu[1]
        if m.imag == 0 and m.real > 0 and cmath.isclose(spec.mu[2], -m.real**2, rel_tol=1e-14):
            return "darboux", m.real
    return "generic", 0.0


def _kernel_checks(system: BiorthogonalSystem, m: float, tol: float, nx: int, ny: int) -> list[CheckResult]:
    nu = system.spec.nu
    xs = 2 * np.pi * np.arange(nx) / nx
    ys = 2 * np.pi * np.arange(ny) / ny
    scaled = system.rescaled(addition_theorem_scales(m, nu, system.n_max))
    checks = []
    for name, weight, closed in (
        ("norm_kernel", lambda e: 1.0, norm_kernel_J_nu),
        ("hamiltonian_kernel", lambda e: e, ham_kernel_H_nu),
    ):
        grid = assemble_bilocal(scaled, weight, xs, ys)
        expected = np.asarray(closed(m, nu, xs[:, None], ys[None, :]))
        scale = max(1.0, float(np.max(np.abs(expected))))
        checks.append(
            CheckResult(name, grid.max_abs_diff(expected) / scale, tol, f"{nx}x{ny} grid, n_max={system.n_max}")
        )
    return checks


def verify_system(
    system: BiorthogonalSystem, tolerances: Tolerances | None = None, nx: int = 16, ny: int = 16
) -> VerificationResult:
    """Run every applicable check; the tail-including eigen residual comes first."""
    tol = tolerances or Tolerances()
    spec = system.spec
    kind, m = classify(spec)
    label = spec.label or kind
    result = VerificationResult(model=label)
    result.checks.append(
        CheckResult("eigen_residual", max_eigen_residual(system, retained=False), tol.eigen, f"N={system.trunc}")
    )
    result.checks.append(CheckResult("biorthonormality", biorthonormality_deviation(system), tol.biorth))

    right = system.sector is Sector.RIGHT
    if kind == "single_exp" and right:
        report = single_exp_report(system, m)
        result.report = report
        result.checks.append(CheckResult("closed_form", report.max_closedform_dev, tol.closed_form))
        if nu_ok(spec.nu):
            result.checks.extend(_kernel_checks(system, m, tol.kernel, nx, ny))
        if spec.nu == 0 and system.n_max >= 2:
            state = system.state([math.sqrt(0.5) if n in (0, 2) else 0.0 for n in range(system.size)])
            result.checks.append(CheckResult("ehrenfest", ehrenfest_residual(state, 0.3), tol.ehrenfest, "states 0 and 2"))
    elif kind == "darboux":
        report = darboux_report(system, m)
        result.report = report
        result.checks.append(
            CheckResult("ground_state", report.details["ground_state_residual"], tol.eigen, "H psi_0 = 0")
        )
        result.checks.append(CheckResult("factorization", report.details["factorization_dev"], tol.closed_form))
        result.checks.append(CheckResult("closed_form", report.max_closedform_dev, tol.closed_form))
    else:
        result.report = ModelReport(
            model=label,
            n_max=system.n_max,
            max_biorth_dev=result.checks[1].value,
            max_eigen_residual=result.checks[0].value,
        )

    failed = result.first_failure
    if failed is not None:
        logger.warning("verification failed at %s: %.3e > %.1e", failed.name, failed.value, failed.tolerance)
    else:
        logger.debug("verification passed: %d checks", len(result.checks))
    return result


def nu_ok(nu: float) -> bool:
    """Flux values for which the closed-form ν-kernels are defined."""
    return nu >= 0
