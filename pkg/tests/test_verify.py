"""Tests for the verification suite."""

from __future__ import annotations

import logging
import math

import pytest

from liouville_biortho.biortho import build_system
from liouville_biortho.config import Tolerances
from liouville_biortho.laurent import HamiltonianSpec, Sector
from liouville_biortho.verify import CheckResult, VerificationResult, classify, nu_ok, verify_system


class TestClassify:
    def test_named_models(self) -> None:
        assert classify(HamiltonianSpec()) == ("free", 0.0)
        assert classify(HamiltonianSpec.single_exponential(2.0, 0.3)) == ("single_exp", 2.0)
        assert classify(HamiltonianSpec.darboux(1.5)) == ("darboux", 1.5)

    def test_generic(self) -> None:
        assert classify(HamiltonianSpec(mu={2: -1.0}))[0] == "generic"
        assert classify(HamiltonianSpec(mu={1: 1.0, 2: -2.0}))[0] == "generic"
        assert classify(HamiltonianSpec(nu=0.5, mu={1: 1.0, 2: -1.0}))[0] == "generic"


class TestCheckResult:
    def test_passed(self) -> None:
        assert CheckResult("a", 1e-12, 1e-10).passed
        assert not CheckResult("a", 1e-9, 1e-10).passed
        assert not CheckResult("a", math.nan, 1e-10).passed

    def test_round_trip(self) -> None:
        result = VerificationResult(model="m", checks=[CheckResult("a", 1e-12, 1e-10, "x")])
        back = VerificationResult.from_dict(result.to_dict())
        assert back.checks == result.checks
        assert back.passed
        assert result.to_dict()["first_failure"] is None


class TestVerifySystem:
    def test_single_exponential_passes(self) -> None:
        system = build_system(HamiltonianSpec.single_exponential(1.0), 12, 60)
        result = verify_system(system)
        names = [c.name for c in result.checks]
        assert names[0] == "eigen_residual"
        assert {"biorthonormality", "closed_form", "norm_kernel", "hamiltonian_kernel", "ehrenfest"} <= set(names)
        assert result.passed, result.summary
        assert result.report is not None

    def test_flux_kernels(self) -> None:
        system = build_system(HamiltonianSpec.single_exponential(1.0, 0.5), 14, 60)
        result = verify_system(system, nx=8, ny=8)
        assert "norm_kernel" in [c.name for c in result.checks]
        assert "ehrenfest" not in [c.name for c in result.checks]
        assert result.passed, result.summary

    def test_darboux_passes(self) -> None:
        system = build_system(HamiltonianSpec.darboux(1.0), 8, 60)
        result = verify_system(system)
        assert {"ground_state", "factorization", "closed_form"} <= {c.name for c in result.checks}
        assert result.passed, result.summary

    def test_generic_and_left(self) -> None:
        generic = build_system(HamiltonianSpec(nu=0.25, mu={1: 0.7 - 0.2j, 3: -0.4}), 6, 60)
        assert verify_system(generic).passed
        left = build_system(HamiltonianSpec.single_exponential(0.7, 0.3), 4, 40, sector=Sector.LEFT)
        result = verify_system(left)
        assert [c.name for c in result.checks] == ["eigen_residual", "biorthonormality"]
        assert result.passed

    def test_truncation_failure_named(self, caplog: pytest.LogCaptureFixture) -> None:
        system = build_system(HamiltonianSpec.single_exponential(1.0), 12, 4)
        with caplog.at_level(logging.WARNING, logger="liouville_biortho.verify"):
            result = verify_system(system)
        assert not result.passed
        assert result.first_failure is not None
        assert result.first_failure.name == "eigen_residual"
        assert "eigen_residual" in result.summary
        assert "verification failed" in caplog.text

    def test_loose_tolerance_override(self) -> None:
        system = build_system(HamiltonianSpec.single_exponential(1.0), 12, 4)
        assert verify_system(system, Tolerances().override(10.0)).passed


def test_nu_ok() -> None:
    assert nu_ok(0.0)
    assert nu_ok(1.5)
    assert not nu_ok(-0.5)
