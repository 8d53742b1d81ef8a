"""Tests for the named model assemblies."""

from __future__ import annotations

import math

import numpy as np
import pytest

from liouville_biortho.biortho import apply_hamiltonian, assemble_bilocal
from liouville_biortho.errors import ExcludedOrderError
from liouville_biortho.kernels import ham_kernel_H, norm_kernel_J
from liouville_biortho.laurent import LaurentPoly
from liouville_biortho.models import (
    ModelReport,
    addition_theorem_scales,
    darboux_alpha_beta,
    darboux_factorized_apply,
    darboux_system,
    isospectral_draws,
    j2exp_closed_forms,
    j2exp_partial_kernels,
    left_sector_report,
    magnetic_spectrum,
    single_exp_system,
    two_exp_eigenfunction,
    two_exp_ode_residual,
)
from liouville_biortho.specfun import bessel_j


class TestMagneticSpectrum:
    def test_half_integer_pairs(self) -> None:
        spectrum = magnetic_spectrum(0.5, 3)
        assert spectrum.degeneracies == [(0, -1), (1, -2), (2, -3)]
        assert not spectrum.melded
        for n, partner in spectrum.degeneracies:
            assert spectrum.right[n] == pytest.approx(spectrum.left[-partner])

    def test_integer_melds(self) -> None:
        spectrum = magnetic_spectrum(0.0, 4)
        assert spectrum.melded
        assert spectrum.degeneracies == []
        assert spectrum.right == spectrum.left

    def test_generic(self) -> None:
        spectrum = magnetic_spectrum(0.3, 4)
        assert not spectrum.melded
        assert spectrum.degeneracies == []
        assert spectrum.right[2] == pytest.approx(2.3**2)
        assert spectrum.left[2] == pytest.approx(1.7**2)


class TestSingleExponential:
    def test_zero_coupling_is_free(self) -> None:
        system, report = single_exp_system(0.0, n_max=5)
        assert system.spec.is_free
        assert system.psi[3] == LaurentPoly.monomial(3)
        assert report.max_closedform_dev == 0.0

    def test_bessel_closed_forms(self) -> None:
        system, report = single_exp_system(1.0, n_max=12)
        assert report.max_closedform_dev <= 1e-10
        assert report.max_biorth_dev <= 1e-10
        assert report.max_eigen_residual <= 1e-10
        assert "melded sectors (integer nu)" in report.exceptional_flags
        assert system.energies == pytest.approx([float(n * n) for n in range(13)])

    def test_with_flux(self) -> None:
        system, report = single_exp_system(1.0, nu=0.3, n_max=8)
        assert report.max_eigen_residual <= 1e-10
        assert report.max_closedform_dev <= 1e-10
        assert report.exceptional_flags == []
        assert system.energies[4] == pytest.approx(4.3**2)

    def test_half_integer_flags(self) -> None:
        _, report = single_exp_system(1.0, nu=0.5, n_max=3)
        assert "degenerate E_0,E_-1" in report.exceptional_flags

    def test_negative_integer_flux_excluded(self) -> None:
        with pytest.raises(ExcludedOrderError):
            single_exp_system(1.0, nu=-1.0)

    def test_addition_theorem_scales(self) -> None:
        scales = addition_theorem_scales(1.0, 0.0, 3)
        root2 = math.sqrt(2.0)
        assert np.allclose(scales, [1.0, root2 / 2, root2 / 8, root2 / 48], rtol=1e-14, atol=0)

    def test_rescaled_system_reproduces_kernels(self) -> None:
        system, _ = single_exp_system(1.0, n_max=16)
        scaled = system.rescaled(addition_theorem_scales(1.0, 0.0, 16))
        xs = np.array([0.0, 0.4, 1.3])
        ys = np.array([-0.7, 0.2])
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        norm = assemble_bilocal(scaled, lambda e: 1.0, xs, ys)
        assert np.max(np.abs(norm.values - norm_kernel_J(1.0, X, Y))) <= 1e-10
        ham = assemble_bilocal(scaled, lambda e: e, xs, ys)
        assert np.max(np.abs(ham.values - ham_kernel_H(1.0, X, Y))) <= 1e-10


class TestLeftSector:
    def test_certified(self) -> None:
        report = left_sector_report(0.7, 0.3, n_max=4, trunc=40)
        assert report.max_eigen_residual <= 1e-10
        assert report.max_biorth_dev <= 1e-10
        assert report.max_closedform_dev <= 1e-12


class TestTwoExponential:
    def test_darboux_ground_state(self) -> None:
        x = np.linspace(-3.0, 3.0, 11)
        psi = two_exp_eigenfunction(1.0, -1.0, 0.0, 0.0, "+", x)
        assert np.max(np.abs(psi - np.exp(-np.exp(1j * x)))) <= 1e-13

    def test_reduces_to_bessel(self) -> None:
        x = np.linspace(-2.0, 2.0, 9)
        psi = two_exp_eigenfunction(0.0, 1.0, 0.0, 2.0, "+", x)
        expected = bessel_j(2, np.exp(1j * x)) * math.factorial(2) * 2.0**2
        assert np.max(np.abs(psi - expected)) <= 1e-12

    def test_ode_residual(self) -> None:
        xs = np.linspace(-2.5, 2.5, 21)
        assert two_exp_ode_residual(0.7 + 0.2j, 1.1, 0.0, 1.0, "+", xs) <= 1e-7

    def test_rejects(self) -> None:
        with pytest.raises(ValueError):
            two_exp_eigenfunction(1.0, 0.0, 0.0, 1.0, "+", 0.3)
        with pytest.raises(ValueError):
            two_exp_eigenfunction(1.0, 1.0, 0.0, 1.0, "?", 0.3)
        with pytest.raises(ExcludedOrderError):
            two_exp_eigenfunction(1.0, 1.0, 0.0, 1.0, "-", 0.3)


class TestDarboux:
    def test_factorization_is_exact(self) -> None:
        f = LaurentPoly(-2, np.array([1.0, 0.5j, -2.0, 0.0, 3.0], dtype=np.complex128))
        system, report = darboux_system(1.0, n_max=8)
        assert report.details["factorization_dev"] <= 1e-12
        assert report.details["ground_state_residual"] <= 1e-14
        diff = darboux_factorized_apply(1.0, f) - apply_hamiltonian(system.spec, f)
        assert diff.sup_norm() <= 1e-14

    def test_closed_forms(self) -> None:
        _, report = darboux_system(1.0, n_max=8)
        assert report.details["inhomogeneity_dev"] <= 1e-11
        assert report.max_closedform_dev <= 1e-10
        assert report.max_eigen_residual <= 1e-10

    def test_first_excited_state_elementary(self) -> None:
        # ψ₁ = (sinh w / w − e^{−w}) / m at w = m e^{ix}
        m = 0.7
        system, report = darboux_system(m, n_max=3)
        assert report.max_closedform_dev <= 1e-10
        z = np.exp(1j * np.linspace(0.0, 2 * np.pi, 9, endpoint=False))
        w = m * z
        expected = (np.sinh(w) / w - np.exp(-w)) / m
        got = np.asarray(system.psi[1].evaluate(z))
        assert np.max(np.abs(got - expected)) <= 1e-12

    def test_alpha_beta(self) -> None:
        alpha, beta = darboux_alpha_beta(0)
        assert alpha == pytest.approx(-math.sqrt(math.pi))
        assert beta == pytest.approx(math.sqrt(math.pi))
        alpha, beta = darboux_alpha_beta(3)
        assert alpha == pytest.approx(math.gamma(1.5))
        assert beta == pytest.approx(2 * math.gamma(1.5))


class TestJ2Exp:
    def test_partial_sums_converge(self) -> None:
        half, nnp1 = j2exp_partial_kernels(1.0, 40, 0.4, 1.1)
        sinhc, second = j2exp_closed_forms(1.0, 0.4, 1.1)
        assert abs(half - sinhc) <= 1e-11
        assert abs(nnp1 - second) <= 1e-10

    def test_zero_argument(self) -> None:
        half, nnp1 = j2exp_partial_kernels(0.0, 5, 0.0, 0.0)
        sinhc, second = j2exp_closed_forms(0.0, 0.0, 0.0)
        assert half == pytest.approx(1.0)
        assert sinhc == pytest.approx(1.0)
        assert nnp1 == 0
        assert second == 0

    def test_grid(self) -> None:
        xs = np.array([0.0, 0.5, 2.0])
        half, _ = j2exp_partial_kernels(0.8, 40, xs, xs[::-1])
        sinhc, _ = j2exp_closed_forms(0.8, xs, xs[::-1])
        assert np.max(np.abs(half - sinhc)) <= 1e-11


class TestIsospectral:
    def test_draws_share_spectrum(self) -> None:
        reports = isospectral_draws(draws=5, seed=3)
        assert len(reports) == 5
        for report in reports:
            assert report.max_eigen_residual <= 1e-10
            assert report.max_biorth_dev <= 1e-10
            mu1 = complex(report.details["mu1_re"], report.details["mu1_im"])
            assert abs(mu1) <= 2.0

    def test_seeded(self) -> None:
        a = isospectral_draws(draws=2, seed=7)
        b = isospectral_draws(draws=2, seed=7)
        assert [r.details for r in a] == [r.details for r in b]


class TestModelReport:
    def test_negative_rejected(self) -> None:
        with pytest.raises(ValueError):
            ModelReport(model="x", n_max=2, max_biorth_dev=-1.0)

    def test_round_trip(self) -> None:
        report = ModelReport(
            model="x",
            n_max=3,
            max_eigen_residual=1e-15,
            exceptional_flags=["melded sectors (integer nu)"],
            details={"a": 0.5},
        )
        assert ModelReport.from_dict(report.to_dict()) == report
