"""Tests for the biorthogonal construction, pairing and state algebra."""

from __future__ import annotations

import math

import numpy as np
import pytest

from liouville_biortho.biortho import (
    BiorthogonalSystem,
    Method,
    apply_hamiltonian,
    assemble_bilocal,
    biorthonormality_deviation,
    build_dual,
    build_eigenfunction,
    build_system,
    eigen_residual,
    ehrenfest_residual,
    expand_state,
    expectation_e2ix,
    gamma_inhomogeneity,
    max_eigen_residual,
    p_expectation,
    pairing,
    pairing_fft,
)
from liouville_biortho.classical import fit_circle
from liouville_biortho.errors import (
    ExceptionalPointError,
    ExcludedOrderError,
    ModelMismatchError,
    ZeroNormError,
)
from liouville_biortho.laurent import HamiltonianSpec, LaurentPoly, Sector
from liouville_biortho.specfun import bessel_j, power_expansions

GENERIC = HamiltonianSpec(nu=0.25, mu={1: 0.7 - 0.2j, 2: 0.5j, 3: -0.4}, label="generic")
SINGLE = HamiltonianSpec.single_exponential(1.0)


def _random_poly(rng: np.random.Generator, lo: int, size: int) -> LaurentPoly:
    return LaurentPoly(lo, rng.normal(size=size) + 1j * rng.normal(size=size))


class TestBuildDual:
    def test_free_duals_are_monomials(self) -> None:
        for n in range(5):
            assert build_dual(HamiltonianSpec(), n) == LaurentPoly.monomial(-n)

    def test_single_exponential_ratio(self) -> None:
        m = 1.3
        spec = HamiltonianSpec.single_exponential(m)
        for n in range(2, 8):
            chi = build_dual(spec, n)
            assert chi.min_power == -n
            assert chi.coefficient(-n + 1) == 0
            assert abs(chi.coefficient(-n + 2) - m * m / (4 * (n - 1))) <= 1e-14

    def test_exact_length(self) -> None:
        chi = build_dual(GENERIC, 6)
        assert chi.min_power == -6
        assert chi.max_power <= 0

    def test_exceptional_point(self) -> None:
        spec = HamiltonianSpec(nu=-0.5, mu={1: 1.0})
        with pytest.raises(ExceptionalPointError) as info:
            build_dual(spec, 1)
        assert info.value.n == 1
        assert info.value.index == 1

    def test_vanishing_denominator_refused_without_coupling(self) -> None:
        # μ₁ = 0 leaves a zero numerator at k = 1; the build still refuses
        spec = HamiltonianSpec(nu=-0.5, mu={2: 1.0})
        with pytest.raises(ExceptionalPointError) as info:
            build_dual(spec, 1)
        assert info.value.n == 1
        assert info.value.index == 1

    def test_right_sector_half_integer_refused(self) -> None:
        spec = HamiltonianSpec.single_exponential(1.0, nu=-0.5)
        with pytest.raises(ExceptionalPointError):
            build_system(spec, 4, 40)

    def test_left_sector_half_integer_refused(self) -> None:
        spec = HamiltonianSpec.single_exponential(1.0, nu=0.5)
        with pytest.raises(ExceptionalPointError) as info:
            build_system(spec, 4, 40, sector=Sector.LEFT)
        assert info.value.n == 0

    def test_negative_n(self) -> None:
        with pytest.raises(ValueError):
            build_dual(SINGLE, -1)


class TestInhomogeneity:
    def test_free_is_empty(self) -> None:
        assert gamma_inhomogeneity(HamiltonianSpec(), 3) == {}
        assert gamma_inhomogeneity(HamiltonianSpec(nu=0.2), 3, Sector.LEFT) == {}

    def test_single_exponential_even_n(self) -> None:
        gamma = gamma_inhomogeneity(SINGLE, 4)
        assert list(gamma) == [2]
        gamma_odd = gamma_inhomogeneity(SINGLE, 3)
        assert list(gamma_odd) == [1]

    @pytest.mark.parametrize("n", [0, 1, 4, 7])
    def test_remainder_has_only_positive_powers(self, n: int) -> None:
        chi = build_dual(GENERIC, n)
        rem = apply_hamiltonian(GENERIC, chi, conjugate_flux=True) - chi * GENERIC.energy(n)
        assert rem.restrict(hi=0).sup_norm() <= 1e-12
        gamma = gamma_inhomogeneity(GENERIC, n)
        for k in range(1, GENERIC.max_harmonic + 1):
            assert abs(rem.coefficient(k) - gamma.get(k, 0j)) <= 1e-12


class TestEigenfunction:
    def test_free(self) -> None:
        assert build_eigenfunction(HamiltonianSpec(), 3, trunc=10) == LaurentPoly.monomial(3)

    def test_single_exponential_ratio(self) -> None:
        m = 0.8
        spec = HamiltonianSpec.single_exponential(m)
        for n in range(6):
            psi = build_eigenfunction(spec, n, trunc=20)
            assert abs(psi.coefficient(n + 2) + m * m / (4 * (n + 1))) <= 1e-14

    def test_darboux_ground_state_is_exponential(self) -> None:
        m = 1.0
        psi = build_eigenfunction(HamiltonianSpec.darboux(m), 0, trunc=25)
        for j in range(12):
            assert abs(psi.coefficient(j) - (-m) ** j / math.factorial(j)) <= 1e-14

    def test_darboux_ground_state_annihilated(self) -> None:
        spec = HamiltonianSpec.darboux(1.0)
        psi = build_eigenfunction(spec, 0, trunc=40)
        assert eigen_residual(spec, psi, 0.0) <= 1e-14

    @pytest.mark.parametrize("n", [0, 2, 5])
    def test_methods_agree(self, n: int) -> None:
        spec = HamiltonianSpec(nu=0.3, mu={1: 0.5, 2: 0.25j})
        a = build_eigenfunction(spec, n, trunc=20, method=Method.FROBENIUS)
        b = build_eigenfunction(spec, n, trunc=20, method=Method.TRIANGULAR)
        assert (a - b).sup_norm() <= 1e-12 * a.sup_norm()

    def test_triangular_rejects_left_sector(self) -> None:
        with pytest.raises(ValueError):
            build_eigenfunction(SINGLE, 1, sector=Sector.LEFT, method=Method.TRIANGULAR)

    def test_negative_integer_flux_excluded(self) -> None:
        spec = HamiltonianSpec(nu=-1.0, mu={2: 1.0})
        with pytest.raises(ExcludedOrderError):
            build_eigenfunction(spec, 0)
        with pytest.raises(ExcludedOrderError):
            build_system(spec, 3)

    def test_left_sector_melding(self) -> None:
        spec = HamiltonianSpec.single_exponential(1.0, nu=1.0)
        with pytest.raises(ExceptionalPointError):
            build_eigenfunction(spec, 2, sector=Sector.LEFT)

    def test_retained_residual_small(self) -> None:
        for n in range(6):
            psi = build_eigenfunction(GENERIC, n)
            assert eigen_residual(GENERIC, psi, GENERIC.energy(n)) <= 1e-10


class TestApplyHamiltonian:
    def test_free_monomial(self) -> None:
        spec = HamiltonianSpec(nu=0.4)
        out = apply_hamiltonian(spec, LaurentPoly.monomial(3))
        assert abs(out.coefficient(3) - 3.4**2) <= 1e-13
        flipped = apply_hamiltonian(spec, LaurentPoly.monomial(3), conjugate_flux=True)
        assert abs(flipped.coefficient(3) - 2.6**2) <= 1e-13

    def test_potential_shift(self) -> None:
        spec = HamiltonianSpec(mu={2: 3.0})
        out = apply_hamiltonian(spec, LaurentPoly.monomial(0))
        assert out == LaurentPoly.monomial(2, 3.0)


class TestPairing:
    def test_monomials(self) -> None:
        for k in range(4):
            for j in range(4):
                expected = 1.0 if k == j else 0.0
                assert pairing(LaurentPoly.monomial(-k), LaurentPoly.monomial(j)) == expected

    def test_zero_operand(self) -> None:
        assert pairing(LaurentPoly.zero(), LaurentPoly.monomial(0)) == 0j

    def test_fft_agrees(self) -> None:
        rng = np.random.default_rng(7)
        for _ in range(5):
            chi = _random_poly(rng, -6, 8)
            psi = _random_poly(rng, -2, 9)
            assert abs(pairing(chi, psi) - pairing_fft(chi, psi)) <= 1e-13
            assert abs(pairing(chi, psi) - pairing_fft(chi, psi, points=64)) <= 1e-13

    def test_fft_aliasing_guard(self) -> None:
        with pytest.raises(ValueError):
            pairing_fft(LaurentPoly.monomial(5), LaurentPoly.monomial(5), points=4)


class TestBuildSystem:
    def test_generic_biorthonormal(self) -> None:
        system = build_system(GENERIC, 15, 60)
        assert biorthonormality_deviation(system) <= 1e-10
        assert max_eigen_residual(system) <= 1e-10
        assert system.energies[3] == pytest.approx(3.25**2)

    def test_triangular_system(self) -> None:
        system = build_system(SINGLE, 6, 30, method=Method.TRIANGULAR)
        assert system.method is Method.TRIANGULAR
        assert biorthonormality_deviation(system) <= 1e-10

    def test_left_sector(self) -> None:
        spec = HamiltonianSpec.single_exponential(0.7, nu=0.3)
        system = build_system(spec, 4, 40, sector=Sector.LEFT)
        assert system.psi[2].min_power == -2
        assert system.chi[2].min_power == 2
        assert system.energies[2] == pytest.approx(1.7**2)
        assert biorthonormality_deviation(system) <= 1e-10

    def test_negative_n_max(self) -> None:
        with pytest.raises(ValueError):
            build_system(SINGLE, -1)

    def test_length_mismatch(self) -> None:
        with pytest.raises(ValueError):
            BiorthogonalSystem(SINGLE, Sector.RIGHT, 2, 10, [], [], [])

    def test_rescaled_keeps_pairing(self) -> None:
        system = build_system(SINGLE, 4, 30)
        scaled = system.rescaled([2.0, 1j, 0.5, 3.0, -1.0])
        assert biorthonormality_deviation(scaled) <= 1e-12
        assert scaled.metadata["rescaled"] is True
        with pytest.raises(ValueError):
            system.rescaled([1.0, 0.0, 1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            system.rescaled([1.0])

    def test_save_and_load(self, tmp_path) -> None:
        system = build_system(GENERIC, 3, 20)
        path = system.save(tmp_path / "system.json")
        loaded = BiorthogonalSystem.load(path)
        assert loaded.spec == system.spec
        assert loaded.psi == system.psi
        assert loaded.chi == system.chi
        assert loaded.energies == system.energies


class TestStates:
    def test_expand_eigenfunction(self) -> None:
        system = build_system(GENERIC, 6, 40)
        state = expand_state(system.psi[3], system)
        expected = np.zeros(7)
        expected[3] = 1.0
        assert np.max(np.abs(state.c - expected)) <= 1e-10
        assert state.residual <= 1e-10

    def test_expand_outside_span(self) -> None:
        system = build_system(SINGLE, 4, 20)
        state = expand_state(LaurentPoly.monomial(-1), system)
        assert np.all(state.c == 0)
        assert state.residual == pytest.approx(1.0)

    def test_expand_callable(self) -> None:
        system = build_system(HamiltonianSpec(), 5, 2)
        state = expand_state(lambda x: np.exp(3j * x), system)
        assert abs(state.c[3] - 1) <= 1e-12
        assert state.residual <= 1e-12

    def test_expand_square_matches_bessel_series(self) -> None:
        # z² = w²/m² = (4/m²) Σ_j (2j+2)(j+1) J_{2j+2}(w), and ψₙ = n!(2/m)ⁿ Jₙ(w) at ν = 0
        m = 0.8
        system = build_system(HamiltonianSpec.single_exponential(m), 10, 40)
        state = expand_state(LaurentPoly.monomial(2), system)
        assert state.residual <= 1e-9
        weights = np.array([cn * math.factorial(n) * (2 / m) ** n for n, cn in enumerate(state.c)])
        for n, b in enumerate(weights):
            if n >= 2 and n % 2 == 0:
                j = (n - 2) // 2
                assert abs(b - 4 * (2 * j + 2) * (j + 1) / m**2) <= 1e-10 * abs(b)
            else:
                assert abs(b) <= 1e-12
        w = m * np.exp(1j * np.array([0.3, 1.9, 4.0]))
        series = sum(b * np.asarray(bessel_j(n, w)) for n, b in enumerate(weights))
        oracle = np.asarray(power_expansions("pos_power", w, terms=5, param=2)) / m**2
        assert np.max(np.abs(series - oracle)) <= 1e-12

    def test_norm_and_average(self) -> None:
        system = build_system(HamiltonianSpec(), 1, 0)
        state = system.state([1 / math.sqrt(2), 1 / math.sqrt(2)])
        assert state.norm_sq() == pytest.approx(1.0)
        assert state.f_average(lambda e: e) == pytest.approx(0.5)

    def test_zero_norm(self) -> None:
        system = build_system(HamiltonianSpec(), 1, 0)
        with pytest.raises(ZeroNormError):
            system.state([0, 0]).f_average(lambda e: e)

    def test_evolve(self) -> None:
        system = build_system(SINGLE, 3, 20)
        state = system.state([0.5, 0.5j, -0.5, 0.5])
        assert np.array_equal(state.evolve(0.0).c, state.c)
        for t in (0.1, 1.7, -4.0):
            assert state.evolve(t).norm_sq() == pytest.approx(state.norm_sq())

    def test_wrong_length(self) -> None:
        system = build_system(SINGLE, 3, 20)
        with pytest.raises(ValueError):
            system.state([1.0, 2.0])


class TestEhrenfest:
    def test_superposition(self) -> None:
        system = build_system(SINGLE, 4, 40)
        state = system.state([0.6, 0.3j, -0.5, 0.2 + 0.1j, 0.0])
        for t in (0.0, 0.3, 1.1):
            assert ehrenfest_residual(state, t) <= 1e-6

    def test_eigenstate(self) -> None:
        system = build_system(SINGLE, 3, 40)
        state = system.state([0, 0, 1, 0])
        assert abs(expectation_e2ix(state, 0.5)) <= 1e-14
        assert p_expectation(state, 0.5) == pytest.approx(2.0)
        assert ehrenfest_residual(state, 0.5) <= 1e-9

    def test_momentum_expectation_circles(self) -> None:
        # c = (1, 0, 1): ⟨p⟩ = 1 − ¼e^{4it}, since only pairing(χ₂, pψ₀) = −½ couples the pair
        system = build_system(SINGLE, 4, 40)
        state = system.state([1, 0, 1, 0, 0])
        ts = np.linspace(0.0, 1.5, 16)
        values = np.array([p_expectation(state, float(t)) for t in ts])
        assert np.max(np.abs(values - (1 - 0.25 * np.exp(4j * ts)))) <= 1e-12
        circle = fit_circle(values)
        assert abs(circle.center - 1.0) <= 1e-10
        assert circle.radius == pytest.approx(0.25, abs=1e-10)
        angles = np.unwrap(np.angle(values - circle.center))
        assert np.max(np.abs(np.diff(angles) - 4 * (ts[1] - ts[0]))) <= 1e-9

    def test_wrong_model(self) -> None:
        system = build_system(HamiltonianSpec.darboux(1.0), 2, 20)
        with pytest.raises(ModelMismatchError):
            p_expectation(system.state([1, 0, 0]), 0.0)

    def test_bad_step(self) -> None:
        system = build_system(SINGLE, 1, 20)
        with pytest.raises(ValueError):
            ehrenfest_residual(system.state([1, 0]), 0.0, dt_fd=0.0)


class TestBilocal:
    def test_free_geometric_sum(self) -> None:
        system = build_system(HamiltonianSpec(), 6, 0)
        xs = np.array([0.2, 1.0])
        ys = np.array([0.5, 2.0, 3.0])
        grid = assemble_bilocal(system, lambda e: 1.0, xs, ys)
        q = np.exp(1j * (ys[None, :] - xs[:, None]))
        expected = (1 - q**7) / (1 - q)
        assert grid.max_abs_diff(expected) <= 1e-12
        assert grid.params["converged"] is False

    def test_validation(self) -> None:
        system = build_system(SINGLE, 2, 20)
        with pytest.raises(ValueError):
            assemble_bilocal(system, lambda e: 1.0, [], [0.0])
        with pytest.raises(ValueError):
            assemble_bilocal(system, lambda e: 1.0, [0.0], [0.0], family="Q")
