"""Biorthogonal eigen-systems of H = (p+ν)² + Σ μ_k e^{ikx}.

Duals are finite Laurent polynomials built by a triangular recursion. The
eigenfunctions are truncated power series obtained either by a triangular
solve against those duals or by direct Frobenius recursion. Pairing is the
z⁰ coefficient of a product, i.e. (1/2π)∫₀^{2π} χ(x)ψ(x) dx.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ExceptionalPointError, ExcludedOrderError, ModelMismatchError, ZeroNormError
from .laurent import HamiltonianSpec, KernelGrid, LaurentPoly, Sector

logger = logging.getLogger(__name__)

DEFAULT_TRUNC = 60
TAIL_WARN_RATIO = 1e-13


class Method(str, Enum):
    """How eigenfunction coefficients are obtained."""
    TRIANGULAR = "triangular"
    FROBENIUS = "frobenius"


def _solve(numerator: complex, denominator: float, *, n: int, index: int, what: str) -> complex:
    """numerator / denominator; a vanishing denominator is an exceptional point."""
    if denominator != 0:
        return numerator / denominator
    raise ExceptionalPointError(
        f"{what}: vanishing denominator at n={n}, index={index} (exceptional point)",
        n=n,
        index=index,
    )


def _frobenius(spec: HamiltonianSpec, leading: int, trunc: int, flux: float, n: int, what: str) -> LaurentPoly:
    """z^{leading}Σ_{j≤trunc} a_j z^j solving ((p+flux)² + V − (leading+flux)²)f = 0 up to the tail.

    a_0 = 1 and a_j = −Σ_k μ_k a_{j−k} / (j(2·leading + 2·flux + j)).
    """
    a = np.zeros(trunc + 1, dtype=np.complex128)
    a[0] = 1.0
    couplings = list(spec.mu.items())
    for j in range(1, trunc + 1):
        terms = [mu_k * a[j - k] for k, mu_k in couplings if k <= j]
        numerator = -sum(terms, 0j)
        denominator = j * (2.0 * leading + 2.0 * flux + j)
        a[j] = _solve(numerator, denominator, n=n, index=j, what=what)
    return LaurentPoly(leading, a)


def _check_flux(spec: HamiltonianSpec, sector: Sector) -> None:
    if sector is Sector.RIGHT and spec.mu and spec.nu < 0 and float(spec.nu).is_integer():
        raise ExcludedOrderError(
            f"nu must not be a negative integer in the right sector, got {spec.nu:g}"
        )


def build_dual(
    spec: HamiltonianSpec,
    n: int,
    sector: Sector = Sector.RIGHT,
    trunc: int = DEFAULT_TRUNC,
) -> LaurentPoly:
    """Dual partner χ_n with leading coefficient 1.

    Right sector: χ_n = z^{−n}Σ_{k≤n} c_k z^k with
    c_k = Σ_{j<k} μ_{k−j} c_j / (k(2n+2ν−k)), an exact Laurent polynomial.
    Left sector: the truncated eigenseries of the flux-flipped operator
    starting at z^{+n}.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    sector = Sector(sector)
    if sector is Sector.LEFT:
        return _frobenius(spec, n, trunc, -spec.nu, n, what="left dual")
    c = np.zeros(n + 1, dtype=np.complex128)
    c[0] = 1.0
    for k in range(1, n + 1):
        terms = [spec.coupling(k - j) * c[j] for j in range(max(0, k - spec.max_harmonic), k)]
        numerator = sum(terms, 0j)
        denominator = k * (2.0 * n + 2.0 * spec.nu - k)
        c[k] = _solve(numerator, denominator, n=n, index=k, what="dual recursion")
    return LaurentPoly(-n, c)


def gamma_inhomogeneity(
    spec: HamiltonianSpec,
    n: int,
    sector: Sector = Sector.RIGHT,
    trunc: int = DEFAULT_TRUNC,
) -> dict[int, complex]:
    """Positive-power remainder {k: γ_{n,k}} of (H̃ − E_n)χ_n.

    Right sector: γ_{n,k} = Σ_j μ_{k+n−j} c_{n,j}. For the left sector the
    dual is itself a truncated eigenseries and the remainder is its tail
    beyond z^{n+trunc}.
    """
    sector = Sector(sector)
    chi = build_dual(spec, n, sector, trunc)
    if sector is Sector.LEFT:
        rem = apply_hamiltonian(spec, chi, conjugate_flux=True) - chi * spec.energy(n, sector)
        tail = rem.restrict(lo=chi.min_power + trunc + 1)
        return {int(p): complex(v) for p, v in zip(tail.powers, tail.coeffs) if v != 0}
    gamma: dict[int, complex] = {}
    for k in range(1, spec.max_harmonic + 1):
        value = sum(
            (spec.coupling(k + n - j) * chi.coeffs[j] for j in range(min(n, chi.coeffs.size - 1) + 1)),
            0j,
        )
        if value != 0:
            gamma[k] = value
    return gamma


def _triangular(spec: HamiltonianSpec, n: int, trunc: int, duals: Sequence[LaurentPoly]) -> LaurentPoly:
    """a_j = −Σ_{i<j} c_{n+j, j−i} a_i from pairing(χ_{n+j}, ψ_n) = 0."""
    a = np.zeros(trunc + 1, dtype=np.complex128)
    a[0] = 1.0
    for j in range(1, trunc + 1):
        row = duals[n + j]
        # coefficient c_{n+j, l} sits at index l of the dual's dense window
        c = row.window(-(n + j), -(n + j) + j)
        a[j] = -np.dot(c[j:0:-1], a[:j])
    return LaurentPoly(n, a)


def build_eigenfunction(
    spec: HamiltonianSpec,
    n: int,
    trunc: int = DEFAULT_TRUNC,
    sector: Sector = Sector.RIGHT,
    method: Method = Method.FROBENIUS,
    duals: Sequence[LaurentPoly] | None = None,
) -> LaurentPoly:
    """ψ_{±n} = z^{±n}Σ_{j≤trunc} a_j z^j with a_0 = 1.

    Parameters
    ----------
    duals : optional precomputed right-sector duals χ_0..χ_{n+trunc}, reused
            by the triangular method
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if trunc < 0:
        raise ValueError(f"trunc must be >= 0, got {trunc}")
    sector = Sector(sector)
    method = Method(method)
    _check_flux(spec, sector)
    if sector is Sector.LEFT:
        if method is Method.TRIANGULAR:
            raise ValueError("the triangular method is only defined for the right sector")
        psi = _frobenius(spec, -n, trunc, spec.nu, n, what="left eigenfunction")
    elif method is Method.TRIANGULAR:
        if duals is None or len(duals) <= n + trunc:
            duals = [build_dual(spec, k) for k in range(n + trunc + 1)]
        psi = _triangular(spec, n, trunc, duals)
    else:
        psi = _frobenius(spec, n, trunc, spec.nu, n, what="eigenfunction")

    top = abs(psi.coefficient(psi.min_power + trunc)) if trunc else 0.0
    if top > TAIL_WARN_RATIO * psi.sup_norm():
        logger.warning(
            "truncation at N=%d insufficient for n=%d: |a_N| = %.3e relative to max %.3e",
            trunc, n, top, psi.sup_norm(),
        )
    return psi


def apply_hamiltonian(spec: HamiltonianSpec, f: LaurentPoly, conjugate_flux: bool = False) -> LaurentPoly:
    """(p ± ν)² f + Σ μ_k z^k f, exact on coefficients."""
    flux = -spec.nu if conjugate_flux else spec.nu
    out = f.map_powers(lambda j: (j + flux) ** 2)
    for k, mu_k in spec.mu.items():
        out = out + f.shift(k) * mu_k
    return out


def pairing(chi: LaurentPoly, psi: LaurentPoly) -> complex:
    """z⁰ coefficient of chi·psi."""
    if chi.is_zero or psi.is_zero:
        return 0j
    lo = max(chi.min_power, -psi.max_power)
    hi = min(chi.max_power, -psi.min_power)
    if lo > hi:
        return 0j
    left = chi.coeffs[lo - chi.min_power:hi - chi.min_power + 1]
    right = psi.window(-hi, -lo)[::-1]
    return complex(np.dot(left, right))


def _circle_samples(f: LaurentPoly, points: int) -> NDArray[np.complex128]:
    """f(e^{2πij/P}) for j < P, by inverse FFT of the folded coefficients."""
    spectrum = np.zeros(points, dtype=np.complex128)
    np.add.at(spectrum, f.powers % points, f.coeffs)
    return np.fft.ifft(spectrum) * points


def pairing_fft(chi: LaurentPoly, psi: LaurentPoly, points: int | None = None) -> complex:
    """Trapezoid quadrature of (1/2π)∫χψ dx on P equispaced nodes."""
    if chi.is_zero or psi.is_zero:
        return 0j
    lo = chi.min_power + psi.min_power
    hi = chi.max_power + psi.max_power
    needed = max(abs(lo), abs(hi)) + 1
    if points is None:
        points = needed
    elif points < needed:
        raise ValueError(f"points must be >= {needed} to avoid aliasing, got {points}")
    samples = _circle_samples(chi, points) * _circle_samples(psi, points)
    return complex(samples.mean())


def eigen_residual(
    spec: HamiltonianSpec,
    psi: LaurentPoly,
    energy: float,
    retained: bool = True,
) -> float:
    """‖Hψ − Eψ‖∞ / ‖ψ‖∞, over the retained window or including the tail."""
    rem = apply_hamiltonian(spec, psi) - psi * energy
    if retained:
        rem = rem.restrict(psi.min_power, psi.max_power)
    scale = psi.sup_norm()
    return rem.sup_norm() / scale if scale else rem.sup_norm()


@dataclass
class StateVector:
    """Coefficients c_n of a state in a built system; ``residual`` is the reconstruction error."""
    c: NDArray[np.complex128]
    system: BiorthogonalSystem
    residual: float = 0.0

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=np.complex128)
        if self.c.shape != (self.system.size,):
            raise ValueError(f"expected {self.system.size} coefficients, got shape {self.c.shape}")

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))

    def f_average(self, f: Callable[[float], complex]) -> complex:
        """Σ|c_n|² f(E_n) / Σ|c_n|²."""
        norm = self.norm_sq()
        if norm == 0:
            raise ZeroNormError("average requested for a state with zero norm")
        weights = np.abs(self.c) ** 2
        values = np.array([f(e) for e in self.system.energies], dtype=np.complex128)
        return complex(np.dot(weights, values) / norm)

    def evolve(self, t: float) -> StateVector:
        phases = np.exp(-1j * np.asarray(self.system.energies) * t)
        return StateVector(self.c * phases, self.system, self.residual)

    def psi(self) -> LaurentPoly:
        """Σ c_n ψ_n."""
        out = LaurentPoly.zero()
        for cn, psi_n in zip(self.c, self.system.psi):
            if cn != 0:
                out = out + psi_n * cn
        return out

    def dual(self) -> LaurentPoly:
        """Σ c_n* χ_n."""
        out = LaurentPoly.zero()
        for cn, chi_n in zip(self.c, self.system.chi):
            if cn != 0:
                out = out + chi_n * np.conj(cn)
        return out


@dataclass
class BiorthogonalSystem:
    """Paired eigenfunctions ψ_n and duals χ_n with energies E_n, for n = 0..n_max."""
    spec: HamiltonianSpec
    sector: Sector
    n_max: int
    trunc: int
    psi: list[LaurentPoly]
    chi: list[LaurentPoly]
    energies: list[float]
    method: Method = Method.FROBENIUS
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (len(self.psi) == len(self.chi) == len(self.energies) == self.n_max + 1):
            raise ValueError(
                f"psi, chi and energies must all have n_max+1={self.n_max + 1} entries"
            )

    @property
    def size(self) -> int:
        return self.n_max + 1

    def state(self, c: ArrayLike) -> StateVector:
        return StateVector(np.asarray(c, dtype=np.complex128), self)

    def pairing_matrix(self) -> NDArray[np.complex128]:
        """M[k, n] = pairing(χ_k, ψ_n)."""
        return np.array([[pairing(ck, pn) for pn in self.psi] for ck in self.chi], dtype=np.complex128)

    def rescaled(self, z_factors: ArrayLike) -> BiorthogonalSystem:
        """{Z_n ψ_n, χ_n / Z_n}; biorthonormality is unchanged."""
        z = np.asarray(z_factors, dtype=np.complex128)
        if z.shape != (self.size,):
            raise ValueError(f"expected {self.size} factors, got shape {z.shape}")
        if np.any(z == 0):
            raise ValueError("rescaling factors must be nonzero")
        return BiorthogonalSystem(
            spec=self.spec,
            sector=self.sector,
            n_max=self.n_max,
            trunc=self.trunc,
            psi=[p * zn for p, zn in zip(self.psi, z)],
            chi=[c * (1.0 / zn) for c, zn in zip(self.chi, z)],
            energies=list(self.energies),
            method=self.method,
            metadata={**self.metadata, "rescaled": True},
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "sector": self.sector.value,
            "n_max": self.n_max,
            "trunc": self.trunc,
            "method": self.method.value,
            "psi": [p.to_list() for p in self.psi],
            "chi": [c.to_list() for c in self.chi],
            "energies": list(self.energies),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> BiorthogonalSystem:
        return cls(
            spec=HamiltonianSpec.from_dict(d["spec"]),
            sector=Sector(d.get("sector", "right")),
            n_max=int(d["n_max"]),
            trunc=int(d["trunc"]),
            psi=[LaurentPoly.from_list(p) for p in d["psi"]],
            chi=[LaurentPoly.from_list(c) for c in d["chi"]],
            energies=[float(e) for e in d["energies"]],
            method=Method(d.get("method", "frobenius")),
            metadata=d.get("metadata", {}),
        )

    def save(self, path: str | Path) -> Path:
        from .exporters import atomic_write_text

        return atomic_write_text(path, json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> BiorthogonalSystem:
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_system(
    spec: HamiltonianSpec,
    n_max: int,
    trunc: int = DEFAULT_TRUNC,
    sector: Sector = Sector.RIGHT,
    method: Method = Method.FROBENIUS,
) -> BiorthogonalSystem:
    """Build ψ_n, χ_n and E_n for every n ≤ n_max."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    sector = Sector(sector)
    method = Method(method)
    _check_flux(spec, sector)
    duals: list[LaurentPoly] | None = None
    if method is Method.TRIANGULAR and sector is Sector.RIGHT:
        duals = [build_dual(spec, k) for k in range(n_max + trunc + 1)]
    psi: list[LaurentPoly] = []
    chi: list[LaurentPoly] = []
    for n in range(n_max + 1):
        psi.append(build_eigenfunction(spec, n, trunc, sector, method, duals=duals))
        chi.append(duals[n] if duals is not None else build_dual(spec, n, sector, trunc))
    energies = [spec.energy(n, sector) for n in range(n_max + 1)]
    logger.debug("built %s-sector system for %s up to n=%d (N=%d)", sector.value, spec.label, n_max, trunc)
    return BiorthogonalSystem(spec, sector, n_max, trunc, psi, chi, energies, method)


def biorthonormality_deviation(system: BiorthogonalSystem) -> float:
    """max_{k,n} |pairing(χ_k, ψ_n) − δ_kn|."""
    dev = system.pairing_matrix() - np.eye(system.size)
    return float(np.max(np.abs(dev)))


def max_eigen_residual(system: BiorthogonalSystem, retained: bool = True) -> float:
    return max(
        eigen_residual(system.spec, p, e, retained=retained)
        for p, e in zip(system.psi, system.energies)
    )


def expand_state(f: LaurentPoly | ArrayLike | Callable[[Any], Any], system: BiorthogonalSystem) -> StateVector:
    """c_n = pairing(χ_n, f), with the sup-norm reconstruction residual attached.

    ``f`` may be a LaurentPoly, a callable of x, or samples on x_j = 2πj/P.
    """
    if not isinstance(f, LaurentPoly):
        if callable(f):
            points = 4 * (system.n_max + system.trunc + 1)
            xs = 2 * np.pi * np.arange(points) / points
            samples = np.asarray(f(xs), dtype=np.complex128)
        else:
            samples = np.asarray(f, dtype=np.complex128)
            points = samples.size
        half = (points - 1) // 2
        f = LaurentPoly.from_samples(samples, -half, points - 1 - half)
        f = LaurentPoly(f.min_power, np.where(np.abs(f.coeffs) > 1e-15 * f.sup_norm(), f.coeffs, 0))
    c = np.array([pairing(chi, f) for chi in system.chi], dtype=np.complex128)
    state = StateVector(c, system)
    state.residual = (f - state.psi()).sup_norm()
    return state


def _require_single_exponential(system: BiorthogonalSystem) -> complex:
    """m² of a mu={2: m²}, ν=0 system."""
    spec = system.spec
    if spec.nu != 0 or set(spec.mu) != {2}:
        raise ModelMismatchError(
            f"Ehrenfest relations are stated for mu={{2: m²}}, nu=0; got {spec.to_dict()}"
        )
    return spec.mu[2]


def _average(state: StateVector, t: float, op: Callable[[LaurentPoly], LaurentPoly]) -> complex:
    norm = state.norm_sq()
    if norm == 0:
        raise ZeroNormError("average requested for a state with zero norm")
    moved = state.evolve(t)
    return pairing(moved.dual(), op(moved.psi())) / norm


def p_expectation(state: StateVector, t: float) -> complex:
    """⟨p⟩(t) = pairing(Σc_n*χ_n, −i∂ₓΣc_nψ_n) / Σ|c_n|² with time phases applied."""
    _require_single_exponential(state.system)
    return _average(state, t, LaurentPoly.momentum)


def expectation_e2ix(state: StateVector, t: float) -> complex:
    """⟨e^{2ix}⟩(t)."""
    _require_single_exponential(state.system)
    return _average(state, t, lambda f: f.shift(2))


def ehrenfest_residual(state: StateVector, t: float, dt_fd: float = 1e-4) -> float:
    """|d⟨p⟩/dt + 2im²⟨e^{2ix}⟩| with a five-point central difference."""
    if dt_fd <= 0:
        raise ValueError(f"dt_fd must be > 0, got {dt_fd}")
    m2 = _require_single_exponential(state.system)
    h = dt_fd
    p = [p_expectation(state, t + k * h) for k in (-2, -1, 1, 2)]
    derivative = (p[0] - 8 * p[1] + 8 * p[2] - p[3]) / (12 * h)
    return abs(derivative + 2j * m2 * expectation_e2ix(state, t))


def assemble_bilocal(
    system: BiorthogonalSystem,
    weight: Callable[[float], complex],
    xs: ArrayLike,
    ys: ArrayLike,
    family: str = "J",
    conj_left: bool = True,
    cauchy_tol: float = 1e-8,
) -> KernelGrid:
    """Σ_n f(E_n) L_n(x) R_n(y) on the grid.

    family "J" pairs eigenfunctions (L = ψ̄, R = ψ); "K" pairs duals
    (L = χ̄, R = χ). With ``conj_left`` false L is used unconjugated.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("grid must be nonempty")
    if family not in ("J", "K"):
        raise ValueError(f"family must be 'J' or 'K', got {family!r}")
    funcs = system.psi if family == "J" else system.chi
    total = np.zeros((x.size, y.size), dtype=np.complex128)
    last_terms: list[float] = []
    for energy, f in zip(system.energies, funcs):
        left = f.on_circle(x)
        if conj_left:
            left = np.conj(left)
        term = complex(weight(energy)) * np.outer(left, f.on_circle(y))
        total = total + term
        last_terms.append(float(np.max(np.abs(term))))
    tail = max(last_terms[-3:])
    converged = tail <= cauchy_tol * max(1.0, float(np.max(np.abs(total))))
    if not converged:
        logger.warning(
            "%s-type bilocal sum fails the Cauchy criterion at n_max=%d (last terms up to %.3e)",
            family, system.n_max, tail,
        )
    return KernelGrid(
        name=f"bilocal_{family}",
        x_samples=x,
        y_samples=y,
        values=total,
        params={"n_max": system.n_max, "family": family, "converged": converged},
    )


__all__ = [
    "BiorthogonalSystem",
    "Method",
    "StateVector",
    "apply_hamiltonian",
    "assemble_bilocal",
    "biorthonormality_deviation",
    "build_dual",
    "build_eigenfunction",
    "build_system",
    "eigen_residual",
    "ehrenfest_residual",
    "expand_state",
    "expectation_e2ix",
    "gamma_inhomogeneity",
    "max_eigen_residual",
    "p_expectation",
    "pairing",
    "pairing_fft",
]
