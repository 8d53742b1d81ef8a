"""Closed-form bilocal kernels and the truncated sums they are checked against.

Conventions: w = m e^{-ix}, z = m e^{iy}; all periodic integrals are uniform
trapezoid sums, which are spectrally accurate for analytic periodic
integrands.
"""

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .biortho import pairing
from .errors import ExcludedOrderError, RegionError
from .laurent import KernelGrid, LaurentPoly
from .specfun import (
    bessel_i,
    bessel_j,
    bessel_j_reduced,
    gamma_real,
    gegenbauer_a,
    neumann_a,
)

logger = logging.getLogger(__name__)

REMOVABLE_RADIUS = 1e-3
POLE_MARGIN = 1e-6
KERNEL_NAMES = ("J", "H", "J_nu", "H_nu", "K")


def _out(values: NDArray[np.complex128]) -> Any:
    return complex(values) if np.ndim(values) == 0 else values


def _wz(m: float, x: ArrayLike, y: ArrayLike) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return m * np.exp(-1j * xx), m * np.exp(1j * yy)


def _check_nu(nu: float) -> None:
    if nu < 0 and float(nu).is_integer():
        raise ExcludedOrderError(f"nu must not be a negative integer, got {nu:g}")


def epsilon(n: int) -> float:
    """Neumann's factor: 1 for n = 0, 2 otherwise."""
    return 1.0 if n == 0 else 2.0


def norm_choice_z2(nu: float, n: int) -> float:
    """Z_n² = √(4π)/(2^ν Γ(ν+½)) · (ν+n)Γ(2ν+n)/n!, with the n=0 entry 2^ν Γ(ν+1).

    At ν = 0 this is ε_n.
    """
    _check_nu(nu)
    if n == 0:
        return 2.0**nu * gamma_real(nu + 1.0)
    prefactor = math.sqrt(4 * math.pi) / (2.0**nu * gamma_real(nu + 0.5))
    return prefactor * (nu + n) * gamma_real(2 * nu + n) / math.factorial(n)


def _ratio(order: float, u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """J_ν(u)/u^ν = 2^{-ν}Σ(−u²/4)^k/(k!Γ(ν+k+1)), analytic at u = 0."""
    return 2.0 ** (-order) * np.asarray(bessel_j_reduced(order, u), dtype=np.complex128)


def _psi_nu(n: int, nu: float, w: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """w^{-ν}J_{ν+n}(w) = 2^{-ν-n} w^n Σ(−w²/4)^k/(k!Γ(ν+n+k+1))."""
    return 2.0 ** (-nu - n) * w**n * np.asarray(bessel_j_reduced(nu + n, w), dtype=np.complex128)


# -- Norm and Hamiltonian kernels --------------------------------------------


def norm_kernel_J(m: float, x: ArrayLike, y: ArrayLike) -> Any:
    """J(x, y) = J₀(m e^{-ix} − m e^{iy})."""
    w, z = _wz(m, x, y)
    return _out(np.asarray(bessel_j(0, w - z), dtype=np.complex128))


def ham_kernel_H(m: float, x: ArrayLike, y: ArrayLike) -> Any:
    """H(x, y) = m J₁(u)/(e^{-iy} − e^{ix}), u = m(e^{-ix} − e^{iy}).

    Within REMOVABLE_RADIUS of x + y ≡ 0 the equivalent series
    m² e^{-i(x−y)} J₁(u)/u is used.
    """
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    w, z = _wz(m, xx, yy)
    u = w - z
    denom = np.exp(-1j * yy) - np.exp(1j * xx)
    near = np.abs(denom) < REMOVABLE_RADIUS
    series = m * m * np.exp(-1j * (xx - yy)) * _ratio(1.0, u)
    safe = np.where(near, 1.0, denom)
    closed = m * np.asarray(bessel_j(1, u), dtype=np.complex128) / safe
    return _out(np.where(near, series, closed))


def norm_kernel_J_sum(m: float, x: ArrayLike, y: ArrayLike, n_terms: int = 40) -> Any:
    """Σ_{n≤N} ε_n J_n(m e^{-ix}) J_n(m e^{iy}) (Neumann's addition theorem)."""
    w, z = _wz(m, x, y)
    total = np.zeros(w.shape, dtype=np.complex128)
    for n in range(n_terms + 1):
        total = total + epsilon(n) * np.asarray(bessel_j(n, w)) * np.asarray(bessel_j(n, z))
    return _out(total)


def ham_kernel_H_sum(m: float, x: ArrayLike, y: ArrayLike, n_terms: int = 40) -> Any:
    """Σ_{n≤N} n² ε_n J_n(m e^{-ix}) J_n(m e^{iy})."""
    w, z = _wz(m, x, y)
    total = np.zeros(w.shape, dtype=np.complex128)
    for n in range(1, n_terms + 1):
        total = total + 2.0 * n * n * np.asarray(bessel_j(n, w)) * np.asarray(bessel_j(n, z))
    return _out(total)


def norm_kernel_J_nu(m: float, nu: float, x: ArrayLike, y: ArrayLike) -> Any:
    """J_ν(u)/u^ν with u = w − z; equals 1/(2^ν Γ(ν+1)) at u = 0."""
    _check_nu(nu)
    w, z = _wz(m, x, y)
    return _out(_ratio(nu, w - z))


def ham_kernel_H_nu(m: float, nu: float, x: ArrayLike, y: ArrayLike) -> Any:
    """ν² J_ν-kernel + (1+2ν) m² e^{-ix+iy} J_{ν+1}(u)/u^{ν+1}."""
    _check_nu(nu)
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    w, z = _wz(m, xx, yy)
    u = w - z
    phase = np.exp(-1j * xx + 1j * yy)
    return _out(nu * nu * _ratio(nu, u) + (1 + 2 * nu) * m * m * phase * _ratio(nu + 1.0, u))


def _nu_sum(m: float, nu: float, x: ArrayLike, y: ArrayLike, n_terms: int, hamiltonian: bool) -> Any:
    _check_nu(nu)
    w, z = _wz(m, x, y)
    total = np.zeros(w.shape, dtype=np.complex128)
    for n in range(n_terms + 1):
        weight = norm_choice_z2(nu, n) * ((nu + n) ** 2 if hamiltonian else 1.0)
        total = total + weight * _psi_nu(n, nu, w) * _psi_nu(n, nu, z)
    return _out(total)


def norm_kernel_J_nu_sum(m: float, nu: float, x: ArrayLike, y: ArrayLike, n_terms: int = 40) -> Any:
    """Σ Z_n² ψ_{n,ν}(w) ψ_{n,ν}(z) with ψ_{n,ν}(w) = w^{-ν}J_{ν+n}(w)."""
    return _nu_sum(m, nu, x, y, n_terms, hamiltonian=False)


def ham_kernel_H_nu_sum(m: float, nu: float, x: ArrayLike, y: ArrayLike, n_terms: int = 40) -> Any:
    """Σ Z_n² (ν+n)² ψ_{n,ν}(w) ψ_{n,ν}(z)."""
    return _nu_sum(m, nu, x, y, n_terms, hamiltonian=True)


# -- s-parameter kernel and its symmetric specialization ---------------------


def simple_kernel_K(m: float, s: complex, x: ArrayLike, y: ArrayLike) -> Any:
    """K(x, y; s) = exp[(m/2)(s⁻¹e^{i(y−x)} − s e^{-i(x+y)} − s e^{i(x+y)})]."""
    if s == 0:
        raise ValueError("s must be nonzero")
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    exponent = (m / 2.0) * (
        np.exp(1j * (yy - xx)) / s - s * np.exp(-1j * (xx + yy)) - s * np.exp(1j * (xx + yy))
    )
    return _out(np.exp(exponent))


def jtojstar_transform(m: float, s: float, n: int, x: float, quad_points: int = 512) -> complex:
    """((−1)ⁿ/Iₙ(ms)) (1/2π)∫₀^{2π} K(x, y; s) Jₙ(m e^{iy}) dy; reproduces Jₙ(m e^{-ix})."""
    if quad_points < 256:
        raise ValueError(f"quad_points must be >= 256, got {quad_points}")
    ys = 2 * np.pi * np.arange(quad_points) / quad_points
    integrand = np.asarray(simple_kernel_K(m, s, x, ys)) * np.asarray(bessel_j(n, m * np.exp(1j * ys)))
    return complex((-1) ** n / bessel_i(n, m * s) * integrand.mean())


def symmetric_kernel_S(m: float, x: ArrayLike, y: ArrayLike, z: ArrayLike) -> Any:
    """S(x, y, z) = K(−x, y; −i e^{iz}), symmetric under every permutation."""
    xx, yy, zz = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(z, dtype=float)
    )
    exponent = (1j * m / 2.0) * (
        np.exp(1j * (xx + yy - zz)) + np.exp(1j * (xx - yy + zz)) + np.exp(1j * (-xx + yy + zz))
    )
    return _out(np.exp(exponent))


def trilinear_transform(m: float, n: int, x: float, y: float, quad_points: int = 512) -> complex:
    """(1/2πiⁿ)∫₀^{2π} S(x, y, z) Jₙ(m e^{iz}) dz; reproduces Jₙ(m e^{ix}) Jₙ(m e^{iy})."""
    zs = 2 * np.pi * np.arange(quad_points) / quad_points
    integrand = np.asarray(symmetric_kernel_S(m, x, y, zs)) * np.asarray(bessel_j(n, m * np.exp(1j * zs)))
    return complex(integrand.mean() / 1j**n)


# -- Chiral kernels ----------------------------------------------------------


def chiral_S(z: complex, theta: complex, n_terms: int = 40) -> complex:
    """Σ_{0≤n≤N} Jₙ(z) e^{inθ}."""
    q = np.exp(1j * complex(theta))
    return complex(sum(bessel_j(n, z) * q**n for n in range(n_terms + 1)))


def chiral_S_contour(z: complex, theta: complex, radius: float = 2.0, points: int = 1024) -> complex:
    """(1/2πi)∮_{|t|=R} e^{z(t−1/t)/2}/(t − e^{iθ}) dt by the trapezoid rule."""
    q = np.exp(1j * complex(theta))
    if abs(q) >= radius or radius - abs(q) < POLE_MARGIN:
        raise RegionError(f"|e^(i theta)|={abs(q):.6g} must lie inside the contour radius {radius}")
    t = radius * np.exp(2j * np.pi * np.arange(points) / points)
    integrand = np.exp(0.5 * z * (t - 1.0 / t)) / (t - q) * t
    return complex(integrand.mean())


def free_chiral_kernel(dtheta: complex) -> complex:
    """e^{iΔ}(1+e^{iΔ})/(1−e^{iΔ})³ = Σ_{n≥1} n² e^{inΔ}; a function only for Im Δ > 0."""
    dtheta = complex(dtheta)
    if dtheta.imag <= 0:
        raise RegionError(f"free chiral kernel is a distribution at Im(dtheta) <= 0, got {dtheta}")
    q = np.exp(1j * dtheta)
    return complex(q * (1 + q) / (1 - q) ** 3)


def free_chiral_sum(dtheta: complex, n_terms: int = 60) -> complex:
    q = np.exp(1j * complex(dtheta))
    return complex(sum(n * n * q**n for n in range(1, n_terms + 1)))


def dual_chiral_residual(z: complex, theta: complex) -> complex:
    """(H − H_free)S⁻¹ in closed form, with q = e^{-iθ}:

    [2zq(1+q²) + 2z²(1−q²)] / (1−q²)².
    """
    q = np.exp(-1j * complex(theta))
    one_minus = 1 - q * q
    if abs(one_minus) < POLE_MARGIN:
        raise RegionError(f"theta={theta} sits on a pole of the dual chiral residual")
    return complex((2 * z * q * (1 + q * q) + 2 * z * z * one_minus) / one_minus**2)


def dual_chiral_residual_sum(z: complex, theta: complex, n_terms: int = 200) -> complex:
    """Term-wise 2z Σ_{odd n} n e^{-inθ} + 2z² Σ_{even n} e^{-inθ}; converges for Im θ < 0."""
    q = np.exp(-1j * complex(theta))
    if abs(q) >= 1:
        raise RegionError(f"term-wise sum diverges unless Im(theta) < 0, got {theta}")
    odd = sum(n * q**n for n in range(1, n_terms + 1, 2))
    even = sum(q**n for n in range(0, n_terms + 1, 2))
    return complex(2 * z * odd + 2 * z * z * even)


def _bessel_taylor(n: int, terms: int) -> LaurentPoly:
    """Taylor polynomial of Jₙ(z) through z^{n+2·terms}."""
    coeffs = np.zeros(2 * terms + 1, dtype=np.complex128)
    for k in range(terms + 1):
        coeffs[2 * k] = (-1) ** k / (math.factorial(k) * math.factorial(n + k) * 2.0 ** (n + 2 * k))
    return LaurentPoly(n, coeffs)


def _neumann_laurent(n: int) -> LaurentPoly:
    """Aₙ(z) as a Laurent polynomial in z."""
    if n == 0:
        return LaurentPoly.monomial(0)
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    for k in range(n // 2 + 1):
        coeffs[2 * k] = n * 2.0 ** (n - 2 * k) * math.factorial(n - k - 1) / math.factorial(k)
    return LaurentPoly(-n, coeffs)


def neumann_bessel_pairing(n_max: int) -> NDArray[np.complex128]:
    """P[a, b] = (1/2πi)∮ A_a(z) J_b(z) dz/z, contracted on coefficients."""
    duals = [_neumann_laurent(a) for a in range(n_max + 1)]
    bessels = [_bessel_taylor(b, n_max + 1) for b in range(n_max + 1)]
    return np.array([[pairing(a, b) for b in bessels] for a in duals], dtype=np.complex128)


def chiral_inverse_pairing(n: int, k: int, n_max: int) -> complex:
    """Entry (n, k) of the truncated S S⁻¹ contraction on {Jₙ}; the identity."""
    if not (0 <= n <= n_max and 0 <= k <= n_max):
        raise ValueError(f"indices must lie in [0, {n_max}], got ({n}, {k})")
    p = neumann_bessel_pairing(n_max)
    return complex((p @ p)[n, k])


# -- Cauchy kernels ----------------------------------------------------------


def cauchy_kernels(w: complex, z: complex, n_terms: int = 30) -> tuple[complex, complex]:
    """Partial sums Σ Jₙ(w)Aₙ(z) and Σ n² Jₙ(w)Aₙ(z), valid for |w| < |z|."""
    if not abs(w) < abs(z):
        raise RegionError(f"Neumann expansion needs |w| < |z|, got |w|={abs(w):.6g}, |z|={abs(z):.6g}")
    ident = 0j
    ham = 0j
    for n in range(n_terms + 1):
        term = bessel_j(n, w) * neumann_a(n, z)
        ident += term
        ham += n * n * term
    return complex(ident), complex(ham)


def cauchy_closed_forms(w: complex, z: complex) -> tuple[complex, complex]:
    """z/(z−w) and 2w²z/(z−w)³ + wz/(z−w)² + w²z/(z−w)."""
    d = z - w
    return z / d, 2 * w * w * z / d**3 + w * z / d**2 + w * w * z / d


def cauchy_kernel_nu(w: complex, z: complex, nu: float, n_terms: int = 30) -> tuple[complex, complex]:
    """(Σ A_{n,ν}(w) z^{-ν}J_{ν+n}(z), 1/(w−z)) for |z| < |w|."""
    _check_nu(nu)
    if not abs(z) < abs(w):
        raise RegionError(f"expansion needs |z| < |w|, got |z|={abs(z):.6g}, |w|={abs(w):.6g}")
    zz = np.asarray(z, dtype=np.complex128)
    total = sum(gegenbauer_a(n, nu, w) * complex(_psi_nu(n, nu, zz)) for n in range(n_terms + 1))
    return complex(total), 1.0 / (w - z)


# -- Determinant, Kapteyn, canonical transforms ------------------------------


def det_J(m: float, quad_points: int = 512) -> float:
    """exp ∫₀^{2π} ln I₀(2m sin x) dx."""
    if quad_points < 128:
        raise ValueError(f"quad_points must be >= 128, got {quad_points}")
    xs = 2 * np.pi * np.arange(quad_points) / quad_points
    values = np.asarray(bessel_i(0, 2 * m * np.sin(xs))).real
    return float(np.exp(2 * np.pi * np.mean(np.log(values))))


def kapteyn_borel(t: complex, z: complex, nodes: int = 128) -> complex:
    """(1+t²) z ∫₀^∞ e^{-u}/((1−t²)z − 2tu) du by Gauss–Laguerre, the Borel sum of Σ tⁿAₙ(z)."""
    t, z = complex(t), complex(z)
    if t == 0:
        return 1 + 0j
    if z == 0:
        raise RegionError("Kapteyn integral needs z != 0")
    if ((1 - t * t) * z / t).real >= 0:
        raise RegionError(f"Kapteyn integral needs Re((1-t^2)z/t) < 0, got t={t}, z={z}")
    u, weights = np.polynomial.laguerre.laggauss(nodes)
    integral = np.sum(weights / ((1 - t * t) * z - 2 * t * u))
    return complex((1 + t * t) * z * integral)


def kapteyn_partial(t: complex, z: complex, order: int) -> complex:
    """Σ_{n≤K} tⁿ Aₙ(z)."""
    return complex(sum(t**n * neumann_a(n, z) for n in range(order + 1)))


def canonical_transform_checks(n: int, m: float, quad_points: int = 512, theta: float = 0.9) -> tuple[float, float]:
    """Residuals of the plane-wave ↔ Bessel transforms.

    row1: max over an x-grid of |(1/2π)∫e^{i m e^{ix} sinθ} e^{-inθ} dθ − Jₙ(m e^{ix})|.
    row4: |(1/2πi)∮e^{iz sinθ}Aₙ(z) dz/z − (εₙ/2)(e^{inθ} + (−1)ⁿe^{-inθ})|.
    """
    if quad_points < 256:
        raise ValueError(f"quad_points must be >= 256, got {quad_points}")
    angles = 2 * np.pi * np.arange(quad_points) / quad_points
    xs = 2 * np.pi * np.arange(16) / 16
    row1 = 0.0
    for x in xs:
        zx = m * np.exp(1j * x)
        transform = np.mean(np.exp(1j * zx * np.sin(angles)) * np.exp(-1j * n * angles))
        row1 = max(row1, abs(transform - bessel_j(n, zx)))

    radius = m if m > 0 else 1.0
    zs = radius * np.exp(1j * angles)
    contour = np.mean(np.exp(1j * zs * math.sin(theta)) * np.asarray(neumann_a(n, zs)))
    expected = epsilon(n) / 2 * (np.exp(1j * n * theta) + (-1) ** n * np.exp(-1j * n * theta))
    return float(row1), float(abs(contour - expected))


# -- Double-quadrature norms and averages ------------------------------------


def _dual_samples(m: float, c: ArrayLike, xs: NDArray[np.float64]) -> NDArray[np.complex128]:
    """ψ_dual(x) = Σ cₙ* Aₙ(m e^{ix}) / √εₙ."""
    zs = m * np.exp(1j * xs)
    total = np.zeros(xs.shape, dtype=np.complex128)
    for n, cn in enumerate(np.asarray(c, dtype=np.complex128)):
        total = total + np.conj(cn) * np.asarray(neumann_a(n, zs)) / math.sqrt(epsilon(n))
    return total


def _bilinear(m: float, c: ArrayLike, quad_points: int, kernel: Any) -> complex:
    if m <= 0:
        raise ValueError(f"m must be > 0, got {m}")
    xs = 2 * np.pi * np.arange(quad_points) / quad_points
    d = _dual_samples(m, c, xs)
    matrix = np.asarray(kernel(m, xs[:, None], xs[None, :]))
    return complex(np.conj(d) @ matrix @ d / quad_points**2)


def norm_via_kernel(m: float, c: ArrayLike, quad_points: int = 256) -> float:
    """‖ψ‖² as ∬ ψ̄_dual(x) J(x,y) ψ_dual(y) for ψ = Σ cₙ √εₙ Jₙ(m e^{ix})."""
    return _bilinear(m, c, quad_points, norm_kernel_J).real


def h_average_via_kernel(m: float, c: ArrayLike, quad_points: int = 256) -> float:
    """⟨H⟩ as the H-kernel double integral over the J-kernel one."""
    return (_bilinear(m, c, quad_points, ham_kernel_H) / _bilinear(m, c, quad_points, norm_kernel_J)).real


def intertwining_residual(m: float, x: ArrayLike, y: ArrayLike, h: float = 1e-2) -> float:
    """max |(−∂ₓ² + m²e^{-2ix})J − (−∂_y² + m²e^{2iy})J| by fourth-order differences."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    xx, yy = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def second(shift_x: float, shift_y: float) -> NDArray[np.complex128]:
        def f(k: int) -> NDArray[np.complex128]:
            return np.asarray(norm_kernel_J(m, xx + k * shift_x, yy + k * shift_y))

        return (-f(2) + 16 * f(1) - 30 * f(0) + 16 * f(-1) - f(-2)) / (12 * h * h)

    centre = np.asarray(norm_kernel_J(m, xx, yy))
    left = -second(h, 0.0) + m * m * np.exp(-2j * xx) * centre
    right = -second(0.0, h) + m * m * np.exp(2j * yy) * centre
    return float(np.max(np.abs(left - right)))


# -- Grids -------------------------------------------------------------------


def kernel_grid(name: str, m: float, xs: ArrayLike, ys: ArrayLike, nu: float = 0.0, s: float = 1.0) -> KernelGrid:
    """Sample a named closed-form kernel on the xs × ys grid."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    gx, gy = x[:, None], y[None, :]
    if name == "J":
        values = norm_kernel_J(m, gx, gy)
    elif name == "H":
        values = ham_kernel_H(m, gx, gy)
    elif name == "J_nu":
        values = norm_kernel_J_nu(m, nu, gx, gy)
    elif name == "H_nu":
        values = ham_kernel_H_nu(m, nu, gx, gy)
    elif name == "K":
        values = simple_kernel_K(m, s, gx, gy)
    else:
        raise ValueError(f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}")
    params: dict[str, Any] = {"m": m}
    if name in ("J_nu", "H_nu"):
        params["nu"] = nu
    if name == "K":
        params["s"] = s
    logger.debug("sampled kernel %s on a %dx%d grid", name, x.size, y.size)
    return KernelGrid(name=name, x_samples=x, y_samples=y, values=np.asarray(values), params=params)
