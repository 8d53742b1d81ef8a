"""Ascending-series special functions used by the closed forms.

Bessel J and I of real order with complex argument, Neumann and Gegenbauer
polynomials, Kummer's M and a real Gamma function. Every evaluator accepts
a scalar or a numpy array for the complex argument; scalar in, ``complex``
out.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConvergenceError, ExcludedOrderError, ZeroArgumentError

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]

# Lanczos approximation, g=7, n=9 (about 15 significant digits on x >= 0.5).
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class SeriesControl:
    """Tail control for ascending series.

    Attributes
    ----------
    rel_tol : a term counts as negligible once its magnitude is at most
              rel_tol times the partial-sum magnitude
    max_terms : hard budget; exceeding it raises ConvergenceError
    """
    rel_tol: float = 1e-14
    max_terms: int = 200

    def __post_init__(self) -> None:
        if self.rel_tol <= 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


class ExpansionKind(str, Enum):
    """Expansions of powers of z in Bessel functions or Neumann polynomials."""
    UNITY = "unity"
    POS_POWER = "pos_power"
    NEG_EVEN_POWER = "neg_even_power"
    NEG_ODD_POWER = "neg_odd_power"
    NONINTEGER_POWER = "noninteger_power"


def _as_complex(z: ArrayLike) -> tuple[ComplexArray, bool]:
    arr = np.asarray(z, dtype=np.complex128)
    return arr, arr.ndim == 0


def _out(values: ComplexArray, scalar: bool) -> Any:
    if scalar:
        return complex(values)
    return values


def _negative_integer(order: float) -> int | None:
    """Return n when order == -n for a positive integer n, else None."""
    if order < 0 and float(order).is_integer():
        return int(-order)
    return None


def _is_nonpositive_integer(x: complex | float) -> bool:
    x = complex(x)
    return x.imag == 0 and x.real <= 0 and float(x.real).is_integer()


def gamma_real(x: float) -> float:
    """Γ(x) for real x via Lanczos, with reflection below 1/2."""
    x = float(x)
    if x <= 0 and x.is_integer():
        raise ExcludedOrderError(f"Gamma has a pole at x={x:g}")
    if x.is_integer() and x <= 171:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_real(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * math.exp((x + 0.5) * math.log(t) - t) * acc


def _ascending(
    first: ComplexArray,
    ratio: Callable[[int], ComplexArray | complex],
    ctl: SeriesControl,
    what: str,
    weight: Callable[[int], float] | None = None,
) -> ComplexArray:
    """Sum Σ w(k)·t_k where t_0 = first and t_k = t_{k-1}·ratio(k).

    Stops once two consecutive weighted terms are below rel_tol times the
    partial sum (or below rounding level of the largest term seen).
    """
    term = np.array(first, dtype=np.complex128)
    w0 = 1.0 if weight is None else weight(0)
    total = w0 * term
    peak = np.abs(total)
    prev_small = np.zeros(term.shape, dtype=bool)
    for k in range(1, ctl.max_terms):
        term = term * ratio(k)
        contrib = term if weight is None else weight(k) * term
        total = total + contrib
        mag = np.abs(contrib)
        peak = np.maximum(peak, mag)
        floor = np.maximum(np.abs(total), 1e-2 * ctl.rel_tol * peak)
        small = mag <= ctl.rel_tol * floor
        if np.all(small & prev_small):
            return total
        prev_small = small
    raise ConvergenceError(
        f"{what}: series did not converge within {ctl.max_terms} terms "
        f"(argument too large for the configured budget)"
    )


def _bessel_reduced(order: float, zz: ComplexArray, sign: float, ctl: SeriesControl) -> ComplexArray:
    """Σ (sign·z²/4)^k / (k! Γ(ν+k+1)); entire in z."""
    quarter = sign * zz * zz / 4.0
    first = np.full(zz.shape, 1.0 / gamma_real(order + 1.0), dtype=np.complex128)
    return _ascending(
        first,
        lambda k: quarter / (k * (order + k)),
        ctl,
        what=f"Bessel series of order {order:g}",
    )


def _half_power(zz: ComplexArray, order: float) -> ComplexArray:
    """(z/2)^order on the principal branch, with integer orders exact."""
    half = zz / 2.0
    if float(order).is_integer():
        return half ** int(order)
    if order < 0 and np.any(half == 0):
        raise ZeroArgumentError(f"(z/2)^{order:g} is singular at z=0")
    with np.errstate(invalid="ignore", divide="ignore"):
        powered = np.power(half, order)
    return np.where(half == 0, 0.0 + 0.0j, powered)


def _bessel(order: float, z: ArrayLike, ctl: SeriesControl, sign: float) -> Any:
    zz, scalar = _as_complex(z)
    n = _negative_integer(order)
    if n is not None:
        positive = _bessel(float(n), zz, ctl, sign)
        # J_{-n} = (-1)^n J_n, I_{-n} = I_n
        factor = (-1.0) ** n if sign < 0 else 1.0
        return _out(factor * positive, scalar)
    values = _half_power(zz, order) * _bessel_reduced(order, zz, sign, ctl)
    return _out(values, scalar)


def bessel_j(order: float, z: ArrayLike, ctl: SeriesControl = DEFAULT_CONTROL) -> Any:
    """J_ν(z) by its ascending series; negative integer orders via reflection."""
    return _bessel(order, z, ctl, sign=-1.0)


def bessel_i(order: float, z: ArrayLike, ctl: SeriesControl = DEFAULT_CONTROL) -> Any:
    """I_ν(z) by its ascending series; I_{-n} = I_n for integer n."""
    return _bessel(order, z, ctl, sign=1.0)


def bessel_j_reduced(order: float, z: ArrayLike, ctl: SeriesControl = DEFAULT_CONTROL) -> Any:
    """(z/2)^{-ν} J_ν(z), the branch-free entire part of J_ν."""
    if _negative_integer(order) is not None:
        raise ExcludedOrderError(f"reduced Bessel series needs order not in Z<0, got {order:g}")
    zz, scalar = _as_complex(z)
    return _out(_bessel_reduced(order, zz, -1.0, ctl), scalar)


def bessel_i_reduced(order: float, z: ArrayLike, ctl: SeriesControl = DEFAULT_CONTROL) -> Any:
    """(z/2)^{-ν} I_ν(z)."""
    if _negative_integer(order) is not None:
        raise ExcludedOrderError(f"reduced Bessel series needs order not in Z<0, got {order:g}")
    zz, scalar = _as_complex(z)
    return _out(_bessel_reduced(order, zz, 1.0, ctl), scalar)


def bessel_j_prime(order: float, z: ArrayLike, ctl: SeriesControl = DEFAULT_CONTROL) -> Any:
    """dJ_ν/dz by term-wise differentiation of the ascending series."""
    zz, scalar = _as_complex(z)
    n = _negative_integer(order)
    if n is not None:
        return _out((-1.0) ** n * bessel_j_prime(float(n), zz, ctl), scalar)
    if order == 0:
        # the differentiated J_0 series is term by term the series of -J_1
        return _out(-np.asarray(bessel_j(1.0, zz, ctl)), scalar)
    if order < 1 and not float(order).is_integer() and np.any(zz == 0):
        raise ZeroArgumentError(f"J'_{order:g} is singular at z=0")
    quarter = -zz * zz / 4.0
    first = np.full(zz.shape, 1.0 / gamma_real(order + 1.0), dtype=np.complex128)
    reduced = _ascending(
        first,
        lambda k: quarter / (k * (order + k)),
        ctl,
        what=f"Bessel derivative series of order {order:g}",
        weight=lambda k: order + 2.0 * k,
    )
    return _out(0.5 * _half_power(zz, order - 1.0) * reduced, scalar)


def neumann_a(n: int, z: ArrayLike) -> Any:
    """Neumann polynomial A_n(z); A_{-n} = (-1)^n A_n."""
    zz, scalar = _as_complex(z)
    if n < 0:
        return _out((-1.0) ** (-n) * np.asarray(neumann_a(-n, zz)), scalar)
    if n == 0:
        return _out(np.ones(zz.shape, dtype=np.complex128), scalar)
    if np.any(zz == 0):
        raise ZeroArgumentError(f"A_{n}(z) is singular at z=0")
    total = np.zeros(zz.shape, dtype=np.complex128)
    sq = (zz / 2.0) ** 2
    for k in range(n // 2 + 1):
        total += math.factorial(n - k - 1) / math.factorial(k) * sq**k
    return _out(n * (2.0 / zz) ** n * total, scalar)


def gegenbauer_a(n: int, nu: float, w: ArrayLike) -> Any:
    """Gegenbauer's polynomial A_{n,ν}(w), dual to w^{-ν}J_{ν+n}(w)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if _negative_integer(nu) is not None:
        raise ExcludedOrderError(f"nu must not be a negative integer, got {nu:g}")
    ww, scalar = _as_complex(w)
    if np.any(ww == 0):
        raise ZeroArgumentError(f"A_{{{n},{nu:g}}}(w) is singular at w=0")
    # (ν+n)Γ(ν+n-k) = Γ(ν+n+1) / ((ν+n-1)···(ν+n-k))
    coeff = gamma_real(nu + n + 1.0)
    sq = (ww / 2.0) ** 2
    total = np.full(ww.shape, coeff, dtype=np.complex128)
    for k in range(1, n // 2 + 1):
        coeff = coeff / ((nu + n - k) * k)
        total += coeff * sq**k
    return _out(2.0 ** (nu + n) / ww ** (n + 1) * total, scalar)


def gegenbauer_c(n: int, nu: float, z: ArrayLike) -> Any:
    """Gegenbauer polynomial C_n^ν(z) from its three-term recurrence."""
    zz, scalar = _as_complex(z)
    prev = np.ones(zz.shape, dtype=np.complex128)
    if n == 0:
        return _out(prev, scalar)
    cur = 2.0 * nu * zz
    for k in range(2, n + 1):
        prev, cur = cur, (2.0 * zz * (k + nu - 1.0) * cur - (k + 2.0 * nu - 2.0) * prev) / k
    return _out(cur, scalar)


def gegenbauer_contour_transform(n: int, nu: float, z: complex, points: int = 256) -> complex:
    """(1/2πi)∮ e^{izw} A_{n,ν}(w) dw on |w|=1 by the trapezoid rule."""
    if points < 8:
        raise ValueError(f"points must be >= 8, got {points}")
    w = np.exp(2j * np.pi * np.arange(points) / points)
    integrand = np.exp(1j * z * w) * np.asarray(gegenbauer_a(n, nu, w)) * w
    return complex(integrand.mean())


def kummer_m(a: complex, b: float, z: ArrayLike, ctl: SeriesControl = DEFAULT_CONTROL) -> Any:
    """Kummer's confluent hypergeometric M(a, b, z)."""
    if _is_nonpositive_integer(b):
        raise ExcludedOrderError(f"M(a, b, z) has a pole at b={b}")
    zz, scalar = _as_complex(z)
    first = np.ones(zz.shape, dtype=np.complex128)
    values = _ascending(
        first,
        lambda k: (a + k - 1) / ((b + k - 1) * k) * zz,
        ctl,
        what=f"Kummer series M({a}, {b}, z)",
    )
    return _out(values, scalar)


def power_expansions(
    kind: ExpansionKind | str,
    z: ArrayLike,
    terms: int = 20,
    param: float | None = None,
) -> Any:
    """Partial sums expressing powers of z through J_n or A_n.

    Parameters
    ----------
    kind : which expansion; ``param`` is k for pos_power, j for the two
           negative-power forms and μ for noninteger_power
    terms : number of Bessel terms kept (ignored by the exact finite
            negative-power sums)
    """
    kind = ExpansionKind(kind)
    zz, scalar = _as_complex(z)
    if terms < 1:
        raise ValueError(f"terms must be >= 1, got {terms}")

    if kind is ExpansionKind.UNITY:
        total = np.asarray(bessel_j(0, zz), dtype=np.complex128)
        for n in range(1, terms + 1):
            total = total + 2.0 * np.asarray(bessel_j(2 * n, zz))
        return _out(total, scalar)

    if param is None:
        raise ValueError(f"{kind.value} needs a parameter")

    if kind is ExpansionKind.POS_POWER:
        k = int(param)
        if k != param or k < 1:
            raise ValueError(f"pos_power needs an integer k >= 1, got {param}")
        total = np.zeros(zz.shape, dtype=np.complex128)
        for n in range(terms):
            weight = (k + 2 * n) * math.factorial(k + n - 1) / math.factorial(n)
            total = total + weight * np.asarray(bessel_j(k + 2 * n, zz))
        return _out(2.0**k * total, scalar)

    if kind is ExpansionKind.NONINTEGER_POWER:
        mu = float(param)
        if _negative_integer(mu) is not None:
            raise ExcludedOrderError(f"mu must not be a negative integer, got {mu:g}")
        total = 2.0**mu * gamma_real(mu + 1.0) * np.asarray(bessel_j(mu, zz), dtype=np.complex128)
        for n in range(1, terms):
            weight = (mu + 2 * n) * 2.0**mu * gamma_real(mu + n) / math.factorial(n)
            total = total + weight * np.asarray(bessel_j(mu + 2 * n, zz))
        return _out(total, scalar)

    j = int(param)
    if j != param or j < 0 or (kind is ExpansionKind.NEG_ODD_POWER and j < 1):
        raise ValueError(f"{kind.value} needs a non-negative integer j, got {param}")
    if np.any(zz == 0):
        raise ZeroArgumentError("negative powers are singular at z=0")
    total = np.zeros(zz.shape, dtype=np.complex128)
    if kind is ExpansionKind.NEG_EVEN_POWER:
        for k in range(j + 1):
            weight = (-1.0) ** (j - k) / (math.factorial(j - k) * math.factorial(j + k))
            total = total + weight * np.asarray(neumann_a(2 * k, zz))
        return _out(total / 2.0 ** (2 * j), scalar)
    for k in range(1, j + 1):
        weight = (-1.0) ** (j - k) / (math.factorial(j - k) * math.factorial(j - 1 + k))
        total = total + weight * np.asarray(neumann_a(2 * k - 1, zz))
    return _out(total / 2.0 ** (2 * j - 1), scalar)
