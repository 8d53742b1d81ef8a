"""Core data model: Hamiltonian specs, Laurent polynomials in z = e^{ix} and kernel grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray


def complex_to_json(value: complex) -> list[float]:
    """Serialize a complex number as ``[re, im]``."""
    value = complex(value)
    return [value.real, value.imag]


def complex_from_json(value: Any) -> complex:
    if isinstance(value, (int, float, complex)):
        return complex(value)
    re, im = value
    return complex(float(re), float(im))


class Sector(str, Enum):
    """Invariant subspace an eigenfunction expansion grows from."""
    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True)
class HamiltonianSpec:
    """H = (p + ν)² + Σ_k μ_k e^{ikx}, with finitely many nonzero μ_k (k ≥ 1)."""
    nu: float = 0.0
    mu: dict[int, complex] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self) -> None:
        if not math.isfinite(self.nu):
            raise ValueError(f"nu must be finite, got {self.nu}")
        cleaned: dict[int, complex] = {}
        for k, value in self.mu.items():
            if int(k) != k or k < 1:
                raise ValueError(f"potential harmonics must be integers >= 1, got {k}")
            value = complex(value)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"mu[{k}] must be finite, got {value}")
            if value != 0:
                cleaned[int(k)] = value
        object.__setattr__(self, "mu", dict(sorted(cleaned.items())))

    @classmethod
    def single_exponential(cls, m: float, nu: float = 0.0) -> HamiltonianSpec:
        """p² + m²e^{2ix}, shifted by flux ν."""
        return cls(nu=nu, mu={2: m * m}, label=f"single_exp(m={m:g}, nu={nu:g})")

    @classmethod
    def darboux(cls, m: float) -> HamiltonianSpec:
        """The factorizable two-exponential case μ₁ = m, μ₂ = −m²."""
        return cls(nu=0.0, mu={1: m, 2: -m * m}, label=f"darboux(m={m:g})")

    @classmethod
    def two_exponential(cls, mu1: complex, mu2: complex, nu: float = 0.0) -> HamiltonianSpec:
        return cls(nu=nu, mu={1: mu1, 2: mu2}, label="two_exp")

    @property
    def max_harmonic(self) -> int:
        return max(self.mu, default=0)

    @property
    def is_free(self) -> bool:
        return not self.mu

    def coupling(self, k: int) -> complex:
        return self.mu.get(k, 0j)

    def energy(self, n: int, sector: Sector = Sector.RIGHT) -> float:
        """E_{±n} = (ν ± n)²."""
        shift = n if sector is Sector.RIGHT else -n
        return (self.nu + shift) ** 2

    def potential(self, x: ArrayLike) -> Any:
        """Σ μ_k e^{ikx} at (possibly complex) x."""
        xx = np.asarray(x, dtype=np.complex128)
        total = np.zeros(xx.shape, dtype=np.complex128)
        for k, value in self.mu.items():
            total = total + value * np.exp(1j * k * xx)
        return complex(total) if xx.ndim == 0 else total

    def to_dict(self) -> dict[str, Any]:
        return {
            "nu": self.nu,
            "mu": [[k, v.real, v.imag] for k, v in self.mu.items()],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> HamiltonianSpec:
        mu: dict[int, complex] = {}
        for entry in d.get("mu", []):
            k, re, im = entry
            mu[int(k)] = mu.get(int(k), 0j) + complex(re, im)
        return cls(nu=float(d.get("nu", 0.0)), mu=mu, label=d.get("label", ""))


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Σ_i coeffs[i]·z^{min_power+i}, trimmed of exact zeros at both ends.

    The zero polynomial has no coefficients and min_power 0.
    """
    min_power: int
    coeffs: NDArray[np.complex128]

    def __post_init__(self) -> None:
        arr = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128)).copy()
        nonzero = np.flatnonzero(arr)
        if nonzero.size == 0:
            object.__setattr__(self, "min_power", 0)
            arr = np.zeros(0, dtype=np.complex128)
        else:
            lo, hi = int(nonzero[0]), int(nonzero[-1])
            object.__setattr__(self, "min_power", int(self.min_power) + lo)
            arr = arr[lo:hi + 1]
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zero(cls) -> LaurentPoly:
        return cls(0, np.zeros(0, dtype=np.complex128))

    @classmethod
    def monomial(cls, power: int, value: complex = 1.0) -> LaurentPoly:
        return cls(power, np.array([value], dtype=np.complex128))

    @classmethod
    def from_samples(cls, samples: ArrayLike, min_power: int, max_power: int) -> LaurentPoly:
        """Fourier coefficients of a periodic function sampled on x_j = 2πj/P."""
        values = np.asarray(samples, dtype=np.complex128)
        count = values.size
        if max_power < min_power:
            raise ValueError(f"max_power must be >= min_power, got {max_power} < {min_power}")
        if count <= max_power - min_power:
            raise ValueError(
                f"need more than {max_power - min_power} samples to resolve the band, got {count}"
            )
        spectrum = np.fft.fft(values) / count
        powers = np.arange(min_power, max_power + 1)
        return cls(min_power, spectrum[powers % count])

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def max_power(self) -> int:
        return self.min_power + self.coeffs.size - 1

    @property
    def powers(self) -> NDArray[np.int64]:
        return np.arange(self.min_power, self.min_power + self.coeffs.size)

    def coefficient(self, power: int) -> complex:
        idx = power - self.min_power
        if 0 <= idx < self.coeffs.size:
            return complex(self.coeffs[idx])
        return 0j

    def window(self, lo: int, hi: int) -> NDArray[np.complex128]:
        """Dense coefficients for powers lo..hi inclusive."""
        out = np.zeros(hi - lo + 1, dtype=np.complex128)
        if self.is_zero:
            return out
        a, b = max(lo, self.min_power), min(hi, self.max_power)
        if a <= b:
            out[a - lo:b - lo + 1] = self.coeffs[a - self.min_power:b - self.min_power + 1]
        return out

    def restrict(self, lo: int | None = None, hi: int | None = None) -> LaurentPoly:
        """Drop the powers outside [lo, hi]."""
        if self.is_zero:
            return self
        lo = self.min_power if lo is None else max(lo, self.min_power)
        hi = self.max_power if hi is None else min(hi, self.max_power)
        if lo > hi:
            return LaurentPoly.zero()
        return LaurentPoly(lo, self.window(lo, hi))

    def shift(self, k: int) -> LaurentPoly:
        """Multiply by z^k."""
        if self.is_zero:
            return self
        return LaurentPoly(self.min_power + k, self.coeffs)

    def map_powers(self, weight: Any) -> LaurentPoly:
        """Multiply the coefficient of z^j by weight(j) (weight is vectorized over j)."""
        if self.is_zero:
            return self
        return LaurentPoly(self.min_power, self.coeffs * weight(self.powers.astype(float)))

    def momentum(self) -> LaurentPoly:
        """−i d/dx, i.e. z^j → j z^j."""
        return self.map_powers(lambda j: j)

    def bar(self) -> LaurentPoly:
        """The function x ↦ conj(f(x)) for real x: z^j c_j → z^{−j} c_j*."""
        if self.is_zero:
            return self
        return LaurentPoly(-self.max_power, np.conj(self.coeffs[::-1]))

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.min_power, other.min_power)
        hi = max(self.max_power, other.max_power)
        return LaurentPoly(lo, self.window(lo, hi) + other.window(lo, hi))

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(self.min_power, -self.coeffs)

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: LaurentPoly | complex | float) -> LaurentPoly:
        if isinstance(other, LaurentPoly):
            if self.is_zero or other.is_zero:
                return LaurentPoly.zero()
            return LaurentPoly(self.min_power + other.min_power, np.convolve(self.coeffs, other.coeffs))
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentPoly(self.min_power, self.coeffs * complex(other))
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.min_power == other.min_power and np.array_equal(self.coeffs, other.coeffs)

    def sup_norm(self) -> float:
        """max_j |c_j| over the stored coefficients."""
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def evaluate(self, z: ArrayLike) -> Any:
        zz = np.asarray(z, dtype=np.complex128)
        if self.is_zero:
            out = np.zeros(zz.shape, dtype=np.complex128)
        else:
            # Horner in z, then the z^{min_power} factor
            out = np.polyval(self.coeffs[::-1], zz) * zz ** self.min_power
        return complex(out) if zz.ndim == 0 else out

    def on_circle(self, x: ArrayLike) -> Any:
        """f(e^{ix})."""
        return self.evaluate(np.exp(1j * np.asarray(x, dtype=np.complex128)))

    def to_list(self) -> list[Any]:
        """Compact ``[min_power, [re, im], ...]`` form used inside system files."""
        return [self.min_power, *(complex_to_json(c) for c in self.coeffs)]

    @classmethod
    def from_list(cls, data: list[Any]) -> LaurentPoly:
        if not data:
            return cls.zero()
        min_power, *coeffs = data
        return cls(int(min_power), np.array([complex_from_json(c) for c in coeffs], dtype=np.complex128))

    def to_dict(self) -> dict[str, Any]:
        return {"min_power": self.min_power, "coeffs": [complex_to_json(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> LaurentPoly:
        return cls(
            int(d.get("min_power", 0)),
            np.array([complex_from_json(c) for c in d.get("coeffs", [])], dtype=np.complex128),
        )

    def __repr__(self) -> str:
        return f"LaurentPoly(min_power={self.min_power}, terms={self.coeffs.size})"


@dataclass(eq=False)
class KernelGrid:
    """Complex values of a bilocal kernel on an (x, y) grid; values[i, j] is at (x_i, y_j)."""
    name: str
    x_samples: NDArray[np.float64]
    y_samples: NDArray[np.float64]
    values: NDArray[np.complex128]
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x_samples = np.asarray(self.x_samples, dtype=float)
        self.y_samples = np.asarray(self.y_samples, dtype=float)
        self.values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.x_samples.size, self.y_samples.size)
        if self.values.shape != expected:
            raise ValueError(f"values must have shape {expected}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"kernel {self.name!r} produced non-finite values")

    @property
    def shape(self) -> tuple[int, int]:
        return self.x_samples.size, self.y_samples.size

    def max_abs_diff(self, other: KernelGrid | NDArray[np.complex128]) -> float:
        values = other.values if isinstance(other, KernelGrid) else np.asarray(other)
        return float(np.max(np.abs(self.values - values)))

    def rows(self) -> list[tuple[float, float, float, float]]:
        """(x, y, re, im) rows in x-major order."""
        return [
            (float(x), float(y), float(v.real), float(v.imag))
            for x, row in zip(self.x_samples, self.values)
            for y, v in zip(self.y_samples, row)
        ]

    def sidecar(self) -> dict[str, Any]:
        return {"kernel": self.name, "params": self.params, "grid_shape": list(self.shape)}

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.sidecar(),
            "x": self.x_samples.tolist(),
            "y": self.y_samples.tolist(),
            "values": [[complex_to_json(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> KernelGrid:
        return cls(
            name=d["kernel"],
            x_samples=np.asarray(d["x"], dtype=float),
            y_samples=np.asarray(d["y"], dtype=float),
            values=np.array([[complex_from_json(v) for v in row] for row in d["values"]], dtype=np.complex128),
            params=d.get("params", {}),
        )
