"""Complexified classical dynamics: RK4 flows, closed-form trajectories and canonical maps."""

from __future__ import annotations

import cmath
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .errors import RegionError, TrajectoryEscape
from .laurent import HamiltonianSpec, complex_from_json, complex_to_json

logger = logging.getLogger(__name__)

DEFAULT_OVERFLOW = 1e6
DEGENERATE_TOL = 1e-10


def _sign(branch: str) -> int:
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    return 1 if branch == "+" else -1


@dataclass(frozen=True)
class PhasePoint:
    """Complex position and momentum at time t."""
    x: complex
    p: complex
    t: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"t": self.t, "x": complex_to_json(self.x), "p": complex_to_json(self.p)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> PhasePoint:
        return cls(x=complex_from_json(d["x"]), p=complex_from_json(d["p"]), t=float(d.get("t", 0.0)))


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float = 1e-3
    steps: int = 1000
    method: str = "rk4"
    overflow: float = DEFAULT_OVERFLOW

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.method != "rk4":
            raise ValueError(f"method must be 'rk4', got {self.method!r}")
        if not self.overflow > 0:
            raise ValueError(f"overflow must be > 0, got {self.overflow}")
        if not math.isfinite(self.dt * self.steps):
            raise ValueError("dt * steps must be finite")


@dataclass(frozen=True)
class CircleGeometry:
    """Circle traced by the momentum; ``degenerate`` marks the |a| = 1 straight line."""
    center: complex
    radius: float
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": complex_to_json(self.center),
            "radius": self.radius if math.isfinite(self.radius) else "inf",
            "degenerate": self.degenerate,
        }


@dataclass
class Trajectory:
    """Ordered phase-space samples of one classical flow."""
    points: list[PhasePoint] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __iter__(self) -> Iterator[PhasePoint]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def times(self) -> NDArray[np.float64]:
        return np.array([pt.t for pt in self.points], dtype=float)

    @property
    def positions(self) -> NDArray[np.complex128]:
        return np.array([pt.x for pt in self.points], dtype=np.complex128)

    @property
    def momenta(self) -> NDArray[np.complex128]:
        return np.array([pt.p for pt in self.points], dtype=np.complex128)

    def energies(self, spec: HamiltonianSpec) -> NDArray[np.complex128]:
        return (self.momenta + spec.nu) ** 2 + np.asarray(spec.potential(self.positions))

    def circle_residual(self, geometry: CircleGeometry) -> float:
        """Largest distance of a momentum sample from the circle (or line)."""
        p = self.momenta
        if p.size == 0:
            return 0.0
        if geometry.degenerate:
            return float(np.max(np.abs(p.real - geometry.center.real)))
        return float(np.max(np.abs(np.abs(p - geometry.center) - geometry.radius)))

    def rows(self) -> list[tuple[float, float, float, float, float]]:
        """(t, re_x, im_x, re_p, im_p) rows."""
        return [(pt.t, pt.x.real, pt.x.imag, pt.p.real, pt.p.imag) for pt in self.points]

    def to_dict(self) -> dict[str, Any]:
        return {"metadata": self.metadata, "points": [pt.to_dict() for pt in self.points]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Trajectory:
        return cls(
            points=[PhasePoint.from_dict(pt) for pt in d.get("points", [])],
            metadata=d.get("metadata", {}),
        )


def hamiltonian_value(spec: HamiltonianSpec, pt: PhasePoint) -> complex:
    """(p+ν)² + Σ μ_k e^{ikx}, with no conjugation anywhere."""
    return (pt.p + spec.nu) ** 2 + spec.potential(pt.x)


def _flow(spec: HamiltonianSpec, y: NDArray[np.complex128]) -> NDArray[np.complex128]:
    x, p = y
    force = sum((-1j * k * mu_k * np.exp(1j * k * x) for k, mu_k in spec.mu.items()), 0j)
    return np.array([2.0 * (p + spec.nu), force], dtype=np.complex128)


def integrate(spec: HamiltonianSpec, start: PhasePoint, cfg: TrajectoryConfig) -> Trajectory:
    """RK4 for dx/dt = 2(p+ν), dp/dt = −Σ ikμ_k e^{ikx}.

    Raises TrajectoryEscape, carrying the samples so far, once |x| or |p|
    exceeds cfg.overflow.
    """
    y = np.array([start.x, start.p], dtype=np.complex128)
    h = cfg.dt
    traj = Trajectory(points=[start], metadata={"method": cfg.method, "dt": h, "spec": spec.to_dict()})
    for step in range(1, cfg.steps + 1):
        k1 = _flow(spec, y)
        k2 = _flow(spec, y + 0.5 * h * k1)
        k3 = _flow(spec, y + 0.5 * h * k2)
        k4 = _flow(spec, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > cfg.overflow:
            logger.warning("trajectory escaped at step %d (t=%.6g)", step, start.t + step * h)
            raise TrajectoryEscape(
                f"|x| or |p| exceeded {cfg.overflow:g} at t={start.t + step * h:.6g}", traj
            )
        traj.points.append(PhasePoint(x=complex(y[0]), p=complex(y[1]), t=start.t + step * h))
    logger.debug("integrated %d RK4 steps of size %g", cfg.steps, h)
    return traj


def _arctanh_seed(m: float, E: complex, x0: complex) -> complex:
    """w0 = √(1 − (m²/E) e^{2ix0}) on the principal branch."""
    if E == 0:
        raise ValueError("E must be nonzero; use e_zero_trajectory for E = 0")
    if m == 0:
        raise ValueError("m must be nonzero")
    w0 = cmath.sqrt(1 - (m * m / E) * cmath.exp(2j * x0))
    if abs(w0.imag) < 1e-12 and abs(w0.real) > 1:
        logger.warning("arctanh argument %.6g lies on its branch cut", w0.real)
    return w0


def closed_form_path(m: float, E: complex, x0: complex, branch: str, times: NDArray[np.float64]) -> Trajectory:
    """Closed-form single-exponential trajectory sampled at ``times`` (starting at 0).

    u = ∓2i√E t + arctanh(w0), p = ±√E tanh u and
    e^{2ix} = (E/m²) sech² u, with the logarithm unwrapped along the samples.
    """
    s = _sign(branch)
    ts = np.asarray(times, dtype=float)
    if ts.size == 0 or ts[0] != 0:
        raise ValueError("times must start at 0")
    w0 = _arctanh_seed(m, E, x0)
    root = cmath.sqrt(E)
    u = -s * 2j * root * ts + np.arctanh(w0)
    p = s * root * np.tanh(u)
    ratio = (E / (m * m)) / np.cosh(u) ** 2
    phase = np.unwrap(np.angle(ratio))
    jumps = np.abs(np.diff(np.angle(ratio)))
    if np.any(jumps > np.pi):
        logger.debug("log branch crossed %d time(s) along the path", int(np.sum(jumps > np.pi)))
    x = phase / 2.0 - 0.5j * np.log(np.abs(ratio))
    x = x - x[0] + x0
    points = [PhasePoint(x=complex(xi), p=complex(pi), t=float(ti)) for xi, pi, ti in zip(x, p, ts)]
    return Trajectory(points=points, metadata={"method": "closed_form", "branch": branch, "m": m})


def closed_form_single_exp(m: float, E: complex, x0: complex, branch: str, t: float, samples: int = 512) -> PhasePoint:
    """Phase point at time t on the closed-form branch, with x carried continuously from x0."""
    count = max(samples, int(64 * abs(t) * (1 + abs(cmath.sqrt(E)))) + 2)
    path = closed_form_path(m, E, x0, branch, np.linspace(0.0, t, count))
    return path.points[-1]


def closed_form_momentum(m: float, E: complex, x0: complex, branch: str, t: float) -> complex:
    """p = ±√E (a − e^{±4i√E t})/(a + e^{±4i√E t})."""
    s = _sign(branch)
    a = momentum_amplitude(m, E, x0)
    rotor = cmath.exp(s * 4j * cmath.sqrt(E) * t)
    return s * cmath.sqrt(E) * (a - rotor) / (a + rotor)


def momentum_amplitude(m: float, E: complex, x0: complex) -> complex:
    """a = (E/m²)(1 + √(1 − (m²/E)e^{2ix0}))² e^{−2ix0}."""
    w0 = _arctanh_seed(m, E, x0)
    return (E / (m * m)) * (1 + w0) ** 2 * cmath.exp(-2j * x0)


def circle_geometry(a: complex, E: float, branch: str = "+") -> CircleGeometry:
    """Center ±√E(|a|²+1)/(|a|²−1) and radius 2|a|√E/||a|²−1| of the momentum circle."""
    s = _sign(branch)
    if not E > 0:
        raise ValueError(f"E must be > 0, got {E}")
    root = math.sqrt(E)
    mod2 = abs(a) ** 2
    if abs(abs(a) - 1) < DEGENERATE_TOL:
        return CircleGeometry(center=0j, radius=math.inf, degenerate=True)
    center = s * root * (mod2 + 1) / (mod2 - 1)
    radius = 2 * abs(a) * root / abs(mod2 - 1)
    return CircleGeometry(center=complex(center), radius=radius)


def fit_circle(values: NDArray[np.complex128]) -> CircleGeometry:
    """Algebraic least-squares circle through complex samples."""
    pts = np.asarray(values, dtype=np.complex128)
    if pts.size < 3:
        raise ValueError(f"need at least 3 samples to fit a circle, got {pts.size}")
    u, v = pts.real, pts.imag
    design = np.column_stack([u, v, np.ones_like(u)])
    (d, e, f), *_ = np.linalg.lstsq(design, -(u * u + v * v), rcond=None)
    center = complex(-d / 2, -e / 2)
    radius_sq = abs(center) ** 2 - f
    if radius_sq <= 0:
        return CircleGeometry(center=center, radius=0.0)
    return CircleGeometry(center=center, radius=math.sqrt(radius_sq))


def e_zero_trajectory(m: float, x0: complex, sign: str, t: float, samples: int = 256) -> PhasePoint:
    """x(t) = i ln(e^{−ix0} ± 2mt), p = ±i m e^{ix}, carried continuously from x0."""
    s = _sign(sign)
    ts = np.linspace(0.0, t, max(samples, 2))
    arg = cmath.exp(-1j * x0) + s * 2 * m * ts
    if np.any(np.abs(arg) < 1e-300):
        raise RegionError(f"E=0 trajectory hits its logarithmic singularity before t={t}")
    x = 1j * (np.log(np.abs(arg)) + 1j * np.unwrap(np.angle(arg)))
    x = x - x[0] + x0
    xt = complex(x[-1])
    return PhasePoint(x=xt, p=s * 1j * m * cmath.exp(1j * xt), t=float(t))


def canonical_map(m: float, x: complex, p: complex) -> tuple[complex, complex]:
    """(θ, p_θ) with θ = arcsin(−i e^{−ix} p/m), p_θ = −m e^{ix} cos θ; p_θ² = p² + m²e^{2ix}."""
    if m == 0:
        raise ValueError("m must be nonzero")
    theta = complex(np.arcsin(complex(-1j * cmath.exp(-1j * x) * p / m)))
    p_theta = -m * cmath.exp(1j * x) * cmath.cos(theta)
    return theta, p_theta


def canonical_map_inverse(m: float, theta: complex, p_theta: complex) -> tuple[complex, complex]:
    """x = −i Log(p_θ/(−m cos θ)), p = −i p_θ tan θ."""
    cos_t = cmath.cos(theta)
    if abs(cos_t) < 1e-14:
        raise RegionError(f"canonical map is singular at cos(theta)=0, theta={theta}")
    if p_theta == 0:
        raise RegionError("p_theta = 0 has no position preimage")
    x = -1j * cmath.log(p_theta / (-m * cos_t))
    p = -1j * p_theta * cmath.tan(theta)
    return x, p


def free_particle_image(m: float, pt: PhasePoint, t: float) -> PhasePoint:
    """Map to (θ, p_θ), evolve freely θ += 2p_θ t, and map back."""
    theta, p_theta = canonical_map(m, pt.x, pt.p)
    x, p = canonical_map_inverse(m, theta + 2 * p_theta * t, p_theta)
    return PhasePoint(x=x, p=p, t=pt.t + t)
