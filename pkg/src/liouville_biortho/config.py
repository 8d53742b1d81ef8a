"""Run configuration: one JSON document, validated before any computation."""

from __future__ import annotations

import cmath
import json
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .kernels import KERNEL_NAMES
from .laurent import HamiltonianSpec, Sector


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    nu: float = Field(0.0, description="Flux ν")
    mu: list[tuple[int, float, float]] = Field(default_factory=list, description="[k, re, im] entries")
    label: str = ""
    sector: Literal["right", "left"] = "right"

    @field_validator("mu")
    @classmethod
    def _harmonics_positive(cls, v: list[tuple[int, float, float]]) -> list[tuple[int, float, float]]:
        for k, _, _ in v:
            if k < 1:
                raise ValueError(f"harmonic k must be >= 1, got {k}")
        return v


class Tolerances(_Section):
    biorth: float = Field(1e-10, gt=0)
    eigen: float = Field(1e-10, gt=0)
    closed_form: float = Field(1e-10, gt=0)
    kernel: float = Field(1e-9, gt=0)
    ehrenfest: float = Field(1e-6, gt=0)

    def override(self, tol: float) -> Tolerances:
        return Tolerances(biorth=tol, eigen=tol, closed_form=tol, kernel=tol, ehrenfest=tol)


class GridSection(_Section):
    nx: int = Field(16, ge=1)
    ny: int = Field(16, ge=1)


class KernelSection(_Section):
    name: str = "J"
    m: float = 1.0
    nu: float = 0.0
    s: float = 1.0

    @field_validator("name")
    @classmethod
    def _known_kernel(cls, v: str) -> str:
        if v not in KERNEL_NAMES:
            raise ValueError(f"kernel must be one of {', '.join(KERNEL_NAMES)}, got {v!r}")
        return v


class TrajectorySection(_Section):
    m: float = Field(1.0, gt=0)
    energy: Optional[float] = None
    p0: Optional[tuple[float, float]] = None
    x0: float = 1.0
    dt: float = Field(1e-3, gt=0)
    steps: int = Field(2000, ge=1)
    branch: Literal["+", "-"] = "+"
    overflow: float = Field(1e6, gt=0)

    @model_validator(mode="after")
    def _one_initial_condition(self) -> TrajectorySection:
        if (self.energy is None) == (self.p0 is None):
            raise ValueError("give exactly one of 'energy' or 'p0'")
        return self

    def initial_momentum(self, spec: HamiltonianSpec | None = None) -> complex:
        """p0 = ±√(E − V(x0)) − ν when the energy is given; V defaults to m²e^{2ix}."""
        if self.p0 is not None:
            return complex(*self.p0)
        if spec is None:
            spec = HamiltonianSpec.single_exponential(self.m)
        sign = 1 if self.branch == "+" else -1
        return sign * cmath.sqrt(self.energy - spec.potential(self.x0)) - spec.nu


class EvolveSection(_Section):
    coefficients: list[tuple[float, float]] = Field(default_factory=lambda: [(math.sqrt(0.5), 0.0), (0.0, 0.0), (math.sqrt(0.5), 0.0)])
    t_start: float = 0.0
    t_stop: float = 1.0
    samples: int = Field(50, ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> EvolveSection:
        if not self.t_stop > self.t_start:
            raise ValueError(f"t_stop must be > t_start, got {self.t_stop} <= {self.t_start}")
        if not self.coefficients:
            raise ValueError("coefficients must be nonempty")
        return self


class QftSection(_Section):
    mu: tuple[float, float] = (-1.0, 0.0)
    beta: float = 3.0
    xi: float = 0.0
    m: float = Field(1.0, gt=0)
    M_max: float = Field(1e3, gt=0)
    samples: int = Field(400, ge=2)
    couplings: Optional[list[tuple[int, float, float]]] = None


class OutputSection(_Section):
    path: Optional[str] = None


class RunConfig(_Section):
    """Schema of the JSON document every subcommand reads via --config."""
    model: ModelSection = Field(default_factory=ModelSection)
    n_max: int = Field(12, ge=0)
    trunc: int = Field(60, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    grid: GridSection = Field(default_factory=GridSection)
    kernel: KernelSection = Field(default_factory=KernelSection)
    trajectory: Optional[TrajectorySection] = None
    evolve: EvolveSection = Field(default_factory=EvolveSection)
    qft: QftSection = Field(default_factory=QftSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"invalid config {path}:\n{exc}") from exc

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec.from_dict(self.model.model_dump())

    @property
    def sector(self) -> Sector:
        return Sector(self.model.sector)

    def with_overrides(self, tol: float | None = None, out: str | None = None) -> RunConfig:
        update: dict[str, object] = {}
        if tol is not None:
            if not tol > 0:
                raise ConfigError(f"--tol must be > 0, got {tol}")
            update["tolerances"] = self.tolerances.override(tol)
        if out is not None:
            update["output"] = OutputSection(path=out)
        return self.model_copy(update=update)
