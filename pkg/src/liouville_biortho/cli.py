"""CLI interface for liouville-biortho."""

from __future__ import annotations

import functools
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click
import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .biortho import (
    BiorthogonalSystem,
    build_system,
    ehrenfest_residual,
    expectation_e2ix,
    p_expectation,
)
from .classical import PhasePoint, TrajectoryConfig, fit_circle, integrate
from .config import RunConfig
from .errors import BiorthoError, ConfigError, TrajectoryEscape
from .exporters import (
    atomic_write_text,
    dumps_json,
    export_evolution_csv,
    export_kernel_csv,
    export_trajectory_csv,
)
from .kernels import kernel_grid
from .laurent import HamiltonianSpec
from .qft import instability_scan, multi_exponential_scan
from .verify import verify_system
from .viewer import ReportViewer

console = Console(stderr=True)
logger = logging.getLogger("liouville_biortho")

F = TypeVar("F", bound=Callable[..., Any])


def _setup_logging(quiet: bool) -> None:
    handler = RichHandler(console=console, show_path=False, rich_tracebacks=False)
    logging.basicConfig(
        level=logging.WARNING if quiet else logging.INFO,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )


def _fail(message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


def run_options(f: F) -> F:
    """--config/--out/--tol/--quiet, shared by every subcommand."""
    f = click.option("--quiet", "-q", is_flag=True, help="Only warnings and machine output.")(f)
    f = click.option("--tol", type=float, default=None, help="Override every tolerance.")(f)
    f = click.option("--out", "-o", type=click.Path(path_type=Path), default=None, help="Output file path.")(f)
    f = click.option(
        "--config", "-c", "config_path", type=click.Path(path_type=Path), default=None,
        help="JSON run configuration.",
    )(f)
    return f


def handle_errors(f: F) -> F:
    """Map failures to exit codes: 2 for input errors, 1 for computation errors."""

    @functools.wraps(f)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return f(*args, **kwargs)
        except ConfigError as exc:
            _fail(str(exc), 2)
        except BiorthoError as exc:
            _fail(f"{type(exc).__name__}: {exc}", 1)
        except (ValidationError, ValueError) as exc:
            _fail(str(exc), 2)

    return wrapper  # type: ignore[return-value]


def _load(config_path: Path | None, tol: float | None, out: Path | None, quiet: bool) -> RunConfig:
    _setup_logging(quiet)
    cfg = RunConfig.load(config_path) if config_path is not None else RunConfig()
    return cfg.with_overrides(tol=tol, out=str(out) if out is not None else None)


def _output(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.output.path or default)


def _build(cfg: RunConfig) -> BiorthogonalSystem:
    return build_system(cfg.hamiltonian(), cfg.n_max, cfg.trunc, sector=cfg.sector)


@click.group()
@click.version_option(version=__version__, prog_name="liouville-biortho")
def cli() -> None:
    """Biorthogonal eigen-systems, kernels and complexified dynamics for H = (p+nu)^2 + sum mu_k e^{ikx}."""


@cli.command()
@run_options
@handle_errors
def build(config_path: Path | None, out: Path | None, tol: float | None, quiet: bool) -> None:
    """Build the system described by the config and save it as JSON."""
    cfg = _load(config_path, tol, out, quiet)
    system = _build(cfg)
    path = system.save(_output(cfg, "system.json"))
    if not quiet:
        ReportViewer(console).show_system(system)
    logger.info("system written to %s", path)


@cli.command()
@run_options
@click.option(
    "--system", "system_path", type=click.Path(exists=True, path_type=Path), default=None,
    help="Verify a saved system instead of building one.",
)
@handle_errors
def verify(
    config_path: Path | None, out: Path | None, tol: float | None, quiet: bool, system_path: Path | None
) -> None:
    """Run the verification suite; exit 1 naming the first failing check."""
    cfg = _load(config_path, tol, out, quiet)
    system = BiorthogonalSystem.load(system_path) if system_path is not None else _build(cfg)
    result = verify_system(system, cfg.tolerances, cfg.grid.nx, cfg.grid.ny)
    payload = dumps_json(result.to_dict())
    if cfg.output.path:
        atomic_write_text(cfg.output.path, payload)
    if not quiet:
        viewer = ReportViewer(console)
        viewer.show_verification(result)
        if result.report is not None:
            viewer.show_report(result.report)
    # click.echo, not console.print: rich soft-wraps long lines inside JSON.
    click.echo(payload)
    failed = result.first_failure
    if failed is not None:
        _fail(f"verification failed: {failed.name} = {failed.value:.3e} exceeds {failed.tolerance:.1e}", 1)


@cli.command()
@run_options
@handle_errors
def kernel(config_path: Path | None, out: Path | None, tol: float | None, quiet: bool) -> None:
    """Sample a closed-form kernel on the config grid and write x,y,re,im CSV."""
    cfg = _load(config_path, tol, out, quiet)
    k = cfg.kernel
    xs = 2 * np.pi * np.arange(cfg.grid.nx) / cfg.grid.nx
    ys = 2 * np.pi * np.arange(cfg.grid.ny) / cfg.grid.ny
    grid = kernel_grid(k.name, k.m, xs, ys, nu=k.nu, s=k.s)
    path = export_kernel_csv(grid, _output(cfg, "kernel.csv"))
    if not quiet:
        ReportViewer(console).show_kernel(grid, str(path))


@cli.command()
@run_options
@handle_errors
def trajectory(config_path: Path | None, out: Path | None, tol: float | None, quiet: bool) -> None:
    """Integrate the complexified flow and write t,re_x,im_x,re_p,im_p CSV.

    The model section is used when it has harmonics, otherwise mu={2: m²} from the trajectory section.
    """
    cfg = _load(config_path, tol, out, quiet)
    section = cfg.trajectory
    if section is None:
        raise ConfigError("config has no 'trajectory' section")
    spec = cfg.hamiltonian() if cfg.model.mu else HamiltonianSpec.single_exponential(section.m)
    start = PhasePoint(x=complex(section.x0), p=section.initial_momentum(spec))
    logger.info("integrating %s from x0=%g", spec.label or spec.to_dict(), section.x0)
    run = TrajectoryConfig(dt=section.dt, steps=section.steps, overflow=section.overflow)
    path = _output(cfg, "trajectory.csv")
    try:
        traj = integrate(spec, start, run)
    except TrajectoryEscape as exc:
        export_trajectory_csv(exc.trajectory, path)
        raise
    energies = traj.energies(spec)
    traj.metadata["energy_drift"] = float(np.max(np.abs(energies - energies[0])))
    residual = traj.circle_residual(fit_circle(traj.momenta))
    export_trajectory_csv(traj, path, circle_fit_residual=residual)
    if not quiet:
        ReportViewer(console).show_trajectory(traj, residual, str(path))


@cli.command()
@run_options
@handle_errors
def evolve(config_path: Path | None, out: Path | None, tol: float | None, quiet: bool) -> None:
    """Time-evolve a superposition and write <p>, <e^{2ix}> and the Ehrenfest residual as CSV."""
    cfg = _load(config_path, tol, out, quiet)
    section = cfg.evolve
    system = _build(cfg)
    if len(section.coefficients) > system.size:
        raise ConfigError(f"{len(section.coefficients)} coefficients given but n_max+1 = {system.size}")
    c = np.zeros(system.size, dtype=np.complex128)
    c[: len(section.coefficients)] = [complex(re, im) for re, im in section.coefficients]
    state = system.state(c)
    rows = []
    for t in np.linspace(section.t_start, section.t_stop, section.samples):
        p = p_expectation(state, float(t))
        e2 = expectation_e2ix(state, float(t))
        rows.append((float(t), p.real, p.imag, e2.real, e2.imag, ehrenfest_residual(state, float(t))))
    path = export_evolution_csv(rows, _output(cfg, "evolve.csv"))
    logger.info("%d evolution samples written to %s", len(rows), path)


@cli.command()
@run_options
@handle_errors
def qft(config_path: Path | None, out: Path | None, tol: float | None, quiet: bool) -> None:
    """Scan the trial-state energy and report whether it is bounded below."""
    cfg = _load(config_path, tol, out, quiet)
    q = cfg.qft
    if q.couplings:
        scan = multi_exponential_scan(
            {k: complex(re, im) for k, re, im in q.couplings}, q.xi, q.m, q.M_max, q.samples
        )
    else:
        scan = instability_scan(complex(*q.mu), q.beta, q.xi, q.m, q.M_max, q.samples)
    payload = dumps_json(scan.to_dict())
    if cfg.output.path:
        atomic_write_text(cfg.output.path, payload)
    if not quiet:
        ReportViewer(console).show_scan(scan)
    click.echo(payload)


def main() -> None:
    cli()


__all__ = ["cli", "main"]
