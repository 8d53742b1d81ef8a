"""Rich terminal rendering of systems, reports and scans."""

from __future__ import annotations

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .biortho import BiorthogonalSystem
from .classical import Trajectory
from .laurent import KernelGrid
from .models import ModelReport
from .qft import MultiScanResult, ScanResult
from .verify import VerificationResult


def _sci(value: float) -> str:
    return f"{value:.3e}"


class ReportViewer:
    """Rich terminal viewer for build and verification results."""

    def __init__(self, console: Console | None = None) -> None:
        self.console = console or Console(stderr=True)

    def show_system(self, system: BiorthogonalSystem) -> None:
        spec = system.spec
        couplings = ", ".join(f"mu[{k}]={v:.6g}" for k, v in spec.mu.items()) or "free"
        self.console.print(Panel(
            f"[bold]{spec.label or 'custom'}[/bold]\n"
            f"nu={spec.nu:g} | {couplings}\n"
            f"Sector: {system.sector.value} | n_max={system.n_max} | N={system.trunc} | "
            f"method={system.method.value}",
            title="[bold cyan]Biorthogonal System[/bold cyan]",
            border_style="cyan",
        ))
        table = Table(show_lines=False)
        table.add_column("n", style="dim", width=4)
        table.add_column("E_n", justify="right")
        table.add_column("psi powers", justify="right")
        table.add_column("chi powers", justify="right")
        for n, (psi, chi, e) in enumerate(zip(system.psi, system.chi, system.energies)):
            table.add_row(
                str(n), f"{e:.6g}", f"{psi.min_power}..{psi.max_power}", f"{chi.min_power}..{chi.max_power}"
            )
        self.console.print(table)

    def show_report(self, report: ModelReport) -> None:
        table = Table(title=f"Model report: {report.model}", show_lines=True)
        table.add_column("Quantity")
        table.add_column("Value", justify="right")
        table.add_row("max biorthonormality deviation", _sci(report.max_biorth_dev))
        table.add_row("max eigen residual (retained)", _sci(report.max_eigen_residual))
        table.add_row("max closed-form deviation", _sci(report.max_closedform_dev))
        for key, value in report.details.items():
            table.add_row(key.replace("_", " "), _sci(value))
        self.console.print(table)
        for flag in report.exceptional_flags:
            self.console.print(f"[yellow]! {flag}[/yellow]")

    def show_verification(self, result: VerificationResult) -> None:
        style = "green" if result.passed else "red"
        self.console.print(Panel(
            f"[{style}]{result.summary}[/{style}]",
            title="[bold]Verification[/bold]",
            border_style=style,
        ))
        table = Table(title="Checks", show_lines=True)
        table.add_column("#", style="dim", width=4)
        table.add_column("Check")
        table.add_column("Value", justify="right")
        table.add_column("Tolerance", justify="right")
        table.add_column("Status", width=6)
        table.add_column("Detail", style="dim")
        for i, check in enumerate(result.checks, 1):
            status = "[green]PASS[/green]" if check.passed else "[red]FAIL[/red]"
            table.add_row(str(i), check.name, _sci(check.value), f"{check.tolerance:.1e}", status, check.detail)
        self.console.print(table)

    def show_kernel(self, grid: KernelGrid, path: str) -> None:
        nx, ny = grid.shape
        self.console.print(f"[cyan]kernel {grid.name}[/cyan] {nx}x{ny} grid -> [bold]{path}[/bold]")

    def show_trajectory(self, traj: Trajectory, residual: float, path: str) -> None:
        energies = traj.metadata.get("energy_drift")
        drift = f" | energy drift {_sci(energies)}" if energies is not None else ""
        self.console.print(
            f"[cyan]trajectory[/cyan] {len(traj)} samples | circle fit residual {_sci(residual)}"
            f"{drift} -> [bold]{path}[/bold]"
        )

    def show_scan(self, scan: ScanResult | MultiScanResult) -> None:
        style = "green" if scan.bounded_below else "red"
        verdict = "bounded below" if scan.bounded_below else "unbounded below"
        body = f"[{style}]{verdict}[/{style}]\nmin {scan.min_value:.6g} at M={scan.argmin_M:.6g}"
        if isinstance(scan, MultiScanResult) and scan.unstable_modes:
            body += f"\nunstable modes k={', '.join(map(str, scan.unstable_modes))}"
        elif isinstance(scan, ScanResult):
            body += f"\ncoupling {scan.coupling:.6g}, exponent beta^2/2pi = {scan.exponent:.6g}"
        self.console.print(Panel(body, title="[bold]Trial energy scan[/bold]", border_style=style))
