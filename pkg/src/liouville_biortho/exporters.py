"""Write systems, kernel grids, trajectories and reports to JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from .classical import Trajectory
from .laurent import KernelGrid

KERNEL_HEADER = ("x", "y", "re", "im")
TRAJECTORY_HEADER = ("t", "re_x", "im_x", "re_p", "im_p")
EVOLVE_HEADER = ("t", "re_p_expect", "im_p_expect", "re_e2ix", "im_e2ix", "ehrenfest_residual")


def fmt(value: float) -> str:
    """17 significant digits."""
    return format(value, ".17g")


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write via a temp file in the target directory and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def dumps_json(payload: Any) -> str:
    return json.dumps(payload, indent=2)


def export_json(payload: Any, path: str | Path) -> Path:
    """Export any to_dict() payload (or object with to_dict) as JSON."""
    if hasattr(payload, "to_dict"):
        payload = payload.to_dict()
    return atomic_write_text(path, dumps_json(payload))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[float]], trailer: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if trailer is not None:
        writer.writerow(trailer)
    return buf.getvalue()


def export_kernel_csv(grid: KernelGrid, path: str | Path) -> Path:
    """x,y,re,im rows plus a JSON sidecar with the kernel parameters."""
    path = Path(path)
    atomic_write_text(path.with_suffix(path.suffix + ".json"), dumps_json(grid.sidecar()))
    return atomic_write_text(path, _csv_text(KERNEL_HEADER, grid.rows()))


def export_trajectory_csv(traj: Trajectory, path: str | Path, circle_fit_residual: float | None = None) -> Path:
    trailer = None
    if circle_fit_residual is not None:
        trailer = ["# circle_fit_residual", fmt(circle_fit_residual)]
    return atomic_write_text(path, _csv_text(TRAJECTORY_HEADER, traj.rows(), trailer))


def export_evolution_csv(rows: Iterable[Sequence[float]], path: str | Path) -> Path:
    return atomic_write_text(path, _csv_text(EVOLVE_HEADER, rows))
