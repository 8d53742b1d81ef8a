"""Tests for exporters."""

import json
from pathlib import Path

import numpy as np

from liouville_biortho.classical import PhasePoint, TrajectoryConfig, integrate
from liouville_biortho.exporters import (
    atomic_write_text,
    export_evolution_csv,
    export_json,
    export_kernel_csv,
    export_trajectory_csv,
    fmt,
)
from liouville_biortho.laurent import HamiltonianSpec, KernelGrid
from liouville_biortho.models import ModelReport


def test_fmt_round_trips():
    value = 0.1 + 0.2
    assert float(fmt(value)) == value
    assert fmt(1.0) == "1"


def test_atomic_write_creates_parents(tmp_path: Path):
    out = atomic_write_text(tmp_path / "a" / "b.txt", "hello")
    assert out.read_text() == "hello"
    assert [p.name for p in out.parent.iterdir()] == ["b.txt"]


def test_export_json(tmp_path: Path):
    report = ModelReport(model="single_exp", n_max=4, max_biorth_dev=1e-16)
    out = export_json(report, tmp_path / "report.json")
    data = json.loads(out.read_text())
    assert data["model"] == "single_exp"
    assert ModelReport.from_dict(data) == report


def test_export_kernel_csv(tmp_path: Path):
    grid = KernelGrid("J", [0.0, 0.5], [1.0], np.array([[1 + 2j], [0.25 - 1j]]), params={"m": 1.0})
    out = export_kernel_csv(grid, tmp_path / "kernel.csv")
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,re,im"
    assert lines[1] == "0,1,1,2"
    assert lines[2] == "0.5,1,0.25,-1"
    sidecar = json.loads((tmp_path / "kernel.csv.json").read_text())
    assert sidecar["kernel"] == "J"
    assert sidecar["grid_shape"] == [2, 1]


def test_export_trajectory_csv(tmp_path: Path):
    traj = integrate(HamiltonianSpec(), PhasePoint(0j, 1 + 0j), TrajectoryConfig(dt=0.5, steps=2))
    out = export_trajectory_csv(traj, tmp_path / "traj.csv", circle_fit_residual=1.5e-9)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,re_x,im_x,re_p,im_p"
    assert len(lines) == 1 + 3 + 1
    assert lines[1] == "0,0,0,1,0"
    tag, value = lines[-1].split(",")
    assert tag == "# circle_fit_residual"
    assert float(value) == 1.5e-9


def test_export_trajectory_without_trailer(tmp_path: Path):
    traj = integrate(HamiltonianSpec(), PhasePoint(0j, 1 + 0j), TrajectoryConfig(dt=0.5, steps=1))
    lines = export_trajectory_csv(traj, tmp_path / "traj.csv").read_text().splitlines()
    assert len(lines) == 3
    assert not lines[-1].startswith("#")


def test_export_evolution_csv(tmp_path: Path):
    out = export_evolution_csv([(0.0, 1.0, 0.0, 0.5, -0.5, 1e-12)], tmp_path / "evolve.csv")
    lines = out.read_text().splitlines()
    assert lines[0] == "t,re_p_expect,im_p_expect,re_e2ix,im_e2ix,ehrenfest_residual"
    assert lines[1].startswith("0,1,0,0.5,-0.5,")
    assert float(lines[1].split(",")[-1]) == 1e-12
