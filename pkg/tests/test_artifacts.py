import json

import numpy as np
import pytest

from pid_certify.artifacts import (
    format_value,
    load_run_config,
    read_slice_csv,
    read_sweep_csv,
    read_trajectory_csv,
    trajectory_columns,
    write_report,
    write_slice_csv,
    write_sweep_csv,
    write_trajectory_csv,
)
from pid_certify.errors import UsageError
from pid_certify.models import (
    ClassBounds,
    GainTriple,
    PlantKind,
    RegionCheckReport,
    SimConfig,
    SweepRow,
    Verdict,
)
from pid_certify.plants import make_builtin
from pid_certify.regions import check_gains, scale_gains, slice_grid
from pid_certify.simulator import simulate

UNIT = ClassBounds(L1=1.0, L2=1.0)


@pytest.fixture
def trajectory():
    p = make_builtin(PlantKind.SINUSOIDAL, 2, a=0.5, B=0.2)
    g = GainTriple(kp=5, ki=1, kd=3, b_lower=1)
    cfg = SimConfig(horizon=2.0)
    return simulate(p, g, 1.0, [1.0, -1.0], [0.0, 0.0], [0.0, 0.0], cfg)


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_format_value():
    assert format_value(0.1) == "1.0000000000000001e-01"
    assert float(format_value(1 / 3)) == 1 / 3
    assert format_value(True) == "true"
    assert format_value(np.bool_(False)) == "false"
    assert format_value(None) == ""
    assert format_value(7) == "7"
    assert format_value(Verdict.DIVERGED) == "diverged"


def test_slice_csv(tmp_path):
    grid = slice_grid(UNIT, 1.0, "ki", 1.0, ((0.0, 6.0), (0.0, 6.0)), (3, 4))
    path = write_slice_csv(grid, tmp_path / "slice.csv")
    assert path.read_text().splitlines()[0] == "kp,kd,in_omega1,in_omega2,gap1,gap2"
    axes, cells = read_slice_csv(path)
    assert axes == ("kp", "kd")
    assert cells == list(grid.cells)


def test_trajectory_csv(tmp_path, trajectory):
    V = np.linspace(1.0, 0.0, trajectory.times.size)
    path = write_trajectory_csv(trajectory, tmp_path / "traj.csv", V=V)
    data = read_trajectory_csv(path)
    assert list(data) == trajectory_columns(2, with_v=True)
    assert np.array_equal(data["t"], trajectory.times)
    assert np.array_equal(data["x1_2"], trajectory.x1[:, 1])
    assert np.array_equal(data["u_1"], trajectory.u[:, 0])
    assert np.array_equal(data["V"], V)


def test_trajectory_csv_rejects_mismatched_v(tmp_path, trajectory):
    with pytest.raises(ValueError):
        write_trajectory_csv(trajectory, tmp_path / "traj.csv", V=np.zeros(3))


def test_trajectory_csv_is_byte_deterministic(tmp_path, trajectory):
    first = write_trajectory_csv(trajectory, tmp_path / "a.csv").read_bytes()
    second = write_trajectory_csv(trajectory, tmp_path / "b.csv").read_bytes()
    assert first == second


def test_sweep_csv(tmp_path):
    rows = [
        SweepRow(
            plant=0,
            kp=5,
            ki=1,
            kd=3,
            trial=0,
            in_omega1=True,
            in_omega2=True,
            status="completed",
            verdict=Verdict.CONVERGED,
            final_error=1e-9,
        ),
        SweepRow(
            plant=1,
            kp=2,
            ki=2,
            kd=2,
            trial=1,
            in_omega1=False,
            in_omega2=False,
            status="failed",
            error_message="non-finite plant output",
        ),
    ]
    path = write_sweep_csv(rows, tmp_path / "sweep.csv")
    assert read_sweep_csv(path) == rows


def test_report_json(tmp_path):
    g = GainTriple(kp=5, ki=1, kd=3, b_lower=1)
    omega1, omega2 = check_gains(g, UNIT)
    report = RegionCheckReport(
        gains=g,
        bounds=UNIT,
        scaled=scale_gains(g, 1.0),
        target="omega1",
        omega1=omega1,
        omega2=omega2,
    )
    data = json.loads(write_report(report, tmp_path / "r.json").read_text())
    assert data["omega1"]["in_region"] is True
    assert data["omega2"]["product_gap"] == pytest.approx(7.0)


def test_load_run_config(tmp_path):
    path = write_config(
        tmp_path,
        {
            "schema": 1,
            "bounds": {"L1": 1.0, "L2": 1.0},
            "gains": {"kp": 5, "ki": 1, "kd": 3, "b_lower": 1},
            "seed": 7,
        },
    )
    config = load_run_config(path)
    assert config.gains.kp == 5.0
    assert config.seed == 7
    assert config.region == "omega1"


def test_plant_file_is_resolved_relative_to_config(tmp_path):
    (tmp_path / "plants").mkdir()
    plant = {"kind": "sinusoidal", "n": 2, "params": {"a": 0.5}}
    write_config(tmp_path / "plants", plant, name="p.json")
    path = write_config(tmp_path, {"schema": 1, "plant_file": "plants/p.json"})
    config = load_run_config(path)
    assert config.plant.kind is PlantKind.SINUSOIDAL
    assert config.plant.params.a == 0.5


@pytest.mark.parametrize(
    "data, field",
    [
        ({"schema": 2}, "schema"),
        (
            {"schema": 1, "gains": {"kp": 1, "ki": 1, "kd": 1, "b_lower": 0}},
            "gains.b_lower",
        ),
        ({"schema": 1, "unknown": True}, "unknown"),
        ({"schema": 1, "plant_file": "missing.json"}, "plant_file"),
    ],
)
def test_invalid_config_names_the_field(tmp_path, data, field):
    with pytest.raises(UsageError) as exc:
        load_run_config(write_config(tmp_path, data))
    assert exc.value.field == field


def test_missing_or_malformed_config(tmp_path):
    with pytest.raises(UsageError) as exc:
        load_run_config(tmp_path / "absent.json")
    assert exc.value.field == "config"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(UsageError) as exc:
        load_run_config(bad)
    assert exc.value.field == "config"
