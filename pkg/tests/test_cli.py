import json

import pytest

from pid_certify.main import build_parser, main

UNIT = {"L1": 1.0, "L2": 1.0}


def gains(kp, ki, kd):
    return {"kp": kp, "ki": ki, "kd": kd, "b_lower": 1.0}


@pytest.fixture
def run(tmp_path):
    """Write a config and invoke the CLI on it"""

    def invoke(config, *command, extra=()):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"schema": 1, **config}), encoding="utf-8")
        out = tmp_path / "out"
        argv = ["--config", str(path), "--out", str(out), *extra, *command]
        return main(argv), out

    return invoke


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--config", "run.json"])


def test_region_check(run):
    code, out = run({"bounds": UNIT, "gains": gains(5, 1, 3)}, "region", "check")
    assert code == 0
    report = json.loads((out / "region_check.json").read_text())
    assert report["omega1"]["product_gap"] == pytest.approx(3.0)
    assert report["omega2"]["product_gap"] == pytest.approx(7.0)


def test_region_check_outside_target_region(run):
    config = {"bounds": UNIT, "gains": gains(2.5, 1, 3)}
    assert run(config, "region", "check")[0] == 2
    assert run({**config, "region": "omega2"}, "region", "check")[0] == 0


def test_region_slice(run):
    grid = {
        "fixed": "ki",
        "value": 1.0,
        "x_range": [0.0, 6.0],
        "y_range": [0.0, 6.0],
        "resolution": [5, 5],
    }
    code, out = run({"bounds": UNIT, "grid": grid}, "region", "slice")
    assert code == 0
    lines = (out / "region_slice.csv").read_text().splitlines()
    assert lines[0].startswith("kp,kd,")
    assert len(lines) == 26


def test_falsify(run):
    code, out = run({"bounds": UNIT, "gains": gains(2, 2, 2)}, "falsify")
    assert code == 0
    report = json.loads((out / "counterexample.json").read_text())
    assert report["evidence"]["failed_inequality"] == "a2 a1 > a0"
    assert (out / "counterexample_trajectory.csv").is_file()


def test_falsify_inside_omega2_is_a_negative_verdict(run):
    code, _ = run({"bounds": UNIT, "gains": gains(5, 1, 3)}, "falsify")
    assert code == 2


def test_certify(run):
    config = {
        "bounds": UNIT,
        "gains": gains(5, 1, 3),
        "plant": {"kind": "worst_case", "n": 1, "bounds": UNIT, "claim": "G"},
        "certify": {"samples": 50},
        "sim": {"horizon": 20.0},
    }
    code, out = run(config, "certify", extra=("--seed", "1"))
    assert code == 0
    assert (out / "certificate.json").is_file()
    header = (out / "certified_trajectory.csv").read_text().splitlines()[0]
    assert header.endswith(",V")


def test_certify_outside_omega1(run):
    config = {
        "bounds": UNIT,
        "gains": gains(2.5, 1, 3),
        "plant": {"kind": "worst_case", "n": 1, "bounds": UNIT, "claim": "G"},
        "certify": {"samples": 10, "simulate": False},
        "seed": 0,
    }
    code, out = run(config, "certify")
    assert code == 2
    assert not (out / "certificate.json").exists()


def test_certify_reports_empirical_constants(run):
    config = {
        "bounds": UNIT,
        "gains": gains(5, 1, 3),
        "plant": {"kind": "worst_case", "n": 2, "bounds": UNIT, "claim": "G"},
        "certify": {"samples": 20, "simulate": False, "empirical": True},
        "seed": 0,
    }
    code, out = run(config, "certify")
    assert code == 0
    report = json.loads((out / "certificate.json").read_text())
    assert report["empirical"]["diagnostic_only"] is True
    assert report["empirical"]["samples"] == 20
    assert report["empirical"]["phi0_hat"] == pytest.approx(report["phi0"])


def test_simulate_exit_codes(run):
    plant = {"kind": "worst_case", "n": 1, "bounds": UNIT, "claim": "G"}
    code, out = run({"gains": gains(2, 2, 2), "plant": plant}, "simulate")
    assert code == 2
    summary = json.loads((out / "simulation.json").read_text())
    assert summary["verdict"] != "converged"

    config = {"bounds": UNIT, "gains": gains(5, 1, 3), "plant": plant}
    config["sim"] = {"atol": 1e-12, "rtol": 1e-10}
    code, out = run(config, "simulate")
    assert code == 0
    summary = json.loads((out / "simulation.json").read_text())
    assert summary["certificate_mode"] == "theorem1"
    assert summary["vdot_max"] <= 1e-6


def test_class_check_needs_a_seed(run):
    plant = {"kind": "sinusoidal", "n": 1, "params": {"a": 0.5}}
    config = {"bounds": UNIT, "plant": plant}
    assert run(config, "class", "check")[0] == 1
    assert run(config, "class", "check", extra=("--seed", "4"))[0] == 0


def test_class_check_rejects_a_plant_outside_its_class(run):
    plant = {"kind": "linear", "n": 1, "params": {"B": [[2.0]]}}
    code, out = run({"bounds": UNIT, "plant": plant, "seed": 0}, "class", "check")
    assert code == 2
    assert json.loads((out / "membership.json").read_text())["norm_bound_ok"] is False


def test_sweep(run):
    config = {
        "bounds": UNIT,
        "sim": {"horizon": 5.0},
        "sweep": {
            "plants": [{"kind": "sinusoidal", "n": 1, "params": {"a": 0.5}}],
            "kp": [2.0, 5.0],
            "ki": [1.0],
            "kd": [3.0],
        },
    }
    code, out = run(config, "sweep", extra=("--seed", "0", "--jobs", "2"))
    assert code == 0
    assert len((out / "sweep.csv").read_text().splitlines()) == 3


def test_gap(run):
    plants = [
        {"kind": "worst_case", "n": 1, "bounds": UNIT},
        {"kind": "sinusoidal", "n": 1, "params": {"a": 0.5, "B": [[0.5]]}},
    ]
    config = {
        "bounds": UNIT,
        "gains": gains(2.5, 1, 3),
        "gap": {"plants": plants, "initial_states": 2},
    }
    code, out = run(config, "gap", extra=("--seed", "3"))
    assert code == 0
    report = json.loads((out / "gap_runs.json").read_text())
    assert [(r["plant"], r["trial"]) for r in report["runs"]] == [
        (0, 0),
        (0, 1),
        (1, 0),
        (1, 1),
    ]
    assert all(r["verdict"] == "converged" for r in report["runs"])


def test_gap_outside_the_gap_and_mixed_dimensions(run):
    plants = [{"kind": "worst_case", "n": 1, "bounds": UNIT}]
    config = {"bounds": UNIT, "gap": {"plants": plants}, "seed": 0}
    assert run({**config, "gains": gains(5, 1, 3)}, "gap")[0] == 2
    mixed = {"plants": plants + [{"kind": "worst_case", "n": 2, "bounds": UNIT}]}
    assert run({**config, "gains": gains(2.5, 1, 3), "gap": mixed}, "gap")[0] == 1


@pytest.mark.parametrize(
    "config, extra",
    [
        ({"gains": {"kp": 1, "ki": 1, "kd": 1, "b_lower": -1}}, ()),
        ({"bounds": UNIT}, ()),
        ({"bounds": UNIT, "gains": gains(5, 1, 3)}, ("--jobs", "0")),
    ],
)
def test_usage_errors_exit_one(run, config, extra):
    assert run(config, "region", "check", extra=extra)[0] == 1
