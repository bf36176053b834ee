"""Command-line interface: flags, config merging, CSV outputs, exit codes."""

import json

from catparity import CatParams, rates, solve_nmeas
from catparity.cli import main
from catparity.ensemble import STAT_NAMES, series_header


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_command_is_usage_error(capsys):
    code, _, _ = run_cli(capsys, )
    assert code == 1


def test_help_exits_zero(capsys):
    code, out, _ = run_cli(capsys, "--help")
    assert code == 0
    assert "rates" in out and "preset" in out


def test_rates_command(capsys):
    code, out, _ = run_cli(capsys, "rates", "--alpha2", "2", "--eta", "0.75")
    assert code == 0
    got = rates(CatParams(2.0, 0.75))
    assert repr(got.r_parity) in out
    assert repr(got.r_dephasing) in out


def test_fmeas_command(capsys):
    code, out, _ = run_cli(capsys, "fmeas", "--alpha2", "1.63", "--eta", "0.85")
    assert code == 0
    est = solve_nmeas(CatParams(1.63, 0.85))
    assert repr(est.n_meas) in out
    assert repr(est.f_meas) in out


def test_missing_required_flag(capsys):
    code, _, err = run_cli(capsys, "rates", "--alpha2", "2")
    assert code == 1
    assert "--eta" in err


def test_bad_flag_value_is_usage_error(capsys):
    code, _, _ = run_cli(capsys, "rates", "--alpha2", "two", "--eta", "0.75")
    assert code == 1


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha2": 2.0, "eta": 0.75}))
    code, out, _ = run_cli(capsys, "rates", "--config", str(cfg))
    assert code == 0
    assert repr(rates(CatParams(2.0, 0.75)).r_parity) in out


def test_flag_overrides_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha2": 2.0, "eta": 0.75}))
    code, out, _ = run_cli(capsys, "rates", "--config", str(cfg), "--eta", "0.9")
    assert code == 0
    assert repr(rates(CatParams(2.0, 0.9)).r_parity) in out


def test_config_file_must_be_flat_object(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps([1, 2]))
    code, _, err = run_cli(capsys, "rates", "--config", str(cfg))
    assert code == 1
    assert "flat JSON" in err


def test_optimize_alpha_command(capsys):
    code, out, _ = run_cli(capsys, "optimize-alpha", "--eta", "0.85", "--t1-ratio", "3000")
    assert code == 0
    assert "2.23" in out


def test_validate_kraus_passes(capsys):
    code, out, _ = run_cli(capsys, "validate-kraus", "--alpha2", "2", "--eta", "0.75")
    assert code == 0
    assert "PASS" in out


def test_trajectory_csv(tmp_path, capsys):
    out_path = tmp_path / "traj.csv"
    code, out, _ = run_cli(
        capsys,
        "trajectory",
        "--alpha2", "2", "--eta", "0.75", "--steps", "20", "--seed", "4",
        "--output", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == ",".join(["step"] + list(STAT_NAMES))
    assert len(lines) == 21


def test_trajectory_events_csv(tmp_path, capsys):
    out_path = tmp_path / "events.csv"
    code, _, _ = run_cli(
        capsys,
        "trajectory",
        "--alpha2", "2", "--eta", "0.75", "--steps", "15", "--seed", "4",
        "--events", "--output", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "step,outcome,pulse_fired,fid_be_plus,p_odd_filter"
    assert len(lines) == 16


def test_trajectory_stdout_when_no_output(capsys):
    code, out, _ = run_cli(
        capsys, "trajectory", "--alpha2", "2", "--eta", "0.75", "--steps", "5"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("step,")
    assert len(lines) == 6


def test_trajectory_deterministic_bytes(tmp_path, capsys):
    paths = []
    for name in ("a.csv", "b.csv"):
        p = tmp_path / name
        code, _, _ = run_cli(
            capsys,
            "trajectory",
            "--alpha2", "2", "--eta", "0.75", "--steps", "30", "--seed", "11",
            "--output", str(p),
        )
        assert code == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_ensemble_csv_and_sidecar(tmp_path, capsys):
    out_path = tmp_path / "ens.csv"
    code, _, _ = run_cli(
        capsys,
        "ensemble",
        "--alpha2", "2", "--eta", "0.75", "--steps", "12", "--trajectories", "9",
        "--seed", "2", "--workers", "2", "--output", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == ",".join(series_header())
    assert len(lines) == 13
    meta = json.loads((tmp_path / "ens.csv.meta.json").read_text())
    assert meta["trajectories"] == 9
    assert meta["steps"] == 12


def test_ensemble_feedback_off_flag(tmp_path, capsys):
    out_path = tmp_path / "nofb.csv"
    code, _, _ = run_cli(
        capsys,
        "ensemble",
        "--alpha2", "2", "--eta", "0.75", "--steps", "10", "--trajectories", "5",
        "--no-feedback", "--output", str(out_path),
    )
    assert code == 0
    meta = json.loads((tmp_path / "nofb.csv.meta.json").read_text())
    assert meta["feedback_enabled"] is False


def test_preset_command(tmp_path, capsys):
    out_path = tmp_path / "fig3.csv"
    code, out, _ = run_cli(capsys, "preset", "fig3", "--output", str(out_path))
    assert code == 0
    assert out_path.exists()
    header = out_path.read_text().splitlines()[0]
    assert header.startswith("eta,alpha2,")


def test_preset_rejects_unknown_name(capsys):
    code, _, _ = run_cli(capsys, "preset", "fig9")
    assert code == 1


def test_abstract_demo(capsys):
    code, out, _ = run_cli(capsys, "abstract-demo")
    assert code == 0
    assert "xi" in out
    assert "preserved" in out


def test_degenerate_probe_is_config_error(capsys):
    code, _, err = run_cli(capsys, "rates", "--alpha2", "0", "--eta", "0.75")
    assert code == 1
    assert "error" in err
