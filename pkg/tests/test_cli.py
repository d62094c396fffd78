import json

import pytest

from sqrs.cli import build_parser, main

IDEAL_CHANNEL = {
    "fiber_length": 0.0,
    "attenuation": 0.2,
    "detector_efficiency": 1.0,
    "dark_count_prob": 0.0,
    "misalignment_prob": 0.0,
    "path1_split": 0.5,
    "mean_photon_number": 16.0,
    "phase_flip_coeffs": [0.0, 0.0, 0.0, 0.0],
}


def _write_config(tmp_path, **overrides):
    config = dict(channel=IDEAL_CHANNEL, pulses_per_phase=4000,
                  calibration_pulses=2000, seed=7)
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return str(path)


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_simulate_writes_files(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "run1"
    rc = main(["simulate", "--config", cfg, "--phases", "0.5,2.0",
               "--out", str(out)])
    assert rc == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["alice_events.jsonl", "counts_phase0.json",
                     "counts_phase1.json", "eve_view.jsonl"]
    payload = json.loads((out / "counts_phase0.json").read_text())
    assert payload["phi"] == 0.5
    stdout = capsys.readouterr().out
    assert stdout.count("wrote ") == 4


def test_simulate_attack_flag_changes_output(tmp_path):
    cfg = _write_config(tmp_path)
    main(["simulate", "--config", cfg, "--phases", "1.0",
          "--out", str(tmp_path / "clean")])
    main(["simulate", "--config", cfg, "--phases", "1.0", "--attack",
          "--out", str(tmp_path / "attacked")])
    clean = (tmp_path / "clean" / "counts_phase0.json").read_text()
    attacked = (tmp_path / "attacked" / "counts_phase0.json").read_text()
    assert clean != attacked


def test_calibrate_prints_table(tmp_path, capsys):
    rc = main(["calibrate", "--config", _write_config(tmp_path)])
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    assert body["p_bg"] == [0.0] * 8


def test_qber_prints_verdicts(tmp_path, capsys):
    rc = main(["qber", "--config",
               _write_config(tmp_path, pulses_per_phase=60000)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "no_attack" in out and "PASS" in out
    assert "attack" in out and "FAIL" in out


def test_reproduce_fig4(tmp_path):
    out = tmp_path / "fig"
    rc = main(["reproduce", "--figure", "fig4",
               "--config", _write_config(tmp_path, pulses_per_phase=20000),
               "--out", str(out)])
    assert rc == 0
    header = (out / "fig4.csv").read_text().splitlines()[0]
    assert header.startswith("phi,x0_measured,x0_ideal")


def test_seed_override_changes_results(tmp_path):
    cfg = _write_config(tmp_path)
    main(["simulate", "--config", cfg, "--phases", "1.0", "--seed", "1",
          "--out", str(tmp_path / "s1")])
    main(["simulate", "--config", cfg, "--phases", "1.0", "--seed", "2",
          "--out", str(tmp_path / "s2")])
    a = (tmp_path / "s1" / "counts_phase0.json").read_text()
    b = (tmp_path / "s2" / "counts_phase0.json").read_text()
    assert a != b


def test_bad_config_path_is_error(tmp_path, capsys):
    rc = main(["qber", "--config", str(tmp_path / "missing.json")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_server_error_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"channel": "no-such-preset"}))
    with pytest.raises(SystemExit) as exc:
        main(["qber", "--config", str(cfg)])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert json.loads(err)["status"] == 422
