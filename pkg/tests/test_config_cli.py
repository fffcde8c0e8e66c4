import re

import numpy as np
import pytest

from safeadmit.cli import main
from safeadmit.config import bundled_config, loads_scenario
from safeadmit.errors import ConfigRejected
from safeadmit.simkit.log import trajectory_columns

TWO_LINK_TEXT = bundled_config("two_link_paper.cfg").read_text()
SINGLE = bundled_config("single_link_hw.cfg")


def _cfg(tmp_path, text, name="case.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_configs_load():
    for name in ("two_link_paper.cfg", "two_link_comparison.cfg", "single_link_hw.cfg"):
        s = loads_scenario(bundled_config(name).read_text(), name)
        assert s.dt == 0.001


def test_unknown_key_rejected():
    with pytest.raises(ConfigRejected, match="stiffnes"):
        loads_scenario(TWO_LINK_TEXT.replace("stiffness = 10, 10", "stiffnes = 10, 10", 1))


def test_unknown_section_rejected():
    with pytest.raises(ConfigRejected, match="unknown section"):
        loads_scenario(TWO_LINK_TEXT + "\n[extras]\nx = 1\n")


def test_missing_required_key_and_section():
    with pytest.raises(ConfigRejected, match="missing required key"):
        loads_scenario(TWO_LINK_TEXT.replace("mismatch = 0.15\n", ""))
    with pytest.raises(ConfigRejected, match="missing"):
        loads_scenario(re.sub(r"\[force\][^\[]*", "", TWO_LINK_TEXT))


def test_bad_values_rejected():
    with pytest.raises(ConfigRejected):
        loads_scenario(TWO_LINK_TEXT.replace("dt = 0.001", "dt = fast"))
    with pytest.raises(ConfigRejected):
        loads_scenario(TWO_LINK_TEXT.replace("controller = proposed", "controller = other"))
    with pytest.raises(ConfigRejected):
        loads_scenario(TWO_LINK_TEXT.replace("desired = 0.1, 0.2", "desired = 0.1, 0.2, 0.3"))


def test_force_beyond_bound_rejected():
    with pytest.raises(ConfigRejected, match="force bound"):
        loads_scenario(TWO_LINK_TEXT.replace("amplitude = 1, 0", "amplitude = 1.5, 0"))


def test_missing_seed_with_disturbance_exits_2(tmp_path, capsys):
    cfg = _cfg(tmp_path, TWO_LINK_TEXT.replace("seed = 2024\n", ""))
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert "seed" in capsys.readouterr().err


def test_scaled_safe_subsystem_exits_2_naming_axis(tmp_path, capsys):
    text = TWO_LINK_TEXT.replace("safe_stiffness = 40, 40", "safe_stiffness = 0.4, 0.4")
    text = text.replace("safe_damping = 50, 50", "safe_damping = 0.5, 0.5")
    cfg = _cfg(tmp_path, text)
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "out")]) == 2
    err = capsys.readouterr().err
    assert "A2 condition" in err and "axis 1" in err


def test_bounds_two_link(capsys):
    assert main(["bounds", str(bundled_config("two_link_paper.cfg"))]) == 0
    out = capsys.readouterr().out
    assert "[envelope]" in out and "dbar = 0.015" in out
    assert out.count("\nA1,") == 2 and out.count("\nA2,") == 2


def test_bounds_single_link_real_eigenvalues(capsys):
    assert main(["bounds", str(SINGLE)]) == 0
    rows = [r.split(",") for r in capsys.readouterr().out.splitlines() if r.startswith("A2,")]
    lam1, lam2 = float(rows[0][2]), float(rows[0][3])
    assert lam1 == pytest.approx((-25 - np.sqrt(545)) / 2)
    assert lam2 == pytest.approx((-25 + np.sqrt(545)) / 2)


def test_bounds_underdamped_exits_2(tmp_path, capsys):
    cfg = _cfg(tmp_path, TWO_LINK_TEXT.replace("safe_damping = 50, 50", "safe_damping = 5, 5"))
    assert main(["bounds", str(cfg)]) == 2
    assert "real eigenvalues" in capsys.readouterr().err


def _unit_error_csv(path):
    cols = trajectory_columns(2, 2)
    data = np.zeros((2001, len(cols)))
    data[:, 0] = np.linspace(0, 2, 2001)
    data[:, cols.index("xi_1")] = 1.0
    data[:, cols.index("p")] = 1
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def test_metrics_unit_error(tmp_path, capsys):
    path = tmp_path / "unit.csv"
    _unit_error_csv(path)
    assert main(["metrics", str(path)]) == 0
    out = capsys.readouterr().out
    assert re.search(r"^ISE = 2(\.0+)?$", out, re.M)


def test_metrics_empty_and_missing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["metrics", str(empty)]) == 2
    assert main(["metrics", str(tmp_path / "nope.csv")]) == 2
    path = tmp_path / "unit.csv"
    _unit_error_csv(path)
    assert main(["metrics", str(path), "--channel", "bogus"]) == 2


def test_simulate_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", str(SINGLE), "--out", str(out), "--duration", "1"]) == 0
    text = capsys.readouterr().out
    for section in ("[prechecks]", "[safety]", "[metrics]", "[artifacts]"):
        assert text.count(section) == 1
    for name in ("trajectory.csv", "safety_report.txt", "metrics.txt", "prechecks.txt",
                 "tracking.png", "subsystem.png", "control.png"):
        assert (out / name).stat().st_size > 0


def test_simulate_is_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["simulate", str(SINGLE), "--out", str(tmp_path / d), "--duration", "0.5"]) == 0
    for name in ("trajectory.csv", "metrics.txt", "safety_report.txt", "tracking.png", "control.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_directory_with_jobs(tmp_path, capsys, monkeypatch):
    cfgs = tmp_path / "cfgs"
    cfgs.mkdir()
    (cfgs / "one.cfg").write_text(SINGLE.read_text())
    (cfgs / "two.cfg").write_text(SINGLE.read_text().replace("seed = 11", "seed = 12"))
    monkeypatch.setenv("SAFEADMIT_OUT_DIR", str(tmp_path / "env_out"))
    assert main(["simulate", str(cfgs), "--jobs", "2", "--no-figures", "--duration", "0.3"]) == 0
    assert (tmp_path / "env_out" / "one" / "trajectory.csv").exists()
    assert (tmp_path / "env_out" / "two" / "trajectory.csv").exists()
    assert capsys.readouterr().out.count("[run]") == 2


def test_compare_short(tmp_path, capsys):
    cfg = bundled_config("two_link_comparison.cfg")
    assert main(["compare", str(cfg), "--out", str(tmp_path), "--duration", "1"]) == 0
    out = capsys.readouterr().out
    assert re.search(r"baseline_chatters_more = (true|false)", out)
    rows = (tmp_path / "compare.csv").read_text().splitlines()
    assert rows[0].startswith("controller,ISE") and len(rows) == 3
    assert (tmp_path / "comparison.png").exists()


def test_compare_zero_force_ties(tmp_path, capsys):
    text = bundled_config("two_link_comparison.cfg").read_text()
    text = text.replace("amplitude = 1, 0", "amplitude = 0, 0").replace("enabled = true", "enabled = false")
    cfg = _cfg(tmp_path, text)
    assert main(["compare", str(cfg), "--out", str(tmp_path / "o"), "--duration", "1"]) == 0
    rows = [r.split(",") for r in (tmp_path / "o" / "compare.csv").read_text().splitlines()[1:]]
    vals = np.array([[float(x) for x in r[1:]] for r in rows])
    assert np.abs(vals).max() < 1e-12
