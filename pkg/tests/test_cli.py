import json
import subprocess
import sys

import numpy as np
import pytest

from jitterlab.cli import main
from jitterlab.experiments import (
    COMMAND_DEFAULTS,
    canonical_config,
    config_hash,
    parse_config_file,
    resolve_config,
)


def _read_rows(path):
    lines = open(path).read().strip().splitlines()
    assert lines[0].startswith("# config sha256=")
    header = lines[1].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[2:]]
    return lines[0], header, rows


def test_alpha_curve_header_and_hash(tmp_path):
    out = str(tmp_path / "alpha.csv")
    assert main(["alpha-curve", "--out", out]) == 0
    comment, header, rows = _read_rows(out)
    assert header == ["noise_level", "eps", "eps_sq_rel", "alpha"]
    cfg = resolve_config("alpha-curve", {"out": out})
    assert config_hash(canonical_config("alpha-curve", cfg)) in comment
    assert len(rows) == 3 * 16


def test_alpha_curve_spot_values(tmp_path):
    out = str(tmp_path / "alpha.csv")
    main(["alpha-curve", "--out", out])
    _, _, rows = _read_rows(out)
    by_key = {(r["noise_level"], r["eps"]): float(r["alpha"]) for r in rows}
    assert by_key[("0", "0")] == 1.0
    assert abs(by_key[("0.4", "0")] - 1 / 1.16) < 1e-9
    assert abs(by_key[("1.2", "0")] - 1 / 2.44) < 1e-9
    # every noise level collapses to zero at eps = 1.2 >= sigma_c
    for level in ("0", "0.4", "1.2"):
        assert by_key[(level, "1.2")] == 0.0


def test_rerun_is_byte_identical(tmp_path):
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    main(["alpha-curve", "--out", a])
    main(["alpha-curve", "--out", b])
    assert open(a, "rb").read() == open(b, "rb").read()


def test_config_file_plus_flag_override(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("sigma_c=2.0\n# a comment\nnoise_levels=0.5\n")
    out = str(tmp_path / "alpha.csv")
    assert main(["alpha-curve", "--config", str(cfg_path), "--out", out,
                 "--eps-grid", "0.0,0.1"]) == 0
    _, _, rows = _read_rows(out)
    assert len(rows) == 2
    assert rows[0]["noise_level"] == "0.5"
    # alpha(0) = sc^2/(sc^2+nu^2) = 4/4.25
    assert abs(float(rows[0]["alpha"]) - 4.0 / 4.25) < 1e-9


def test_bad_key_fails_with_json_error(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    code = main(["alpha-curve", "--out", out, "--sigma-c", "zebra"])
    assert code == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    payload = json.loads(err)
    assert payload["error"] == "ConfigError"
    assert "sigma_c" in payload["detail"]


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("warp_factor=9\n")
    code = main(["alpha-curve", "--config", str(cfg_path), "--out", str(tmp_path / "x.csv")])
    assert code == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "warp_factor" in payload["detail"]


def test_unwritable_output_fails_nonzero(tmp_path, capsys):
    code = main(["alpha-curve", "--out", "/nonexistent-dir/x.csv"])
    assert code == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] in ("OSError", "ConfigError")


def test_gap_rejects_identity_operator(tmp_path, capsys):
    code = main(["gap", "--out", str(tmp_path / "g.csv"), "--operator", "identity"])
    assert code == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] == "ConfigError"


def test_gap_small_run_ordering(tmp_path):
    out = str(tmp_path / "gap.csv")
    assert main([
        "gap", "--out", out, "--n", "24", "--d", "8",
        "--eval-samples", "400", "--eps-grid", "0.0,0.3",
    ]) == 0
    _, _, rows = _read_rows(out)
    risks = {(r["method"], r["eps"]): float(r["risk"]) for r in rows}
    assert risks[("conjectured", "0.3")] <= risks[("jittering-best", "0.3")] + 1e-12
    assert risks[("jittering-best", "0.3")] <= risks[("standard", "0.3")] + 1e-12
    # risk columns are per-coordinate: eps=0 standard risk is tiny but positive
    assert 0 < risks[("standard", "0")] < 1.0


def test_sweep_small_run_writes_argmin_file(tmp_path):
    out = str(tmp_path / "sw.csv")
    assert main([
        "sweep", "--out", out, "--n", "12", "--d", "4",
        "--eval-samples", "100", "--n-iterations", "150",
        "--eps-grid", "0.0,0.2", "--sigma-w-grid", "0.0,0.2",
    ]) == 0
    _, header, rows = _read_rows(out)
    assert header == ["sigma_w", "eps", "risk", "ci_low", "ci_high"]
    assert len(rows) == 4
    comment, header2, rows2 = _read_rows(str(tmp_path / "sw_argmin.csv"))
    assert header2 == ["eps", "sigma_w_star", "sigma_w_theory"]
    assert rows2[0]["sigma_w_theory"] == "0"


def test_entry_point_subprocess(tmp_path):
    # the installed console script behaves like main()
    out = str(tmp_path / "alpha.csv")
    proc = subprocess.run(
        [sys.executable, "-m", "jitterlab.cli", "alpha-curve", "--out", out],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert open(out).readline().startswith("# config sha256=")


def test_parse_config_file_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this line has no equals\n")
    from jitterlab.errors import ConfigError

    with pytest.raises(ConfigError):
        parse_config_file(str(bad))


def test_m_follows_n_unless_explicit():
    cfg = resolve_config("equivalence", {"n": "30"})
    assert cfg["m"] == 30
    cfg = resolve_config("equivalence", {"n": "30", "m": "40"})
    assert cfg["m"] == 40
    assert COMMAND_DEFAULTS["equivalence"]["m"] == 100
