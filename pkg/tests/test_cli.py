import csv
import hashlib
import re

import pytest

from frontspeed.cli import main

ZERO = """
[field]
kind = zero
[reaction]
kind = kpp
r = 1.0
[direction]
k = {k}
[cell]
n_x = 16
n_t = 32
"""

CELLULAR = """
[field]
kind = cellular
amplitude = 1.0
[reaction]
kind = kpp
r = 1.0
[direction]
k = 1 0
[cell]
n_x = 16
n_t = 128
"""

SHEAR_PAIR = """
[field]
kind = shear
amplitude = 1.0
[reaction]
kind = kpp
r = 1.0
[direction]
k = 1 0
[cell]
n_x = 16
n_t = 128
[speed]
tol_c = 1e-5
[channel]
length = 80
n_per_unit = 8
[simulate]
t_end = 30
"""


def run(tmp_path, text, command, *extra):
    cfg = tmp_path / "run.ini"
    cfg.write_text(text)
    return main([command, "--config", str(cfg), "--out", str(tmp_path), *extra])


def read_rows(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# frontspeed")
    return list(csv.reader(lines[1:]))


def test_validate_cellular_passes(tmp_path, capsys):
    assert run(tmp_path, CELLULAR, "validate") == 0
    out = capsys.readouterr().out
    div = float(re.search(r"divergence_residual=(\S+)", out).group(1))
    assert div <= 1e-10 and "PASS" in out


def test_validate_non_unit_direction(tmp_path, capsys):
    assert run(tmp_path, ZERO.format(k="2 0"), "validate") == 1
    assert "direction not unit" in capsys.readouterr().out


def test_malformed_key_is_usage_error(tmp_path):
    assert run(tmp_path, ZERO.format(k="1 0") + "colour = blue\n", "validate") == 2


def test_missing_config_and_bad_command(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["launch", "--config", "x.ini"]) == 2


def test_dispersion_zero_field_row(tmp_path):
    text = ZERO.format(k="1 0") + "[dispersion]\nlambdas = 0.5 1.0 1.5\n"
    assert run(tmp_path, text, "dispersion") == 0
    rows = read_rows(tmp_path / "dispersion.csv")
    assert rows[0] == ["lambda", "mu", "mu_over_lambda", "converged"]
    lam, mu, ratio, ok = rows[2]
    assert (float(lam), float(mu), float(ratio), ok) == (1.0, pytest.approx(2.0, abs=1e-9),
                                                         pytest.approx(2.0, abs=1e-9), "true")
    assert len(mu.replace(".", "")) >= 6


def test_dispersion_cellular_convexity(tmp_path, capsys):
    assert run(tmp_path, CELLULAR, "dispersion") == 0
    assert len(read_rows(tmp_path / "dispersion.csv")) == 18
    assert "pass" in capsys.readouterr().out


def test_dispersion_unconverged_point(tmp_path, capsys):
    text = CELLULAR + "[eigen]\nmax_iter = 1\n[dispersion]\nlambdas = 0.5 1.0 1.5\n"
    assert run(tmp_path, text, "dispersion") == 1
    assert "unconverged at lambda=0.5" in capsys.readouterr().out


def test_speed_zero_field_report(tmp_path, capsys):
    text = ZERO.format(k="1 0") + "[speed]\neps = 0.5 0.1 0\nlambda_c_factors = 1.25\n"
    assert run(tmp_path, text, "speed") == 0
    out = capsys.readouterr().out
    assert "c_star=2.000000 lambda_star=1.000000" in out
    eps_speeds = [float(v) for v in re.findall(r"c_star_eps=(\S+)", out)]
    assert len(eps_speeds) == 3
    assert eps_speeds[0] > eps_speeds[1] > eps_speeds[2]
    assert "lambda_c=0.500000" in out
    assert (tmp_path / "speed_report.txt").read_text() == out


def test_speed_stamps_dispersion_hash(tmp_path, capsys):
    text = ZERO.format(k="1 0") + "[dispersion]\nlambdas = 0.5 1.0 1.5\n"
    assert run(tmp_path, text, "dispersion") == 0
    assert run(tmp_path, text, "speed") == 0
    digest = hashlib.sha256((tmp_path / "dispersion.csv").read_bytes()).hexdigest()
    assert f"dispersion_sha256={digest}" in capsys.readouterr().out


def test_simulate_one_dimensional_step(tmp_path, capsys):
    text = ZERO.format(k="1") + "[simulate]\nt_end = 40\n"
    assert run(tmp_path, text, "simulate") == 0
    c = float(re.search(r"c_obs=([0-9.]+)", capsys.readouterr().out).group(1))
    assert c == pytest.approx(2.0, abs=0.06)
    rows = read_rows(tmp_path / "trace.csv")
    assert rows[0] == ["t", "x_front_right", "u_min", "u_max"]


def test_simulate_decay_sweep(tmp_path):
    text = ZERO.format(k="1") + "[simulate]\nmode = decay\nlambda0 = 0.5 2\nt_end = 30\n"
    assert run(tmp_path, text, "simulate") == 0
    rows = read_rows(tmp_path / "sweep.csv")
    assert rows[0] == ["lambda0", "c_obs", "c_pred", "stderr"]
    preds = [float(r[2]) for r in rows[1:]]
    assert preds == [pytest.approx(2.5, abs=1e-6), pytest.approx(2.0, abs=1e-6)]
    for r in rows[1:]:
        assert float(r[1]) == pytest.approx(float(r[2]), rel=0.05)


def test_simulate_bump(tmp_path, capsys):
    text = ZERO.format(k="1") + ("[channel]\nlength = 160\n"
                                 "[simulate]\nmode = bump\na1 = 75\na2 = 85\nt_end = 25\n")
    assert run(tmp_path, text, "simulate") == 0
    m = re.search(r"\(c_left, c_right\)=\(([0-9.]+), ([0-9.]+)\)", capsys.readouterr().out)
    assert float(m.group(1)) == pytest.approx(2.0, rel=0.05)
    assert float(m.group(2)) == pytest.approx(2.0, rel=0.05)


def test_compare_zero_field(tmp_path, capsys):
    text = ZERO.format(k="1") + "[speed]\n[simulate]\nt_end = 60\n"
    assert run(tmp_path, text, "compare") == 0
    gap = float(re.search(r"gap=(\S+)", capsys.readouterr().out).group(1))
    assert gap <= 0.03


def test_compare_needs_both_parts(tmp_path):
    assert run(tmp_path, ZERO.format(k="1"), "compare") == 2


def test_compare_shear_and_reversed_direction(tmp_path, capsys):
    assert run(tmp_path, SHEAR_PAIR, "compare") == 0
    first = capsys.readouterr().out
    assert "PASS" in first
    code = run(tmp_path, SHEAR_PAIR + "[compare]\nsimulate_k = -1 0\n", "compare")
    out = capsys.readouterr().out
    gap = float(re.search(r"gap=(\S+)", out).group(1))
    assert gap >= 0 and code in (0, 1)
    assert ("PASS" in out) == (code == 0)


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("FRONTSPEED_THREADS", "many")
    assert run(tmp_path, ZERO.format(k="1 0"), "validate") == 2
    monkeypatch.setenv("FRONTSPEED_THREADS", "2")
    text = ZERO.format(k="1 0") + "[dispersion]\nlambdas = 0.5 1.0 1.5\n"
    assert run(tmp_path, text, "dispersion") == 0


def test_seeded_outputs_are_byte_identical(tmp_path):
    text = CELLULAR + "[eigen]\nstart = random\n[dispersion]\nlambdas = 0.5 1 1.5\n"
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        (d / "run.ini").write_text(text)
        assert main(["dispersion", "--config", str(d / "run.ini"), "--out", str(d),
                     "--seed", "7"]) == 0
        outs.append((d / "dispersion.csv").read_bytes())
    assert outs[0] == outs[1]
