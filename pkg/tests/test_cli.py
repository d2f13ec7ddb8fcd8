import csv
import io

import numpy as np
import pytest
from click.testing import CliRunner

from repsuff.cli import main
from repsuff.mdp import make_mdp
from repsuff.mdpfile import export_mdp


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_mdp(tmp_path, mdp, name="m.yaml"):
    path = tmp_path / name
    path.write_text(export_mdp(mdp))
    return str(path)


def test_sweep_jstate(runner):
    res = run(runner, "sweep", "--scenario", "jstate")
    assert res.exit_code == 0
    rows = rows_of(res.stdout)
    assert len(rows) == 15
    row = next(r for r in rows if r["blocks"] == "{s0,s3|s1|s2}")
    assert row["max_state"] == "true" and row["q_sufficient"] == "false"
    assert row["max_fwd"] == "false"
    keys = [(round(float(r["I_ZS"]), 12), int(r["partition_id"])) for r in rows]
    assert keys == sorted(keys)


def test_sweep_jinv(runner):
    rows = rows_of(run(runner, "sweep", "--scenario", "jinv").stdout)
    assert len(rows) == 203
    row = next(r for r in rows if r["blocks"] == "{s0,s1|s2|s3|s4|s5}")
    assert row["max_inv"] == "true" and row["max_inv_plus_R"] == "true"
    assert float(row["normalized_return"]) == pytest.approx(0.5, abs=1e-9)


def test_sweep_objective_selects_flags(runner):
    rows = rows_of(run(runner, "sweep", "--scenario", "jstate", "--objective", "state").stdout)
    assert "max_state" in rows[0] and "max_fwd" not in rows[0]


def test_sweep_single_state(runner, tmp_path):
    path = write_mdp(tmp_path, make_mdp(np.ones((1, 2, 1)), [0.0]))
    rows = rows_of(run(runner, "sweep", path).stdout)
    assert len(rows) == 1
    r = rows[0]
    for col in ("I_ZS", "J_fwd", "J_state", "J_inv", "J_inv_plus_R"):
        assert float(r[col]) == 0.0
    assert float(r["normalized_return"]) == 1.0


def test_sweep_out_file_and_determinism(runner, tmp_path):
    # the noise scenario is covered by the acceptance suite
    for name in ("jstate", "jinv"):
        a, b = tmp_path / f"{name}1.csv", tmp_path / f"{name}2.csv"
        run(runner, "sweep", "--scenario", name, "--out", str(a))
        run(runner, "sweep", "--scenario", name, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes() and a.read_bytes().endswith(b"\n")


def test_sweep_threads_do_not_change_output(runner, monkeypatch):
    one = run(runner, "sweep", "--scenario", "jinv").stdout
    monkeypatch.setenv("REPSUFF_THREADS", "4")
    assert run(runner, "sweep", "--scenario", "jinv").stdout == one


def test_sweep_guard(runner, tmp_path):
    n = 14
    t = np.zeros((n, 1, n))
    t[np.arange(n), 0, (np.arange(n) + 1) % n] = 1.0
    path = write_mdp(tmp_path, make_mdp(t, np.zeros(n)))
    res = run(runner, "sweep", path)
    assert res.exit_code == 3
    assert "Bell" in res.stderr


def test_check_exit_codes(runner):
    res = run(runner, "check", "--scenario", "jstate", "--partition", "{s0,s3|s1|s2}")
    assert res.exit_code == 2 and "witness (s0, s3)" in res.stdout
    res = run(runner, "check", "--scenario", "jstate", "--partition", "{s0|s1|s2|s3}")
    assert res.exit_code == 0
    res = run(runner, "check", "--scenario", "jinv", "--partition", "{s0,s1|s2|s3|s4|s5}")
    assert res.exit_code == 2


def test_check_usage_errors(runner):
    res = run(runner, "check", "--scenario", "jstate", "--partition", "{s0,s9|s1|s2|s3}")
    assert res.exit_code == 1 and "s9" in res.stderr
    assert run(runner, "check", "--scenario", "jstate").exit_code == 1
    assert run(runner, "check", "--partition", "{s0}").exit_code == 1
    assert run(runner, "bogus").exit_code == 1


def test_parse_error_exit_code(runner, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("states: [s0]\nactions: [a0]\ngamma: 0.9\nrewards: {s0: 0}\n"
                    "transitions:\n  - {state: s0, action: a0, next: [[s0, 1.2]]}\n")
    res = run(runner, "check", str(path), "--partition", "{s0}")
    assert res.exit_code == 1 and "line 6" in res.stderr


def test_verify_props(runner):
    res = run(runner, "verify", "--prop", "2")
    assert res.exit_code == 0 and "ratio 0.500000" in res.stdout
    res = run(runner, "verify", "--prop", "3")
    assert res.exit_code == 0 and "J_inv + I(R;Z)" in res.stdout
    res = run(runner, "verify", "--prop", "1", "--seeds", "10", "--size", "4")
    assert res.exit_code == 0 and "10/10" in res.stdout


def test_identity_pass_fail(runner):
    res = run(runner, "identity", "--scenario", "jstate", "--partition", "{s0|s1|s2|s3}",
              "--horizon", "3")
    assert res.exit_code == 0 and "PASS" in res.stdout
    res = run(runner, "identity", "--scenario", "jinv", "--partition", "{s0,s1|s2|s3|s4|s5}",
              "--horizon", "2")
    assert res.exit_code == 2 and "FAIL" in res.stdout


def test_identity_guard(runner):
    res = run(runner, "identity", "--scenario", "noise", "--partition",
              "{s0.c0|s0.c1|s1.c0|s1.c1|s2.c0|s2.c1|s3.c0|s3.c1}", "--horizon", "9")
    assert res.exit_code == 3 and "trajectories" in res.stderr


def test_export_round_trip(runner, tmp_path):
    out = tmp_path / "j.yaml"
    run(runner, "export", "--scenario", "jstate", "--out", str(out))
    first = out.read_bytes()
    res = run(runner, "check", str(out), "--partition", "{s0,s3|s1|s2}")
    assert res.exit_code == 2
    run(runner, "export", "--scenario", "jstate", "--out", str(out))
    assert out.read_bytes() == first


def test_bell(runner):
    assert run(runner, "bell", "6").stdout.strip() == "203"
