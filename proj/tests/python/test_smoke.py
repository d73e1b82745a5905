import csv
import io
import json
import math
import os
import subprocess

import pytest

import fwt


def test_defaults_solve_to_case_two():
    r = fwt.solve()
    m = r["mechanism"]
    assert m["regime"] == 2
    assert m["rho_low"] == pytest.approx(5e-6)
    assert m["rho_high"] == pytest.approx(1.19778e-5, rel=1e-5)
    assert r["sufficient_fee"]["ok"]


def test_hetero_ratio_moves_low_fee():
    r = fwt.solve(hetero_ratio=10.0)
    assert r["mechanism"]["rho_low"] == pytest.approx(2.75e-5)


def test_overrides_and_validation():
    p = fwt.params({"impatience": 1e-4, "n_users_high": 50})
    assert p["impatience"] == 1e-4
    assert p["n_users_high"] == 50
    with pytest.raises(ValueError, match="block_rate must be positive"):
        fwt.params({"block_rate": 0})
    with pytest.raises(ValueError):
        fwt.params({"no_such_key": 1})


def test_waiting_rate_two_class_example():
    w = fwt.waiting_rate(1.0, 1.0, 1.0, 1.0, 2e-9, 1e-9,
                         {"n_users_high": 1, "n_users_low": 1, "n_miners": 1})
    assert w == pytest.approx(1 / 13 + 15 / 143)


def test_jain():
    assert fwt.jain_index([3.0, 3.0, 3.0]) == pytest.approx(1.0)
    assert fwt.jain_index([1.0, 0.0]) == pytest.approx(0.5)
    assert math.isnan(fwt.jain_index([0.0, 0.0]))


def test_sweep_csv():
    rows = list(csv.DictReader(io.StringIO(fwt.sweep("gamma", steps=4))))
    assert len(rows) == 4
    assert all(r["error"] == "" for r in rows)
    fees = [float(r["existing_avg_fee"]) for r in rows]
    assert fees == sorted(fees, reverse=True)


def test_simulate_is_seeded():
    a = fwt.simulate(horizon=300.0, replications=2, seed=5)
    b = fwt.simulate(horizon=300.0, replications=2, seed=5)
    assert a == b
    assert a["report"]["conservation_ok"]


def test_check_suite():
    r = fwt.check("fairness", budget=5)
    assert r["pass"]
    assert "fairness" in fwt.check_suites()


def test_cli_matches_module():
    cli = os.environ.get("FWT_CLI")
    if not cli:
        pytest.skip("CLI path not provided")
    out = subprocess.run([cli, "solve", "--param", "impatience=1e-4"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["mechanism"] == fwt.solve({"impatience": 1e-4})["mechanism"]
