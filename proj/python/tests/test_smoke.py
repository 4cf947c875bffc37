import json
from pathlib import Path

import numpy as np
import pytest

import mpecsuite

DATA = Path(__file__).resolve().parents[2] / "data"


@pytest.fixture
def problem2():
    return mpecsuite.load(DATA / "problem2.json")


@pytest.fixture
def problem3():
    return mpecsuite.load(DATA / "problem3.json")


def test_instance_shape_and_round_trip(problem2):
    assert problem2.is_lcp_form
    assert (problem2.n, problem2.m) == (1, 1)
    again = mpecsuite.Instance.from_json(problem2.to_json())
    assert json.loads(again.to_json()) == json.loads(problem2.to_json())
    assert problem2.validate() == []


def test_pipa_lcp_on_problem2(problem2):
    rep = mpecsuite.solve(problem2, "pipa-lcp")
    assert rep["final_phi"] <= 1e-8
    assert rep["trace"][0]["iter"] == 0
    # the optimum (2, 0, 0) is biactive, so the run may end in a stall near it
    best = mpecsuite.oracle(problem2)
    assert best["best_value"] - 1e-8 <= rep["feasible_value"] <= best["best_value"] + 1e-3


def test_implicit_on_problem3(problem3):
    rep = mpecsuite.solve(problem3, "implicit")
    assert rep["status"] == "converged"
    assert rep["final_value"] == pytest.approx(-0.25, abs=1e-8)
    x = np.asarray(rep["final_point"]["x"])
    assert mpecsuite.is_stationary(problem3, x)


@pytest.mark.parametrize("algo", mpecsuite.ALGORITHMS)
def test_every_algorithm_runs(problem2, algo):
    rep = mpecsuite.solve(problem2, algo)
    assert rep["algo"] == algo
    assert rep["status"] in {"converged", "piece_stationary", "max_iterations", "nonstationary_stall"}


def test_params_and_errors(problem2):
    rep = mpecsuite.solve(problem2, "pipa-lcp", max_iters=1)
    assert rep["iters"] <= 1
    with pytest.raises(Exception):
        mpecsuite.solve(problem2, "pipa-lcp", no_such_param=1)
    with pytest.raises(Exception):
        mpecsuite.solve(problem2, "nope")
    with pytest.raises(mpecsuite.MpecError) as info:
        mpecsuite.Instance.load(str(DATA / "missing.json"))
    assert info.value.code == "Io"


def test_lower_level_and_merits(problem2):
    x = mpecsuite.default_x0(problem2)
    y, w = mpecsuite.lower_solve(problem2, x)
    assert float(y @ w) == pytest.approx(0.0, abs=1e-12)
    assert mpecsuite.phi(problem2, x, y, w, kind="lcp") == pytest.approx(0.0, abs=1e-12)
    assert mpecsuite.feasible_objective(problem2, x) == pytest.approx(
        mpecsuite.objective(problem2, x, y, w))


def test_solve_lcp():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    q = np.array([-1.0, -1.0])
    y, w, method = mpecsuite.solve_lcp(M, q)
    assert np.allclose(w, M @ y + q)
    assert y.min() >= 0 and w.min() >= -1e-12
    assert abs(y @ w) <= 1e-12
    assert method in {"trivial", "lemke", "enumeration"}


def test_cli_check(problem2):
    code, out, err = mpecsuite.run_cli(["check", "--instance", str(DATA / "problem2.json")])
    assert code == 0, err
    assert json.loads(out)["valid"] is True
