import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import hyperham as hh

SCENARIOS = Path(os.environ.get("HYPERHAM_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def test_quaternion_relations():
    k1, k2, k3 = hh.standard_quaternion_triple()
    assert np.array_equal(k1 @ k2, k3)
    assert hh.quaternion_relation_residual([k1, k2, k3]) == 0.0
    for c in hh.commutant_triple():
        for k in (k1, k2, k3):
            assert np.array_equal(c @ k, k @ c)
    assert np.array_equal(hh.standard_symplectic_2d(), [[0, -1], [1, 0]])


def test_generator_validation():
    ok = hh.validate_generators("quaternion")
    assert ok["valid"] and ok["max_residual"] == 0.0
    k1 = hh.standard_quaternion_triple()[0]
    bad = hh.validate_generators([k1, k1])
    assert not bad["valid"]
    assert bad["max_residual"] == pytest.approx(2.0)


def test_exact_flow_quarter_turn():
    x = hh.exact_flow(np.array([[1.0, 0.0, 0.0]]), np.array([1.0, 0, 0, 0]), math.pi / 2)
    assert np.allclose(x, [0, -1, 0, 0], atol=1e-15)


def test_rk4_matches_exact():
    nu = np.array([[0.3, -0.7, 0.5]])
    x0 = np.array([0.2, 0.4, -0.1, 0.9])
    rk = hh.integrate_oscillator(nu, x0, 10.0, 1e-3, "rk4", stride=100)
    ex = hh.integrate_oscillator(nu, x0, 10.0, 0.1, "exact")
    assert rk["states"].shape == ex["states"].shape == (101, 4)
    assert np.max(np.abs(rk["states"] - ex["states"])) < 1e-9


def test_hopf_map_invariant():
    k1 = hh.standard_quaternion_triple()[0]
    assert np.allclose(hh.hopf_map(np.array([1.0, 0, 0, 0]), k1), [0, 0, 1])


def test_pauli():
    b = np.array([0.3, -0.4, 1.2])
    xi = np.array([0.1, 0.2, -0.5, 0.7])
    assert np.max(np.abs(hh.pauli_field(b, xi) - hh.pauli_generator(b) @ xi)) < 1e-13
    assert np.array_equal(hh.spinor_to_r4(1j, 0), [0, 1, 0, 0])
    up, down = hh.r4_to_spinor(np.array([0.0, 1.0, 2.0, 3.0]))
    assert up == 1j and down == 2 + 3j
    s = 1 / math.sqrt(2)
    assert np.allclose(hh.bloch_vector(s, s), [1, 0, 0])
    run = hh.evolve_pauli(np.array([0.0, 0.0, 1.0]), 1, 0, 10.0, 1e-3, "exact")
    t = np.array(run["times"])
    assert np.max(np.abs(run["states"][:, 0] - np.exp(1j * t))) < 1e-13


def test_scenarios_end_to_end(tmp_path):
    for path in sorted(SCENARIOS.glob("*.json")):
        scenario = hh.load_scenario(str(path))
        assert scenario["schema_version"] == 1
        assert hh.validate(str(path))["exit_code"] == 0
        out = tmp_path / path.stem
        sim = hh.simulate(str(path), str(out))
        assert sim["exit_code"] == 0, sim["report"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["samples"] == sim["summary"]["samples"]
        diag = hh.diagnose(str(path), str(out / "trajectory.csv"))
        assert diag["exit_code"] == 0, diag["report"]


def test_errors_map_to_python_exceptions():
    with pytest.raises(OSError):
        hh.load_scenario("/nonexistent.json")
    with pytest.raises(ValueError):
        hh.validate_generators("octonion")
