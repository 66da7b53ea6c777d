import json
import math
import os
import subprocess

import numpy as np
import pytest
from scipy.special import sici

import intermittent as im


def test_map_branches_and_inverse():
    m = im.IntermittentMap(0.3)
    for x in (0.01, 0.2, 0.45):
        assert m.f(x) == pytest.approx(x + x * (2 * x) ** 0.3, rel=1e-14)
        # Mirror symmetry f(1 - x) = 1 - f(x) on the circle.
        assert (m.f(1 - x) + m.f(x)) % 1.0 == pytest.approx(0.0, abs=1e-14)
    for y in (0.1, 0.5, 0.9):
        assert m.f(m.inverse(1, y)) == pytest.approx(y, abs=1e-14)


def test_partition_sequences_are_monotone():
    m = im.IntermittentMap(0.5)
    z, zp = im.partition_sequences(m, 200)
    assert np.all(np.diff(z) < 0)
    assert m.f(z[0]) == pytest.approx(0.5, abs=1e-14)
    for k in (0, 10, 150):
        assert m.f(z[k + 1]) == pytest.approx(z[k], rel=1e-12)
    # The mirror sequence is stored as distances to 1, equal by symmetry.
    assert np.allclose(zp, z, rtol=1e-14)


def test_density_at_zero_is_lebesgue():
    d = im.invariant_density(0.0, m_total=2048)
    assert d["converged"]
    assert np.max(np.abs(d["values"] - 1.0)) < 1e-8


def test_density_has_unit_mass_and_singularity():
    d = im.invariant_density(0.5, m_total=4096)
    widths = np.diff(d["edges"])
    assert float(np.dot(d["values"], widths)) == pytest.approx(1.0, abs=1e-10)
    assert d["values"][0] > 10 * d["values"][len(widths) // 2]


def test_response_at_zero_matches_sine_integral_series():
    closed = sum(sici(2 * math.pi * 2.0**j)[0] / (4 * math.pi * 2.0**j) for j in range(60))
    r = im.response(0.0, "cos", m_total=4096)
    assert r["converged"]
    assert abs(r["source_mass"]) < 1e-12
    assert r["formula"] == pytest.approx(closed, rel=2e-3)


def test_response_accepts_python_observable():
    named = im.response(0.2, "cos", m_total=2048)["formula"]
    custom = im.response(0.2, lambda x: math.cos(2 * math.pi * x), m_total=2048)["formula"]
    assert custom == pytest.approx(named, rel=1e-6)


def test_correlations_decay():
    seq = im.correlations(0.5, n_max=400, m_total=4096)
    fit = im.fit_decay(list(seq), 50, 400)
    assert fit["exponent"] < 0


def test_solenoid_step_contracts_fiber():
    a = im.solenoid_step(0.3, 0.2, 0.1, -0.2)
    b = im.solenoid_step(0.3, 0.2, -0.3, 0.4)
    assert a[0] == b[0]
    d0 = math.hypot(0.4, 0.6)
    assert math.hypot(a[1] - b[1], a[2] - b[2]) == pytest.approx(d0 / 5, rel=1e-12)


def test_birkhoff_constant_observable():
    mean, se = im.birkhoff(0.3, orbit_length=200000, streams=4)
    assert mean[2] == 1.0
    assert len(se) == 3


def test_run_experiment_kernel(tmp_path):
    out = im.run_experiment("kernel", [f"run.out={tmp_path}"])
    assert out["passed"]
    summary = json.loads((tmp_path / "kernel" / "summary.json").read_text())
    assert summary == out["summary"]


def test_unknown_config_key_raises():
    with pytest.raises(im.ConfigError):
        im.run_experiment("density", ["map.alpah=0.3"])


@pytest.mark.skipif("INTERMITTENT_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_code_for_bad_value(tmp_path):
    r = subprocess.run(
        [os.environ["INTERMITTENT_CLI"], "density", "--set", "map.alpha=two", "--out", str(tmp_path)],
        capture_output=True,
    )
    assert r.returncode == 2
