import json
import math
import pathlib

import numpy as np
import pytest

import qlimit

FIGURES = pathlib.Path(__file__).resolve().parents[2] / "figures"


def qubit():
    return qlimit.build_qubit_limit(kappa_a1=0.5, alpha=10.0)


def test_model_shapes():
    m = qlimit.build_kerr(chi=-100.0, kappa_a1=0.5, alpha=10.0, dim=6)
    assert m.dims == [6]
    assert m.H.shape == (6, 6)
    assert np.allclose(m.H, m.H.conj().T)
    c = qlimit.build_chi2(g=-3000.0, kappa_b=5000.0, kappa_a1=0.5, alpha=10.0, dim_a=4, dim_b=3)
    assert c.dims == [4, 3]
    assert qlimit.build_tpa(gamma=200.0, kappa_a1=0.5, alpha=10.0).channels == 3


def test_qubit_steady_state():
    rho = qlimit.steady_state(qubit())
    assert rho[1, 1].real == pytest.approx(50.0 / 100.0625, abs=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)


def test_liouvillian_is_trace_free():
    m = qlimit.build_tpa(gamma=20.0, kappa_a1=0.5, alpha=2.0, dim=8)
    rng = np.random.default_rng(3)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    assert abs(np.trace(qlimit.liouvillian_apply(m, rho))) < 1e-10


def test_integrate_rabi_half_period():
    t = qlimit.integrate(qubit(), t_end=0.5, output_dt=1e-3)
    pop1 = np.array(t["columns"]["pop1"])
    k = int(np.argmax(pop1))
    assert t["times"][k] == pytest.approx(math.pi / (10.0 * math.sqrt(2.0)), rel=5e-3)
    assert t["max_trace_error"] < 1e-8
    assert t["final_state"].shape == (2, 2)


def test_wigner_and_delta_b():
    rho = np.zeros((6, 6), dtype=complex)
    rho[1, 1] = 1.0
    xs, ps, w = qlimit.wigner(rho, x_min=-1, x_max=1, p_min=-1, p_max=1, nx=3, np=3)
    assert w[1, 1] == pytest.approx(-2.0 / math.pi)
    assert qlimit.delta_B(rho) == pytest.approx(2.0 * math.log(2.0))


def test_compare_and_structure():
    pre = qlimit.build_kerr(chi=-100.0, kappa_a1=0.5, alpha=10.0)
    c = qlimit.compare(pre, qubit(), t_end=0.5)
    assert 0.0 < c["deviation"] < 0.02
    for family in ("kerr", "chi2", "tpa"):
        assert qlimit.verify_structural(family) <= 1e-12


def test_errors_map_to_python():
    with pytest.raises(qlimit.InvalidArgument):
        qlimit.integrate(qubit(), method="euler")
    with pytest.raises(qlimit.Error):
        qlimit.build_kerr(chi=-1.0, kappa_a1=-0.5, alpha=1.0)
    with pytest.raises(qlimit.ConfigError):
        qlimit.run_scenario(FIGURES / "fig1a.json", action="sweep")


def test_run_scenario(tmp_path):
    cfg = tmp_path / "q.json"
    cfg.write_text(json.dumps({"kind": "qubit-limit", "params": {"kappa_a1": 0.5, "alpha": 10},
                               "integrator": {"t_end": 0.2, "output_dt": 0.01}}))
    manifest = qlimit.run_scenario(cfg, action="steady", out_dir=tmp_path / "out")
    assert manifest["results"]["rho11"] == pytest.approx(50.0 / 100.0625, abs=1e-12)
    assert (tmp_path / "out" / "steady.csv").exists()


def test_selftest():
    assert all(passed for _, passed, _, _ in qlimit.selftest())
