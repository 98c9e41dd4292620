import math
import os

import pytest

import oncovir


def test_threshold_and_coexistence():
    p = oncovir.ModelParams.baseline(0.002)
    assert oncovir.beta_star(p) == pytest.approx(0.0011432, abs=1e-7)
    eq = oncovir.coexistence(p)
    u, v, i = eq["state"]
    assert eq["biological"] and eq["stable"]
    assert u == pytest.approx(0.5716098, rel=1e-6)
    assert v == pytest.approx(54.852296, rel=1e-6)
    assert i == pytest.approx(0.002 * u * v / 1.0, rel=1e-12)
    assert max(abs(x) for x in oncovir.rhs(eq["state"], p)) < 1e-10


def test_params_fields_round_trip():
    p = oncovir.ModelParams.baseline()
    p.delta_i = 1.2
    d = p.to_dict()
    assert d["delta_i"] == 1.2 and d["alpha"] == 3500.0
    q = oncovir.ModelParams()
    for k, x in d.items():
        setattr(q, k, x)
    assert q == p
    p.alpha = 0.5
    with pytest.raises(ValueError):
        p.validate()


def test_beta_branch_events():
    b = oncovir.continue_branch(oncovir.ModelParams.baseline(), "beta", 0.001, 0.012)
    kinds = [(e["kind"], e["param"]) for e in b["events"]]
    assert [k for k, _ in kinds] == ["branch_point", "hopf"]
    assert kinds[0][1] == pytest.approx(0.00114, rel=5e-3)
    assert kinds[1][1] == pytest.approx(0.00871, rel=1e-2)
    assert b["param"][0] == 0.001 and b["param"][-1] == 0.012
    with pytest.raises(ValueError):
        oncovir.continue_branch(oncovir.ModelParams.baseline(), "gamma", 0.0, 1.0)


def test_logistic_integration():
    p = oncovir.ModelParams.baseline()
    tr = oncovir.integrate(p, (0.05, 0.0, 0.0), 20.0, stride=1.0, rel_tol=1e-10, abs_tol=1e-12)
    for t, u in zip(tr["t"], tr["u"]):
        e = math.exp(0.3 * t)
        assert u == pytest.approx(0.05 * e / (0.95 + 0.05 * e), abs=1e-8)


def test_short_pde_run():
    p = oncovir.ModelParams.baseline()
    p.v0 = 0.0
    out = oncovir.run_pde(p, 10.0, stride=5.0)
    assert out["t"] == [0.0, 5.0, 10.0]
    assert out["front_u_mm"][0] == pytest.approx(2.625, abs=0.03)
    assert out["front_u_mm"][-1] > out["front_u_mm"][0]
    assert len(out["r"]) == 201


def test_calibration_and_scenario(tmp_path):
    c = oncovir.calibrate()
    assert c["front_speed"] == pytest.approx(0.085)
    assert c["params"] == oncovir.ModelParams.baseline()
    cfg = os.environ.get("ONCOVIR_CONFIG")
    if cfg is None:
        pytest.skip("ONCOVIR_CONFIG not set")
    assert "fig5_beta_branch" in oncovir.list_scenarios(cfg)
    files = oncovir.run_scenario(cfg, "calibration_report", str(tmp_path))
    assert "report.txt" in files
    with pytest.raises(ValueError):
        oncovir.run_scenario(cfg, "missing", str(tmp_path))
