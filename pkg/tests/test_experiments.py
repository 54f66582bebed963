import csv
import math
from pathlib import Path

import numpy as np
import pytest

from twomode import experiments as ex

GOLDEN = Path(__file__).parent / "golden" / "uncertainty_n100.csv"


def test_parse_n_list_pairs():
    assert ex.parse_n_list([10, "pair:20", 5]) == [10, 20, 21, 5]
    with pytest.raises(ValueError):
        ex.parse_n_list([])
    with pytest.raises(ValueError):
        ex.parse_n_list([0])


def test_default_grid_shape():
    g = ex.default_g_grid()
    assert g.size == 123
    assert g[61] == 0.0
    assert g[0] == -1e6 and g[-1] == 1e6 and g[62] == pytest.approx(1e-2)
    assert np.all(np.diff(g) > 0)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        ex.SweepSpec([10], [])
    with pytest.raises(ValueError):
        ex.SweepSpec([10], [float("nan")])
    with pytest.raises(ValueError):
        ex.SweepSpec([10], [1.0], delta_e=0.0)


def test_scaling_spec_validation():
    with pytest.raises(ValueError):
        ex.ScalingSpec([10, 300], fit_window=(10, 200))
    with pytest.raises(ValueError):
        ex.ScalingSpec([10, 20], branch="sideways")


def test_ground_sweep_rows_and_zero_point():
    rows = ex.ground_sweep(ex.SweepSpec([4], [-1.0, 0.0, 2.0]))
    assert [r["g_param"] for r in rows] == [-1.0, 0.0, 2.0]
    zero = rows[1]
    assert zero["g"] == 0.0 and zero["error"] == ""
    assert zero["visibility"] == pytest.approx(1.0)
    assert zero["dtheta2"] == pytest.approx(0.25)


def test_ground_sweep_cat_limit_survives():
    rows = ex.ground_sweep(ex.SweepSpec([4, 100], [-1e6]))
    assert all(r["error"] == "" for r in rows)
    for r in rows:
        assert r["visibility"] < 1e-4 and r["dtheta2"] > 1e6


def test_ground_sweep_error_marker(monkeypatch):
    def boom(state):
        raise ArithmeticError("forced")

    monkeypatch.setattr(ex, "uncertainty_report", boom)
    rows = ex.ground_sweep(ex.SweepSpec([3], [1.0, 2.0]))
    assert all("forced" in r["error"] for r in rows)
    assert [r["g_param"] for r in rows] == [1.0, 2.0]


def test_ground_sweep_outputs_filter():
    rows = ex.ground_sweep(ex.SweepSpec([6], [1.0], outputs=["visibility"]))
    assert set(rows[0]) == {"n", "g_param", "g", "delta_e", "visibility", "error"}


def test_threads_do_not_change_order():
    spec = ex.SweepSpec(["pair:8"], list(np.linspace(-3, 3, 13)))
    a = ex.ground_sweep(spec, threads=1)
    b = ex.ground_sweep(spec, threads=4)
    assert [(r["n"], r["g_param"], r["energy"]) for r in a] == [(r["n"], r["g_param"], r["energy"]) for r in b]


def test_sweep_reproduces_dense_uncertainty_curves():
    with open(GOLDEN) as fh:
        ref = list(csv.DictReader(fh))
    rows = ex.ground_sweep(ex.SweepSpec([100], [float(r["g_param"]) for r in ref]))
    for r, got in zip(ref, rows):
        for key in ("var_jy", "var_jz", "uncertainty_product", "uncertainty_bound"):
            assert got[key] == pytest.approx(float(r[key]), rel=1e-8, abs=1e-12), (r["g_param"], key)


def test_scaling_reference_columns():
    rows, slope, resid = ex.scaling_study(ex.ScalingSpec([10, 20, 40], "attractive", (10, 40)))
    for r in rows:
        assert r["sql"] == 1.0 / r["n"]
        assert r["hl"] == 1.0 / r["n"] ** 2
        assert r["in_fit"] == 1
    assert slope < -1


def test_fit_power_law_exact():
    ns = np.array([10, 20, 40, 80])
    slope, resid = ex.fit_power_law(ns, 3.0 * ns**-1.5)
    assert slope == pytest.approx(-1.5, abs=1e-12)
    assert resid < 1e-12


def test_scaling_excludes_undefined_points(monkeypatch):
    real = ex.scaling_point

    def fake(n, spec):
        row = real(n, spec)
        if n == 20:
            row.update(dtheta2=float("nan"), excluded=1, error="forced")
        return row

    monkeypatch.setattr(ex, "scaling_point", fake)
    rows, slope, _ = ex.scaling_study(ex.ScalingSpec([10, 20, 30, 40], "repulsive", (10, 40)))
    assert [r["in_fit"] for r in rows] == [1, 0, 1, 1]


def test_optimised_repulsive_g_is_a_minimum():
    from twomode.hamiltonian import TwoModeParams, ground_state
    from twomode.observables import predicted_rotated_resolution

    g = ex._optimal_repulsive_g(21)
    f = lambda x: predicted_rotated_resolution(ground_state(TwoModeParams.from_g_param(21, x), warn=False).state)
    assert f(g) <= f(0.8 * g) and f(g) <= f(1.25 * g)


def test_dynamics_run_first_row_is_static_ground_state():
    from twomode.hamiltonian import TwoModeParams, ground_state
    from twomode.observables import phase_resolution

    cfg = ex.DynamicsConfig(n=20, tau=4.0, post_gamma=5.0)
    rows = ex.dynamics_run(cfg)
    g0 = cfg.protocol().g0
    ref = phase_resolution(ground_state(TwoModeParams(20, g0, math.exp(-0.25))).state)
    assert rows[0]["t"] == 0.0
    assert rows[0]["dtheta2"] == pytest.approx(ref, rel=1e-12)
    assert rows[0]["g_param"] == pytest.approx(-0.1, rel=1e-12)
    for key in ("t", "g", "delta_e", "g_param", "dtheta2", "xi_y", "ground_dtheta2", "fidelity", "tau", "gamma"):
        assert key in rows[0]


def test_dynamics_config_defaults():
    rep = ex.DynamicsConfig(n=10, branch="repulsive")
    assert rep.target_g_param == 50.0 and rep.g_param0 == 0.1
    assert rep.protocol().pulse is not None
    with pytest.raises(ValueError):
        ex.DynamicsConfig(branch="sideways")


def test_expansion_render_columns_and_integral():
    rows = ex.expansion_render(ex.ExpansionConfig(n=40, g_param=1.0, points=4001))
    y = np.array([r["y"] for r in rows])
    dens = np.array([r["density"] for r in rows])
    assert np.trapezoid(dens, y) == pytest.approx(40.0, abs=1e-6 * 40)
    r = rows[len(rows) // 3]
    assert r["lower"] == pytest.approx(r["density"] - r["noise"])
    assert r["upper"] == pytest.approx(r["density"] + r["noise"])
    assert {"n", "g_param", "d", "t", "theta", "mode_density"} <= set(r)


def test_expansion_theta_pi_inverts_centre():
    a = ex.expansion_render(ex.ExpansionConfig(n=60, points=2001))
    b = ex.expansion_render(ex.ExpansionConfig(n=60, points=2001, theta=math.pi))
    mid = len(a) // 2
    assert a[mid]["y"] == pytest.approx(0.0, abs=1e-12)
    assert a[mid]["density"] < 0.05 * b[mid]["density"]
