import csv
import io
import json

import numpy as np
import pytest

import worldline as wl
from worldline.diagnostics import continuum_charge_t, interior_slice


def straight_line_state(cfg):
    return wl.initial_guess(cfg)


def test_charge_on_free_straight_line(free_cfg):
    s = straight_line_state(free_cfg)
    q = wl.noether_charge_t(s.t1, s.x1, free_cfg)
    np.testing.assert_allclose(q, np.ones(free_cfg.n_gamma), atol=1e-12)


def test_continuum_charge_values(linear_cfg, quartic_cfg):
    assert continuum_charge_t(linear_cfg) == pytest.approx(1.5)
    assert continuum_charge_t(quartic_cfg) == pytest.approx(2.0)


def test_charge_deviation_first_entry(linear_cfg, linear_solution):
    delta = wl.charge_deviation(
        linear_solution.state.t1, linear_solution.state.x1, linear_cfg
    )
    # pinned by the initial conditions, so zero at solver tolerance
    assert abs(delta[0]) <= 1e-12


@pytest.mark.parametrize(
    "fixture,cfg_fixture,endpoint_bound",
    [
        ("linear_solution", "linear_cfg", 2e-3),
        ("quartic_solution", "quartic_cfg", None),
    ],
)
def test_interior_conservation(fixture, cfg_fixture, endpoint_bound, request):
    sol = request.getfixturevalue(fixture)
    cfg = request.getfixturevalue(cfg_fixture)
    delta = wl.charge_deviation(sol.state.t1, sol.state.x1, cfg)
    assert np.max(np.abs(delta[interior_slice])) <= 1e-9
    if endpoint_bound is not None:
        assert abs(delta[-1]) < endpoint_bound


def test_linear_sbp42_endpoint_deviation():
    cfg = wl.ProblemConfig(
        potential=wl.linear_potential(0.25), n_gamma=32, order="sbp42"
    )
    sol = wl.solve(cfg)
    delta = wl.charge_deviation(sol.state.t1, sol.state.x1, cfg)
    assert np.max(np.abs(delta[interior_slice])) <= 1e-9
    assert abs(delta[-1]) <= 1e-5


def test_geodesic_residuals_free_line(free_cfg):
    s = straight_line_state(free_cfg)
    dg_t, dg_x = wl.geodesic_residuals(s.t1, s.x1, free_cfg)
    assert np.max(np.abs(dg_t)) <= 1e-12
    assert np.max(np.abs(dg_x)) <= 1e-12


@pytest.mark.parametrize(
    "fixture,cfg_fixture", [("linear_solution", "linear_cfg"), ("quartic_solution", "quartic_cfg")]
)
def test_residual_support_last_two_points(fixture, cfg_fixture, request):
    sol = request.getfixturevalue(fixture)
    cfg = request.getfixturevalue(cfg_fixture)
    dg_t, dg_x = wl.geodesic_residuals(sol.state.t1, sol.state.x1, cfg)
    assert np.max(np.abs(dg_t[:-2])) <= 1e-9
    assert np.max(np.abs(dg_x[:-2])) <= 1e-9
    # the last two entries genuinely deviate
    assert np.max(np.abs(dg_t[-2:])) > 1e-9 or np.max(np.abs(dg_x[-2:])) > 1e-9


def test_residual_support_widens_with_sbp42_closure():
    # the fourth-order closure spans four rows, so the deviation occupies
    # the last few points instead of the last two; the bulk stays clean
    cfg = wl.ProblemConfig(
        potential=wl.quartic_potential(0.5), n_gamma=32, order="sbp42"
    )
    sol = wl.solve(cfg)
    dg_t, dg_x = wl.geodesic_residuals(sol.state.t1, sol.state.x1, cfg)
    assert np.max(np.abs(dg_t[:-6])) <= 1e-9
    assert np.max(np.abs(dg_x[:-6])) <= 1e-9


def test_free_case_charges_straight_line(free_cfg):
    s = straight_line_state(free_cfg)
    q_x, q_boost = wl.free_case_charges(s.t1, s.x1, free_cfg)
    np.testing.assert_allclose(q_x, -0.1 * np.ones(free_cfg.n_gamma), atol=1e-12)
    # boost charge equals its initial value x_i * tdot_i everywhere
    np.testing.assert_allclose(q_boost, np.ones(free_cfg.n_gamma), atol=1e-12)


def test_free_case_charges_after_solve(free_cfg, free_solution):
    q_x, q_boost = wl.free_case_charges(
        free_solution.state.t1, free_solution.state.x1, free_cfg
    )
    assert np.max(np.abs(q_x - q_x[0])) <= 1e-10
    assert np.max(np.abs(q_boost - q_boost[0])) <= 1e-10


def test_free_case_charges_requires_free_potential(linear_cfg, linear_solution):
    with pytest.raises(wl.NotFreePotential):
        wl.free_case_charges(
            linear_solution.state.t1, linear_solution.state.x1, linear_cfg
        )


def test_h_bvp_free_profile(free_cfg):
    s = straight_line_state(free_cfg)
    hb = wl.h_bvp_profile(s.t1, s.x1, free_cfg)
    expected = 0.5 * (free_cfg.tdot_i ** 2 + free_cfg.xdot_i ** 2)
    np.testing.assert_allclose(hb.profile, expected, rtol=1e-12)
    assert np.all(hb.profile > 0)


@pytest.mark.parametrize(
    "fixture,cfg_fixture",
    [
        ("linear_solution", "linear_cfg"),
        ("quartic_solution", "quartic_cfg"),
        ("free_solution", "free_cfg"),
    ],
)
def test_h_bvp_linear_growth_bound(fixture, cfg_fixture, request):
    sol = request.getfixturevalue(fixture)
    cfg = request.getfixturevalue(cfg_fixture)
    hb = wl.h_bvp_profile(sol.state.t1, sol.state.x1, cfg)
    assert hb.total <= hb.bound + 1e-8


def test_error_norms_zero_for_identical():
    rng = np.random.default_rng(0)
    op = wl.build_sbp21(9, 1 / 8)
    t = rng.standard_normal(9)
    x = rng.standard_normal(9)
    err = wl.error_norms(t, x, t, x, op.h)
    assert err.eps_final_x == err.eps_final_t == 0.0
    assert err.eps_l2_x == err.eps_l2_t == 0.0


def test_error_norms_constant_offset():
    op = wl.build_sbp21(17, 1 / 16)
    t = np.linspace(0.0, 1.0, 17)
    x = np.linspace(1.0, 1.1, 17)
    delta = 0.01
    err = wl.error_norms(t, x + delta, t, x, op.h)
    assert err.eps_l2_x == pytest.approx(delta * np.sqrt(1.0), rel=1e-12)
    assert err.eps_l2_t == 0.0
    assert err.eps_final_x == pytest.approx(delta)


def test_error_norms_dimension_mismatch():
    op = wl.build_sbp21(9, 1 / 8)
    with pytest.raises(ValueError):
        wl.error_norms(np.ones(9), np.ones(9), np.ones(8), np.ones(8), op.h)


def test_diagnose_rejects_split_branches(free_cfg):
    s = straight_line_state(free_cfg)
    split = wl.StateVector(
        t1=s.t1, t2=s.t2 + 1e-6, x1=s.x1, x2=s.x2, lam=s.lam
    )
    with pytest.raises(wl.PhysicalLimitViolation):
        wl.diagnose(split, free_cfg)


def test_diagnose_report_contents(linear_cfg, linear_solution):
    oracle = wl.solve_geodesic_ode(linear_cfg)
    report = wl.diagnose(linear_solution.state, linear_cfg, reference=oracle)
    assert report.n == linear_cfg.n_gamma
    assert report.q_x is None and report.q_boost is None
    assert report.eps_final_x is not None and report.eps_final_x < 1e-3
    assert report.max_interior_delta_e <= 1e-9
    summary = json.loads(report.summary_json())
    assert summary["delta_e_end"] == report.delta_e_end


def test_diagnose_with_reference_arrays(free_cfg, free_solution):
    gamma = free_cfg.gamma_grid
    t_ref = free_cfg.t_i + free_cfg.tdot_i * gamma
    x_ref = free_cfg.x_i + free_cfg.xdot_i * gamma
    report = wl.diagnose(free_solution.state, free_cfg, reference=(t_ref, x_ref))
    assert report.eps_l2_x <= 1e-10
    assert report.q_x is not None


def test_report_csv_round_trip(linear_cfg, linear_solution):
    report = wl.diagnose(linear_solution.state, linear_cfg)
    buf = io.StringIO()
    report.write_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == [
        "gamma", "t", "x", "dt_dgamma", "q_t", "delta_e", "delta_g_t", "delta_g_x", "h_bvp",
    ]
    assert len(rows) == 1 + linear_cfg.n_gamma
    parsed = np.array([[float(v) for v in row] for row in rows[1:]])
    np.testing.assert_array_equal(parsed[:, 0], report.gamma)
    np.testing.assert_array_equal(parsed[:, 4], report.q_t)
