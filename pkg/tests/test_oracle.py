import numpy as np
import pytest

from coopmec.dual import DualPoint
from coopmec.model import Allocation, check_feasible, total_energy
from coopmec.oracle import (
    comp_coop_grid,
    kkt_residuals,
    max_kkt_residual,
    oracle_comm_coop,
    oracle_p11,
    refine_grid,
)
from coopmec.p1 import solve_p1
from conftest import desk_params


def test_refine_grid_quadratic_bowl():
    def fn(axes):
        x, y = axes
        return (x - 0.3) ** 2 + 2.0 * (y + 0.7) ** 2

    x, v = refine_grid(fn, [-2.0, -2.0], [2.0, 2.0], pts=9, rounds=30)
    assert v == pytest.approx(0.0, abs=1e-10)
    assert x[0] == pytest.approx(0.3, abs=1e-5)
    assert x[1] == pytest.approx(-0.7, abs=1e-5)


def test_refine_grid_with_infeasible_region():
    def fn(axes):
        (x,) = axes
        return np.where(x < 0.4, np.inf, (x - 0.1) ** 2)

    x, v = refine_grid(fn, [0.0], [2.0], pts=9, rounds=30)
    assert x[0] == pytest.approx(0.4, abs=1e-5)
    assert v == pytest.approx(0.09, rel=1e-4)


def test_refine_grid_all_infeasible():
    def fn(axes):
        (x,) = axes
        return np.full_like(x, np.inf)

    x, v = refine_grid(fn, [0.0], [1.0], pts=5, rounds=4)
    assert x is None and v == np.inf


def test_oracle_zero_task():
    res = oracle_p11(desk_params(L=0.0), budget=1)
    assert res.feasible and res.energy == 0.0


def test_oracle_free_helper_limit():
    # (almost) free helper: the optimum collapses to shipping everything
    p = desk_params(T=0.05, L=1e5, h01=1e-3, kappa_h=1e-40, f_h_max=1e12)
    res = oracle_p11(p, budget=2)
    assert res.feasible
    assert res.allocation.l_h == pytest.approx(p.L, rel=1e-2)
    assert res.energy < 1e-5


def test_oracle_output_is_feasible(p_default):
    res = oracle_p11(p_default, budget=2)
    assert res.feasible
    assert check_feasible(res.allocation, p_default).feasible(1e-9)
    assert res.energy == pytest.approx(total_energy(res.allocation, p_default), rel=1e-12)


def test_oracle_deterministic(p_default):
    a = oracle_p11(p_default, budget=2)
    b = oracle_p11(p_default, budget=2)
    assert a.energy == b.energy


def test_oracle_monotone_in_budget():
    p = desk_params(T=0.03)
    energies = [oracle_p11(p, budget=b).energy for b in (1, 2, 3)]
    for lo, hi in zip(energies[1:], energies[:-1]):
        assert lo <= hi + 1e-12 * max(1.0, abs(hi))


def test_oracle_agrees_with_solver(p_default):
    rep = solve_p1(p_default)
    res = oracle_p11(p_default, budget=2)
    assert abs(rep.energy - res.energy) / res.energy <= 1e-3


def test_oracle_comm_pins_variables():
    p = desk_params(T=0.03)
    res = oracle_comm_coop(p, budget=2)
    assert res.feasible
    a = res.allocation
    assert a.tau1 == 0.0 and a.l_h == 0.0 and a.l_a == p.L


def test_comp_coop_grid_infeasible():
    tau, e = comp_coop_grid(desk_params(T=0.01, L=1e6))
    assert e == np.inf


def test_kkt_residuals_at_constructed_stationary_point():
    # build an interior point straight from the first-order conditions and
    # check the instrument reads (almost) zero
    p = desk_params(T=0.1, L=2e4)
    rep = solve_p1(p)
    assert rep.ok
    r = max_kkt_residual(rep.allocation, rep.dual, p)
    assert r <= 1e-6


def test_kkt_residuals_flag_non_optimal_point(p_default):
    # an arbitrary feasible-but-suboptimal pair shows a visible violation
    a = Allocation.build(p_default, l_u=p_default.L)
    d = DualPoint(1e-7, 1e-7, 1e-7, 1e-2, 1e-9)
    r = kkt_residuals(a, d, p_default)
    assert max(r.values()) > 1e-3


def test_kkt_residuals_exclude_boundary_rows(p_default):
    # all-boundary allocation: only slackness rows remain, and with zero
    # prices they are all zero
    a = Allocation.build(p_default, l_u=p_default.L)
    d = DualPoint(0.0, 0.0, 0.0, 0.0, 0.0)
    r = kkt_residuals(a, d, p_default)
    assert all(name.startswith("cs_") for name in r)
    assert max(r.values()) == 0.0


def test_kkt_residuals_small_at_solver_output():
    for T in (0.02, 0.05):
        p = desk_params(T=T)
        rep = solve_p1(p)
        assert rep.ok
        assert max_kkt_residual(rep.allocation, rep.dual, p) <= 1e-6
