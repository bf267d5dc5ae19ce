import numpy as np
import pytest

from coopmec.dual import Restriction
from coopmec.model import check_feasible, total_energy
from coopmec.oracle import oracle_p11
from coopmec.p1 import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    lmax_partial,
    recover_primal,
    solve_p1,
    solve_restricted,
)
from conftest import desk_params, random_params


def test_lmax_tiny_block():
    # a vanishing block supports (essentially) no bits
    p = desk_params(T=1e-9, L=1e-9)
    assert lmax_partial(p) < 10.0


def test_lmax_dead_channels_local_only():
    # channels carrying nothing leave exactly the local CPU capacity
    p = desk_params(h01=1e-30, h0=1e-30, h1=1e-30)
    cap = p.T * p.f_u_max / p.c_u
    assert lmax_partial(p) == pytest.approx(cap, rel=1e-6)


def test_lmax_increasing_in_T_and_above_local():
    prev = -1.0
    for T in np.linspace(0.01, 0.1, 10):
        p = desk_params(T=float(T), D=20.0)
        v = lmax_partial(p)
        assert v >= p.T * p.f_u_max / p.c_u - 1e-6
        assert v > prev
        prev = v


def test_solve_p1_zero_task():
    p = desk_params(L=0.0)
    rep = solve_p1(p)
    assert rep.ok
    assert rep.energy == 0.0
    assert rep.allocation.l_u == 0.0


def test_solve_p1_infeasible_reports_capacity():
    p = desk_params(T=0.01, L=1e9)
    rep = solve_p1(p)
    assert rep.status == STATUS_INFEASIBLE
    assert rep.l_max is not None and rep.l_max < 1e9
    assert rep.allocation is None


def test_solve_p1_free_helper_limit():
    # an (almost) free helper with a huge channel absorbs the entire task
    p = desk_params(T=0.05, L=1e5, h01=1e-3, kappa_h=1e-40, f_h_max=1e12)
    rep = solve_p1(p)
    assert rep.ok
    assert rep.allocation.l_h == pytest.approx(p.L, rel=1e-3)
    assert rep.energy < 1e-5  # shipping at enormous SNR costs next to nothing


def test_solve_p1_default_scenario_against_oracle(p_default):
    rep = solve_p1(p_default)
    assert rep.ok
    ora = oracle_p11(p_default, budget=2)
    assert ora.feasible
    assert rep.energy == pytest.approx(ora.energy, rel=1e-3)


def test_solve_p1_certificates(p_default):
    rep = solve_p1(p_default)
    assert rep.ok
    assert rep.duality_gap <= 1e-5
    assert rep.feasibility.feasible(1e-9)
    assert rep.dual is not None and rep.dual.feasible(p_default, tol=1e-12)
    assert rep.iterations > 0
    assert len(rep.trace) > 0


def test_solve_p1_monotone_in_T():
    prev = np.inf
    for T in (0.02, 0.04, 0.06, 0.08, 0.1):
        rep = solve_p1(desk_params(T=T))
        assert rep.ok
        assert rep.energy <= prev * (1.0 + 1e-9)
        prev = rep.energy


def test_recover_primal_strong_duality(p_default):
    rep = solve_p1(p_default)
    alloc = recover_primal(rep.dual, p_default)
    energy = total_energy(alloc, p_default)
    assert check_feasible(alloc, p_default).feasible(1e-9)
    assert energy == pytest.approx(rep.energy, rel=1e-6)


def test_recover_primal_local_pricing_only():
    # prices reward nothing but local computing: all bits stay at the user
    p = desk_params(T=0.1, L=2e4)
    mu2 = 3 * p.kappa_u * p.c_u**3 * (p.L / p.T) ** 2
    from coopmec.dual import DualPoint

    d = DualPoint(lam1=mu2, lam2=mu2, lam3=0.0, mu1=0.0, mu2=mu2)
    alloc = recover_primal(d, p)
    assert alloc.l_u == pytest.approx(p.L, rel=1e-9)
    assert alloc.l_h + alloc.l_a <= 1e-6 * p.L


def test_random_instances_gap_and_feasibility(rng):
    for _ in range(8):
        p = random_params(rng)
        rep = solve_p1(p)
        assert rep.ok, f"{p}"
        assert rep.duality_gap <= 1e-5
        assert rep.feasibility.feasible(1e-9)


def test_solve_restricted_comp_partial_structure(p_default):
    rest = Restriction(relay_path=False, l_a_pinned=0.0)
    rep = solve_restricted(desk_params(T=0.03), rest, "comp-partial")
    assert rep.ok
    a = rep.allocation
    assert a.l_a == 0.0
    assert a.tau2 == 0.0 and a.tau3 == 0.0
    assert a.l_u + a.l_h == pytest.approx(a.l_u + a.l_h + a.l_a, rel=1e-12)


def test_solve_restricted_comm_partial_structure():
    rest = Restriction(helper_path=False)
    rep = solve_restricted(desk_params(T=0.03), rest, "comm-partial")
    assert rep.ok
    a = rep.allocation
    assert a.tau1 == 0.0
    assert a.l_h == 0.0
