"""Independent verification instruments.

oracle_p11 minimizes the convexified partial-offloading problem without
touching any of the dual/ellipsoid/recovery machinery: for fixed
(tau1, tau2, tau3, l_h, l_a) the minimum offload energies have closed or
one-dimensional-convex forms, so the remainder is a jointly convex 5-D
function minimized by an iteratively deepened shrinking grid. Slow by
design, exactly feasible by construction.

kkt_residuals checks stationarity and complementary slackness of a
(point, prices) pair, for use as a test instrument on solver output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dual import DualPoint
from .model import LN2, Allocation, SystemParams, r0, r01, r1, total_energy

_INV_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    energy: float
    allocation: Allocation | None


# -- vectorized channel helpers ------------------------------------------------


def _rate(P, g, B):
    return B * np.log2(1.0 + g * P)


def _pinv(rr, g, B):
    # power sustaining rate rr; overflow -> inf -> masked as infeasible
    with np.errstate(over="ignore"):
        return (np.exp2(rr / B) - 1.0) / g


def _relay_energy(la, t2, t3, p: SystemParams, want_powers: bool = False):
    """Least E2+E3 shipping la bits through the relay slots (t2, t3).

    Feasibility needs the decode hop to carry la in t2 and the forward
    deficit to fit the helper's power cap; the split between the two
    slots is a 1-D convex minimization in P2, solved by golden section.
    """
    la, t2, t3 = np.broadcast_arrays(
        np.asarray(la, float), np.asarray(t2, float), np.asarray(t3, float)
    )
    out = np.full(la.shape, np.inf)
    trivial = la <= 0.0
    out[trivial] = 0.0

    active = ~trivial & (t2 > 0.0)
    r1cap = _rate(p.P_h_max, p.g1, p.B)
    t2a, t3a, laa = t2[active], t3[active], la[active]
    with np.errstate(over="ignore", invalid="ignore"):
        p2_dec = _pinv(laa / t2a, p.g01, p.B)
        deficit = np.where(t3a > 0.0, laa - t3a * r1cap, laa)
        p2_fwd = _pinv(np.maximum(deficit, 0.0) / t2a, p.g0, p.B)
    lo = np.maximum(p2_dec, p2_fwd)
    ok = lo <= p.P_u_max * (1.0 + 1e-12)
    lo = np.minimum(lo, p.P_u_max)
    hi = np.full_like(lo, p.P_u_max)

    t3_safe = np.where(t3a > 0.0, t3a, 1.0)

    def cost(P2):
        need = np.maximum(laa - t2a * _rate(P2, p.g0, p.B), 0.0)
        e3 = t3a * _pinv(need / t3_safe, p.g1, p.B)
        return t2a * P2 + np.where(t3a > 0.0, e3, 0.0)

    a, b = lo.copy(), hi.copy()
    x1 = b - _INV_GOLD * (b - a)
    x2 = a + _INV_GOLD * (b - a)
    f1, f2 = cost(x1), cost(x2)
    for _ in range(60):
        take1 = f1 < f2  # the minimum lies in [a, x2]
        b = np.where(take1, x2, b)
        a = np.where(take1, a, x1)
        x1_old, f1_old, f2_old = x1, f1, f2
        x1 = np.where(take1, b - _INV_GOLD * (b - a), x2)
        x2 = np.where(take1, x1_old, a + _INV_GOLD * (b - a))
        probe = np.where(take1, x1, x2)
        fprobe = cost(probe)
        f1 = np.where(take1, fprobe, f2_old)
        f2 = np.where(take1, f1_old, fprobe)
    p2 = np.where(f1 < f2, x1, x2)
    best = np.minimum(np.minimum(cost(lo), cost(hi)), np.minimum(f1, f2))
    p2 = np.where(cost(lo) <= best, lo, np.where(cost(hi) <= best, hi, p2))

    vals = np.where(ok, best, np.inf)
    out[active] = vals
    if not want_powers:
        return out
    P2_full = np.zeros(la.shape)
    P3_full = np.zeros(la.shape)
    P2_full[active] = np.where(ok, p2, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        need = np.maximum(laa - t2a * _rate(p2, p.g0, p.B), 0.0)
        p3 = np.where(t3a > 0.0, _pinv(need / t3_safe, p.g1, p.B), 0.0)
    P3_full[active] = np.where(ok, p3, 0.0)
    return out, P2_full, P3_full


def _objective(p: SystemParams, axes: list[np.ndarray]) -> np.ndarray:
    """Total energy over an open (broadcastable) grid; inf = infeasible."""
    t1, t2, t3, lh, la = axes
    bit_eps = 1e-9 * max(p.L, 1.0)
    cap_u = p.T * p.f_u_max / p.c_u

    lu_raw = p.L - lh - la
    bad = (lu_raw < -bit_eps) | (lu_raw > cap_u + bit_eps)
    lu = np.clip(lu_raw, 0.0, cap_u)

    bad = bad | (t1 + t2 + t3 + la * p.c_a / p.f_a_max > p.T * (1.0 + 1e-12))

    # helper offload + helper computing
    window = p.T - t1
    bad = bad | ((lh > 0.0) & ((t1 <= 0.0) | (p.c_h * lh > window * p.f_h_max + bit_eps)))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        p1 = _pinv(np.where(t1 > 0.0, lh / np.where(t1 > 0.0, t1, 1.0), 0.0), p.g01, p.B)
        bad = bad | ((lh > 0.0) & (p1 > p.P_u_max * (1.0 + 1e-12)))
        e1 = np.where(lh > 0.0, t1 * p1, 0.0)
        e_h = np.where(lh > 0.0, p.kappa_h * p.c_h**3 * lh**3 / window**2, 0.0)
    e_u = p.kappa_u * p.c_u**3 * lu**3 / p.T**2
    e23 = _relay_energy(la, t2, t3, p)

    total = e1 + e_h + e_u + e23
    return np.where(bad, np.inf, total)


def refine_grid(fn, lo, hi, pts=9, rounds=24, rng=None):
    """Shrinking-grid minimizer for a (vectorized) convex function.

    fn maps a list of open-mesh coordinate arrays to a value array (inf
    allowed for infeasible points). Each round lays pts points per free
    dimension over the current box, then re-centers a ~0.6x box on the
    best point seen so far. Returns (best_x, best_value).
    """
    lo0 = np.asarray(lo, float).copy()
    hi0 = np.asarray(hi, float).copy()
    lo_c, hi_c = lo0.copy(), hi0.copy()
    dim = lo0.size
    best_x: np.ndarray | None = None
    best_v = np.inf
    densify = 0

    r = 0
    while r < rounds:
        axes = []
        for k in range(dim):
            n_k = pts if hi_c[k] > lo_c[k] else 1
            ax = np.linspace(lo_c[k], hi_c[k], n_k)
            if rng is not None and n_k > 2:
                cell = (hi_c[k] - lo_c[k]) / (n_k - 1)
                ax = ax + rng.uniform(-0.25, 0.25) * cell
                ax = np.clip(ax, lo0[k], hi0[k])
            shape = [1] * dim
            shape[k] = n_k
            axes.append(ax.reshape(shape))
        vals = fn(axes)
        flat = int(np.argmin(vals))
        v = float(vals.flat[flat])
        if v < best_v:
            idx = np.unravel_index(flat, vals.shape)
            best_v = v
            best_x = np.array(
                [axes[k].flat[idx[k] if axes[k].size > 1 else 0] for k in range(dim)]
            )
        if best_x is None:
            # nothing feasible sampled yet: densify before giving up
            if densify < 2:
                densify += 1
                pts = pts * 2 + 1
                continue
            return None, np.inf
        width = hi_c - lo_c
        cell = np.where(width > 0.0, width / max(pts - 1, 1), 0.0)
        half = np.maximum(0.25 * width, 2.5 * cell)
        lo_c = np.maximum(lo0, best_x - half)
        hi_c = np.minimum(hi0, best_x + half)
        r += 1
    return best_x, best_v


def oracle_p11(
    p: SystemParams,
    budget: int = 3,
    seed: int | None = None,
    pins: dict[str, float] | None = None,
) -> OracleResult:
    """Slow, independent minimizer of the partial-offloading problem.

    budget sets the refinement depth (monotone: a larger budget only
    appends rounds). pins fixes coordinates, e.g. the binary
    communication mode is pins={"tau1": 0, "l_h": 0, "l_a": L}.
    """
    if p.L == 0.0 and not (pins or {}).get("l_a"):
        return OracleResult(True, 0.0, Allocation.zero(p))

    r01m = r01(p.P_u_max, p)
    names = ("tau1", "tau2", "tau3", "l_h", "l_a")
    lo = np.zeros(5)
    hi = np.array([
        p.T, p.T, p.T,
        min(p.L, p.T * r01m, p.T * p.f_h_max / p.c_h),
        min(p.L, p.T * r01m, p.T * p.f_a_max / p.c_a),
    ])
    if pins:
        for name, v in pins.items():
            k = names.index(name)
            lo[k] = hi[k] = v

    rng = None if not seed else np.random.default_rng(seed)
    rounds = 12 + 5 * budget
    x, v = refine_grid(lambda ax: _objective(p, ax), lo, hi, pts=9,
                       rounds=rounds, rng=rng)
    if x is None:
        return OracleResult(False, float("inf"), None)

    t1, t2, t3, lh, la = (float(c) for c in x)
    lu = min(max(p.L - lh - la, 0.0), p.T * p.f_u_max / p.c_u)
    P1 = float(_pinv(lh / t1, p.g01, p.B)) if lh > 0.0 else 0.0
    _, P2, P3 = _relay_energy(
        np.array([la]), np.array([t2]), np.array([t3]), p, want_powers=True
    )
    alloc = Allocation.build(
        p, tau1=t1, tau2=t2, tau3=t3,
        P1=min(P1, p.P_u_max), P2=float(min(P2[0], p.P_u_max)),
        P3=float(min(P3[0], p.P_h_max)),
        l_u=lu, l_h=lh, l_a=la,
    )
    return OracleResult(True, total_energy(alloc, p), alloc)


def oracle_comm_coop(p: SystemParams, budget: int = 3, seed: int | None = None) -> OracleResult:
    """Grid oracle for the binary communication-cooperation mode."""
    return oracle_p11(p, budget=budget, seed=seed,
                      pins={"tau1": 0.0, "l_h": 0.0, "l_a": p.L})


def comp_coop_grid(p: SystemParams, n: int = 1_000_000) -> tuple[float, float]:
    """Dense 1-D grid for the binary computation-cooperation energy.

    Returns (tau1, energy) of the best grid point; infeasible -> inf.
    """
    lo = p.L / r01(p.P_u_max, p)
    hi = p.T - p.c_h * p.L / p.f_h_max
    if p.L <= 0.0:
        return 0.0, 0.0
    if lo > hi:
        return float("nan"), float("inf")
    t = np.linspace(lo, hi, n)
    with np.errstate(over="ignore"):
        e = (np.exp2(p.L / (p.B * t)) - 1.0) * t / p.g01
        e += p.kappa_h * p.c_h**3 * p.L**3 / (p.T - t) ** 2
    k = int(np.argmin(e))
    return float(t[k]), float(e[k])


# -- KKT residual instrument ----------------------------------------------------


def kkt_residuals(a: Allocation, d: DualPoint, p: SystemParams) -> dict[str, float]:
    """Scaled stationarity and complementary-slackness residuals.

    Stationarity rows are skipped for variables sitting on a box bound
    (their bound multipliers are not represented); each row is divided by
    the magnitude of its largest term. Slackness rows are price*violation
    in joules, relative to the total energy.
    """
    res: dict[str, float] = {}
    b_tol = 1e-9
    bit_scale = max(p.L, 1.0)
    e_scale = max(total_energy(a, p), 1e-30)

    def slope(P, g):
        return p.B * g / (LN2 * (1.0 + P * g))

    def interior(v, lo, hi, scale):
        return v > lo + b_tol * scale and v < hi - b_tol * scale

    # row anchors: a slot derivative is an energy rate, a bit derivative an
    # energy per bit; tie-degenerate rows have all terms microscopic, and
    # dividing by them alone would amplify noise into fake violations
    power_scale = e_scale / p.T
    price_scale = e_scale / bit_scale

    def station(name, terms, floor=1.0):
        scale = max(max(abs(t) for t in terms), floor, 1e-30)
        res[name] = abs(sum(terms)) / scale

    # energies: d(sub)/dE_i = 1 - price * rate-slope at P_i
    if a.tau1 > b_tol * p.T and interior(a.P1, 0.0, p.P_u_max, p.P_u_max):
        station("stat_E1", [1.0, -d.lam1 * slope(a.P1, p.g01)])
    if a.tau2 > b_tol * p.T and interior(a.P2, 0.0, p.P_u_max, p.P_u_max):
        station("stat_E2", [1.0, -d.lam2 * slope(a.P2, p.g0),
                            -d.lam3 * slope(a.P2, p.g01)])
    if a.tau3 > b_tol * p.T and interior(a.P3, 0.0, p.P_h_max, p.P_h_max):
        station("stat_E3", [1.0, -d.lam2 * slope(a.P3, p.g1)])

    # cap multipliers, reconstructed from the energy/bit stationarity rows
    # whenever a power or CPU-frequency cap is active at the point
    alpha1 = alpha2 = alpha3 = beta1 = 0.0
    if a.P1 >= p.P_u_max * (1.0 - b_tol):
        alpha1 = max(0.0, d.lam1 * slope(a.P1, p.g01) - 1.0)
    if a.P2 >= p.P_u_max * (1.0 - b_tol):
        alpha2 = max(0.0, d.lam2 * slope(a.P2, p.g0)
                     + d.lam3 * slope(a.P2, p.g01) - 1.0)
    if a.P3 >= p.P_h_max * (1.0 - b_tol):
        alpha3 = max(0.0, d.lam2 * slope(a.P3, p.g1) - 1.0)
    window = p.T - a.tau1
    if window > b_tol * p.T:
        m1 = a.l_h / window
        if m1 >= p.f_h_max / p.c_h * (1.0 - b_tol):
            beta1 = max(0.0, d.mu2 - d.lam1 - 3.0 * p.kappa_h * p.c_h**3 * m1**2)

    # slots: d/dtau_i = mu1 - price * (rate - P * slope) (+ compute release
    # and the cap couplings E_i <= tau_i P_max, c_h l_h <= (T-tau1) f_h_max)
    if interior(a.tau1, 0.0, p.T, p.T):
        station("stat_tau1", [
            d.mu1,
            -d.lam1 * (r01(a.P1, p) - a.P1 * slope(a.P1, p.g01)),
            2.0 * p.kappa_h * p.c_h**3 * a.l_h**3 / (p.T - a.tau1) ** 3,
            -alpha1 * p.P_u_max,
            beta1 * p.f_h_max / p.c_h,
        ], floor=power_scale)
    if interior(a.tau2, 0.0, p.T, p.T):
        station("stat_tau2", [
            d.mu1,
            -d.lam2 * (r0(a.P2, p) - a.P2 * slope(a.P2, p.g0)),
            -d.lam3 * (r01(a.P2, p) - a.P2 * slope(a.P2, p.g01)),
            -alpha2 * p.P_u_max,
        ], floor=power_scale)
    if interior(a.tau3, 0.0, p.T, p.T):
        station("stat_tau3", [
            d.mu1,
            -d.lam2 * (r1(a.P3, p) - a.P3 * slope(a.P3, p.g1)),
            -alpha3 * p.P_h_max,
        ], floor=power_scale)

    # bits: besides the frequency caps, a bit count equal to L is pinned
    # by the partition (the other two shares sit on their zero bounds)
    if interior(a.l_u, 0.0, min(p.T * p.f_u_max / p.c_u, p.L), bit_scale):
        station("stat_l_u", [3.0 * p.kappa_u * p.c_u**3 * a.l_u**2 / p.T**2, -d.mu2],
                floor=price_scale)
    window = p.T - a.tau1
    if window > b_tol * p.T and interior(
        a.l_h, 0.0, min(window * p.f_h_max / p.c_h, p.L), bit_scale
    ):
        station("stat_l_h", [
            3.0 * p.kappa_h * p.c_h**3 * a.l_h**2 / window**2, d.lam1, -d.mu2,
        ], floor=price_scale)
    if interior(a.l_a, 0.0, p.L, bit_scale):
        station("stat_l_a", [d.lam2, d.lam3, d.mu1 * p.c_a / p.f_a_max, -d.mu2],
                floor=price_scale)

    # complementary slackness, in joules relative to the total energy
    slacks = {
        "cs_lam1": d.lam1 * (a.tau1 * r01(a.P1, p) - a.l_h),
        "cs_lam2": d.lam2 * (a.tau2 * r0(a.P2, p) + a.tau3 * r1(a.P3, p) - a.l_a),
        "cs_lam3": d.lam3 * (a.tau2 * r01(a.P2, p) - a.l_a),
        "cs_mu1": d.mu1 * (p.T - a.tau1 - a.tau2 - a.tau3 - a.l_a * p.c_a / p.f_a_max),
    }
    for name, v in slacks.items():
        res[name] = abs(v) / e_scale
    return res


def max_kkt_residual(a: Allocation, d: DualPoint, p: SystemParams) -> float:
    r = kkt_residuals(a, d, p)
    return max(r.values()) if r else 0.0
