"""Dual function of the convexified partial-offloading problem.

The Lagrangian (bit-rate couplings, the block deadline, and the bit
partition dualized) separates into five independent minimizations with
closed or semi-closed forms:

  sub1: (E1, tau1, l_h)  user->helper offload plus helper computing
  sub2: (E2, tau2)       user broadcast slot of the relay phase
  sub3: (E3, tau3)       helper forward slot of the relay phase
  sub4: l_u              local computing at the user
  sub5: l_a              bits for the AP (linear, bang-bang)

Dual prices: lam1/lam2/lam3 >= 0 for the helper-rate and the two relay-rate
constraints, mu1 >= 0 for the deadline, mu2 (free sign) for the bit
partition. The dual function stays bounded below iff the l_a coefficient
lam2 + lam3 + mu1*c_a/f_a_max - mu2 is nonnegative; that inequality is the
one boundary of the dual feasible set beyond the sign constraints.

Everything is a pure function; concurrent evaluation at different dual
points is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LN2, SystemParams, r0, r01, r1

#: tau* tie rule: a slot whose marginal price is zero is closed (tau = 0);
#: the primal-recovery step reopens it if the optimum needs an interior tau.
TIE_TOL = 1e-12


class DualInfeasibleError(ValueError):
    """Dual point outside the feasible set of the dual problem."""


@dataclass(frozen=True)
class DualPoint:
    lam1: float
    lam2: float
    lam3: float
    mu1: float
    mu2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.lam1, self.lam2, self.lam3, self.mu1, self.mu2])

    @staticmethod
    def from_array(x: np.ndarray) -> "DualPoint":
        return DualPoint(*(float(v) for v in x))

    def bounded_below_slack(self, p: SystemParams) -> float:
        """Coefficient of l_a in the Lagrangian; negative means unbounded."""
        return self.lam2 + self.lam3 + self.mu1 * p.c_a / p.f_a_max - self.mu2

    def feasible(self, p: SystemParams, tol: float = 0.0) -> bool:
        return (
            self.lam1 >= -tol
            and self.lam2 >= -tol
            and self.lam3 >= -tol
            and self.mu1 >= -tol
            and self.bounded_below_slack(p) >= -tol
        )


@dataclass(frozen=True)
class SubproblemSolution:
    """Assembled minimizer of the five subproblems at one dual point."""

    E1: float
    E2: float
    E3: float
    tau1: float
    tau2: float
    tau3: float
    l_u: float
    l_h: float
    l_a: float
    P1: float
    P2: float
    P3: float
    M1: float          # helper compute rate l_h/(T - tau1), bits/s
    rho1: float        # marginal price of opening each slot
    rho2: float
    rho3: float
    alpha1: float      # KKT multipliers of the active power/frequency caps
    alpha2: float
    alpha3: float
    beta1: float
    g_value: float


def _clip(x: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, x))


def _tie(mu1: float) -> float:
    return TIE_TOL * max(1.0, mu1)


# -- subproblem 1: user->helper offload energy + helper computing ----------


def solve_sub1(d: DualPoint, p: SystemParams) -> dict:
    """Minimize E1 + mu1*tau1 - lam1*tau1*r01(E1/tau1)
    + kappa_h c_h^3 l_h^3/(T-tau1)^2 + (lam1-mu2) l_h
    over 0 <= E1 <= tau1 P_u_max, 0 <= tau1 <= T, c_h l_h <= (T-tau1) f_h_max.

    With E1 = P1*tau1 and l_h = M1*(T-tau1) the objective is
    tau1*price_on + (T-tau1)*price_off, linear in tau1, so tau1* is
    bang-bang on the sign of rho1 = price_on - price_off.
    """
    _require_signs(d)
    g01 = p.g01
    P1 = _clip(d.lam1 * p.B / LN2 - 1.0 / g01, 0.0, p.P_u_max)
    m_cap = p.f_h_max / p.c_h
    k3 = 3.0 * p.kappa_h * p.c_h**3
    gain = d.mu2 - d.lam1
    M1 = _clip(math.sqrt(gain / k3), 0.0, m_cap) if gain >= 0.0 else 0.0

    price_on = P1 + d.mu1 - d.lam1 * r01(P1, p)
    price_off = p.kappa_h * p.c_h**3 * M1**3 - gain * M1
    rho1 = price_on - price_off

    alpha1 = 0.0
    if P1 >= p.P_u_max:
        alpha1 = d.lam1 * p.B * g01 / (LN2 * (1.0 + P1 * g01)) - 1.0
    beta1 = 0.0
    if M1 >= m_cap:
        beta1 = gain - 3.0 * p.kappa_h * p.c_h**3 * M1**2

    tau1 = p.T if rho1 < -_tie(d.mu1) else 0.0
    return {
        "P1": P1,
        "M1": M1,
        "tau1": tau1,
        "E1": P1 * tau1,
        "l_h": M1 * (p.T - tau1),
        "rho1": rho1,
        "alpha1": alpha1,
        "beta1": beta1,
        "value": tau1 * price_on + (p.T - tau1) * price_off,
    }


# -- subproblem 2: user broadcast slot --------------------------------------


def solve_sub2(d: DualPoint, p: SystemParams) -> dict:
    """Minimize E2 + mu1*tau2 - lam2*tau2*r0(E2/tau2) - lam3*tau2*r01(E2/tau2)
    over 0 <= E2 <= tau2 P_u_max, 0 <= tau2 <= T.

    The per-second cost phi(P2) = P2 - lam2 r0(P2) - lam3 r01(P2) is convex;
    its stationary point solves u P^2 + v P + w = 0.
    """
    _require_signs(d)
    g0, g01 = p.g0, p.g01
    u = (LN2 / p.B) * g0 * g01
    v = (LN2 / p.B) * (g0 + g01) - (d.lam2 + d.lam3) * g0 * g01
    w = LN2 / p.B - d.lam2 * g0 - d.lam3 * g01

    def phi(P: float) -> float:
        return P - d.lam2 * r0(P, p) - d.lam3 * r01(P, p)

    disc = v * v - 4.0 * u * w
    if disc < 0.0:
        # no stationary point: the derivative is single-signed, so the
        # minimum sits at an endpoint of the power box
        P2 = 0.0 if phi(0.0) <= phi(p.P_u_max) else p.P_u_max
    elif w >= 0.0:
        P2 = 0.0  # derivative already nonnegative at zero power
    else:
        P2 = _clip((math.sqrt(disc) - v) / (2.0 * u), 0.0, p.P_u_max)

    rho2 = d.mu1 + phi(P2)
    alpha2 = 0.0
    if P2 >= p.P_u_max:
        alpha2 = (
            d.lam3 * p.B * g01 / ((1.0 + P2 * g01) * LN2)
            + d.lam2 * p.B * g0 / ((1.0 + P2 * g0) * LN2)
            - 1.0
        )
    tau2 = p.T if rho2 < -_tie(d.mu1) else 0.0
    return {"P2": P2, "tau2": tau2, "E2": P2 * tau2, "rho2": rho2,
            "alpha2": alpha2, "value": tau2 * rho2}


# -- subproblem 3: helper forward slot ---------------------------------------


def solve_sub3(d: DualPoint, p: SystemParams) -> dict:
    """Minimize E3 + mu1*tau3 - lam2*tau3*r1(E3/tau3)
    over 0 <= E3 <= tau3 P_h_max, 0 <= tau3 <= T.
    """
    _require_signs(d)
    g1 = p.g1
    P3 = _clip(d.lam2 * p.B / LN2 - 1.0 / g1, 0.0, p.P_h_max)
    rho3 = d.mu1 + P3 - d.lam2 * r1(P3, p)
    alpha3 = 0.0
    if P3 >= p.P_h_max:
        alpha3 = d.lam2 * p.B * g1 / ((1.0 + P3 * g1) * LN2) - 1.0
    tau3 = p.T if rho3 < -_tie(d.mu1) else 0.0
    return {"P3": P3, "tau3": tau3, "E3": P3 * tau3, "rho3": rho3,
            "alpha3": alpha3, "value": tau3 * rho3}


# -- subproblem 4: local bits -------------------------------------------------


def solve_sub4(d: DualPoint, p: SystemParams) -> float:
    """Minimize kappa_u c_u^3 l_u^3/T^2 - mu2 l_u over c_u l_u <= T f_u_max."""
    if d.mu2 <= 0.0:
        return 0.0
    return _clip(
        p.T * math.sqrt(d.mu2 / (3.0 * p.kappa_u * p.c_u**3)),
        0.0,
        p.T * p.f_u_max / p.c_u,
    )


# -- subproblem 5: AP bits ----------------------------------------------------


def solve_sub5(d: DualPoint, p: SystemParams, L: float | None = None) -> float:
    """Minimize (lam2+lam3+mu1 c_a/f_a_max - mu2) l_a over 0 <= l_a <= L.

    Bang-bang on the coefficient sign; exact ties take l_a = 0 and leave
    the true value to the primal-recovery step.
    """
    L = p.L if L is None else L
    coef = d.bounded_below_slack(p)
    return L if coef < -_tie(d.mu1) else 0.0


def _require_signs(d: DualPoint) -> None:
    # each subproblem only needs the sign constraints of the prices it
    # uses; the l_a boundedness condition is checked where l_a is free
    if min(d.lam1, d.lam2, d.lam3, d.mu1) < 0.0:
        raise DualInfeasibleError(f"negative dual price: {d}")


def eval_dual(
    d: DualPoint, p: SystemParams
) -> tuple[float, SubproblemSolution, np.ndarray]:
    """Dual function value, assembled minimizer, and the subgradient.

    The subgradient entries are the dualized-constraint residuals at the
    minimizer, with tau*rate(E/tau) taken as 0 at tau = 0.
    """
    if not d.feasible(p):
        raise DualInfeasibleError(f"dual point outside the feasible set: {d}")
    s1 = solve_sub1(d, p)
    s2 = solve_sub2(d, p)
    s3 = solve_sub3(d, p)
    l_u = solve_sub4(d, p)
    l_a = solve_sub5(d, p)

    v4 = p.kappa_u * p.c_u**3 * l_u**3 / p.T**2 - d.mu2 * l_u
    v5 = d.bounded_below_slack(p) * l_a
    g_value = (
        s1["value"] + s2["value"] + s3["value"] + v4 + v5
        - d.mu1 * p.T + d.mu2 * p.L
    )

    sol = SubproblemSolution(
        E1=s1["E1"], E2=s2["E2"], E3=s3["E3"],
        tau1=s1["tau1"], tau2=s2["tau2"], tau3=s3["tau3"],
        l_u=l_u, l_h=s1["l_h"], l_a=l_a,
        P1=s1["P1"], P2=s2["P2"], P3=s3["P3"],
        M1=s1["M1"],
        rho1=s1["rho1"], rho2=s2["rho2"], rho3=s3["rho3"],
        alpha1=s1["alpha1"], alpha2=s2["alpha2"], alpha3=s3["alpha3"],
        beta1=s1["beta1"],
        g_value=g_value,
    )
    sub = np.array([
        sol.l_h - sol.tau1 * r01(sol.P1, p),
        sol.l_a - sol.tau2 * r0(sol.P2, p) - sol.tau3 * r1(sol.P3, p),
        sol.l_a - sol.tau2 * r01(sol.P2, p),
        sol.tau1 + sol.tau2 + sol.tau3 + sol.l_a * p.c_a / p.f_a_max - p.T,
        p.L - sol.l_u - sol.l_h - sol.l_a,
    ])
    return g_value, sol, sub


# -- restricted variants -------------------------------------------------------
#
# The benchmark schemes and the binary communication-cooperation mode are
# the same problem with blocks pinned: the dual shrinks to the prices of
# the constraints that remain.

DUAL_NAMES = ("lam1", "lam2", "lam3", "mu1", "mu2")


@dataclass(frozen=True)
class Restriction:
    """Which primal blocks stay free in a restricted solve.

    helper_path False pins l_h = 0, tau1 = 0 (drops sub1 and lam1);
    relay_path False pins tau2 = tau3 = 0 (drops sub2/sub3 and lam2/lam3,
    only meaningful with l_a pinned to 0); local_bits False pins l_u = 0;
    l_a_pinned fixes the AP bits (None keeps them free through sub5).
    """

    helper_path: bool = True
    relay_path: bool = True
    local_bits: bool = True
    l_a_pinned: float | None = None

    def __post_init__(self):
        if not self.relay_path and self.l_a_pinned != 0.0:
            raise ValueError("dropping the relay path requires l_a pinned to 0")

    @property
    def partition_active(self) -> bool:
        return self.local_bits or self.helper_path or self.l_a_pinned is None

    @property
    def active_duals(self) -> tuple[str, ...]:
        names = []
        if self.helper_path:
            names.append("lam1")
        if self.relay_path:
            names.extend(["lam2", "lam3"])
        names.append("mu1")
        if self.partition_active:
            names.append("mu2")
        return tuple(names)

    def expand(self, x: np.ndarray) -> DualPoint:
        vals = dict.fromkeys(DUAL_NAMES, 0.0)
        for name, v in zip(self.active_duals, x):
            vals[name] = float(v)
        return DualPoint(**vals)


FULL = Restriction()


def eval_dual_restricted(
    d: DualPoint, p: SystemParams, rest: Restriction
) -> tuple[float, SubproblemSolution, np.ndarray]:
    """eval_dual for a pinned variant; subgradient only over active duals."""
    if rest == FULL:
        return eval_dual(d, p)
    if rest.l_a_pinned is None and d.bounded_below_slack(p) < 0.0:
        raise DualInfeasibleError(f"dual point outside the feasible set: {d}")

    zero = {"P1": 0.0, "M1": 0.0, "tau1": 0.0, "E1": 0.0, "l_h": 0.0,
            "rho1": 0.0, "alpha1": 0.0, "beta1": 0.0, "value": 0.0}
    s1 = solve_sub1(d, p) if rest.helper_path else dict(zero)
    if rest.relay_path:
        s2 = solve_sub2(d, p)
        s3 = solve_sub3(d, p)
    else:
        s2 = {"P2": 0.0, "tau2": 0.0, "E2": 0.0, "rho2": 0.0, "alpha2": 0.0,
              "value": 0.0}
        s3 = {"P3": 0.0, "tau3": 0.0, "E3": 0.0, "rho3": 0.0, "alpha3": 0.0,
              "value": 0.0}
    l_u = solve_sub4(d, p) if rest.local_bits else 0.0
    if rest.l_a_pinned is None:
        l_a = solve_sub5(d, p)
        v5 = d.bounded_below_slack(p) * l_a
    else:
        l_a = rest.l_a_pinned
        coef = d.lam2 + d.lam3 + d.mu1 * p.c_a / p.f_a_max
        if rest.partition_active:
            coef -= d.mu2
        v5 = coef * l_a

    v4 = p.kappa_u * p.c_u**3 * l_u**3 / p.T**2 - d.mu2 * l_u
    g_value = s1["value"] + s2["value"] + s3["value"] + v4 + v5 - d.mu1 * p.T
    if rest.partition_active:
        g_value += d.mu2 * p.L

    sol = SubproblemSolution(
        E1=s1["E1"], E2=s2["E2"], E3=s3["E3"],
        tau1=s1["tau1"], tau2=s2["tau2"], tau3=s3["tau3"],
        l_u=l_u, l_h=s1["l_h"], l_a=l_a,
        P1=s1["P1"], P2=s2["P2"], P3=s3["P3"],
        M1=s1["M1"],
        rho1=s1["rho1"], rho2=s2["rho2"], rho3=s3["rho3"],
        alpha1=s1["alpha1"], alpha2=s2["alpha2"], alpha3=s3["alpha3"],
        beta1=s1["beta1"],
        g_value=g_value,
    )
    full_sub = {
        "lam1": sol.l_h - sol.tau1 * r01(sol.P1, p),
        "lam2": sol.l_a - sol.tau2 * r0(sol.P2, p) - sol.tau3 * r1(sol.P3, p),
        "lam3": sol.l_a - sol.tau2 * r01(sol.P2, p),
        "mu1": sol.tau1 + sol.tau2 + sol.tau3 + sol.l_a * p.c_a / p.f_a_max - p.T,
        "mu2": p.L - sol.l_u - sol.l_h - sol.l_a,
    }
    sub = np.array([full_sub[name] for name in rest.active_duals])
    return g_value, sol, sub
