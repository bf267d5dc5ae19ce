"""Domain model of the three-node cooperation system.

User, helper, and access point (AP) share one block of duration T to get
L task input-bits executed: the user computes l_u bits locally over the
whole block, ships l_h bits to the helper in slot tau1 (the helper then
computes them in the remaining T - tau1), and relays l_a bits to the AP
through the helper in slots tau2/tau3, with the AP executing them at full
speed in slot tau4.

Everything here is a pure function over immutable value types, in strict
SI units (watts, joules, seconds, Hz, bits). dBm/dB enter only through
the explicit conversion helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

LN2 = math.log(2.0)

#: links of the three-node system; the user->helper hop carries the MCS gap.
LINK_USER_HELPER = "user_helper"
LINK_USER_AP = "user_ap"
LINK_HELPER_AP = "helper_ap"
LINKS = (LINK_USER_HELPER, LINK_USER_AP, LINK_HELPER_AP)


class InfeasibleWindowError(ValueError):
    """Compute load assigned to a window of nonpositive duration."""


def dbm_to_watts(x: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** (x / 10.0) * 1e-3


def db_to_linear(x: float) -> float:
    """Convert a dB ratio to a linear ratio."""
    return 10.0 ** (x / 10.0)


@dataclass(frozen=True)
class Geometry:
    """Node placement on a line, plus the distance-power-law channel model.

    The helper sits between the user and the AP, so the helper->AP
    distance is d_user_ap - d_user_helper.
    """

    d_user_ap: float = 250.0
    d_user_helper: float = 120.0
    beta0: float = 1e-6        # gain at the reference distance (linear)
    d0: float = 10.0           # reference distance, meters
    zeta: float = 3.0          # pathloss exponent

    def __post_init__(self):
        if not 0.0 < self.d_user_helper < self.d_user_ap:
            raise ValueError(
                "helper must lie strictly between user and AP: "
                f"0 < {self.d_user_helper} < {self.d_user_ap} fails"
            )
        if self.zeta <= 0.0 or self.beta0 <= 0.0 or self.d0 <= 0.0:
            raise ValueError("beta0, d0, zeta must be positive")

    @property
    def d_helper_ap(self) -> float:
        return self.d_user_ap - self.d_user_helper


def pathloss(d: float, g: Geometry) -> float:
    """Linear channel power gain at distance d meters."""
    if d <= 0.0:
        raise ValueError(f"distance must be positive, got {d}")
    return g.beta0 * (d / g.d0) ** (-g.zeta)


@dataclass(frozen=True)
class SystemParams:
    """All physical and compute constants of one solver instance."""

    L: float                   # task size, bits
    T: float                   # block duration, s
    B: float                   # bandwidth, Hz
    h01: float                 # user->helper channel power gain (linear)
    h0: float                  # user->AP channel power gain
    h1: float                  # helper->AP channel power gain
    sigma0_sq: float           # noise power at the AP, W
    sigma1_sq: float           # noise power at the helper, W
    P_u_max: float             # user transmit power cap, W
    P_h_max: float             # helper transmit power cap, W
    c_u: float                 # CPU cycles per bit at the user
    c_h: float                 # CPU cycles per bit at the helper
    c_a: float                 # CPU cycles per bit at the AP
    kappa_u: float             # user effective capacitance, J s^2 / cycle^3
    kappa_h: float             # helper effective capacitance
    f_u_max: float             # user CPU frequency cap, Hz
    f_h_max: float             # helper CPU frequency cap, Hz
    f_a_max: float             # AP CPU frequency cap, Hz
    gamma_gap: float = 1.0     # MCS gap from capacity, >= 1

    def __post_init__(self):
        if self.L < 0.0:
            raise ValueError(f"task size must be nonnegative, got L={self.L}")
        if self.gamma_gap < 1.0:
            raise ValueError(f"MCS gap must be >= 1, got {self.gamma_gap}")
        positive = (
            "T B h01 h0 h1 sigma0_sq sigma1_sq P_u_max P_h_max "
            "c_u c_h c_a kappa_u kappa_h f_u_max f_h_max f_a_max"
        ).split()
        for name in positive:
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and positive, got {v}")

    # effective SNR-per-watt slopes; the user->helper hop pays the MCS gap
    @property
    def g01(self) -> float:
        return self.h01 / (self.gamma_gap * self.sigma1_sq)

    @property
    def g0(self) -> float:
        return self.h0 / self.sigma0_sq

    @property
    def g1(self) -> float:
        return self.h1 / self.sigma0_sq

    def snr_slope(self, link: str) -> float:
        if link == LINK_USER_HELPER:
            return self.g01
        if link == LINK_USER_AP:
            return self.g0
        if link == LINK_HELPER_AP:
            return self.g1
        raise ValueError(f"unknown link {link!r}")


def rate(link: str, P: float, p: SystemParams) -> float:
    """Achievable rate in bits/s of one hop at transmit power P watts.

    Shannon-type with the per-link SNR slope; concave and nondecreasing
    in P, and exactly 0 at P = 0.
    """
    if P < 0.0:
        raise ValueError(f"power must be nonnegative, got {P}")
    return p.B * math.log2(1.0 + P * p.snr_slope(link))


def inv_rate_power(link: str, r: float, p: SystemParams) -> float:
    """Transmit power in watts needed to sustain r bits/s on a hop."""
    if r <= 0.0:
        return 0.0
    return (2.0 ** (r / p.B) - 1.0) / p.snr_slope(link)


def r01(P: float, p: SystemParams) -> float:
    return rate(LINK_USER_HELPER, P, p)


def r0(P: float, p: SystemParams) -> float:
    return rate(LINK_USER_AP, P, p)


def r1(P: float, p: SystemParams) -> float:
    return rate(LINK_HELPER_AP, P, p)


def local_compute_energy(l: float, window: float, kappa: float, c: float) -> float:
    """Energy in joules to compute l bits in `window` seconds.

    The optimal schedule runs all c*l cycles at the constant frequency
    c*l/window, giving kappa * c^3 * l^3 / window^2. Zero bits cost
    nothing regardless of the window.
    """
    if l < 0.0:
        raise ValueError(f"bits must be nonnegative, got {l}")
    if l == 0.0:
        return 0.0
    if window <= 0.0:
        raise InfeasibleWindowError(
            f"cannot compute {l} bits in a window of {window} s"
        )
    return kappa * c**3 * l**3 / window**2


@dataclass(frozen=True)
class Allocation:
    """A complete primal point: slots, powers, bit partition, derived fields.

    tau4 = c_a*l_a/f_a_max, E_i = tau_i*P_i, f_u = c_u*l_u/T and
    f_h = c_h*l_h/(T-tau1) (0 when l_h = 0) are derived; use
    Allocation.build to keep them consistent.
    """

    tau1: float
    tau2: float
    tau3: float
    tau4: float
    P1: float
    P2: float
    P3: float
    l_u: float
    l_h: float
    l_a: float
    E1: float
    E2: float
    E3: float
    f_u: float
    f_h: float

    @staticmethod
    def build(
        p: SystemParams,
        tau1: float = 0.0,
        tau2: float = 0.0,
        tau3: float = 0.0,
        P1: float = 0.0,
        P2: float = 0.0,
        P3: float = 0.0,
        l_u: float = 0.0,
        l_h: float = 0.0,
        l_a: float = 0.0,
    ) -> "Allocation":
        window_h = p.T - tau1
        f_h = p.c_h * l_h / window_h if l_h > 0.0 and window_h > 0.0 else 0.0
        return Allocation(
            tau1=tau1,
            tau2=tau2,
            tau3=tau3,
            tau4=p.c_a * l_a / p.f_a_max,
            P1=P1,
            P2=P2,
            P3=P3,
            l_u=l_u,
            l_h=l_h,
            l_a=l_a,
            E1=tau1 * P1,
            E2=tau2 * P2,
            E3=tau3 * P3,
            f_u=p.c_u * l_u / p.T,
            f_h=f_h,
        )

    @staticmethod
    def zero(p: SystemParams) -> "Allocation":
        return Allocation.build(p)


def total_energy(a: Allocation, p: SystemParams) -> float:
    """Total user+helper energy: both compute terms plus the three offloads."""
    e = a.E1 + a.E2 + a.E3
    e += local_compute_energy(a.l_u, p.T, p.kappa_u, p.c_u)
    e += local_compute_energy(a.l_h, p.T - a.tau1, p.kappa_h, p.c_h)
    return e


@dataclass(frozen=True)
class ConstraintReport:
    """Signed, scale-normalized residuals of every partial-offloading constraint.

    A residual is positive iff the constraint is violated; bit balance is
    an equality and contributes |residual|. max_violation is the largest
    positive residual (0 when all hold).
    """

    residuals: dict[str, float] = field(default_factory=dict)
    max_violation: float = 0.0

    def feasible(self, tol: float = 1e-9) -> bool:
        return self.max_violation <= tol


def check_feasible(a: Allocation, p: SystemParams, tol: float = 1e-9) -> ConstraintReport:
    """Evaluate every constraint of the partial-offloading problem at `a`.

    Residuals are normalized by natural scales (L for bit constraints, T
    for time, the caps for powers and frequencies) so one tolerance works
    across the ~30 orders of magnitude the raw quantities span.
    """
    bit_scale = max(p.L, 1.0)
    res: dict[str, float] = {}

    res["bit_partition"] = abs(a.l_u + a.l_h + a.l_a - p.L) / bit_scale
    res["deadline"] = (a.tau1 + a.tau2 + a.tau3 + a.tau4 - p.T) / p.T
    res["helper_rate"] = (a.l_h - a.tau1 * r01(a.P1, p)) / bit_scale
    res["relay_sum_rate"] = (
        a.l_a - a.tau2 * r0(a.P2, p) - a.tau3 * r1(a.P3, p)
    ) / bit_scale
    res["relay_decode_rate"] = (a.l_a - a.tau2 * r01(a.P2, p)) / bit_scale
    res["P1_bounds"] = max(-a.P1, a.P1 - p.P_u_max) / p.P_u_max
    res["P2_bounds"] = max(-a.P2, a.P2 - p.P_u_max) / p.P_u_max
    res["P3_bounds"] = max(-a.P3, a.P3 - p.P_h_max) / p.P_h_max
    for name in ("tau1", "tau2", "tau3", "tau4"):
        v = getattr(a, name)
        res[f"{name}_bounds"] = max(-v, v - p.T) / p.T
    for name in ("l_u", "l_h", "l_a"):
        res[f"{name}_nonneg"] = -getattr(a, name) / bit_scale
    res["f_u_cap"] = (a.f_u - p.f_u_max) / p.f_u_max
    res["f_h_cap"] = (a.f_h - p.f_h_max) / p.f_h_max

    return ConstraintReport(residuals=res, max_violation=max(0.0, max(res.values())))
