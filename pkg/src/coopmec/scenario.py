"""Scenario ingestion: human-unit configs mapped to solver parameters.

Config files are flat `key = value` text (# comments, blank lines ok) or
a JSON object with the same keys. Keys match the Scenario field names;
an empty file gives the default desk-scale setup: 1 MHz bandwidth,
-70 dBm noise, 40 dBm power caps, 2/3/5 GHz CPUs, 1000 cycles/bit,
kappa = 1e-27 / 0.3e-27, pathloss -60 dB at 10 m with exponent 3, the
user 250 m from the AP and the helper 120 m from the user, T = 100 ms,
L = 0.02 Mbits.

Sweeps run over T (ms), L (Mbits), or D (meters, user-helper distance).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .bench import SCHEME_LABELS
from .model import Geometry, SystemParams, db_to_linear, dbm_to_watts, pathloss


class ScenarioError(ValueError):
    """Config parsing or validation failure; message names the field."""


SWEEP_PARAMS = ("T", "L", "D")


@dataclass(frozen=True)
class Scenario:
    L_Mbits: float = 0.02
    T_ms: float = 100.0
    B_MHz: float = 1.0
    sigma0_dBm: float = -70.0
    sigma1_dBm: float = -70.0
    gamma_dB: float = 0.0
    P_u_max_dBm: float = 40.0
    P_h_max_dBm: float = 40.0
    c_u: float = 1e3
    c_h: float = 1e3
    c_a: float = 1e3
    kappa_u: float = 1e-27
    kappa_h: float = 0.3e-27
    f_u_max_GHz: float = 2.0
    f_h_max_GHz: float = 3.0
    f_a_max_GHz: float = 5.0
    d_user_ap_m: float = 250.0
    d_user_helper_m: float = 120.0
    beta0_dB: float = -60.0
    d0_m: float = 10.0
    zeta: float = 3.0
    # direct linear channel-gain overrides (bypass the pathloss model)
    h01: float | None = None
    h0: float | None = None
    h1: float | None = None
    sweep_param: str | None = None
    sweep_from: float | None = None
    sweep_to: float | None = None
    sweep_steps: int = 2
    schemes: tuple[str, ...] = SCHEME_LABELS

    def validate(self) -> None:
        for name in ("L_Mbits", "T_ms", "B_MHz", "c_u", "c_h", "c_a",
                     "kappa_u", "kappa_h", "f_u_max_GHz", "f_h_max_GHz",
                     "f_a_max_GHz", "d_user_ap_m", "d_user_helper_m",
                     "d0_m", "zeta"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ScenarioError(f"{name} must be positive, got {v}")
        if not self.d_user_helper_m < self.d_user_ap_m:
            raise ScenarioError(
                "d_user_helper_m must be smaller than d_user_ap_m "
                f"({self.d_user_helper_m} >= {self.d_user_ap_m})"
            )
        if self.gamma_dB < 0.0:
            raise ScenarioError(f"gamma_dB must be >= 0, got {self.gamma_dB}")
        for name in ("h01", "h0", "h1"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise ScenarioError(f"{name} must be positive, got {v}")
        for s in self.schemes:
            if s not in SCHEME_LABELS:
                raise ScenarioError(
                    f"schemes: unknown scheme {s!r}; valid: {', '.join(SCHEME_LABELS)}"
                )
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEP_PARAMS:
                raise ScenarioError(
                    f"sweep_param must be one of {SWEEP_PARAMS}, got {self.sweep_param!r}"
                )
            if self.sweep_from is None or self.sweep_to is None:
                raise ScenarioError("sweep_from and sweep_to are required for a sweep")
            if not 0.0 < self.sweep_from <= self.sweep_to:
                raise ScenarioError(
                    f"sweep range must be positive and ordered, got "
                    f"[{self.sweep_from}, {self.sweep_to}]"
                )
            if self.sweep_steps < 2:
                raise ScenarioError(f"sweep_steps must be >= 2, got {self.sweep_steps}")

    def geometry(self, D_m: float | None = None) -> Geometry:
        return Geometry(
            d_user_ap=self.d_user_ap_m,
            d_user_helper=self.d_user_helper_m if D_m is None else D_m,
            beta0=db_to_linear(self.beta0_dB),
            d0=self.d0_m,
            zeta=self.zeta,
        )

    def system_params(
        self,
        T_ms: float | None = None,
        L_Mbits: float | None = None,
        D_m: float | None = None,
    ) -> SystemParams:
        """SI-unit solver parameters, optionally overriding a swept axis."""
        geo = self.geometry(D_m)
        h01 = self.h01 if self.h01 is not None else pathloss(geo.d_user_helper, geo)
        h0 = self.h0 if self.h0 is not None else pathloss(geo.d_user_ap, geo)
        h1 = self.h1 if self.h1 is not None else pathloss(geo.d_helper_ap, geo)
        return SystemParams(
            L=(self.L_Mbits if L_Mbits is None else L_Mbits) * 1e6,
            T=(self.T_ms if T_ms is None else T_ms) * 1e-3,
            B=self.B_MHz * 1e6,
            h01=h01, h0=h0, h1=h1,
            sigma0_sq=dbm_to_watts(self.sigma0_dBm),
            sigma1_sq=dbm_to_watts(self.sigma1_dBm),
            gamma_gap=db_to_linear(self.gamma_dB),
            P_u_max=dbm_to_watts(self.P_u_max_dBm),
            P_h_max=dbm_to_watts(self.P_h_max_dBm),
            c_u=self.c_u, c_h=self.c_h, c_a=self.c_a,
            kappa_u=self.kappa_u, kappa_h=self.kappa_h,
            f_u_max=self.f_u_max_GHz * 1e9,
            f_h_max=self.f_h_max_GHz * 1e9,
            f_a_max=self.f_a_max_GHz * 1e9,
        )

    def sweep_values(self) -> list[float]:
        if self.sweep_param is None:
            return []
        n = self.sweep_steps
        step = (self.sweep_to - self.sweep_from) / (n - 1)
        return [self.sweep_from + k * step for k in range(n)]

    def at_sweep_value(self, value: float) -> SystemParams:
        if self.sweep_param == "T":
            return self.system_params(T_ms=value)
        if self.sweep_param == "L":
            return self.system_params(L_Mbits=value)
        if self.sweep_param == "D":
            return self.system_params(D_m=value)
        raise ScenarioError("scenario has no sweep")


_FLOAT_FIELDS = {
    f.name for f in fields(Scenario)
    if f.name not in ("schemes", "sweep_param", "sweep_steps")
}


def _coerce(key: str, raw, where: str):
    if key == "schemes":
        if isinstance(raw, str):
            raw = [s.strip() for s in raw.split(",") if s.strip()]
        return tuple(raw)
    if key == "sweep_param":
        return str(raw)
    if key == "sweep_steps":
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}: sweep_steps must be an integer, got {raw!r}")
    if key in _FLOAT_FIELDS:
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}: {key} must be a number, got {raw!r}")
    raise ScenarioError(f"{where}: unknown key {key!r}")


def scenario_from_mapping(data: dict, where: str = "config") -> Scenario:
    kwargs = {}
    for key, raw in data.items():
        kwargs[str(key)] = _coerce(str(key), raw, where)
    try:
        sc = Scenario(**kwargs)
    except TypeError as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    sc.validate()
    return sc


def load_scenario(path: str) -> Scenario:
    """Parse, unit-check, and validate a scenario file (text or JSON)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ScenarioError(f"{path}: JSON config must be an object")
        return scenario_from_mapping(data, where=path)

    data: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ScenarioError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key in data:
            raise ScenarioError(f"{path}:{lineno}: duplicate key {key!r}")
        data[key] = raw.strip()
    return scenario_from_mapping(data, where=path)
