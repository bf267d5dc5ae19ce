"""Constrained ellipsoid method for maximizing a concave function.

The caller supplies a cut oracle: at a query point it either returns a
supergradient of the objective (objective cut, with the value) or the
gradient of a violated constraint (feasibility cut). Each iteration
applies the standard central-cut update; convergence is declared when the
ellipsoid bound on the remaining objective gap, sqrt(g' A g), drops below
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

OBJECTIVE_CUT = "objective"
FEASIBILITY_CUT = "feasibility"


class OracleError(ValueError):
    """The cut oracle returned a degenerate (zero/non-finite) cut vector."""


@dataclass
class CutOracleResult:
    kind: str                      # OBJECTIVE_CUT or FEASIBILITY_CUT
    vector: np.ndarray             # supergradient / violated-constraint gradient
    value: float = float("nan")    # objective value for objective cuts


@dataclass
class EllipsoidState:
    """E = {x : (x - center)' A^{-1} (x - center) <= 1}."""

    center: np.ndarray
    shape: np.ndarray              # symmetric positive definite
    iteration: int = 0
    best_point: np.ndarray | None = None
    best_value: float = -np.inf


@dataclass
class EllipsoidResult:
    best_point: np.ndarray | None
    best_value: float
    converged: bool
    iterations: int
    gap_bound: float
    # final ellipsoid geometry: any retained optimum satisfies
    # |x*_j - center_j| <= axis_radii_j
    center: np.ndarray | None = None
    axis_radii: np.ndarray | None = None
    shape_det: float = float("nan")
    # (iteration, objective value, gap bound) per objective cut
    trace: list[tuple[int, float, float]] = field(default_factory=list)


def ellipsoid_run(
    oracle: Callable[[np.ndarray], CutOracleResult],
    init_center: np.ndarray,
    init_radius: np.ndarray | float,
    tol: float = 1e-9,
    max_iter: int = 5000,
    tol_rel: float = 0.0,
    coord_tol: np.ndarray | None = None,
) -> EllipsoidResult:
    """Maximize a concave function over a convex set given by cut oracles.

    init_radius may be a scalar or a per-coordinate vector; the initial
    ellipsoid is the axis-aligned one diag(radius^2) around init_center
    and must contain an optimum. Convergence needs the objective-gap
    bound sqrt(g' A g) below max(tol, tol_rel*|best|) and, when coord_tol
    is given, the per-axis ellipsoid radii sqrt(diag A) below it as well
    (the objective can be flat along constrained directions long before
    the dual point itself is pinned down). Numerical loss of positive
    definiteness restarts the search around the best point with doubled
    radius.
    """
    center = np.asarray(init_center, dtype=float).copy()
    n = center.size
    radius = np.broadcast_to(np.asarray(init_radius, dtype=float), (n,)).copy()
    if np.any(radius <= 0.0):
        raise ValueError("initial radius must be positive")
    A = np.diag(radius**2)

    best_point: np.ndarray | None = None
    best_value = -np.inf
    trace: list[tuple[int, float, float]] = []
    gap_bound = np.inf
    converged = False
    restarts = 0
    it = 0

    def coords_tight() -> bool:
        if coord_tol is None:
            return True
        return bool(np.all(np.sqrt(np.maximum(np.diag(A), 0.0)) <= coord_tol))

    while it < max_iter:
        it += 1
        res = oracle(center)
        g = np.asarray(res.vector, dtype=float)
        if g.shape != (n,) or not np.all(np.isfinite(g)):
            raise OracleError(f"bad cut vector {res.vector!r}")

        if res.kind == OBJECTIVE_CUT:
            if res.value > best_value:
                best_value = res.value
                best_point = center.copy()
            gnorm2 = float(g @ A @ g)
            gap_bound = np.sqrt(max(gnorm2, 0.0))
            trace.append((it, res.value, gap_bound))
            if gap_bound <= max(tol, tol_rel * abs(best_value)) and coords_tight():
                converged = True
                break
            if not (gnorm2 > 0.0):
                if np.allclose(g, 0.0):
                    # zero supergradient: the center is a maximizer
                    converged = True
                    gap_bound = 0.0
                    break
                center, A, restarts = _restart(best_point, center, radius, restarts)
                continue
            cut = -g  # keep the halfspace {z : g'(z - center) >= 0}
        elif res.kind == FEASIBILITY_CUT:
            if np.allclose(g, 0.0):
                raise OracleError("zero feasibility-cut vector")
            cut = g
        else:
            raise OracleError(f"unknown cut kind {res.kind!r}")

        denom = float(cut @ A @ cut)
        if not (denom > 0.0 and np.isfinite(denom)):
            center, A, restarts = _restart(best_point, center, radius, restarts)
            continue
        gt = cut / np.sqrt(denom)
        Ag = A @ gt
        if n == 1:
            center = center - Ag / 2.0
            A = A / 4.0
        else:
            center = center - Ag / (n + 1.0)
            A = (n**2 / (n**2 - 1.0)) * (A - (2.0 / (n + 1.0)) * np.outer(Ag, Ag))
            A = 0.5 * (A + A.T)

    return EllipsoidResult(
        best_point=best_point,
        best_value=best_value,
        converged=converged,
        iterations=it,
        gap_bound=float(gap_bound),
        center=center,
        axis_radii=np.sqrt(np.maximum(np.diag(A), 0.0)),
        shape_det=float(np.linalg.det(A)),
        trace=trace,
    )


def _restart(best_point, center, radius, restarts):
    # PSD drift guard: re-center on the best point seen, double the radius
    restarts += 1
    anchor = center if best_point is None else best_point
    r = radius * (2.0**restarts)
    return anchor.copy(), np.diag(r**2), restarts


def trace_to_csv(trace: list[tuple[int, float, float]]) -> str:
    """Render a run trace as CSV rows (iter, g_value, gap_bound)."""
    lines = ["iter,g_value,gap_bound"]
    for it, val, gap in trace:
        lines.append(f"{it},{val:.12g},{gap:.12g}")
    return "\n".join(lines) + "\n"
