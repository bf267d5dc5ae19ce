"""Small dense linear-program solver (two-phase simplex, Bland's rule).

Sized for the handful of tiny LPs this package needs (capacity checks and
primal recovery, all under ~10 variables). Bland's rule trades speed for
guaranteed termination, and every row of the constraint system is scaled
to unit max-norm first because the raw coefficients span ~30 orders of
magnitude (capacitance constants vs CPU frequencies).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


@dataclass
class LpProblem:
    """min c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x = b_eq,  lb <= x <= ub.

    Any of the constraint blocks may be empty; bounds may be +-inf.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = self.c.size
        self.A_ub, self.b_ub = _as_block(self.A_ub, self.b_ub, n, "A_ub/b_ub")
        self.A_eq, self.b_eq = _as_block(self.A_eq, self.b_eq, n, "A_eq/b_eq")
        self.lb = np.full(n, 0.0) if self.lb is None else np.asarray(self.lb, float)
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, float)
        if self.lb.size != n or self.ub.size != n:
            raise ValueError("bound vectors must match the number of variables")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n(self) -> int:
        return self.c.size


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    residuals: dict[str, float] = field(default_factory=dict)


def _as_block(A, b, n, what):
    if A is None and b is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape != (b.size, n):
        raise ValueError(f"inconsistent {what} shapes: {A.shape} vs b{b.shape}, n={n}")
    return A, b


def lp_solve(prob: LpProblem) -> LpSolution:
    """Solve an LpProblem; never raises on infeasible/unbounded instances."""
    n = prob.n

    # Shift to y >= 0 variables: finite lb -> y = x - lb; lb = -inf with
    # finite ub -> mirrored y = ub - x; doubly free -> split y+ - y-.
    col_map = []  # (kind, x_index) with kind in {shift, mirror, pos, neg}
    for j in range(n):
        lo, hi = prob.lb[j], prob.ub[j]
        if np.isfinite(lo):
            col_map.append(("shift", j))
        elif np.isfinite(hi):
            col_map.append(("mirror", j))
        else:
            col_map.append(("pos", j))
            col_map.append(("neg", j))
    m_cols = len(col_map)

    def expand(row: np.ndarray) -> tuple[np.ndarray, float]:
        # rewrite a row a@x in terms of y; returns (a_y, constant shift)
        out = np.zeros(m_cols)
        shift = 0.0
        for k, (kind, j) in enumerate(col_map):
            if kind == "shift":
                out[k] = row[j]
                shift += row[j] * prob.lb[j]
            elif kind == "mirror":
                out[k] = -row[j]
                shift += row[j] * prob.ub[j]
            elif kind == "pos":
                out[k] = row[j]
            else:
                out[k] = -row[j]
        return out, shift

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    is_eq: list[bool] = []
    for A, b, eq in ((prob.A_ub, prob.b_ub, False), (prob.A_eq, prob.b_eq, True)):
        for i in range(b.size):
            a_y, shift = expand(A[i])
            rows.append(a_y)
            rhs.append(b[i] - shift)
            is_eq.append(eq)
    # residual upper bounds ub - lb for shifted columns
    for k, (kind, j) in enumerate(col_map):
        if kind == "shift" and np.isfinite(prob.ub[j]):
            span = prob.ub[j] - prob.lb[j]
            a_y = np.zeros(m_cols)
            a_y[k] = 1.0
            rows.append(a_y)
            rhs.append(span)
            is_eq.append(False)
        elif kind == "mirror" and np.isfinite(prob.lb[j]):
            span = prob.ub[j] - prob.lb[j]
            a_y = np.zeros(m_cols)
            a_y[k] = 1.0
            rows.append(a_y)
            rhs.append(span)
            is_eq.append(False)

    c_y, obj_shift = expand(prob.c)

    A = np.array(rows) if rows else np.zeros((0, m_cols))
    b = np.array(rhs)
    m = b.size

    # unit max-norm row scaling; keeps pivot tolerances meaningful
    scale = np.ones(m)
    for i in range(m):
        s = max(np.max(np.abs(A[i])), abs(b[i]))
        if s > 0.0:
            scale[i] = 1.0 / s
    A = A * scale[:, None]
    b = b * scale

    y, status = _two_phase(A, b, np.array(is_eq), c_y)
    if status != OPTIMAL:
        return LpSolution(status=status)

    x = np.empty(n)
    for k, (kind, j) in enumerate(col_map):
        if kind == "shift":
            x[j] = prob.lb[j] + y[k]
        elif kind == "mirror":
            x[j] = prob.ub[j] - y[k]
        elif kind == "pos":
            x[j] = y[k]
        else:
            x[j] -= y[k]
    x = np.clip(x, prob.lb, prob.ub)

    res = _residuals(prob, x)
    return LpSolution(status=OPTIMAL, x=x, objective=float(prob.c @ x), residuals=res)


def _residuals(prob: LpProblem, x: np.ndarray) -> dict[str, float]:
    out = {}
    if prob.b_ub.size:
        r = prob.A_ub @ x - prob.b_ub
        s = np.maximum(np.max(np.abs(prob.A_ub), axis=1) * np.max(np.abs(x), initial=1.0), 1.0)
        out["ub"] = float(np.max(r / s))
    if prob.b_eq.size:
        r = np.abs(prob.A_eq @ x - prob.b_eq)
        s = np.maximum(np.max(np.abs(prob.A_eq), axis=1) * np.max(np.abs(x), initial=1.0), 1.0)
        out["eq"] = float(np.max(r / s))
    return out


def _two_phase(A: np.ndarray, b: np.ndarray, is_eq: np.ndarray, c: np.ndarray):
    """Simplex on A y (<=,=) b, y >= 0, b sign-normalized inside."""
    m, n = A.shape
    if m == 0:
        # unconstrained over y >= 0: bounded iff c >= 0
        if np.any(c < -PIVOT_TOL):
            return None, UNBOUNDED
        return np.zeros(n), OPTIMAL

    A = A.copy()
    b = b.copy()
    sense = np.where(is_eq, 0, -1)  # -1: <=, 0: =, +1: >=
    neg = b < 0.0
    A[neg] *= -1.0
    b[neg] *= -1.0
    sense[neg] *= -1

    n_slack = int(np.sum(sense == -1))
    n_surp = int(np.sum(sense == 1))
    n_art = int(np.sum(sense >= 0))
    total = n + n_slack + n_surp + n_art

    T = np.zeros((m + 1, total + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    b0 = b.copy()
    basis = np.empty(m, dtype=int)
    si = n
    pi = n + n_slack
    ai = n + n_slack + n_surp
    art_cols = []
    for i in range(m):
        if sense[i] == -1:
            T[i, si] = 1.0
            basis[i] = si
            si += 1
        else:
            if sense[i] == 1:
                T[i, pi] = -1.0
                pi += 1
            T[i, ai] = 1.0
            basis[i] = ai
            art_cols.append(ai)
            ai += 1
    A0 = T[:m, :total].copy()

    # phase 1: minimize the artificial sum
    if art_cols:
        obj = np.zeros(total + 1)
        for i in range(m):
            if basis[i] in art_cols:
                obj -= T[i]
        for j in art_cols:
            obj[j] += 1.0
        T[-1] = obj
        status = _iterate(T, basis, frozenset(art_cols))
        if status != OPTIMAL:
            return None, INFEASIBLE
        if -T[-1, -1] > FEAS_TOL:
            return None, INFEASIBLE
        # drive leftover artificials out of the basis (degenerate rows)
        art_set = set(art_cols)
        for i in range(m):
            if basis[i] in art_set:
                pivot_col = -1
                for j in range(total):
                    if j not in art_set and abs(T[i, j]) > PIVOT_TOL:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(T, i, pivot_col)
                    basis[i] = pivot_col
                # else: redundant row; its artificial stays basic at 0

    # phase 2
    T[-1, :] = 0.0
    T[-1, :n] = c
    for i in range(m):
        cj = T[-1, basis[i]]
        if cj != 0.0:
            T[-1] -= cj * T[i]
    status = _iterate(T, basis, frozenset(art_cols))
    if status != OPTIMAL:
        return None, status

    y = np.zeros(total)
    y[basis] = T[:m, -1]
    # refine the basic solution against the original system; pivoting
    # arithmetic leaves ~tolerance-sized residuals that matter downstream

    def sys_residual(yy):
        return max(
            float(np.max(np.abs(A0 @ yy - b0), initial=0.0)),
            float(np.max(-yy, initial=0.0)),
        )

    try:
        yb = np.linalg.solve(A0[:, basis], b0)
        y_ref = np.zeros(total)
        y_ref[basis] = yb
        if np.all(np.isfinite(yb)) and sys_residual(
            np.maximum(y_ref, 0.0)
        ) <= sys_residual(np.maximum(y, 0.0)):
            y = y_ref
    except np.linalg.LinAlgError:
        pass
    y = np.maximum(y, 0.0)
    return y[:n], OPTIMAL


def _iterate(T: np.ndarray, basis: np.ndarray, banned: frozenset[int]) -> str:
    """Run simplex pivots to optimality with Bland's anti-cycling rule.

    Columns in `banned` (the artificials once they are nonbasic) never
    re-enter; that is the standard drop-artificials variant and keeps the
    phase-1 infeasibility certificate intact.
    """
    m = T.shape[0] - 1
    ncols = T.shape[1] - 1
    for _ in range(100_000):
        enter = -1
        for j in range(ncols):
            if j in banned:
                continue
            if T[-1, j] < -PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        ratios = np.full(m, np.inf)
        col = T[:m, enter]
        ok = col > PIVOT_TOL
        ratios[ok] = T[:m, -1][ok] / col[ok]
        rmin = ratios.min()
        if not np.isfinite(rmin):
            return UNBOUNDED
        # Bland tie-break: smallest basic-variable index among min ratios
        ties = np.flatnonzero(ratios <= rmin + 1e-12 * max(1.0, abs(rmin)))
        leave = int(ties[np.argmin(basis[ties])])
        _pivot(T, leave, enter)
        basis[leave] = enter
    return "stalled"  # unreachable with Bland's rule; defensive


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
