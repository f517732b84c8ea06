"""Generic box-bounded inequality LP container and solver front end.

The canonical form used throughout the package is

    minimise    f . x
    subject to  A x <= b
                lb <= x <= ub

``solve_lp`` row-equilibrates A, dispatches to one of the two simplex
backends in :mod:`flexarb._simplex`, and verifies the returned point
against the original (unscaled) data before reporting it as optimal.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from . import _simplex

#: Sentinel bounds for epigraph helper variables; wide enough to be inactive
#: for any sane price signal, finite so the LP stays bounded by construction.
BIG_BOUND = 1e9

FEASIBILITY_TOL = 1e-6


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


_STATUS_FROM_CODE = {
    _simplex.OPTIMAL: SolveStatus.OPTIMAL,
    _simplex.INFEASIBLE: SolveStatus.INFEASIBLE,
    _simplex.UNBOUNDED: SolveStatus.UNBOUNDED,
    _simplex.NUMERICAL_FAILURE: SolveStatus.NUMERICAL_FAILURE,
}


class LpValidationError(ValueError):
    """Raised when an LpProblem fails validate_lp checks before solving."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid LP: " + "; ".join(self.diagnostics))


def _ro(a, dtype=float):
    out = np.ascontiguousarray(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LpProblem:
    """Immutable description of one LP instance.

    ``row_labels`` / ``col_labels`` are optional diagnostic tags used by
    ``dump_lp`` and by constraint-violation messages; they carry no
    mathematical meaning.
    """

    f: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    row_labels: tuple = None
    col_labels: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "f", _ro(self.f))
        object.__setattr__(self, "A", _ro(np.atleast_2d(self.A)))
        object.__setattr__(self, "b", _ro(self.b))
        object.__setattr__(self, "lb", _ro(self.lb))
        object.__setattr__(self, "ub", _ro(self.ub))
        if self.row_labels is not None:
            object.__setattr__(self, "row_labels", tuple(self.row_labels))
        if self.col_labels is not None:
            object.__setattr__(self, "col_labels", tuple(self.col_labels))

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    wall_time_s: float
    backend: str
    max_residual: float


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    status: SolveStatus
    stats: SolveStats

    def __post_init__(self):
        object.__setattr__(self, "x", _ro(self.x))


def validate_lp(problem: LpProblem) -> list:
    """Return a list of human-readable diagnostics; empty means solvable."""
    diags = []
    f, A, b, lb, ub = problem.f, problem.A, problem.b, problem.lb, problem.ub
    if A.ndim != 2:
        diags.append(f"A must be 2-D, got ndim={A.ndim}")
        return diags
    m, n = A.shape
    if n == 0:
        diags.append("A has zero columns")
    for name, vec, want in (("f", f, n), ("b", b, m), ("lb", lb, n),
                            ("ub", ub, n)):
        if vec.ndim != 1:
            diags.append(f"{name} must be 1-D, got ndim={vec.ndim}")
        elif vec.shape[0] != want:
            diags.append(f"{name} has length {vec.shape[0]}, expected {want}")
    if diags:
        return diags
    for name, arr in (("f", f), ("A", A), ("b", b)):
        if not np.isfinite(arr).all():
            diags.append(f"{name} contains non-finite entries")
    if np.isnan(lb).any() or np.isnan(ub).any():
        diags.append("bounds contain NaN")
    if np.isposinf(lb).any() or np.isneginf(ub).any():
        diags.append("lb must be < +inf and ub > -inf elementwise")
    if diags:
        return diags
    bad = np.nonzero(lb > ub)[0]
    for j in bad[:5]:
        label = (problem.col_labels[j] if problem.col_labels is not None
                 else f"col {j}")
        diags.append(f"empty bound interval at {label}: "
                     f"lb={lb[j]:.6g} > ub={ub[j]:.6g}")
    if bad.size > 5:
        diags.append(f"... and {bad.size - 5} more empty bound intervals")
    if problem.row_labels is not None and len(problem.row_labels) != m:
        diags.append(f"row_labels has length {len(problem.row_labels)},"
                     f" expected {m}")
    if problem.col_labels is not None and len(problem.col_labels) != n:
        diags.append(f"col_labels has length {len(problem.col_labels)},"
                     f" expected {n}")
    return diags


def _csc_arrays(A: np.ndarray):
    """Column-compressed copy of A for the numba kernel."""
    m, n = A.shape
    At = A.T
    cols, rows = np.nonzero(At)
    vals = At[cols, rows]
    colp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(cols, minlength=n), out=colp[1:])
    return colp, rows.astype(np.int64), vals.astype(np.float64)


_IMPLIED_GATE = 1e8  # only bounds beyond this magnitude get tightened


def _tighten_bounds(A, b, lb, ub):
    """Shrink sentinel-sized variable bounds to feasibility-implied ones.

    Every row ``a . x <= b_i`` implies, for each variable with a nonzero
    coefficient, ``a_ij x_j <= b_i - min_box(sum of the other terms)``.
    Applying that interval to bounds beyond ``_IMPLIED_GATE`` keeps the
    simplex arithmetic at problem scale instead of 1e9 scale; the feasible
    set is unchanged because implied bounds hold at every feasible point.
    """
    lo = lb.copy()
    hi = ub.copy()
    need_lo = np.abs(lo) > _IMPLIED_GATE
    need_hi = np.abs(hi) > _IMPLIED_GATE
    if not (need_lo.any() or need_hi.any()):
        return lo, hi
    with np.errstate(invalid="ignore"):
        cmin = (np.where(A > 0.0, A * lo[None, :], 0.0)
                + np.where(A < 0.0, A * hi[None, :], 0.0))
    neg_inf = np.isneginf(cmin)
    ninf = neg_inf.sum(axis=1)
    rowfin = np.where(neg_inf, 0.0, cmin).sum(axis=1)
    # minimum of the row's other terms; -inf when it is not determined
    resid = np.where(neg_inf,
                     np.where(ninf[:, None] == 1, rowfin[:, None], -np.inf),
                     np.where(ninf[:, None] == 0,
                              rowfin[:, None] - cmin, -np.inf))
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = (b[:, None] - resid) / A
    ub_cand = np.where(A > 0.0, cand, np.inf).min(axis=0)
    lb_cand = np.where(A < 0.0, cand, -np.inf).max(axis=0)
    margin = 1e-7
    ub_new = ub_cand + margin * (1.0 + np.abs(ub_cand))
    lb_new = lb_cand - margin * (1.0 + np.abs(lb_cand))
    hi = np.where(need_hi & (ub_new < hi), ub_new, hi)
    lo = np.where(need_lo & (lb_new > lo), lb_new, lo)
    # crossed bounds mean the LP is infeasible; keep the box nonempty and
    # let phase 1 report it through the untouched rows
    hi = np.where(hi < lo, lo, hi)
    return lo, hi


def available_backends() -> tuple:
    out = ["numpy"]
    if _simplex._HAVE_NUMBA:
        out.insert(0, "numba")
    return tuple(out)


def default_backend() -> str:
    return _simplex._env_backend()


def solve_lp(problem: LpProblem, backend: str = None,
             max_iter: int = 0) -> LpSolution:
    """Solve the LP, returning an LpSolution with verified status.

    ``backend`` overrides the FLEXARB_BACKEND environment variable for this
    call.  ``max_iter`` of 0 picks a size-based default.
    """
    diags = validate_lp(problem)
    if diags:
        raise LpValidationError(diags)
    if backend is None:
        backend = _simplex._env_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not _simplex._HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not "
                           "importable; set FLEXARB_BACKEND=numpy")

    t0 = time.perf_counter()
    f = problem.f
    A = problem.A
    b = problem.b
    lb = problem.lb
    ub = problem.ub
    m, n = A.shape

    if max_iter <= 0:
        max_iter = 2000 + 60 * (m + n)

    if m == 0:
        # pure box problem: each variable sits at its cheaper bound
        x = np.where(f >= 0.0, lb, ub)
        unb = ((f > 0.0) & np.isneginf(lb)) | ((f < 0.0) & np.isposinf(ub))
        if unb.any():
            status = SolveStatus.UNBOUNDED
            x = np.zeros(n)
            obj = float("nan")
        else:
            status = SolveStatus.OPTIMAL
            obj = float(f @ x)
        stats = SolveStats(0, time.perf_counter() - t0, backend, 0.0)
        return LpSolution(x, obj, status, stats)

    # row equilibration: scale every row of [A | b] so max |A_ij| is one
    scale = np.abs(A).max(axis=1)
    scale[scale == 0.0] = 1.0
    As = A / scale[:, None]
    bs = b / scale
    lbt, ubt = _tighten_bounds(A, b, lb, ub)

    iters = 0
    code = _simplex.NUMERICAL_FAILURE
    x = np.zeros(n)
    colp, rowi, vals = _csc_arrays(As)
    args = (As, colp, rowi, vals, bs, f.astype(float), lbt, ubt)
    run = (_simplex.simplex_numba if backend == "numba"
           else _simplex.simplex_numpy)

    for refactor_every in (0, 96):
        code, x, it = run(*args, FEASIBILITY_TOL * 0.1, max_iter,
                          refactor_every)
        iters += int(it)
        if code != _simplex.OPTIMAL:
            break
        resid = _max_violation(problem, x)
        if resid <= FEASIBILITY_TOL * max(1.0, np.abs(b).max()):
            break
        code = _simplex.NUMERICAL_FAILURE  # retry with periodic refactoring

    status = _STATUS_FROM_CODE[code]
    if status is SolveStatus.OPTIMAL:
        obj = float(f @ x)
        resid = _max_violation(problem, x)
    else:
        x = np.full(n, np.nan)
        obj = float("nan")
        resid = float("nan")
    stats = SolveStats(iters, time.perf_counter() - t0, backend, resid)
    return LpSolution(x, obj, status, stats)


def _max_violation(problem: LpProblem, x: np.ndarray) -> float:
    """Largest constraint or bound violation of x, in original row scaling."""
    scale = np.abs(problem.A).max(axis=1)
    scale[scale == 0.0] = 1.0
    r = (problem.A @ x - problem.b) / scale
    worst = max(0.0, r.max()) if r.size else 0.0
    worst = max(worst, float((problem.lb - x).max(initial=0.0)))
    worst = max(worst, float((x - problem.ub).max(initial=0.0)))
    return float(worst)


def constraint_report(problem: LpProblem, x: np.ndarray,
                      tol: float = FEASIBILITY_TOL) -> list:
    """Rows violated by x beyond tol, as (index, label, violation) tuples."""
    scale = np.abs(problem.A).max(axis=1)
    scale[scale == 0.0] = 1.0
    r = (problem.A @ x - problem.b) / scale
    out = []
    for i in np.nonzero(r > tol)[0]:
        label = (problem.row_labels[i] if problem.row_labels is not None
                 else f"row {i}")
        out.append((int(i), label, float(r[i])))
    return out


def dump_lp(problem: LpProblem, path) -> None:
    """Write a plain-text rendering of the LP, mainly for golden-file tests.

    Format: a header line with shape, then f, b, lb, ub as labelled rows and
    A as a dense matrix, all through numpy's repr-stable %.17g formatting.
    """
    m, n = problem.A.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"lp rows={m} cols={n}\n")
        for name, vec in (("f", problem.f), ("b", problem.b),
                          ("lb", problem.lb), ("ub", problem.ub)):
            fh.write(name + " " + " ".join("%.17g" % v for v in vec) + "\n")
        fh.write("A\n")
        for i in range(m):
            fh.write(" ".join("%.17g" % v for v in problem.A[i]) + "\n")
        if problem.row_labels is not None:
            fh.write("rows " + " ".join(problem.row_labels) + "\n")
        if problem.col_labels is not None:
            fh.write("cols " + " ".join(problem.col_labels) + "\n")
