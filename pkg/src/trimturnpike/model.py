"""Problem data for control systems with cyclic states.

The dynamics split into a shape part x (appears in dynamics and cost)
and a cyclic part y (appears nowhere on the right-hand side):

    dx/dt = f1(x) + F2(x) u
    dy/dt = g1(x) + G2(x) u

with running cost f0(x) + 1/2 u^T R u and fixed endpoints on both x
and y.  All evaluators are pure functions of x; time-varying data is
rejected by construction, which keeps the cyclic adjoint exactly
constant along extremals.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import EvaluatorFailure, ShapeMismatch, TrimTurnpikeError

FD_STEP = 1e-6


@dataclass(frozen=True)
class Dims:
    n: int  # shape-state dimension
    p: int  # cyclic dimension
    m: int  # control dimension

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or self.m < 1:
            raise ValueError("all dimensions must be >= 1")


@dataclass(frozen=True)
class ValidationReport:
    checks: dict
    ok: bool


def _call(evaluator, x, name):
    try:
        out = np.asarray(evaluator(np.asarray(x, dtype=float)), dtype=float)
    except Exception as exc:
        if isinstance(exc, TrimTurnpikeError):
            raise  # domain guards (pole/radius) carry their own diagnosis
        raise EvaluatorFailure(f"{name} raised at x={x}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise EvaluatorFailure(f"{name} returned non-finite values at x={x}")
    return out


@dataclass(frozen=True)
class BatchFields:
    """Vectorized field evaluators over rows of X with shape (N, n).

    Optional fast path for the solver's fixed-step integrations: all
    shooting segments and finite-difference directions advance in
    lockstep through one call per field.  Shapes append a leading batch
    axis to the per-point conventions: f1 (N, n), F2 (N, n, m),
    g1 (N, p), G2 (N, p, m), grad_f0 (N, n), D_f1 (N, n, n),
    D_F2 (N, n, m, n), D_g1 (N, p, n), D_G2 (N, p, m, n).
    """

    f1: Callable
    F2: Callable
    g1: Callable
    G2: Callable
    grad_f0: Callable
    D_f1: Callable
    D_F2: Callable
    D_g1: Callable
    D_G2: Callable


@dataclass(frozen=True)
class CyclicProblem:
    """Immutable problem data; safe to share across workers."""

    dims: Dims
    f0: Callable[[np.ndarray], float]
    f1: Callable[[np.ndarray], np.ndarray]
    F2: Callable[[np.ndarray], np.ndarray]
    g1: Callable[[np.ndarray], np.ndarray]
    G2: Callable[[np.ndarray], np.ndarray]
    R: np.ndarray
    x0: np.ndarray
    xT: np.ndarray
    y0: np.ndarray
    yT: np.ndarray
    T: float
    grad_f0: Optional[Callable] = None
    D_f1: Optional[Callable] = None      # (n, n)
    D_F2: Optional[Callable] = None      # (n, m, n), [:, :, k] = dF2/dx_k
    D_g1: Optional[Callable] = None      # (p, n)
    D_G2: Optional[Callable] = None      # (p, m, n)
    name: str = "custom"
    batch: Optional[BatchFields] = field(default=None, repr=False, compare=False)
    R_chol: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    R_inv: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        object.__setattr__(self, "R", R)
        for attr in ("x0", "xT", "y0", "yT"):
            object.__setattr__(self, attr, np.atleast_1d(np.asarray(getattr(self, attr), dtype=float)))
        if self.T <= 0.0:
            raise ValueError("horizon T must be positive")
        n, p, m = self.dims.n, self.dims.p, self.dims.m
        if R.shape != (m, m):
            raise ShapeMismatch(f"R has shape {R.shape}, expected {(m, m)}")
        linalg.verify_spd(R)
        # factor once: the optimal feedback solves with R on every RHS call
        L = linalg.cholesky(0.5 * (R + R.T))
        object.__setattr__(self, "R_chol", L)
        object.__setattr__(self, "R_inv", linalg.cho_solve(L, np.eye(self.dims.m)))
        if self.x0.shape != (n,) or self.xT.shape != (n,):
            raise ShapeMismatch("x boundary values must have length n")
        if self.y0.shape != (p,) or self.yT.shape != (p,):
            raise ShapeMismatch("y boundary values must have length p")

    def solve_R(self, v):
        """R^{-1} v via the inverse cached at construction."""
        return self.R_inv @ np.asarray(v, dtype=float)

    def with_boundary(self, T=None, xT=None, yT=None, x0=None, y0=None):
        """Copy of the problem with replaced horizon/boundary data."""
        kw = {}
        if T is not None:
            kw["T"] = float(T)
        if xT is not None:
            kw["xT"] = np.atleast_1d(np.asarray(xT, dtype=float))
        if yT is not None:
            kw["yT"] = np.atleast_1d(np.asarray(yT, dtype=float))
        if x0 is not None:
            kw["x0"] = np.atleast_1d(np.asarray(x0, dtype=float))
        if y0 is not None:
            kw["y0"] = np.atleast_1d(np.asarray(y0, dtype=float))
        return replace(self, **kw)

    # shape-checked evaluator access -------------------------------------

    def eval_f0(self, x):
        out = _call(self.f0, x, "f0")
        if out.shape not in ((), (1,)):
            raise ShapeMismatch(f"f0 must return a scalar, got shape {out.shape}")
        return float(out)

    def eval_f1(self, x):
        out = _call(self.f1, x, "f1")
        if out.shape != (self.dims.n,):
            raise ShapeMismatch(f"f1 returned shape {out.shape}, expected ({self.dims.n},)")
        return out

    def eval_F2(self, x):
        out = np.atleast_2d(_call(self.F2, x, "F2"))
        if out.shape != (self.dims.n, self.dims.m):
            raise ShapeMismatch(f"F2 returned shape {out.shape}, expected {(self.dims.n, self.dims.m)}")
        return out

    def eval_g1(self, x):
        out = np.atleast_1d(_call(self.g1, x, "g1"))
        if out.shape != (self.dims.p,):
            raise ShapeMismatch(f"g1 returned shape {out.shape}, expected ({self.dims.p},)")
        return out

    def eval_G2(self, x):
        out = np.atleast_2d(_call(self.G2, x, "G2"))
        if out.shape != (self.dims.p, self.dims.m):
            raise ShapeMismatch(f"G2 returned shape {out.shape}, expected {(self.dims.p, self.dims.m)}")
        return out

    def eval_grad_f0(self, x):
        if self.grad_f0 is not None:
            out = np.atleast_1d(_call(self.grad_f0, x, "grad_f0"))
            if out.shape != (self.dims.n,):
                raise ShapeMismatch("grad_f0 returned wrong shape")
            return out
        return gradient(self.eval_f0, x)


def _fd_steps(x):
    x = np.asarray(x, dtype=float)
    return np.maximum(FD_STEP, FD_STEP * np.abs(x))


def gradient(scalar_fn, x):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (scalar_fn(x + e) - scalar_fn(x - e)) / (2.0 * h[i])
    if not np.all(np.isfinite(g)):
        raise EvaluatorFailure("finite-difference gradient produced non-finite values")
    return g


def jacobian(evaluator, x, analytic=None):
    """Jacobian of a vector-valued evaluator at x.

    Uses the analytic callback when given, otherwise central differences
    with componentwise step max(1e-6, 1e-6 |x_i|).
    """
    x = np.asarray(x, dtype=float)
    if analytic is not None:
        return np.asarray(analytic(x), dtype=float)
    h = _fd_steps(x)
    f0 = np.atleast_1d(np.asarray(evaluator(x), dtype=float))
    J = np.zeros((f0.size, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        fp = np.atleast_1d(np.asarray(evaluator(x + e), dtype=float))
        fm = np.atleast_1d(np.asarray(evaluator(x - e), dtype=float))
        J[:, i] = (fp - fm) / (2.0 * h[i])
    if not np.all(np.isfinite(J)):
        raise EvaluatorFailure("finite-difference Jacobian produced non-finite values")
    return J


def matrix_field_adjoint_term(field_eval, x, u, w, analytic=None):
    """Gradient of x -> w^T M(x) u for a matrix field M.

    This is the directional contraction (DM(x)[.] u)^T w that appears in
    the adjoint equation.  With an analytic derivative (shape
    (rows, m, n)) the contraction is formed directly; otherwise the
    scalar map is differentiated by central differences, avoiding the
    3-tensor.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if analytic is not None:
        D = np.asarray(analytic(x), dtype=float)  # (rows, m, n)
        return np.einsum("i,ijk,j->k", w, D, u)
    return gradient(lambda xv: float(w @ (np.atleast_2d(field_eval(xv)) @ u)), x)


def validate(problem: CyclicProblem) -> ValidationReport:
    """Run shape and SPD checks; pure (repeat calls give equal reports)."""
    checks = {}

    def record(key, fn):
        try:
            fn()
            checks[key] = (True, "")
        except Exception as exc:  # noqa: BLE001 - report, do not mask
            checks[key] = (False, f"{type(exc).__name__}: {exc}")

    record("R_spd", lambda: linalg.verify_spd(problem.R))
    record("horizon_positive", lambda: None if problem.T > 0 else (_ for _ in ()).throw(ValueError("T <= 0")))
    for tag, x in (("x0", problem.x0), ("xT", problem.xT)):
        record(f"f0_at_{tag}", lambda x=x: problem.eval_f0(x))
        record(f"f1_at_{tag}", lambda x=x: problem.eval_f1(x))
        record(f"F2_at_{tag}", lambda x=x: problem.eval_F2(x))
        record(f"g1_at_{tag}", lambda x=x: problem.eval_g1(x))
        record(f"G2_at_{tag}", lambda x=x: problem.eval_G2(x))
    return ValidationReport(checks=checks, ok=all(ok for ok, _ in checks.values()))
