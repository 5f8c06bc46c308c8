"""Static problem of the reduced system and hyperbolicity certification.

The static extremals at a fixed cyclic multiplier are exactly the
equilibria of the reduced Hamiltonian field, so the solver is a damped
Newton iteration on rbvp_rhs = 0 over (x, p_x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, pmp
from .errors import NewtonStagnation, SingularJacobian, SingularMatrix  # noqa: F401
from .linalg import Spectrum

HYPERBOLICITY_RTOL = 1e-8
_DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class SteadyPoint:
    """Static optimizer (xbar, pxbar, ubar) at multiplier lam."""

    xbar: np.ndarray
    pxbar: np.ndarray
    ubar: np.ndarray
    lam: np.ndarray
    kkt_residual: float

    def reduced_state(self):
        return np.concatenate([self.xbar, self.pxbar])


@dataclass(frozen=True)
class HyperbolicityReport:
    """Spectrum of the linearized reduced field at a steady point."""

    matrix: np.ndarray
    spectrum: Spectrum
    hyperbolic: bool
    mu_star: float


@dataclass(frozen=True)
class StaticBranch:
    point: SteadyPoint
    hyperbolicity: HyperbolicityReport


def solve_static(problem, lam, x_init=None, p_init=None, tol=1e-12, max_iters=100):
    """Newton solve of rbvp_rhs(x, p_x, lam) = 0.

    Default initialization is the midpoint of the shape boundary data
    with zero adjoint (the steady state sits near the data whenever the
    turnpike estimates are informative).
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    n = problem.dims.n
    x = 0.5 * (problem.x0 + problem.xT) if x_init is None else np.atleast_1d(np.asarray(x_init, dtype=float))
    p = np.zeros(n) if p_init is None else np.atleast_1d(np.asarray(p_init, dtype=float))
    s = np.concatenate([x, p])

    F = pmp.rbvp_rhs(problem, s, lam)
    norm = np.linalg.norm(F)
    for _ in range(max_iters):
        if norm <= tol:
            break
        A = pmp.linearize_reduced(problem, s, lam)
        try:
            step = linalg.lu_solve(A, -F)
        except SingularMatrix as exc:
            raise SingularJacobian(f"static Newton Jacobian singular at {s}") from exc
        t = 1.0
        while t >= 2.0 ** -20:
            s_new = s + t * step
            F_new = pmp.rbvp_rhs(problem, s_new, lam)
            if np.linalg.norm(F_new) <= (1.0 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            raise NewtonStagnation(f"static Newton line search stalled at residual {norm:.3e}")
        s, F, norm = s_new, F_new, np.linalg.norm(F_new)
    else:
        if norm > tol:
            raise NewtonStagnation(f"static Newton did not reach tolerance ({norm:.3e})")

    xbar, pxbar = s[:n], s[n:]
    ubar = pmp.optimal_feedback(problem, xbar, pxbar, lam)
    return SteadyPoint(xbar=xbar, pxbar=pxbar, ubar=ubar, lam=lam, kkt_residual=float(norm))


def check_hyperbolicity(problem, sp: SteadyPoint) -> HyperbolicityReport:
    """Linearize the reduced field at sp and classify the spectrum.

    Hyperbolic when the spectral gap min |Re| exceeds
    1e-8 * max(1, ||A||); mu_star is the gap itself.
    """
    A = pmp.linearize_reduced(problem, sp.reduced_state(), sp.lam)
    spec = linalg.eigenvalues(A)
    threshold = HYPERBOLICITY_RTOL * max(1.0, float(np.linalg.norm(A)))
    return HyperbolicityReport(
        matrix=A,
        spectrum=spec,
        hyperbolic=bool(spec.gap > threshold),
        mu_star=spec.gap,
    )


def trim_rate(problem, sp: SteadyPoint):
    """Cyclic velocity g1(xbar) + G2(xbar) ubar of the trim generated by sp."""
    return problem.eval_g1(sp.xbar) + problem.eval_G2(sp.xbar) @ sp.ubar


def _rate_system(problem, v, target):
    """Augmented residual: reduced equilibrium plus prescribed trim rate."""
    n = problem.dims.n
    s, lam = v[: 2 * n], v[2 * n:]
    x, p_x = s[:n], s[n:]
    u = pmp.optimal_feedback(problem, x, p_x, lam)
    rate = problem.eval_g1(x) + problem.eval_G2(x) @ u
    return np.concatenate([pmp.rbvp_rhs(problem, s, lam), rate - target])


def _rate_newton(problem, v, target, tol=1e-11, max_iters=80):
    nv = v.size
    F = _rate_system(problem, v, target)
    norm = np.linalg.norm(F)
    for _ in range(max_iters):
        if norm <= tol:
            return v
        J = np.zeros((nv, nv))
        for i in range(nv):
            e = np.zeros(nv)
            e[i] = 1e-6 * max(1.0, abs(v[i]))
            J[:, i] = (
                _rate_system(problem, v + e, target) - _rate_system(problem, v - e, target)
            ) / (2 * e[i])
        try:
            step = linalg.lu_solve(J, -F)
        except SingularMatrix as exc:
            raise SingularJacobian("trim-rate Newton Jacobian singular") from exc
        t = 1.0
        while t >= 2.0 ** -20:
            try:
                F_new = _rate_system(problem, v + t * step, target)
            except Exception:  # noqa: BLE001 - trial left the admissible region
                t *= 0.5
                continue
            if np.linalg.norm(F_new) <= (1.0 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            raise NewtonStagnation("trim-rate Newton line search stalled")
        v, F, norm = v + t * step, F_new, np.linalg.norm(F_new)
    raise NewtonStagnation(f"trim-rate Newton did not converge ({norm:.3e})")


def match_trim_rate(problem, target_rate, lam0=None, steps=12, x_init=None, p_init=None):
    """Steady point whose trim has the given cyclic velocity.

    Solves the equilibrium equations augmented with the rate constraint
    for (x, p_x, lam) jointly, continuing in the prescribed rate from
    the lam0-branch value.  The branch lam -> rate may fold, so Newton
    in lam alone is not enough; the augmented system tracks through
    folds.  Returns (lam, SteadyPoint).
    """
    p = problem.dims.p
    target = np.atleast_1d(np.asarray(target_rate, dtype=float))
    lam = np.zeros(p) if lam0 is None else np.atleast_1d(np.asarray(lam0, dtype=float))
    sp = solve_static(problem, lam, x_init=x_init, p_init=p_init)
    rate0 = trim_rate(problem, sp)
    v = np.concatenate([sp.xbar, sp.pxbar, lam])
    for rho in np.linspace(0.0, 1.0, steps + 1)[1:]:
        v = _rate_newton(problem, v, rate0 + rho * (target - rate0))
    n = problem.dims.n
    lam = v[2 * n:]
    sp = solve_static(problem, lam, x_init=v[:n], p_init=v[n:2 * n])
    return lam, sp


def enumerate_static_branches(problem, lam, init_grid):
    """solve_static from each seed; deduplicate converged equilibria.

    Per-seed failures are skipped (recorded as absent), so a coarse seed
    grid can probe multi-branch structure safely.
    """
    init_grid = list(init_grid)
    if not init_grid:
        raise ValueError("init_grid must be nonempty")
    branches = []
    for x_init in init_grid:
        try:
            sp = solve_static(problem, lam, x_init=x_init)
        except Exception:  # noqa: BLE001 - per-seed failures are expected
            continue
        s = sp.reduced_state()
        if any(np.max(np.abs(s - b.point.reduced_state())) <= _DEDUP_TOL for b in branches):
            continue
        branches.append(StaticBranch(point=sp, hyperbolicity=check_hyperbolicity(problem, sp)))
    return branches
