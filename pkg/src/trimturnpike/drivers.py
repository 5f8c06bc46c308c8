"""High-level solve recipes shared by the CLI, demos, and tests."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import shooting, steady
from .shooting import ShootingConfig

# fixed-step size target for the warm phases: the boundary layers of the
# orbital problem destabilize the RK4 segment map above h ~ 0.13
_H_TARGET = 0.1
# cap on the shooting segment length: the layer flow amplifies node
# perturbations by e^{rate * segment}, and beyond this length the
# prolonged guesses stop converging
_SEG_CAP = 1.5


def _nodes_for(T, nodes):
    return max(nodes, int(np.ceil(T / _SEG_CAP)))


def _warm_config(T, nodes, grid):
    nodes = _nodes_for(T, nodes)
    k = max(2, int(np.ceil(T / nodes / _H_TARGET)))
    # the report grid keeps ~_H_TARGET spacing: warm stages build the
    # next stage's guess by interpolating it, and the boundary layers
    # lose too much accuracy on a coarser grid
    return ShootingConfig(
        nodes=nodes, jac_method="rk4", jac_steps=k, method="rk4", steps=k,
        newton_tol=1e-6, max_iters=25, grid=max(grid, int(np.ceil(T / _H_TARGET))),
    )


def solve_kepler(problem, T_start=10.0, steps=10, nodes=40, grid=600, newton_tol=1e-9):
    """Orbital-transfer extremal by homotopy and horizon continuation.

    Cold starts stagnate on this problem (steep boundary layers far
    from the trim), so the solve proceeds in three phases: a
    boundary-data homotopy at a short horizon starting from the
    rate-matched trim, a warm-started horizon continuation with
    turnpike prolongation of the guess (cyclic targets scaled
    proportionally to the horizon), and a final tight-tolerance
    polish.  The warm phases solve a fixed-step discretization with a
    Jacobian on the same grid (consistent, hence locally quadratic)
    at loose tolerance; only the polish integrates adaptively.
    Returns (solution, steady_point) at the full horizon.
    """
    T_end = problem.T
    T0 = min(float(T_start), T_end)
    rate = np.asarray(problem.yT, dtype=float) / T_end
    kp0 = problem.with_boundary(T=T0, yT=rate * T0)
    lam0, sp0 = steady.match_trim_rate(kp0, rate)
    sol = shooting.boundary_homotopy(kp0, sp0, _warm_config(T0, nodes, grid), drho=0.1)

    if T_end > T0:
        base = _warm_config(T0, nodes, grid)
        sols = shooting.continuation_in_T(
            problem, T0, T_end, steps,
            config=replace(base, init=shooting._warm_guess(kp0, sol, nodes)),
            yT_of_T=lambda T: rate * T,
            prolong="turnpike",
            config_of_T=lambda T: _warm_config(T, nodes, grid),
        )
        sol = sols[-1]

    return _polish(problem, sol, nodes, grid, newton_tol)


def _polish(problem, sol, nodes, grid, newton_tol):
    """Tight adaptive re-solve from a warm solution, plus the steady point
    of the converged multiplier seeded from the extremal's midpoint."""
    T = problem.T
    nodes_end = _nodes_for(T, nodes)
    tight = ShootingConfig(
        nodes=nodes_end, jac_method="rk4",
        jac_steps=max(2, int(np.ceil(T / nodes_end / _H_TARGET))),
        atol=1e-12, rtol=1e-11, newton_tol=newton_tol, max_iters=40, grid=grid,
        init=shooting._warm_guess(problem, sol, nodes_end),
    )
    sol = shooting.solve_bvp(problem, tight)
    n, p = problem.dims.n, problem.dims.p
    mid = sol.state_at(T / 2.0)
    sp = steady.solve_static(problem, sol.lam, x_init=mid[:n], p_init=mid[n + p:])
    return sol, sp


def solve_layered(problem, T_start=5.0, steps=10, nodes=16, grid=600, newton_tol=1e-9):
    """Extremal for problems whose trim carries no cyclic transport.

    When the cyclic rate vanishes at the steady point (e.g. the control
    enters the cyclic dynamics through a factor that is zero on the
    trim), the whole cyclic displacement is generated inside the
    boundary layers and rate matching is unavailable.  The solve then
    proceeds from a cold short-horizon problem with a proportionally
    reduced cyclic target, morphs the target to its full value at the
    short horizon, extends the horizon with the dormant trim middle
    inserted, and polishes.  Returns (solution, steady_point).
    """
    T_end = problem.T
    T0 = min(float(T_start), T_end)
    p_easy = problem.with_boundary(
        T=T0, yT=problem.y0 + (problem.yT - problem.y0) * (T0 / T_end))
    cfg0 = replace(_warm_config(T0, nodes, grid), max_iters=200)
    sol = shooting.solve_bvp(p_easy, cfg0)
    p_full = p_easy.with_boundary(yT=problem.yT)
    sol = shooting.cyclic_target_homotopy(p_full, sol, cfg0)

    if T_end > T0:
        base = replace(_warm_config(T0, nodes, grid), max_iters=60)
        sols = shooting.continuation_in_T(
            problem, T0, T_end, steps,
            config=replace(base, init=shooting._warm_guess(p_full, sol, base.nodes)),
            yT_of_T=lambda T: problem.yT,
            prolong="turnpike",
            config_of_T=lambda T: replace(_warm_config(T, nodes, grid), max_iters=60),
        )
        sol = sols[-1]
    return _polish(problem, sol, nodes, grid, newton_tol)
