"""Multiple shooting for the full optimality boundary value problem.

Unknowns are the initial shape adjoint p_x(0), the constant cyclic
multiplier lam, and the interior node states; the cyclic chain y is part
of every node state, so the terminal cyclic condition (the implicit
equation selecting lam) sits in the same Newton residual as the shape
endpoint condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import pmp
from .errors import (
    BlowUp,
    NewtonStagnation,
    SingularMatrix,
    SingularShootingJacobian,
    TrimTurnpikeError,
)
from .integrate import Trajectory, integrate, integrate_with_sensitivity


@dataclass(frozen=True)
class InitialGuess:
    """Optional warm-start data; any field may be None."""

    px0: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None
    segment_states: Optional[np.ndarray] = None  # (nodes-1, 2n+p)


@dataclass(frozen=True)
class ShootingConfig:
    nodes: int = 8
    newton_tol: float = 1e-9
    max_iters: int = 100
    min_step: float = 2.0 ** -20
    jacobian_mode: str = "sensitivity"  # or "fd"
    grid: int = 600
    atol: float = 1e-10
    rtol: float = 1e-9
    # the Newton direction tolerates an inexact Jacobian, so the
    # variational integrations run at looser tolerances than the residual
    jac_atol: float = 1e-8
    jac_rtol: float = 1e-7
    # jac_method "rk4" integrates the variational equations with
    # jac_steps fixed steps per segment: much cheaper for large systems,
    # and the Newton fixed point is set by the residual, not the Jacobian
    jac_method: str = "dopri54"
    jac_steps: int = 40
    # method "rk4" also evaluates the residual with steps fixed steps per
    # segment: the Newton iteration then solves the discretized problem,
    # which is cheap and immune to step-size thrash on wild trial
    # trajectories; use as a warm phase before an adaptive polish
    method: str = "dopri54"
    steps: int = 20
    init: InitialGuess = field(default_factory=InitialGuess)

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError("nodes must be >= 1")
        if self.newton_tol <= 0 or self.atol <= 0 or self.rtol <= 0:
            raise ValueError("tolerances must be positive")
        if self.jacobian_mode not in ("sensitivity", "fd"):
            raise ValueError("jacobian_mode must be 'sensitivity' or 'fd'")
        if self.method not in ("rk4", "dopri54"):
            raise ValueError("method must be 'rk4' or 'dopri54'")


@dataclass(frozen=True)
class ExtremalSolution:
    """Converged extremal sampled on the report grid."""

    times: np.ndarray
    x: np.ndarray       # (N+1, n)
    y: np.ndarray       # (N+1, p)
    p_x: np.ndarray     # (N+1, n)
    u: np.ndarray       # (N+1, m)
    lam: np.ndarray
    residual_norm: float
    iterations: int
    px0: np.ndarray
    node_times: np.ndarray
    node_states: np.ndarray  # (nodes+1, 2n+p), converged shooting nodes

    @property
    def T(self):
        return float(self.times[-1])

    def state_at(self, t):
        """(x, y, p_x) at time t by interpolation on the report grid."""
        z = np.hstack([self.x, self.y, self.p_x])
        return Trajectory(self.times, z).at(t)

    def y_at(self, t):
        n, p = self.x.shape[1], self.y.shape[1]
        return self.state_at(t)[n:n + p]


def _default_guess(problem, nodes):
    n, p = problem.dims.n, problem.dims.p
    px0 = np.zeros(n)
    lam = np.zeros(p)
    segs = np.zeros((nodes - 1, 2 * n + p))
    for k in range(1, nodes):
        tau = k / nodes
        segs[k - 1, :n] = (1 - tau) * problem.x0 + tau * problem.xT
        segs[k - 1, n:n + p] = (1 - tau) * problem.y0 + tau * problem.yT
    return px0, lam, segs


def _pack(px0, lam, segs):
    return np.concatenate([px0, lam, segs.ravel()])


def _unpack(problem, nodes, v):
    n, p = problem.dims.n, problem.dims.p
    d = 2 * n + p
    px0 = v[:n]
    lam = v[n:n + p]
    segs = v[n + p:].reshape(nodes - 1, d)
    return px0, lam, segs


def _node_states(problem, px0, segs):
    z0 = np.concatenate([problem.x0, problem.y0, px0])
    return np.vstack([z0[None, :], segs]) if len(segs) else z0[None, :]


def _propagate_batch(problem, Z0, lam, duration, steps):
    """Advance every row of Z0 by `duration` with fixed-step RK4.

    All rows share the step schedule, so the whole sweep costs four
    batched right-hand-side calls per step; arithmetic is identical to
    the scalar fixed-step integrator.
    """
    Z = np.array(Z0, dtype=float)
    h = duration / steps
    for _ in range(steps):
        k1 = pmp.fbvp_rhs_batch(problem, Z, lam)
        k2 = pmp.fbvp_rhs_batch(problem, Z + 0.5 * h * k1, lam)
        k3 = pmp.fbvp_rhs_batch(problem, Z + 0.5 * h * k2, lam)
        k4 = pmp.fbvp_rhs_batch(problem, Z + h * k3, lam)
        Z = Z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(Z)) or np.max(np.abs(Z)) > 1e12:
            raise BlowUp("batched segment integration blew up")
    return Z


def _residual(problem, cfg, node_times, px0, lam, segs):
    """Continuity defects plus terminal conditions; returns (F, endpoints)."""
    n, p = problem.dims.n, problem.dims.p
    starts = _node_states(problem, px0, segs)
    K = len(node_times) - 1
    if cfg.method == "rk4" and problem.batch is not None:
        # uniform node spacing: all segments advance in lockstep
        ends = _propagate_batch(
            problem, starts, lam, node_times[1] - node_times[0], cfg.steps
        )
        blocks = [ends[k] - segs[k] for k in range(K - 1)]
        blocks.append(ends[-1][:n] - problem.xT)
        blocks.append(ends[-1][n:n + p] - problem.yT)
        return np.concatenate(blocks)
    blocks = []
    z_end = None
    for k in range(K):
        traj = integrate(
            lambda z: pmp.fbvp_rhs(problem, z, lam),
            starts[k],
            (node_times[k], node_times[k + 1]),
            method=cfg.method,
            steps=cfg.steps,
            atol=cfg.atol,
            rtol=cfg.rtol,
        )
        z_end = traj.final_state
        if k < K - 1:
            blocks.append(z_end - segs[k])
    blocks.append(z_end[:n] - problem.xT)
    blocks.append(z_end[n:n + p] - problem.yT)
    return np.concatenate(blocks)


def _jacobian_sensitivity(problem, cfg, node_times, px0, lam, segs):
    """Block-bidiagonal shooting Jacobian from forward sensitivities."""
    n, p = problem.dims.n, problem.dims.p
    d = 2 * n + p
    starts = _node_states(problem, px0, segs)
    K = len(node_times) - 1
    nv = n + p + (K - 1) * d
    J = np.zeros((nv, nv))

    # columns of the segment-0 start state with respect to px0
    E0 = np.zeros((d, n))
    E0[n + p:, :] = np.eye(n)

    def cols_of_start(k):
        """Map segment-k start-state perturbations into unknown columns."""
        C = np.zeros((d, nv))
        if k == 0:
            C[:, :n] = E0
        else:
            j0 = n + p + (k - 1) * d
            C[:, j0:j0 + d] = np.eye(d)
        return C

    row = 0
    for k in range(K):
        _, S = integrate_with_sensitivity(
            lambda z, par: pmp.fbvp_rhs(problem, z, par),
            starts[k],
            (node_times[k], node_times[k + 1]),
            params=lam,
            method=cfg.jac_method,
            steps=cfg.jac_steps,
            atol=cfg.jac_atol,
            rtol=cfg.jac_rtol,
        )
        Phi, Psi = S[:, :d], S[:, d:]
        block = Phi @ cols_of_start(k)
        block[:, n:n + p] += Psi
        if k < K - 1:
            j0 = n + p + k * d
            block[:, j0:j0 + d] -= np.eye(d)
            J[row:row + d] = block
            row += d
        else:
            J[row:row + n] = block[:n]
            J[row + n:row + n + p] = block[n:n + p]
    return J


def _jacobian_batch(problem, cfg, node_times, px0, lam, segs):
    """Shooting Jacobian by forward differences of the batched segment map.

    One lockstep sweep propagates, for every segment, the base state
    plus one perturbed copy per unknown direction (d state components
    and p multiplier components); consistent with the fixed-step
    residual by construction.
    """
    n, p = problem.dims.n, problem.dims.p
    d = 2 * n + p
    starts = _node_states(problem, px0, segs)
    K = len(node_times) - 1
    nb = 1 + d + p
    Z0 = np.repeat(starts, nb, axis=0)
    Lam = np.tile(np.atleast_1d(lam), (K * nb, 1))
    eps = 1e-7
    hz = eps * np.maximum(1.0, np.abs(starts))
    hl = eps * np.maximum(1.0, np.abs(np.atleast_1d(lam)))
    for j in range(d):
        Z0[1 + j::nb, j] += hz[:, j]
    for q in range(p):
        Lam[1 + d + q::nb, q] += hl[q]
    ends = _propagate_batch(
        problem, Z0, Lam, node_times[1] - node_times[0], cfg.steps
    )
    nv = n + p + (K - 1) * d
    J = np.zeros((nv, nv))
    E0 = np.zeros((d, n))
    E0[n + p:, :] = np.eye(n)
    row = 0
    for k in range(K):
        base = ends[k * nb]
        Phi = (ends[k * nb + 1:k * nb + 1 + d] - base).T / hz[k]
        Psi = (ends[k * nb + 1 + d:(k + 1) * nb] - base).T / hl
        C = np.zeros((d, nv))
        if k == 0:
            C[:, :n] = E0
        else:
            j0 = n + p + (k - 1) * d
            C[:, j0:j0 + d] = np.eye(d)
        block = Phi @ C
        block[:, n:n + p] += Psi
        if k < K - 1:
            j0 = n + p + k * d
            block[:, j0:j0 + d] -= np.eye(d)
            J[row:row + d] = block
            row += d
        else:
            J[row:row + n] = block[:n]
            J[row + n:row + n + p] = block[n:n + p]
    return J


def _jacobian_fd(problem, cfg, node_times, v, F0, nodes):
    h = 1e-7
    J = np.zeros((len(v), len(v)))
    for i in range(len(v)):
        e = np.zeros(len(v))
        e[i] = h * max(1.0, abs(v[i]))
        Fp = _residual(problem, cfg, node_times, *_unpack(problem, nodes, v + e))
        Fm = _residual(problem, cfg, node_times, *_unpack(problem, nodes, v - e))
        J[:, i] = (Fp - Fm) / (2.0 * e[i])
    return J


def solve_bvp(problem, config: ShootingConfig = None) -> ExtremalSolution:
    """Damped-Newton multiple shooting on the full optimality system."""
    cfg = config or ShootingConfig()
    K = cfg.nodes
    node_times = np.linspace(0.0, problem.T, K + 1)

    init = cfg.init
    px0, lam, segs = _default_guess(problem, K)
    if init.px0 is not None:
        px0 = np.atleast_1d(np.asarray(init.px0, dtype=float))
    if init.lam is not None:
        lam = np.atleast_1d(np.asarray(init.lam, dtype=float))
    if init.segment_states is not None:
        segs = np.atleast_2d(np.asarray(init.segment_states, dtype=float))

    v = _pack(px0, lam, segs)
    F = _residual(problem, cfg, node_times, px0, lam, segs)
    norm = np.linalg.norm(F)
    iters = 0
    # the Jacobian dominates the iteration cost, so it is reused (chord
    # iteration) while the line search keeps accepting steps; a failed
    # search with a stale Jacobian triggers a rebuild instead of LM
    J = None
    reused = 0
    _MAX_REUSE = 4
    while norm > cfg.newton_tol and iters < cfg.max_iters:
        if J is None:
            if cfg.jacobian_mode == "fd":
                J = _jacobian_fd(problem, cfg, node_times, v, F, K)
            elif cfg.method == "rk4" and problem.batch is not None:
                J = _jacobian_batch(problem, cfg, node_times, px0, lam, segs)
            else:
                J = _jacobian_sensitivity(problem, cfg, node_times, px0, lam, segs)
            fresh, reused = True, 0
        try:
            from .linalg import lu_solve
            step = lu_solve(J, -F)
        except SingularMatrix as exc:
            if not fresh:
                J = None
                continue
            raise SingularShootingJacobian(str(exc)) from exc
        # Armijo backtracking on the squared residual
        m0 = norm * norm
        t = 1.0
        v_new = F_new = None
        while t >= 2.0 ** -6:
            v_try = v + t * step
            try:
                F_try = _residual(problem, cfg, node_times, *_unpack(problem, K, v_try))
            except TrimTurnpikeError:
                # trial left the admissible region (blow-up, pole,
                # radius collapse); treat as a rejected step
                t *= 0.5
                continue
            if float(F_try @ F_try) <= (1.0 - 2e-4 * t) * m0:
                v_new, F_new = v_try, F_try
                break
            t *= 0.5
        if v_new is None:
            if not fresh:
                J = None
                continue
            # heavy backtracking means the Newton model overshoots;
            # switch to Levenberg-Marquardt trials for this iteration
            v_new, F_new = _lm_step(problem, cfg, node_times, K, v, F, J, m0)
        v, F = v_new, F_new
        px0, lam, segs = _unpack(problem, K, v)
        prev = norm
        norm = float(np.linalg.norm(F))
        iters += 1
        fresh = False
        reused += 1
        # keep the chord Jacobian only while contraction stays strong;
        # slow progress means the linearization is stale
        if reused > _MAX_REUSE or norm > 0.5 * prev:
            J = None
    if norm > cfg.newton_tol:
        raise NewtonStagnation(
            f"shooting Newton hit max_iters={cfg.max_iters} at residual {norm:.3e}"
        )
    return _sample_solution(problem, cfg, node_times, px0, lam, segs, norm, iters)


def _lm_step(problem, cfg, node_times, K, v, F, J, m0):
    """Levenberg-Marquardt trial loop for one outer iteration.

    Used when plain backtracking fails to find an acceptable Newton
    fraction: damps the normal equations until some decrease of the
    residual norm is achieved.
    """
    from .linalg import lu_solve

    JtJ = J.T @ J
    g = J.T @ F
    scale = np.maximum(np.diag(JtJ), 1e-12)
    mu = 1e-4 * float(np.max(np.diag(JtJ)))
    for _ in range(40):
        try:
            step = lu_solve(JtJ + mu * np.diag(scale), -g)
        except SingularMatrix:
            mu *= 4.0
            continue
        v_try = v + step
        try:
            F_try = _residual(problem, cfg, node_times, *_unpack(problem, K, v_try))
        except TrimTurnpikeError:
            mu *= 4.0
            continue
        if float(F_try @ F_try) < m0:
            return v_try, F_try
        mu *= 4.0
    raise NewtonStagnation(
        f"LM fallback found no decrease from residual {np.sqrt(m0):.3e}"
    )


def _sample_solution(problem, cfg, node_times, px0, lam, segs, norm, iters):
    n, p, m = problem.dims.n, problem.dims.p, problem.dims.m
    d = 2 * n + p
    K = len(node_times) - 1
    T = problem.T
    tg = np.linspace(0.0, T, cfg.grid + 1)
    Z = np.empty((len(tg), d))
    starts = _node_states(problem, px0, segs)
    for k in range(K):
        a, b = node_times[k], node_times[k + 1]
        mask = (tg >= a - 1e-12 * T) & (tg <= b + 1e-12 * T)
        pts = np.clip(tg[mask], a, b)
        seg_grid = np.unique(np.concatenate([[a], pts, [b]]))
        traj = integrate(
            lambda z: pmp.fbvp_rhs(problem, z, lam),
            starts[k],
            (a, b),
            method=cfg.method,
            steps=cfg.steps,
            atol=cfg.atol,
            rtol=cfg.rtol,
            grid=seg_grid,
        )
        Z[mask] = traj.states[np.searchsorted(traj.times, pts)]
    # endpoints are the shooting data themselves
    Z[0] = starts[0]
    x, y, p_x = Z[:, :n], Z[:, n:n + p], Z[:, n + p:]
    u = np.empty((len(tg), m))
    for i in range(len(tg)):
        u[i] = pmp.optimal_feedback(problem, x[i], p_x[i], lam)
    nodes_full = np.vstack([starts, Z[-1][None, :]])
    return ExtremalSolution(
        times=tg, x=x, y=y, p_x=p_x, u=u,
        lam=lam.copy(), residual_norm=float(norm), iterations=iters,
        px0=px0.copy(), node_times=node_times, node_states=nodes_full,
    )


def continuation_in_T(problem, T_start, T_end, steps, config: ShootingConfig = None,
                      yT_of_T=None, prolong="resample", config_of_T=None):
    """Warm-started homotopy over increasing horizons.

    yT_of_T, when given, maps each horizon to its terminal cyclic value
    (e.g. a rotation target proportional to T).  prolong selects how the
    interior nodes of the next guess are built: "resample" interpolates
    at proportional times, "turnpike" keeps the boundary layers at
    absolute times and fills the inserted middle with the steady point
    of the current multiplier (needed when the layers are steep).
    config_of_T, when given, supplies the per-horizon solver settings
    (e.g. fixed-step counts scaled to the segment length); the base
    config still provides the initial guess for the first horizon.
    Returns the list of solutions in horizon order.
    """
    if T_start > T_end:
        raise ValueError("T_start must be <= T_end")
    if prolong not in ("resample", "turnpike"):
        raise ValueError(f"unknown prolongation {prolong!r}")
    cfg = config or ShootingConfig()
    horizons = np.linspace(T_start, T_end, steps) if steps > 1 else np.array([T_end])
    sols = []
    sol = None
    for T in horizons:
        kw = {"T": float(T)}
        if yT_of_T is not None:
            kw["yT"] = yT_of_T(float(T))
        prob_T = problem.with_boundary(**kw)
        cfg_T = config_of_T(float(T)) if config_of_T is not None else cfg
        try:
            if prolong == "turnpike" and sol is not None and prob_T.T > sol.T:
                sol = _extend_horizon(prob_T, sol, cfg_T)
            else:
                guess = cfg.init if sol is None else _warm_guess(prob_T, sol, cfg_T.nodes)
                sol = solve_bvp(prob_T, replace(cfg_T, init=guess))
        except Exception as exc:
            raise type(exc)(f"continuation failed at T={T:g}: {exc}") from exc
        sols.append(sol)
    return sols


def _extend_horizon(prob_T, sol, cfg):
    """Solve at a longer horizon by extending along the current trim.

    Stage 1 extends the horizon with the terminal cyclic value that the
    current trim rate would reach (a nearly exact guess, so the solve is
    cheap).  Stage 2 morphs the terminal cyclic value to the requested
    one with adaptive warm-started steps; the multiplier drifts along
    its branch as the average cyclic rate changes.
    """
    from . import steady

    n, p = prob_T.dims.n, prob_T.dims.p
    shift = prob_T.T - sol.T
    mid = sol.state_at(sol.T / 2.0)
    sp_old = steady.solve_static(prob_T, sol.lam, x_init=mid[:n], p_init=mid[n + p:])
    rate_old = prob_T.eval_g1(sp_old.xbar) + prob_T.eval_G2(sp_old.xbar) @ sp_old.ubar
    y_easy = sol.y[-1] + rate_old * shift
    prob_easy = prob_T.with_boundary(yT=y_easy)
    guess = turnpike_prolong(prob_easy, sol, cfg.nodes, sp=sp_old)
    cur = solve_bvp(prob_easy, replace(cfg, init=guess))
    return cyclic_target_homotopy(prob_T, cur, cfg)


def cyclic_target_homotopy(problem, sol, config: ShootingConfig = None):
    """Morph the terminal cyclic value to problem.yT by adaptive steps.

    Starts from a solution whose reached terminal cyclic value may
    differ from the requested one and walks the target over, warm-
    starting each step from the previous solution.
    """
    cfg = config or ShootingConfig()
    y_start = sol.y[-1].copy()
    target = problem.yT
    cur = sol
    frac, step = 0.0, 0.25
    while frac < 1.0:
        f = min(1.0, frac + step)
        prob_f = problem.with_boundary(yT=y_start + f * (target - y_start))
        try:
            nxt = solve_bvp(prob_f, replace(cfg, init=_warm_guess(prob_f, cur, cfg.nodes)))
        except TrimTurnpikeError:
            step *= 0.5
            if step < 1.0 / 64.0:
                raise
            continue
        cur, frac = nxt, f
        step = min(0.5, step * 2.0)
    return cur


def boundary_homotopy(problem, sp, config: ShootingConfig = None, drho=0.2, drho_min=2e-3):
    """Solve by continuation in the shape boundary data.

    Starts from endpoints placed at the steady point xbar (where the
    trim itself solves the problem exactly) and morphs x0, xT linearly
    to their true values, warm-starting each stage.  Robust entry point
    for problems whose cold starts stagnate (steep boundary layers far
    from the turnpike).
    """
    cfg = config or ShootingConfig()
    x0_true, xT_true = problem.x0.copy(), problem.xT.copy()
    rho = 0.0
    step = drho
    guess = cfg.init if cfg.init.segment_states is not None else turnpike_guess(problem, sp, cfg.nodes)
    sol = None
    while rho < 1.0:
        r = min(1.0, rho + step)
        prob_r = problem.with_boundary(
            x0=sp.xbar + r * (x0_true - sp.xbar),
            xT=sp.xbar + r * (xT_true - sp.xbar),
        )
        try:
            sol = solve_bvp(prob_r, replace(cfg, init=guess))
        except TrimTurnpikeError:
            step *= 0.5
            if step < drho_min:
                raise
            continue
        rho = r
        guess = _warm_guess(prob_r, sol, cfg.nodes)
        step = min(drho, step * 2.0)
    return sol


def turnpike_guess(problem, sp, nodes):
    """Turnpike-informed initial guess from a steady point.

    Interior nodes sit at (xbar, pxbar) with the cyclic components on the
    trim line through the midpoint of the cyclic boundary data; the
    initial adjoint guess is pxbar and the multiplier is the steady
    point's own.
    """
    n, p = problem.dims.n, problem.dims.p
    d = 2 * n + p
    T = problem.T
    rate = problem.eval_g1(sp.xbar) + problem.eval_G2(sp.xbar) @ sp.ubar
    y_mid = 0.5 * (problem.y0 + problem.yT)
    segs = np.empty((nodes - 1, d))
    for k in range(1, nodes):
        t = (k / nodes) * T
        segs[k - 1, :n] = sp.xbar
        segs[k - 1, n:n + p] = y_mid + (t - T / 2) * rate
        segs[k - 1, n + p:] = sp.pxbar
    return InitialGuess(px0=sp.pxbar, lam=sp.lam, segment_states=segs)


def _warm_guess(problem, sol, nodes):
    """Interior node states resampled from a solution at proportional times.

    Node times that coincide with the solution's own shooting nodes take
    the converged node states verbatim: interpolating the report grid
    inside a boundary layer loses several digits, and the segment map
    amplifies that loss exponentially.
    """
    n, p = problem.dims.n, problem.dims.p
    d = 2 * n + p
    Z = np.hstack([sol.x, sol.y, sol.p_x])
    segs = np.empty((nodes - 1, d))
    tol = 1e-9 * max(1.0, sol.T)
    for k in range(1, nodes):
        t = (k / nodes) * sol.T
        i = int(np.searchsorted(sol.node_times, t))
        hits = [j for j in (i - 1, i) if 0 <= j < len(sol.node_times)
                and abs(sol.node_times[j] - t) <= tol]
        if hits:
            segs[k - 1] = sol.node_states[hits[0]]
        else:
            for j in range(d):
                segs[k - 1, j] = np.interp(t, sol.times, Z[:, j])
    return InitialGuess(px0=sol.px0, lam=sol.lam, segment_states=segs)


def turnpike_prolong(problem, sol, nodes, sp=None):
    """Prolong a shorter-horizon solution to problem.T, turnpike style.

    Boundary layers are copied at absolute times (the leading layer from
    [0, T_old/2], the trailing layer from [T_old/2, T_old] shifted to end
    at the new horizon); the inserted middle sits at the steady point
    whose trim rate matches the cyclic distance the middle must cover,
    and that steady point's multiplier seeds lambda.  This preserves the
    layer structure that proportional resampling destroys and keeps the
    cyclic chain continuous across the junctions.
    """
    n, p = problem.dims.n, problem.dims.p
    d = 2 * n + p
    T_new, T_old = problem.T, sol.T
    if T_new <= T_old:
        return _warm_guess(problem, sol, nodes)
    shift = T_new - T_old
    dy = problem.yT - sol.y[-1]
    lam_new = sol.lam
    if sp is None:
        from . import steady
        mid = sol.state_at(T_old / 2.0)
        lam_new, sp = steady.match_trim_rate(
            problem, dy / shift, lam0=sol.lam,
            x_init=mid[:n], p_init=mid[n + p:],
        )
    rate = problem.eval_g1(sp.xbar) + problem.eval_G2(sp.xbar) @ sp.ubar
    y_anchor = sol.y_at(T_old / 2.0)

    def _layer_state(t):
        # prefer a converged node state over report-grid interpolation:
        # the layers amplify interpolation error exponentially
        tol = 1e-9 * max(1.0, T_old)
        i = int(np.searchsorted(sol.node_times, t))
        for j in (i - 1, i):
            if 0 <= j < len(sol.node_times) and abs(sol.node_times[j] - t) <= tol:
                return sol.node_states[j].copy()
        return sol.state_at(t).copy()

    segs = np.empty((nodes - 1, d))
    for k in range(1, nodes):
        t = (k / nodes) * T_new
        if t <= T_old / 2.0:
            z = _layer_state(t)
        elif t >= T_old / 2.0 + shift:
            z = _layer_state(t - shift)
            z[n:n + p] += dy
        else:
            z = np.empty(d)
            z[:n] = sp.xbar
            z[n:n + p] = y_anchor + (t - T_old / 2.0) * rate
            z[n + p:] = sp.pxbar
        segs[k - 1] = z
    return InitialGuess(px0=sol.px0, lam=lam_new, segment_states=segs)
