"""Pontryagin optimality objects.

Hamiltonian, optimal feedback, full and reduced boundary-value-problem
right-hand sides, cyclic reconstruction, endpoint map, and the
linearization of the reduced field at a steady point.  The cyclic
adjoint is constant along extremals, so it enters everywhere as a plain
parameter vector ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import GridTooCoarse
from .integrate import Trajectory, integrate


@dataclass(frozen=True)
class CyclicMultiplier:
    """Constant adjoint of the cyclic variable."""

    lam: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.lam, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError("cyclic multiplier must be finite")
        object.__setattr__(self, "lam", v)

    def as_array(self):
        return self.lam


@dataclass(frozen=True)
class ReducedState:
    """State of the reduced (shape) Hamiltonian system."""

    x: np.ndarray
    p_x: np.ndarray

    def as_array(self):
        return np.concatenate([np.atleast_1d(self.x), np.atleast_1d(self.p_x)])


def _as_lam(lam):
    if isinstance(lam, CyclicMultiplier):
        return lam.lam
    return np.atleast_1d(np.asarray(lam, dtype=float))


def hamiltonian(problem, x, p_x, lam, u):
    """Control Hamiltonian in the normal case.

    H = p_x.(f1 + F2 u) + lam.(g1 + G2 u) + f0(x) + u.R u / 2.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p_x = np.atleast_1d(np.asarray(p_x, dtype=float))
    lam = _as_lam(lam)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    # single summation path shared with rocp_hamiltonian: the two forms
    # are the same expression regrouped, so keep them bit-identical
    return (
        float(p_x @ (problem.eval_f1(x) + problem.eval_F2(x) @ u))
        + float(lam @ (problem.eval_g1(x) + problem.eval_G2(x) @ u))
        + problem.eval_f0(x)
        + 0.5 * float(u @ (problem.R @ u))
    )


def rocp_hamiltonian(problem, x, p_x, lam, u):
    """Hamiltonian of the reduced problem at multiplier lam.

    Identical (not merely equal) to hamiltonian: the reduced problem's
    Hamiltonian is the same expression with the terms regrouped.
    """
    return hamiltonian(problem, x, p_x, lam, u)


def optimal_feedback(problem, x, p_x, lam):
    """Minimizing control u* = -R^{-1} (F2(x)^T p_x + G2(x)^T lam)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p_x = np.atleast_1d(np.asarray(p_x, dtype=float))
    lam = _as_lam(lam)
    rhs = problem.eval_F2(x).T @ p_x + problem.eval_G2(x).T @ lam
    return -problem.solve_R(rhs)


def _adjoint_contraction(D, w, u):
    """Gradient components sum_{i,j} w_i D[i,j,:] u_j for an analytic 3-index
    field derivative, via two small matrix products."""
    r, m, n = D.shape
    return u @ (w @ D.reshape(r, m * n)).reshape(m, n)


def _reduced_fields(problem, x, p_x, lam):
    """(u*, dx/dt, dp_x/dt, g1, G2): the common core of the BVP right-hand
    sides.

    Hot path of every integration: each field is evaluated exactly once
    through the raw callbacks (shapes were checked at construction /
    validate); blow-ups are caught by the integrator's state guard.
    """
    f1v = np.asarray(problem.f1(x), dtype=float)
    F2v = np.asarray(problem.F2(x), dtype=float)
    g1v = np.asarray(problem.g1(x), dtype=float)
    G2v = np.asarray(problem.G2(x), dtype=float)
    u = -(problem.R_inv @ (F2v.T @ p_x + G2v.T @ lam))
    xdot = f1v + F2v @ u

    if problem.grad_f0 is not None:
        grad = np.asarray(problem.grad_f0(x), dtype=float).copy()
    else:
        grad = model.gradient(lambda v: float(problem.f0(v)), x)
    if problem.D_f1 is not None:
        grad += np.asarray(problem.D_f1(x), dtype=float).T @ p_x
    else:
        grad += model.jacobian(problem.f1, x).T @ p_x
    if problem.D_F2 is not None:
        grad += _adjoint_contraction(np.asarray(problem.D_F2(x), dtype=float), p_x, u)
    else:
        grad += model.matrix_field_adjoint_term(problem.F2, x, u, p_x)
    if problem.D_g1 is not None:
        grad += np.asarray(problem.D_g1(x), dtype=float).T @ lam
    else:
        grad += model.jacobian(problem.g1, x).T @ lam
    if problem.D_G2 is not None:
        grad += _adjoint_contraction(np.asarray(problem.D_G2(x), dtype=float), lam, u)
    else:
        grad += model.matrix_field_adjoint_term(problem.G2, x, u, lam)
    return u, xdot, -grad, g1v, G2v


def fbvp_rhs(problem, z, lam):
    """Right-hand side of the full optimality system, z = (x, y, p_x)."""
    n, p = problem.dims.n, problem.dims.p
    z = np.asarray(z, dtype=float)
    x, p_x = z[:n], z[n + p:]
    lam = _as_lam(lam)
    u, xdot, pdot, g1v, G2v = _reduced_fields(problem, x, p_x, lam)
    ydot = g1v + G2v @ u
    return np.concatenate([xdot, ydot, pdot])


def fbvp_rhs_batch(problem, Z, lam):
    """Vectorized fbvp_rhs over the rows of Z with shape (N, 2n+p).

    lam may be a single multiplier (p,) shared by all rows or a per-row
    array (N, p) (the shooting Jacobian perturbs it per direction).
    Falls back to a row loop when the problem carries no batched fields;
    with them, agrees with fbvp_rhs to floating-point roundoff.
    """
    n, p = problem.dims.n, problem.dims.p
    Z = np.asarray(Z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    L = np.broadcast_to(np.atleast_1d(lam) if lam.ndim < 2 else lam, (len(Z), p))
    b = problem.batch
    if b is None:
        return np.stack([fbvp_rhs(problem, Z[i], L[i]) for i in range(len(Z))])
    X, P = Z[:, :n], Z[:, n + p:]
    F2v = b.F2(X)
    G2v = b.G2(X)
    U = -(np.einsum("nim,ni->nm", F2v, P)
          + np.einsum("npm,np->nm", G2v, L)) @ problem.R_inv.T
    dX = b.f1(X) + np.einsum("nim,nm->ni", F2v, U)
    dY = b.g1(X) + np.einsum("npm,nm->np", G2v, U)
    grad = (b.grad_f0(X)
            + np.einsum("nij,ni->nj", b.D_f1(X), P)
            + np.einsum("nijk,ni,nj->nk", b.D_F2(X), P, U)
            + np.einsum("nij,ni->nj", b.D_g1(X), L)
            + np.einsum("nijk,ni,nj->nk", b.D_G2(X), L, U))
    return np.concatenate([dX, dY, -grad], axis=1)


def rbvp_rhs(problem, s, lam):
    """Right-hand side of the reduced system, s = (x, p_x).

    Shares its code path with fbvp_rhs, so the two agree exactly on the
    common components.
    """
    n = problem.dims.n
    if isinstance(s, ReducedState):
        s = s.as_array()
    s = np.asarray(s, dtype=float)
    x, p_x = s[:n], s[n:]
    lam = _as_lam(lam)
    _, xdot, pdot, _, _ = _reduced_fields(problem, x, p_x, lam)
    return np.concatenate([xdot, pdot])


def _cumulative_quadratic(times, values):
    """Cumulative integral of sampled data by local quadratic quadrature.

    On each interval the integrand is replaced by the parabola through
    the interval's endpoints and the adjacent node; reduces to composite
    Simpson on a uniform grid.
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(values, dtype=float)
    N = len(t) - 1
    out = np.zeros((N + 1,) + f.shape[1:])

    def _forward(i):
        # integral over [t_i, t_{i+1}] from the parabola through i, i+1, i+2
        h0, h1 = t[i + 1] - t[i], t[i + 2] - t[i + 1]
        H = h0 + h1
        return (
            h0 * (2 * h0 + 3 * h1) / (6 * H) * f[i]
            + h0 * (h0 + 3 * h1) / (6 * h1) * f[i + 1]
            - h0 ** 3 / (6 * H * h1) * f[i + 2]
        )

    def _backward(i):
        # integral over [t_{i+1}, t_{i+2}] from the same parabola
        h0, h1 = t[i + 1] - t[i], t[i + 2] - t[i + 1]
        H = h0 + h1
        return (
            -h1 ** 3 / (6 * H * h0) * f[i]
            + h1 * (h1 + 3 * h0) / (6 * h0) * f[i + 1]
            + h1 * (2 * h1 + 3 * h0) / (6 * H) * f[i + 2]
        )

    # pair intervals as in composite Simpson so the cubic error terms of
    # the two half-steps cancel; a trailing odd interval reuses the last
    # parabola one-sidedly
    j = 0
    while j + 2 <= N:
        out[j + 1] = out[j] + _forward(j)
        out[j + 2] = out[j + 1] + _backward(j)
        j += 2
    if j < N:
        out[j + 1] = out[j] + _backward(j - 1 if j >= 1 else j)
    return out


def reconstruct_cyclic(problem, reduced_traj, lam, y0):
    """Cyclic chain y(t) from a reduced trajectory.

    Integrates dy/dt = g1(x) + G2(x) u* by cumulative quadrature on the
    trajectory's own grid.
    """
    lam = _as_lam(lam)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    times = reduced_traj.times
    if len(times) < 3:
        raise GridTooCoarse("cyclic reconstruction needs at least 3 grid nodes")
    n = problem.dims.n
    rates = np.empty((len(times), problem.dims.p))
    for i, s in enumerate(reduced_traj.states):
        x, p_x = s[:n], s[n:]
        u = optimal_feedback(problem, x, p_x, lam)
        rates[i] = problem.eval_g1(x) + problem.eval_G2(x) @ u
    y = y0 + _cumulative_quadratic(times, rates)
    return Trajectory(times, y)


def endpoint_map(problem, lam, px0, grid=600, atol=1e-10, rtol=1e-9):
    """Reached endpoints (x(T), y(T)) of the reduced extremal.

    Integrates the reduced system from (x0, px0), then reconstructs the
    cyclic chain from y0; the second component realizes the endpoint map
    of the cyclic variable at multiplier lam.
    """
    lam = _as_lam(lam)
    px0 = np.atleast_1d(np.asarray(px0, dtype=float))
    s0 = np.concatenate([problem.x0, px0])
    traj = integrate(
        lambda s: rbvp_rhs(problem, s, lam),
        s0,
        (0.0, problem.T),
        atol=atol,
        rtol=rtol,
        grid=grid,
    )
    y = reconstruct_cyclic(problem, traj, lam, problem.y0)
    xT = traj.final_state[: problem.dims.n]
    return xT, y.final_state


def linearize_reduced(problem, sbar, lam):
    """Jacobian of the reduced field at (sbar, lam).

    Central finite differences with step 1e-6 applied to rbvp_rhs; the
    rhs itself uses the problem's analytic Jacobians when present.
    """
    if isinstance(sbar, ReducedState):
        sbar = sbar.as_array()
    sbar = np.asarray(sbar, dtype=float)
    lam = _as_lam(lam)
    d = sbar.size
    A = np.zeros((d, d))
    h = 1e-6
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        A[:, i] = (rbvp_rhs(problem, sbar + e, lam) - rbvp_rhs(problem, sbar - e, lam)) / (2 * h)
    return A
