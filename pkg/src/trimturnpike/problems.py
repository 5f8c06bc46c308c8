"""Built-in problem instances and the LQ closed-form oracle.

Three parameterized families: a scalar linear-quadratic problem with one
cyclic variable, a nonlinear-quadratic chain in a flat (alpha = 0) and a
non-flat variant, and planar low-thrust orbital transfer (controlled
Kepler motion with the polar angle as the cyclic variable).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoleProximity, RadiusCollapse
from .linalg import lu_solve
from .model import BatchFields, CyclicProblem, Dims


def _bzeros(*shape):
    """Batched constant-zero field."""
    return lambda X: np.zeros((len(X),) + shape)


# -- linear-quadratic -------------------------------------------------------

def lq_problem(x0=1.0, xT=2.0, y0=0.0, yT=3.0, T=20.0):
    """Scalar LQ problem: dx/dt = u, dy/dt = x, cost x^2 + u^2.

    Encoded with f0 = x^2 and R = 2 so that the Hamiltonian is
    x^2 + u^2 + p_x u + lam x and the feedback is u* = -p_x / 2.
    """
    if T <= 2.0:
        raise ValueError("lq_problem requires T > 2")
    return CyclicProblem(
        dims=Dims(1, 1, 1),
        f0=lambda x: x[0] ** 2,
        f1=lambda x: np.zeros(1),
        F2=lambda x: np.ones((1, 1)),
        g1=lambda x: x.copy(),
        G2=lambda x: np.zeros((1, 1)),
        R=np.array([[2.0]]),
        x0=[x0], xT=[xT], y0=[y0], yT=[yT], T=float(T),
        grad_f0=lambda x: 2.0 * x,
        D_f1=lambda x: np.zeros((1, 1)),
        D_F2=lambda x: np.zeros((1, 1, 1)),
        D_g1=lambda x: np.ones((1, 1)),
        batch=BatchFields(
            f1=_bzeros(1),
            F2=lambda X: np.ones((len(X), 1, 1)),
            g1=lambda X: X.copy(),
            G2=_bzeros(1, 1),
            grad_f0=lambda X: 2.0 * X,
            D_f1=_bzeros(1, 1),
            D_F2=_bzeros(1, 1, 1),
            D_g1=lambda X: np.ones((len(X), 1, 1)),
            D_G2=_bzeros(1, 1, 1),
        ),
        D_G2=lambda x: np.zeros((1, 1, 1)),
        name="lq",
    )


@dataclass(frozen=True)
class LqClosedForm:
    """Exact LQ extremal x(t) = a e^t + b e^{-t} - lam/2.

    a_scaled = a e^T is stored alongside a so that long horizons can be
    evaluated without overflow-scale cancellation: the growing mode is
    computed as a_scaled * e^{t-T}.
    """

    a: float
    b: float
    lam: float
    T: float
    a_scaled: float

    def x(self, t):
        t = np.asarray(t, dtype=float)
        return self.a_scaled * np.exp(t - self.T) + self.b * np.exp(-t) - self.lam / 2.0

    def u(self, t):
        t = np.asarray(t, dtype=float)
        return self.a_scaled * np.exp(t - self.T) - self.b * np.exp(-t)

    def p_x(self, t):
        return -2.0 * self.u(t)

    def y(self, t, y0=0.0):
        t = np.asarray(t, dtype=float)
        return (
            y0
            + self.a_scaled * (np.exp(t - self.T) - np.exp(-self.T))
            - self.b * (np.exp(-t) - 1.0)
            - self.lam * t / 2.0
        )


def lq_exact(x0=1.0, xT=2.0, y0=0.0, yT=3.0, T=20.0):
    """Solve the exact 3x3 linear system for (a, b, lam).

    The conditions are x(0) = x0, x(T) = xT and the integral of x over
    [0, T] equal to yT - y0.  The system is solved in the scaled unknown
    a' = a e^T, which keeps it well conditioned for large T.
    """
    eT = np.exp(-T)
    # unknowns (a', b, lam)
    A = np.array(
        [
            [eT, 1.0, -0.5],
            [1.0, eT, -0.5],
            [1.0 - eT, 1.0 - eT, -0.5 * T],
        ]
    )
    rhs = np.array([x0, xT, yT - y0])
    a_scaled, b, lam = lu_solve(A, rhs)
    return LqClosedForm(a=a_scaled * eT, b=b, lam=lam, T=float(T), a_scaled=a_scaled)


def lq_lambda_approx(x0=1.0, xT=2.0, y0=0.0, yT=3.0, T=20.0):
    """Large-horizon closed-form approximation of the multiplier.

    lam ~ 2 (x0 + xT - (yT - y0)) / (T - 2); the neglected terms are of
    order e^{-T}.
    """
    return 2.0 * (x0 + xT - (yT - y0)) / (T - 2.0)


# -- nonlinear-quadratic chain ----------------------------------------------

_POLE_TOL = 1e-6


def nlq_problem(alpha=0.0, x0=None, xT=None, y0=None, yT=None, T=50.0):
    """Nonlinear-quadratic chain; flat when alpha = 0.

    Flat case: scalar shape x with dx/dt = u2 and two cyclic variables
    dy1/dt = u1, dy2/dt = x^2 u1; cost (x^2 + |u|^2) / 2.

    Non-flat case: shape (x1, x2) with dx1/dt = u2,
    dx2/dt = u1 / (1 + alpha x1), one cyclic dy/dt = x2^2 u1; cost
    (|x|^2 + |u|^2) / 2.
    """
    alpha = float(alpha)
    if alpha == 0.0:
        x0 = [-2.0] if x0 is None else x0
        xT = [4.0] if xT is None else xT
        y0 = [1.0, -1.0] if y0 is None else y0
        yT = [-5.0, 5.0] if yT is None else yT

        def G2(x):
            return np.array([[1.0, 0.0], [x[0] ** 2, 0.0]])

        def G2_batch(X):
            out = np.zeros((len(X), 2, 2))
            out[:, 0, 0] = 1.0
            out[:, 1, 0] = X[:, 0] ** 2
            return out

        def D_G2_batch(X):
            out = np.zeros((len(X), 2, 2, 1))
            out[:, 1, 0, 0] = 2.0 * X[:, 0]
            return out

        def F2_batch(X):
            out = np.zeros((len(X), 1, 2))
            out[:, 0, 1] = 1.0
            return out

        def D_G2(x):
            D = np.zeros((2, 2, 1))
            D[1, 0, 0] = 2.0 * x[0]
            return D

        return CyclicProblem(
            dims=Dims(1, 2, 2),
            f0=lambda x: 0.5 * x[0] ** 2,
            f1=lambda x: np.zeros(1),
            F2=lambda x: np.array([[0.0, 1.0]]),
            g1=lambda x: np.zeros(2),
            G2=G2,
            R=np.eye(2),
            x0=x0, xT=xT, y0=y0, yT=yT, T=float(T),
            grad_f0=lambda x: x.copy(),
            D_f1=lambda x: np.zeros((1, 1)),
            D_F2=lambda x: np.zeros((1, 2, 1)),
            D_g1=lambda x: np.zeros((2, 1)),
            D_G2=D_G2,
            batch=BatchFields(
                f1=_bzeros(1),
                F2=F2_batch,
                g1=_bzeros(2),
                G2=G2_batch,
                grad_f0=lambda X: X.copy(),
                D_f1=_bzeros(1, 1),
                D_F2=_bzeros(1, 2, 1),
                D_g1=_bzeros(2, 1),
                D_G2=D_G2_batch,
            ),
            name="nlq_flat",
        )

    x0 = [-2.0, 1.0] if x0 is None else x0
    xT = [4.0, -5.0] if xT is None else xT
    y0 = [-1.0] if y0 is None else y0
    yT = [5.0] if yT is None else yT

    def denom(x):
        d = 1.0 + alpha * x[0]
        if abs(d) < _POLE_TOL:
            raise PoleProximity(f"1 + alpha*x1 = {d:.3e} too close to zero")
        return d

    def F2(x):
        return np.array([[0.0, 1.0], [1.0 / denom(x), 0.0]])

    def D_F2(x):
        D = np.zeros((2, 2, 2))
        D[1, 0, 0] = -alpha / denom(x) ** 2
        return D

    def D_G2(x):
        D = np.zeros((1, 2, 2))
        D[0, 0, 1] = 2.0 * x[1]
        return D

    def denom_batch(X):
        d = 1.0 + alpha * X[:, 0]
        if np.any(np.abs(d) < _POLE_TOL):
            raise PoleProximity("1 + alpha*x1 too close to zero in batch")
        return d

    def F2_batch(X):
        out = np.zeros((len(X), 2, 2))
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = 1.0 / denom_batch(X)
        return out

    def D_F2_batch(X):
        out = np.zeros((len(X), 2, 2, 2))
        out[:, 1, 0, 0] = -alpha / denom_batch(X) ** 2
        return out

    def G2_batch(X):
        out = np.zeros((len(X), 1, 2))
        out[:, 0, 0] = X[:, 1] ** 2
        return out

    def D_G2_batch(X):
        out = np.zeros((len(X), 1, 2, 2))
        out[:, 0, 0, 1] = 2.0 * X[:, 1]
        return out

    return CyclicProblem(
        dims=Dims(2, 1, 2),
        f0=lambda x: 0.5 * (x @ x),
        f1=lambda x: np.zeros(2),
        F2=F2,
        g1=lambda x: np.zeros(1),
        G2=lambda x: np.array([[x[1] ** 2, 0.0]]),
        R=np.eye(2),
        x0=x0, xT=xT, y0=y0, yT=yT, T=float(T),
        grad_f0=lambda x: x.copy(),
        D_f1=lambda x: np.zeros((2, 2)),
        D_F2=D_F2,
        D_g1=lambda x: np.zeros((1, 2)),
        D_G2=D_G2,
        batch=BatchFields(
            f1=_bzeros(2),
            F2=F2_batch,
            g1=_bzeros(1),
            G2=G2_batch,
            grad_f0=lambda X: X.copy(),
            D_f1=_bzeros(2, 2),
            D_F2=D_F2_batch,
            D_g1=_bzeros(1, 2),
            D_G2=D_G2_batch,
        ),
        name="nlq_nonflat",
    )


# -- controlled Kepler motion ------------------------------------------------

_RADIUS_TOL = 1e-6


def kepler_problem(s_tilde=3.0, T=100.0, theta_T=None, x0=None, y0=0.0):
    """Planar low-thrust transfer between circular orbits.

    Shape x = (s, v_s, v_theta) in polar coordinates, cyclic y = theta.
    Cost (|x - x_ref|^2 + |u|^2) / 2 with x_ref the circular orbit of
    radius s_tilde.  Default data transfers from radius 7 to radius 3
    accumulating theta_T = pi T.
    """
    s_tilde = float(s_tilde)
    T = float(T)
    if theta_T is None:
        theta_T = np.pi * T
    x_ref = np.array([s_tilde, 0.0, s_tilde ** -1.5])
    if x0 is None:
        x0 = [7.0, 0.0, 7.0 ** -1.5]

    def radius(x):
        s = x[0]
        if s <= _RADIUS_TOL:
            raise RadiusCollapse(f"orbital radius s = {s:.3e} collapsed")
        return s

    def f1(x):
        s = radius(x)
        v_s, v_t = x[1], x[2]
        return np.array([v_s, s * v_t ** 2 - 1.0 / s ** 2, -2.0 * v_s * v_t / s])

    def D_f1(x):
        s = radius(x)
        v_s, v_t = x[1], x[2]
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [v_t ** 2 + 2.0 / s ** 3, 0.0, 2.0 * s * v_t],
                [2.0 * v_s * v_t / s ** 2, -2.0 * v_t / s, -2.0 * v_s / s],
            ]
        )

    def F2(x):
        s = radius(x)
        return np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0 / s ** 2]])

    def D_F2(x):
        s = radius(x)
        D = np.zeros((3, 2, 3))
        D[2, 1, 0] = -2.0 / s ** 3
        return D

    def radius_batch(X):
        S = X[:, 0]
        if np.any(S <= _RADIUS_TOL):
            raise RadiusCollapse("orbital radius collapsed in batch")
        return S

    def f1_batch(X):
        S = radius_batch(X)
        out = np.empty((len(X), 3))
        out[:, 0] = X[:, 1]
        out[:, 1] = S * X[:, 2] ** 2 - 1.0 / S ** 2
        out[:, 2] = -2.0 * X[:, 1] * X[:, 2] / S
        return out

    def D_f1_batch(X):
        S = radius_batch(X)
        out = np.zeros((len(X), 3, 3))
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = X[:, 2] ** 2 + 2.0 / S ** 3
        out[:, 1, 2] = 2.0 * S * X[:, 2]
        out[:, 2, 0] = 2.0 * X[:, 1] * X[:, 2] / S ** 2
        out[:, 2, 1] = -2.0 * X[:, 2] / S
        out[:, 2, 2] = -2.0 * X[:, 1] / S
        return out

    def F2_batch(X):
        S = radius_batch(X)
        out = np.zeros((len(X), 3, 2))
        out[:, 1, 0] = 1.0
        out[:, 2, 1] = 1.0 / S ** 2
        return out

    def D_F2_batch(X):
        S = radius_batch(X)
        out = np.zeros((len(X), 3, 2, 3))
        out[:, 2, 1, 0] = -2.0 / S ** 3
        return out

    def D_g1_batch(X):
        out = np.zeros((len(X), 1, 3))
        out[:, 0, 2] = 1.0
        return out

    return CyclicProblem(
        dims=Dims(3, 1, 2),
        f0=lambda x: 0.5 * float((x - x_ref) @ (x - x_ref)),
        f1=f1,
        F2=F2,
        g1=lambda x: np.array([x[2]]),
        G2=lambda x: np.zeros((1, 2)),
        R=np.eye(2),
        x0=x0,
        xT=[s_tilde, 0.0, s_tilde ** -1.5],
        y0=[y0],
        yT=[theta_T],
        T=T,
        grad_f0=lambda x: x - x_ref,
        D_f1=D_f1,
        D_F2=D_F2,
        D_g1=lambda x: np.array([[0.0, 0.0, 1.0]]),
        D_G2=lambda x: np.zeros((1, 2, 3)),
        batch=BatchFields(
            f1=f1_batch,
            F2=F2_batch,
            g1=lambda X: X[:, 2:3].copy(),
            G2=_bzeros(1, 2),
            grad_f0=lambda X: X - x_ref,
            D_f1=D_f1_batch,
            D_F2=D_F2_batch,
            D_g1=D_g1_batch,
            D_G2=_bzeros(1, 2, 3),
        ),
        name="kepler",
    )
