"""ODE integration for the extremal flows.

Two methods: fixed-step classical RK4 and the adaptive Dormand-Prince
5(4) pair with its fourth-order dense interpolant.  Forward sensitivity
propagation (variational equations) is layered on top for shooting
Jacobians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, NoConvergence, StepFailure

# cap on adaptive step attempts per integrate() call; trajectories that
# need more are effectively stiff blow-ups and should fail fast so that
# outer line searches can reject the trial point
_MAX_STEPS = 5_000

BLOWUP_NORM = 1e12

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense-output polynomial (Shampine), y(t0 + th) = y0 + h K^T P [t, t^2, t^3, t^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


@dataclass(frozen=True)
class Trajectory:
    """Time-gridded states. times strictly increasing, endpoints exact."""

    times: np.ndarray
    states: np.ndarray  # (N+1, d)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        z = np.atleast_2d(np.asarray(self.states, dtype=float))
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", z)
        if np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(z)):
            raise BlowUp("trajectory contains non-finite states")

    @property
    def final_state(self):
        return self.states[-1]

    def at(self, t):
        """Value at time t by cubic Hermite interpolation on the grid.

        Grid nodes are returned exactly.
        """
        t = float(t)
        times, z = self.times, self.states
        i = int(np.searchsorted(times, t))
        if i < len(times) and times[i] == t:
            return z[i].copy()
        if i == 0 or i == len(times):
            raise ValueError(f"time {t} outside trajectory range")
        t0, t1 = times[i - 1], times[i]
        h = t1 - t0
        s = (t - t0) / h
        # derivative estimates from neighbouring secants
        d0 = (z[i] - z[i - 1]) / h if i - 2 < 0 else (z[i] - z[i - 2]) / (t1 - times[i - 2])
        d1 = (z[i] - z[i - 1]) / h if i + 1 >= len(times) else (z[i + 1] - z[i - 1]) / (times[i + 1] - t0)
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * z[i - 1] + h10 * h * d0 + h01 * z[i] + h11 * h * d1


def _output_grid(a, b, grid):
    if grid is None:
        return None
    if np.isscalar(grid):
        return np.linspace(a, b, int(grid) + 1)
    g = np.asarray(grid, dtype=float)
    if g[0] != a or g[-1] != b:
        raise ValueError("output grid must span the integration interval exactly")
    return g


def _check_state(z):
    if not np.all(np.isfinite(z)) or np.linalg.norm(z) > BLOWUP_NORM:
        raise BlowUp(f"state norm exceeded {BLOWUP_NORM:g}")


def _rk4(rhs, z0, a, b, steps, grid):
    ts = np.linspace(a, b, steps + 1)
    zs = np.empty((steps + 1, len(z0)))
    zs[0] = z0
    z = np.asarray(z0, dtype=float)
    h = (b - a) / steps
    for k in range(steps):
        t = ts[k]
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * h * k1)
        k3 = rhs(z + 0.5 * h * k2)
        k4 = rhs(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_state(z)
        zs[k + 1] = z
    traj = Trajectory(ts, zs)
    if grid is not None and (len(grid) != len(ts) or not np.allclose(grid, ts)):
        out = np.array([traj.at(t) for t in grid])
        out[0], out[-1] = zs[0], zs[-1]
        traj = Trajectory(grid, out)
    return traj


def _initial_step(rhs, z0, a, b, atol, rtol):
    f0 = rhs(z0)
    scale = atol + rtol * np.abs(z0)
    d0 = np.sqrt(np.mean((z0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h0, 0.1 * (b - a))


def _dopri(rhs, z0, a, b, atol, rtol, grid):
    z = np.asarray(z0, dtype=float)
    d = z.size
    t = a
    h = _initial_step(rhs, z, a, b, atol, rtol)
    K = np.zeros((7, d))
    K[0] = rhs(z)

    want_grid = grid is not None
    if want_grid:
        out = np.empty((len(grid), d))
        out[0] = z
        next_out = 1
    else:
        ts, zs = [a], [z.copy()]

    min_h = 1e-12 * (b - a)
    attempts = 0
    while t < b:
        attempts += 1
        if attempts > _MAX_STEPS:
            raise NoConvergence(
                f"integrator exceeded {_MAX_STEPS} step attempts at t={t:.6g}"
            )
        h = min(h, b - t)
        for s in range(1, 7):
            K[s] = rhs(z + h * (_A[s] @ K[:s]))
        z_new = z + h * (_B5 @ K)
        err_vec = h * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(z), np.abs(z_new))
        err = np.sqrt(np.mean((err_vec / scale) ** 2))
        if err <= 1.0 or h <= min_h * 1.0000001:
            _check_state(z_new)
            t_new = min(t + h, b)
            if want_grid:
                # fourth-order dense interpolant on (t, t_new]
                while next_out < len(grid) and grid[next_out] <= t_new + 1e-14 * abs(b - a):
                    theta = (grid[next_out] - t) / h
                    theta = min(max(theta, 0.0), 1.0)
                    tv = np.array([theta, theta**2, theta**3, theta**4])
                    out[next_out] = z + h * (K.T @ (_P @ tv))
                    next_out += 1
            else:
                ts.append(t_new)
                zs.append(z_new.copy())
            t = t_new
            z = z_new
            K[0] = K[6]  # FSAL
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h < min_h and t < b:
            raise StepFailure(f"step size underflow at t={t:.6g}")
    if want_grid:
        out[-1] = z
        return Trajectory(grid, out)
    return Trajectory(np.array(ts), np.array(zs))


def integrate(rhs, z0, t_span, method="dopri54", steps=200, atol=1e-10, rtol=1e-9, grid=None):
    """Integrate dz/dt = rhs(z) over t_span = (a, b).

    method 'rk4' uses a fixed step (b-a)/steps; 'dopri54' adapts the step
    to the tolerances and resamples onto the requested grid with the
    method's dense interpolant.  grid may be an int (number of uniform
    intervals) or an array of times spanning [a, b].
    """
    a, b = float(t_span[0]), float(t_span[1])
    if not a < b:
        raise ValueError("t_span must satisfy a < b")
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    g = _output_grid(a, b, grid)
    if method == "rk4":
        return _rk4(rhs, z0, a, b, int(steps), g)
    if method == "dopri54":
        return _dopri(rhs, z0, a, b, atol, rtol, g)
    raise ValueError(f"unknown method {method!r}")


def _fd_jac(fn, v, out_dim):
    h = np.maximum(1e-6, 1e-6 * np.abs(v))
    J = np.zeros((out_dim, v.size))
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h[i]
        J[:, i] = (fn(v + e) - fn(v - e)) / (2.0 * h[i])
    return J


def integrate_with_sensitivity(
    rhs,
    z0,
    t_span,
    params=None,
    rhs_jac_z=None,
    rhs_jac_p=None,
    method="dopri54",
    steps=200,
    atol=1e-10,
    rtol=1e-9,
    grid=None,
):
    """Integrate with forward variational equations.

    rhs(z, params) -> dz/dt.  Returns (Trajectory of z, S) where S is the
    d x (d + q) sensitivity of the final state with respect to (z0,
    params).  Jacobian callbacks take (z, params); central finite
    differences are used when they are absent.
    """
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    d = z0.size
    params = np.atleast_1d(np.asarray(params, dtype=float)) if params is not None else np.zeros(0)
    q = params.size

    def jac_z(z):
        if rhs_jac_z is not None:
            return np.asarray(rhs_jac_z(z, params), dtype=float)
        return _fd_jac(lambda v: rhs(v, params), z, d)

    def jac_p(z):
        if q == 0:
            return np.zeros((d, 0))
        if rhs_jac_p is not None:
            return np.asarray(rhs_jac_p(z, params), dtype=float)
        return _fd_jac(lambda v: rhs(z, v), params, d)

    def aug_rhs(w):
        z = w[:d]
        S = w[d:].reshape(d, d + q)
        Jz = jac_z(z)
        dS = Jz @ S
        if q:
            dS[:, d:] += jac_p(z)
        return np.concatenate([rhs(z, params), dS.ravel()])

    S0 = np.hstack([np.eye(d), np.zeros((d, q))])
    w0 = np.concatenate([z0, S0.ravel()])
    aug = integrate(aug_rhs, w0, t_span, method=method, steps=steps, atol=atol, rtol=rtol, grid=grid)
    traj = Trajectory(aug.times, aug.states[:, :d])
    S_end = aug.states[-1, d:].reshape(d, d + q)
    return traj, S_end
