import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from trimturnpike import integrate
from trimturnpike.integrate import Trajectory, integrate_with_sensitivity


def test_scalar_exponential():
    tr = integrate.integrate(lambda z: -z, np.array([1.0]), (0.0, 5.0), grid=100)
    assert np.max(np.abs(tr.states[:, 0] - np.exp(-tr.times))) < 1e-8


def test_matrix_exponential_oracle():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((4, 4))
    z0 = rng.standard_normal(4)
    tr = integrate.integrate(lambda z: A @ z, z0, (0.0, 2.0), grid=50)
    exact = np.array([scipy.linalg.expm(A * t) @ z0 for t in tr.times])
    assert np.max(np.abs(tr.states - exact)) < 1e-7


def test_rk4_convergence_order():
    rhs = lambda z: np.array([z[1], -np.sin(z[0])])
    z0 = np.array([1.0, 0.0])
    ref = integrate.integrate(rhs, z0, (0.0, 3.0), atol=1e-13, rtol=1e-13).final_state
    errs = []
    for steps in (40, 80):
        tr = integrate.integrate(rhs, z0, (0.0, 3.0), method="rk4", steps=steps)
        errs.append(np.max(np.abs(tr.final_state - ref)))
    order = np.log2(errs[0] / errs[1])
    assert order > 3.5


def test_dense_output_matches_scipy():
    rhs = lambda z: np.array([z[1], -z[0]])
    z0 = np.array([0.0, 1.0])
    grid = np.linspace(0.0, 7.0, 173)
    tr = integrate.integrate(rhs, z0, (0.0, 7.0), grid=grid)
    sol = scipy.integrate.solve_ivp(
        lambda t, z: rhs(z), (0.0, 7.0), z0, method="RK45",
        t_eval=grid, atol=1e-12, rtol=1e-12,
    )
    assert np.max(np.abs(tr.states - sol.y.T)) < 1e-7


def test_trajectory_interpolation_exact_at_nodes():
    tr = integrate.integrate(lambda z: -z, np.array([2.0]), (0.0, 1.0), grid=20)
    for i in (0, 7, 20):
        assert tr.at(tr.times[i])[0] == tr.states[i, 0]


def test_trajectory_rejects_bad_grid():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0, 1.0]), states=np.zeros((3, 1)))


def test_sensitivity_identity_for_zero_field():
    rhs = lambda z, p: np.zeros(3)
    _, S = integrate_with_sensitivity(rhs, np.ones(3), (0.0, 1.0), params=np.array([0.5]))
    assert np.allclose(S, np.hstack([np.eye(3), np.zeros((3, 1))]), atol=1e-12)


def test_sensitivity_matches_finite_differences():
    def rhs(z, p):
        return np.array([p[0] * z[1], -z[0] + p[1]])

    z0 = np.array([1.0, 0.2])
    params = np.array([0.8, -0.3])
    _, S = integrate_with_sensitivity(rhs, z0, (0.0, 2.0), params=params)

    def flow(z0, params):
        return integrate.integrate(
            lambda z: rhs(z, params), z0, (0.0, 2.0), atol=1e-12, rtol=1e-12
        ).final_state

    h = 1e-6
    fd = np.zeros((2, 4))
    for i in range(2):
        e = np.zeros(2); e[i] = h
        fd[:, i] = (flow(z0 + e, params) - flow(z0 - e, params)) / (2 * h)
    for i in range(2):
        e = np.zeros(2); e[i] = h
        fd[:, 2 + i] = (flow(z0, params + e) - flow(z0, params - e)) / (2 * h)
    assert np.max(np.abs(S - fd)) < 1e-6
