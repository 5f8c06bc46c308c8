import numpy as np
import pytest

from trimturnpike import pmp, problems
from trimturnpike.integrate import integrate
from trimturnpike.pmp import (
    endpoint_map,
    fbvp_rhs,
    hamiltonian,
    optimal_feedback,
    rbvp_rhs,
    reconstruct_cyclic,
    rocp_hamiltonian,
)


@pytest.fixture(scope="module")
def lq():
    return problems.lq_problem()


def test_hamiltonian_value(lq):
    # x=1, p=2, lam=1, u=-1: 2*(-1) + 1*1 + 1 + 0.5*2*1 = 1
    H = hamiltonian(lq, np.array([1.0]), np.array([2.0]), np.array([1.0]), np.array([-1.0]))
    assert H == pytest.approx(1.0, abs=1e-14)


def test_optimal_feedback_lq(lq):
    # u* = -R^{-1} F2^T p = -p/2
    u = optimal_feedback(lq, np.array([1.0]), np.array([3.0]), np.array([0.0]))
    assert u == pytest.approx(-1.5, abs=1e-14)


def test_optimal_feedback_flat_nlq():
    prob = problems.nlq_problem()
    # R = I, F2 = [[0, 1]], G2(x) = [[1, 0], [x^2, 0]]
    u = optimal_feedback(prob, np.array([1.0]), np.array([-2.0]), np.array([1.0, 1.0]))
    assert np.allclose(u, [-2.0, 2.0], atol=1e-14)


def test_fbvp_and_rbvp_agree_exactly(lq):
    rng = np.random.default_rng(0)
    for _ in range(100):
        x, p = rng.standard_normal(1), rng.standard_normal(1)
        y = rng.standard_normal(1)
        lam = rng.standard_normal(1)
        z = np.concatenate([x, y, p])
        s = np.concatenate([x, p])
        full = fbvp_rhs(lq, z, lam)
        red = rbvp_rhs(lq, s, lam)
        assert np.array_equal(full[[0, 2]], red)


def test_rbvp_is_canonical_gradient_pair(lq):
    # (x_dot, p_dot) = (dH/dp, -dH/dx) at the optimal feedback
    rng = np.random.default_rng(1)
    for prob in (lq, problems.nlq_problem(), problems.nlq_problem(alpha=0.1)):
        n = prob.dims.n
        for _ in range(20):
            x = rng.uniform(-1.0, 1.0, n)
            p = rng.uniform(-1.0, 1.0, n)
            lam = rng.uniform(-1.0, 1.0, prob.dims.p)
            got = rbvp_rhs(prob, np.concatenate([x, p]), lam)

            def H(xv, pv):
                u = optimal_feedback(prob, xv, pv, lam)
                return rocp_hamiltonian(prob, xv, pv, lam, u)

            h = 1e-6
            want = np.zeros(2 * n)
            for i in range(n):
                e = np.zeros(n); e[i] = h
                want[i] = (H(x, p + e) - H(x, p - e)) / (2 * h)
                want[n + i] = -(H(x + e, p) - H(x - e, p)) / (2 * h)
            scale = max(1.0, np.max(np.abs(want)))
            assert np.max(np.abs(got - want)) / scale < 1e-5


def test_hamiltonian_conserved_along_extremal(lq):
    lam = np.array([-0.7])
    s0 = np.array([0.9, -0.4])
    tr = integrate(lambda s: rbvp_rhs(lq, s, lam), s0, (0.0, 8.0), grid=200)
    H = np.array([
        rocp_hamiltonian(lq, s[:1], s[1:], lam, optimal_feedback(lq, s[:1], s[1:], lam))
        for s in tr.states
    ])
    assert np.max(np.abs(H - H[0])) <= 1e-6 * max(1.0, abs(H[0]))


def test_cyclic_adjoint_constant_along_full_extremal(lq):
    # integrate the full state (x, y, p_x, p_y); p_y must stay constant
    lam0 = -0.3

    def rhs(w):
        z, p_y = w[:3], w[3:]
        dz = fbvp_rhs(lq, z, p_y)
        return np.concatenate([dz, [0.0 * p_y[0]]])

    w0 = np.array([1.0, 0.0, -0.5, lam0])
    tr = integrate(rhs, w0, (0.0, 10.0), grid=100)
    assert np.max(np.abs(tr.states[:, 3] - lam0)) <= 1e-12


def test_reconstruct_cyclic_matches_closed_form(lq):
    from trimturnpike.integrate import Trajectory

    T = 10.0
    sol = problems.lq_exact(T=T)
    times = np.linspace(0.0, T, 801)
    traj = Trajectory(times, np.column_stack([sol.x(times), sol.p_x(times)]))
    y = reconstruct_cyclic(lq, traj, np.atleast_1d(sol.lam), np.array([0.0]))
    assert np.max(np.abs(y.states[:, 0] - sol.y(times))) < 1e-7


def test_endpoint_map_matches_closed_form():
    prob = problems.lq_problem(T=15.0)
    sol = problems.lq_exact(T=15.0)
    px0 = np.atleast_1d(sol.p_x(0.0))
    xT, yT = endpoint_map(prob, np.atleast_1d(sol.lam), px0, atol=1e-13, rtol=1e-12)
    assert np.max(np.abs(xT - prob.xT)) < 1e-6
    assert np.max(np.abs(yT - prob.yT)) < 1e-6


def test_linearize_reduced_lq_saddle(lq):
    A = pmp.linearize_reduced(lq, np.array([0.0, 0.0]), np.array([0.0]))
    eig = np.sort(np.linalg.eigvals(A).real)
    assert np.allclose(eig, [-1.0, 1.0], atol=1e-6)


def test_fbvp_rhs_batch_matches_scalar():
    rng = np.random.default_rng(7)
    probs = [problems.lq_problem(), problems.nlq_problem(alpha=0.0),
             problems.nlq_problem(alpha=0.1), problems.kepler_problem()]
    for prob in probs:
        n, p = prob.dims.n, prob.dims.p
        d = 2 * n + p
        Z = rng.uniform(-1.5, 1.5, size=(12, d))
        if prob.name == "kepler":
            Z[:, 0] = rng.uniform(2.0, 8.0, size=12)  # keep the radius safe
        lam = rng.uniform(-2.0, 2.0, size=p)
        out = pmp.fbvp_rhs_batch(prob, Z, lam)
        for i in range(len(Z)):
            assert np.allclose(out[i], fbvp_rhs(prob, Z[i], lam),
                               rtol=1e-13, atol=1e-13)
        # per-row multipliers, as used by the shooting Jacobian sweep
        L = rng.uniform(-2.0, 2.0, size=(len(Z), p))
        out = pmp.fbvp_rhs_batch(prob, Z, L)
        for i in range(len(Z)):
            assert np.allclose(out[i], fbvp_rhs(prob, Z[i], L[i]),
                               rtol=1e-13, atol=1e-13)
