import numpy as np
import pytest

from trimturnpike import linalg
from trimturnpike.errors import NonSPDWeight, SingularMatrix


def test_lu_solve_matches_numpy():
    rng = np.random.default_rng(42)
    for d in (1, 2, 5, 12):
        A = rng.standard_normal((d, d)) + d * np.eye(d)
        b = rng.standard_normal(d)
        x = linalg.lu_solve(A, b)
        assert np.allclose(x, np.linalg.solve(A, b), atol=1e-12, rtol=1e-12)


def test_lu_singular_raises():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix):
        linalg.lu_solve(A, np.ones(2))


def test_cholesky_solve_spd():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((4, 4))
    A = M @ M.T + 4 * np.eye(4)
    L = linalg.cholesky(A)
    assert np.allclose(L @ L.T, A, atol=1e-12)
    b = rng.standard_normal(4)
    assert np.allclose(linalg.cho_solve(L, b), np.linalg.solve(A, b), atol=1e-12)


def test_cholesky_rejects_non_spd():
    with pytest.raises(NonSPDWeight):
        linalg.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NonSPDWeight):
        linalg.cholesky(np.array([[0.0]]))


def test_eigenvalues_saddle_real_pair():
    # [[0, 1], [3, 0]] has eigenvalues +/- sqrt(3): hyperbolic, gap sqrt(3)
    spec = linalg.eigenvalues(np.array([[0.0, 1.0], [3.0, 0.0]]))
    got = np.sort_complex(spec.eigenvalues)
    assert np.allclose(got, [-np.sqrt(3), np.sqrt(3)], atol=1e-12)
    assert spec.gap == pytest.approx(np.sqrt(3), abs=1e-12)


def test_eigenvalues_center_imaginary_pair():
    # [[0, 1], [-6, 0]] has eigenvalues +/- i sqrt(6): gap 0
    spec = linalg.eigenvalues(np.array([[0.0, 1.0], [-6.0, 0.0]]))
    got = np.sort_complex(spec.eigenvalues)
    assert np.allclose(got, [-1j * np.sqrt(6), 1j * np.sqrt(6)], atol=1e-12)
    assert spec.gap == pytest.approx(0.0, abs=1e-12)


def _multiset_close(a, b, tol):
    a = np.sort_complex(np.asarray(a))
    b = np.sort_complex(np.asarray(b))
    return a.shape == b.shape and np.all(np.abs(a - b) <= tol)


def test_eigenvalues_match_numpy():
    rng = np.random.default_rng(3)
    for d in (2, 3, 5, 8, 13):
        A = rng.standard_normal((d, d))
        spec = linalg.eigenvalues(A)
        assert _multiset_close(spec.eigenvalues, np.linalg.eigvals(A), 1e-8 * max(1.0, np.linalg.norm(A)))


def test_eigenvalues_transpose_invariant():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((6, 6))
    sa = linalg.eigenvalues(A).eigenvalues
    sat = linalg.eigenvalues(A.T).eigenvalues
    assert _multiset_close(sa, sat, 1e-8 * np.linalg.norm(A))


def test_hamiltonian_spectrum_pairing():
    # eigenvalues of a Hamiltonian matrix come in +/- pairs
    rng = np.random.default_rng(5)
    n = 3
    B = rng.standard_normal((n, n))
    Q = rng.standard_normal((n, n))
    Q = Q + Q.T
    S = rng.standard_normal((n, n))
    S = S + S.T
    H = np.block([[B, S], [Q, -B.T]])
    spec = linalg.eigenvalues(H).eigenvalues
    assert _multiset_close(spec, -spec, 1e-8 * np.linalg.norm(H))
