"""Small dense linear algebra kernels.

LU with partial pivoting, Cholesky, and eigenvalues of general real
matrices via Hessenberg reduction followed by the Francis double-shift
QR iteration.  Intended for desk-scale matrices (d <= 64); everything
operates on plain numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonSPDWeight, SingularMatrix

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real matrix together with the spectral gap.

    gap = min_i |Re(lambda_i)|, the quantity that certifies absence of
    eigenvalues on the imaginary axis.
    """

    eigenvalues: np.ndarray  # complex, length d
    gap: float

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=complex))


def lu_factor(A):
    """LU factorization with partial pivoting. Returns (LU, piv).

    Works for real and complex input. Raises SingularMatrix when a pivot
    falls below 1e-14 * max|A|.
    """
    A = np.array(A, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("lu_factor expects a square matrix")
    d = A.shape[0]
    scale = np.max(np.abs(A)) if d else 0.0
    piv = np.arange(d)
    for k in range(d):
        j = k + int(np.argmax(np.abs(A[k:, k])))
        if np.abs(A[j, k]) <= 1e-14 * max(scale, _EPS):
            raise SingularMatrix(f"pivot {np.abs(A[j, k]):.3e} below threshold at column {k}")
        if j != k:
            A[[k, j]] = A[[j, k]]
            piv[[k, j]] = piv[[j, k]]
        A[k + 1:, k] /= A[k, k]
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return A, piv


def lu_backsolve(LU, piv, b):
    """Solve using a factorization from lu_factor. Supports matrix rhs."""
    b = np.asarray(b)
    x = np.array(b[piv], dtype=np.result_type(LU.dtype, b.dtype), copy=True)
    d = LU.shape[0]
    for k in range(1, d):
        x[k] -= LU[k, :k] @ x[:k]
    for k in range(d - 1, -1, -1):
        x[k] -= LU[k, k + 1:] @ x[k + 1:]
        x[k] /= LU[k, k]
    return x


def lu_solve(A, b):
    """Solve A x = b by LU with partial pivoting."""
    LU, piv = lu_factor(np.asarray(A))
    return lu_backsolve(LU, piv, b)


def cholesky(A):
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises NonSPDWeight when a diagonal pivot is non-positive.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    L = np.zeros_like(A)
    for j in range(d):
        s = A[j, j] - L[j, :j] @ L[j, :j]
        if s <= 0.0:
            raise NonSPDWeight(f"non-positive pivot {s:.3e} at index {j}")
        L[j, j] = np.sqrt(s)
        for i in range(j + 1, d):
            L[i, j] = (A[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def cho_solve(L, b):
    """Solve (L L^T) x = b with L from cholesky()."""
    b = np.asarray(b, dtype=float)
    y = np.array(b, copy=True)
    d = L.shape[0]
    for k in range(d):
        y[k] = (y[k] - L[k, :k] @ y[:k]) / L[k, k]
    for k in range(d - 1, -1, -1):
        y[k] = (y[k] - L[k + 1:, k] @ y[k + 1:]) / L[k, k]
    return y


def _hessenberg(A):
    """Reduce A to upper Hessenberg form by Householder similarity."""
    H = np.array(A, dtype=float, copy=True)
    d = H.shape[0]
    for k in range(d - 2):
        x = H[k + 1:, k]
        nx = np.linalg.norm(x)
        if nx <= _EPS * max(1.0, np.abs(H).max()):
            continue
        v = x.copy()
        v[0] += np.copysign(nx, x[0] if x[0] != 0 else 1.0)
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
    return H


def _eig2x2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]] as a complex pair."""
    tr = a + d
    det = a * d - b * c
    disc = 0.25 * tr * tr - det
    if disc >= 0.0:
        r = np.sqrt(disc)
        # stable: compute the larger-magnitude root first
        if tr >= 0:
            l1 = 0.5 * tr + r
        else:
            l1 = 0.5 * tr - r
        l2 = det / l1 if l1 != 0.0 else 0.5 * tr - np.copysign(r, tr)
        return complex(l1), complex(l2)
    r = np.sqrt(-disc)
    return complex(0.5 * tr, r), complex(0.5 * tr, -r)


def _householder3(x):
    """Unit reflector v with (I - 2vv^T)x along e1, for len-2 or len-3 x."""
    v = np.array(x, dtype=float)
    alpha = -np.copysign(np.linalg.norm(v), v[0] if v[0] != 0 else 1.0)
    v[0] -= alpha
    nv = np.linalg.norm(v)
    if nv <= _EPS * max(1.0, abs(alpha)):
        return None
    return v / nv


def _francis_sweep(H, lo, hi, exceptional):
    """One implicit double-shift QR sweep on the active block H[lo:hi+1]."""
    d = hi - lo + 1
    # trailing 2x2 shift data
    a = H[hi - 1, hi - 1]
    b = H[hi - 1, hi]
    c = H[hi, hi - 1]
    dd = H[hi, hi]
    if exceptional:
        # ad-hoc shifts to break symmetric stalls
        s = abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2] if hi - 2 >= lo else 0.0)
        sh_sum, sh_prod = 2.0 * s, s * s
    else:
        sh_sum = a + dd
        sh_prod = a * dd - b * c
    x = H[lo, lo] * H[lo, lo] + H[lo, lo + 1] * H[lo + 1, lo] - sh_sum * H[lo, lo] + sh_prod
    y = H[lo + 1, lo] * (H[lo, lo] + H[lo + 1, lo + 1] - sh_sum)
    z = H[lo + 1, lo] * H[lo + 2, lo + 1] if d > 2 else 0.0
    for k in range(lo, hi - 1):
        if k == lo:
            col = np.array([x, y, z])
        else:
            col = H[k:min(k + 3, hi + 1), k - 1].copy()
        m = len(col)
        v = _householder3(col)
        if v is not None:
            r0 = max(lo, k - 1)
            H[k:k + m, r0:hi + 1] -= 2.0 * np.outer(v, v @ H[k:k + m, r0:hi + 1])
            r1 = min(hi, k + 3)
            H[lo:r1 + 1, k:k + m] -= 2.0 * np.outer(H[lo:r1 + 1, k:k + m] @ v, v)
    # final 2x2 reflector
    col = H[hi - 1:hi + 1, hi - 2].copy()
    v = _householder3(col)
    if v is not None:
        H[hi - 1:hi + 1, hi - 2:hi + 1] -= 2.0 * np.outer(v, v @ H[hi - 1:hi + 1, hi - 2:hi + 1])
        H[lo:hi + 1, hi - 1:hi + 1] -= 2.0 * np.outer(H[lo:hi + 1, hi - 1:hi + 1] @ v, v)


def _qr_eigenvalues(A, max_sweeps):
    H = _hessenberg(A)
    d = H.shape[0]
    eigs = []
    hi = d - 1
    sweeps = 0
    stall = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(H[0, 0]))
            break
        # deflate negligible subdiagonals
        for i in range(1, hi + 1):
            if abs(H[i, i - 1]) <= _EPS * (abs(H[i, i]) + abs(H[i - 1, i - 1]) + _EPS):
                H[i, i - 1] = 0.0
        if H[hi, hi - 1] == 0.0:
            eigs.append(complex(H[hi, hi]))
            hi -= 1
            stall = 0
            continue
        if hi == 1 or H[hi - 1, hi - 2] == 0.0:
            l1, l2 = _eig2x2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
            eigs.extend([l1, l2])
            hi -= 2
            stall = 0
            continue
        # find the top of the unreduced block ending at hi
        lo = hi - 1
        while lo > 0 and H[lo, lo - 1] != 0.0:
            lo -= 1
        _francis_sweep(H, lo, hi, exceptional=(stall > 0 and stall % 12 == 0))
        sweeps += 1
        stall += 1
        if sweeps > max_sweeps:
            raise NoConvergence(f"QR iteration exceeded {max_sweeps} sweeps")
    return np.array(eigs, dtype=complex)


def _eigen_residual_check(A, eigs):
    """Inverse-iteration residual check, used for small matrices only."""
    d = A.shape[0]
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return
    rng = np.random.RandomState(0)
    I = np.eye(d)
    for lam in eigs:
        best = np.inf
        for trial in range(3):
            mu = lam + scale * (1e-8 + 1e-8j) * (1 + trial)
            try:
                LU, piv = lu_factor(A - mu * I)
            except SingularMatrix:
                continue
            v = rng.standard_normal(d) + 0j
            for _ in range(3):
                v = lu_backsolve(LU, piv, v)
                v /= np.linalg.norm(v)
            best = min(best, np.linalg.norm(A @ v - lam * v))
        if best > 1e-8 * scale:
            raise NoConvergence(
                f"eigenvalue {lam} failed the residual check ({best:.3e} > {1e-8 * scale:.3e})"
            )


def eigenvalues(A, residual_check=True):
    """All eigenvalues of a real square matrix as a Spectrum.

    Hessenberg reduction plus Francis double-shift QR. For d <= 8 the
    result is validated by inverse-iteration residuals.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigenvalues expects a square matrix")
    d = A.shape[0]
    if d > 64:
        raise ValueError("matrix dimension beyond the supported desk scale (64)")
    if d == 0:
        return Spectrum(np.zeros(0, dtype=complex), 0.0)
    eigs = _qr_eigenvalues(A, max_sweeps=100 * d)
    if residual_check and d <= 8:
        _eigen_residual_check(A, eigs)
    gap = float(np.min(np.abs(eigs.real)))
    return Spectrum(eigs, gap)


def verify_spd(R, sym_tol=1e-12):
    """Check symmetry (to sym_tol, relative) and positive definiteness.

    Returns the eigenvalues of the symmetric part. Raises NonSPDWeight on
    failure.
    """
    R = np.asarray(R, dtype=float)
    scale = max(1.0, np.max(np.abs(R)))
    if np.max(np.abs(R - R.T)) > sym_tol * scale:
        raise NonSPDWeight("control weight is not symmetric")
    spec = eigenvalues(R)
    if np.min(spec.eigenvalues.real) <= 0.0:
        raise NonSPDWeight("control weight has a non-positive eigenvalue")
    return spec.eigenvalues.real
