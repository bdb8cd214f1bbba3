"""Small dense complex linear algebra (2x2 and 4x4 matrices).

Superoperators throughout the package use the column-stacking convention::

    [[a, b],
     [c, d]]   ->   (a, c, b, d)

so that ``vec(A X B) == kron(B.T, A) @ vec(X)``.
"""
import numpy as np

from .errors import DimensionError, InvariantError

HERMITIAN_TOL = 1e-12
OFFDIAG_TOL = 1e-13
NEGATIVE_CLAMP = 1e-12


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest entry magnitude of ``a - a^dagger``."""
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(a)
    scale = max(1.0, float(np.max(np.abs(a))))
    return hermiticity_defect(a) <= tol * scale


def _jacobi_rotation(a, p, q):
    """2x2 unitary block that zeroes the (p, q) entry of Hermitian ``a``."""
    apq = a[p, q]
    r = abs(apq)
    phase = apq / r
    zeta = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # diag(1, conj(phase)) makes the pivot real, then a real Jacobi rotation.
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])


def hermitian_eigen(a, tol: float = OFFDIAG_TOL, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like
        Hermitian matrix (checked to within ``1e-12`` relative to its largest
        entry).
    tol : float
        Sweeping stops once the off-diagonal Frobenius mass drops below
        ``tol * max(1, ||a||_F)``.

    Returns
    -------
    eigenvalues : ndarray
        Real, sorted in descending order.
    eigenvectors : ndarray
        Orthonormal columns, ``a @ v[:, k] == eigenvalues[k] * v[:, k]``.
    """
    a = as_matrix(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_TOL * scale:
        raise InvariantError(
            f"matrix is not Hermitian: max |A - A^dagger| = {defect:.3e}"
        )
    n = a.shape[0]
    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))
    offdiag = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[offdiag]) ** 2))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                g = _jacobi_rotation(a, p, q)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dagger(g) @ a[idx, :]
                a[q, p] = a[p, q] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise ArithmeticError(f"Jacobi sweeps did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def trace_norm(a) -> float:
    """Sum of singular values, ``Tr sqrt(A^dagger A)``.

    Hermitian input takes the direct route (sum of absolute eigenvalues),
    which keeps full relative accuracy on small eigenvalues.
    """
    a = as_matrix(a)
    if is_hermitian(a):
        if a.shape == (2, 2):
            # eigenvalues m +- r, so |m + r| + |m - r| = 2 max(|m|, r)
            m = 0.5 * (a[0, 0].real + a[1, 1].real)
            r = np.hypot(0.5 * (a[0, 0].real - a[1, 1].real), abs(0.5 * (a[0, 1] + np.conj(a[1, 0]))))
            return float(2.0 * max(abs(m), r))
        w, _ = hermitian_eigen(a)
        return float(np.sum(np.abs(w)))
    w, _ = hermitian_eigen(dagger(a) @ a)
    w = np.where((w < 0) & (w >= -NEGATIVE_CLAMP), 0.0, w)
    return float(np.sum(np.sqrt(w)))


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def vectorize(rho) -> np.ndarray:
    """Column-stack a square matrix: ``v[i + dim*j] = rho[i, j]``."""
    rho = as_matrix(rho)
    return rho.reshape(-1, order="F")


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order="F")


def sandwich(left, right) -> np.ndarray:
    """Superoperator matrix of ``X -> left @ X @ right``."""
    return kron(np.transpose(right), left)
