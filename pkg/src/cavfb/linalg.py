"""Dense complex linear algebra: Kronecker products, Hermitian spectra,
pivoted solves, and unitary exponentials of Hermitian generators.

All matrices are 2-D numpy arrays of complex128.  Every function is pure and
never mutates its arguments, so values can be shared freely across workers.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from . import tolerances as tol
from .errors import DimensionMismatch, NotHermitian, Singular


def cmatrix(m) -> np.ndarray:
    """Coerce input to a 2-D complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={a.ndim}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def herm_defect(m: np.ndarray) -> float:
    """Max-norm distance from Hermiticity, relative to the matrix scale."""
    m = cmatrix(m)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    return float(np.abs(m - dagger(m)).max(initial=0.0)) / scale


def is_hermitian(m, tolerance: float = tol.HERMITIAN_TOL) -> bool:
    m = cmatrix(m)
    return m.shape[0] == m.shape[1] and herm_defect(m) <= tolerance


def is_unitary(m, tolerance: float = tol.UNITARY_TOL) -> bool:
    m = cmatrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    defect = np.abs(dagger(m) @ m - np.eye(m.shape[0])).max()
    return float(defect) <= tolerance


def is_density_matrix(m, tolerance: float = tol.DENSITY_TOL) -> bool:
    """Hermitian, positive semidefinite, and unit trace within tolerance."""
    m = cmatrix(m)
    if m.shape[0] != m.shape[1] or not is_hermitian(m, tolerance):
        return False
    if abs(np.trace(m) - 1.0) > tolerance:
        return False
    evals = np.linalg.eigvalsh((m + dagger(m)) / 2.0)
    return float(evals.min()) >= -tolerance


def kron(a, b) -> np.ndarray:
    """Kronecker product: (a kron b)[i*rB + k, j*cB + l] = a[i,j] * b[k,l]."""
    return np.kron(cmatrix(a), cmatrix(b))


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (values, vectors) with values ascending and vectors unitary,
    so that h = V diag(values) V^dag.  Raises NotHermitian if the input
    fails the Hermiticity tolerance.
    """
    h = cmatrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"eig_hermitian needs a square matrix, got {h.shape}")
    if herm_defect(h) > tol.HERMITIAN_TOL:
        raise NotHermitian(f"Hermiticity defect {herm_defect(h):.3e} above tolerance")
    values, vectors = np.linalg.eigh((h + dagger(h)) / 2.0)
    return values, vectors


def solve(a, b) -> np.ndarray:
    """Solve a x = b by LU with partial pivoting.

    Raises Singular when a pivot falls below PIVOT_RTOL times the matrix
    scale, which signals a (numerically) rank-deficient system.
    """
    a = cmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"solve needs a square matrix, got {a.shape}")
    b = np.asarray(b, dtype=np.complex128)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    scale = float(np.abs(a).max(initial=0.0))
    if scale == 0.0 or float(np.abs(np.diag(lu)).min()) < tol.PIVOT_RTOL * scale:
        raise Singular("pivot below singularity cutoff")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def unitary_exp(f, theta: float) -> np.ndarray:
    """exp(-i theta f) for Hermitian f, via the spectral decomposition."""
    values, vectors = eig_hermitian(f)
    phases = np.exp(-1j * theta * values)
    return (vectors * phases) @ dagger(vectors)
