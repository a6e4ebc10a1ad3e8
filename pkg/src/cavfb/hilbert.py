"""Operators and states for two two-level atoms and a truncated cavity mode.

Conventions, fixed globally:

* atomic product basis |gg>, |ge>, |eg>, |ee| indexed 0..3, first letter
  is atom 1;
* angular momentum basis |1> = |gg>, |2> = (|ge>+|eg>)/sqrt2, |3> = |ee>,
  |4> = (|ge>-|eg>)/sqrt2 (the antisymmetric Bell state);
* composite spaces are ordered atoms (x) cavity, so index (i, k) -> i*n + k
  for a Fock cutoff of n levels |0>..|n-1>.
"""
from __future__ import annotations

import numpy as np

from .errors import CutoffTooSmall, DimensionMismatch
from .linalg import dagger, kron

PRODUCT_LABELS = ("gg", "ge", "eg", "ee")

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)  # |g><e|
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)


def atomic_ops() -> dict[str, np.ndarray]:
    """Two-atom lowering/raising and collective operators (4x4).

    Keys: sigma1, sigma2, sigma1_dag, sigma2_dag, jminus, jplus, jx, with
    jminus = sigma1 + sigma2, jplus = jminus^dag, jx = jminus + jplus.
    """
    eye2 = np.eye(2, dtype=np.complex128)
    sigma1 = kron(_SIGMA_MINUS, eye2)
    sigma2 = kron(eye2, _SIGMA_MINUS)
    jminus = sigma1 + sigma2
    ops = {
        "sigma1": sigma1,
        "sigma2": sigma2,
        "sigma1_dag": dagger(sigma1),
        "sigma2_dag": dagger(sigma2),
        "jminus": jminus,
        "jplus": dagger(jminus),
    }
    ops["jx"] = ops["jminus"] + ops["jplus"]
    return ops


def cavity_ops(n: int) -> dict[str, np.ndarray]:
    """Truncated annihilation/creation/number operators on |0>..|n-1>.

    a|k> = sqrt(k)|k-1>, and adag is the exact conjugate transpose of a, so
    adag|n-1> = 0 in the truncated space.
    """
    if n < 2:
        raise CutoffTooSmall(f"Fock cutoff must be >= 2, got {n}")
    a = np.diag(np.sqrt(np.arange(1, n, dtype=np.float64)), 1).astype(np.complex128)
    adag = dagger(a)
    return {"a": a, "adag": adag, "num": adag @ a}


def angular_basis() -> np.ndarray:
    """Unitary B whose rows are the angular-basis bras in the product basis.

    to_angular(rho) = B rho B^dag permutes |ge>, |eg> into the symmetric and
    antisymmetric combinations |2> and |4>.
    """
    s = 1.0 / np.sqrt(2.0)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, s, s, 0],
            [0, 0, 0, 1],
            [0, s, -s, 0],
        ],
        dtype=np.complex128,
    )


def to_angular(rho_product: np.ndarray) -> np.ndarray:
    """Rewrite a 4x4 operator from the product basis to the angular basis."""
    rho = np.asarray(rho_product, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 matrix, got {rho.shape}")
    b = angular_basis()
    return b @ rho @ dagger(b)


def from_angular(rho_angular: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho_angular, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 matrix, got {rho.shape}")
    b = angular_basis()
    return dagger(b) @ rho @ b


def product_ket(label: str) -> np.ndarray:
    """Basis ket |gg>, |ge>, |eg> or |ee> as a length-4 vector."""
    if label not in PRODUCT_LABELS:
        raise ValueError(f"unknown product state {label!r}")
    ket = np.zeros(4, dtype=np.complex128)
    ket[PRODUCT_LABELS.index(label)] = 1.0
    return ket


def angular_ket(index: int) -> np.ndarray:
    """Angular-basis ket |1>..|4>, expressed in the product basis."""
    if index not in (1, 2, 3, 4):
        raise ValueError(f"angular index must be 1..4, got {index}")
    return angular_basis()[index - 1].conj()


def symmetric_isometry() -> np.ndarray:
    """4x3 isometry whose columns span the symmetric subspace |1>,|2>,|3>."""
    return angular_basis()[:3].conj().T.copy()


def embed_atom(op: np.ndarray, n: int) -> np.ndarray:
    """Atomic operator acting on the composite atoms (x) cavity space."""
    return kron(op, np.eye(n, dtype=np.complex128))


def embed_cavity(op: np.ndarray, atom_dim: int = 4) -> np.ndarray:
    """Cavity operator acting on the composite atoms (x) cavity space."""
    return kron(np.eye(atom_dim, dtype=np.complex128), op)


def partial_trace_cavity(rho_full: np.ndarray, n: int) -> np.ndarray:
    """Trace out the cavity: (rho_atoms)[i,j] = sum_k rho[(i,k),(j,k)]."""
    rho = np.asarray(rho_full, dtype=np.complex128)
    if rho.shape != (4 * n, 4 * n):
        raise DimensionMismatch(f"expected {(4 * n, 4 * n)}, got {rho.shape}")
    return np.einsum("ikjk->ij", rho.reshape(4, n, 4, n))
