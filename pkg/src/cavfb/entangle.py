"""Two-qubit entanglement and state diagnostics.

Concurrence follows the spin-flip construction: with
rho_tilde = (sy kron sy) rho* (sy kron sy), the concurrence is
max(0, sqrt(mu1) - sqrt(mu2) - sqrt(mu3) - sqrt(mu4)) where the mu_i are
the descending eigenvalues of rho rho_tilde.  Numerically we diagonalize
the Hermitian matrix sqrt(rho) rho_tilde sqrt(rho), which shares those
eigenvalues but is symmetric-definite and therefore stable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DimensionMismatch, NotDensityMatrix
from .hilbert import SIGMA_Y, to_angular
from .linalg import dagger, eig_hermitian, kron

_SYSY = kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True)
class StateDiagnostics:
    concurrence: float
    purity: float
    populations: tuple[float, float, float, float]  # angular basis rho_11..rho_44
    fidelity_bell4: float


def _check_density(rho: np.ndarray, d: int = 4) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (d, d):
        raise DimensionMismatch(f"expected {d}x{d}, got {rho.shape}")
    defect = np.abs(rho - dagger(rho)).max()
    if defect > tol.DENSITY_TOL:
        raise NotDensityMatrix(f"Hermiticity defect {defect:.2e}")
    if abs(np.trace(rho).real - 1.0) > tol.DENSITY_TOL or abs(np.trace(rho).imag) > tol.DENSITY_TOL:
        raise NotDensityMatrix(f"trace {np.trace(rho):.6f} != 1")
    rho = (rho + dagger(rho)) / 2.0
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol.DENSITY_TOL:
        raise NotDensityMatrix(f"negative eigenvalue {evals.min():.2e}")
    return rho


def _sqrt_psd(rho: np.ndarray) -> np.ndarray:
    """Matrix square root with tiny negative eigenvalues clamped to zero."""
    values, vectors = eig_hermitian(rho)
    values = np.where(values > 0.0, values, 0.0)
    return (vectors * np.sqrt(values)) @ dagger(vectors)


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """(sy kron sy) rho* (sy kron sy) in the fixed product-basis ordering."""
    return _SYSY @ rho.conj() @ _SYSY


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = _check_density(rho)
    root = _sqrt_psd(rho)
    m = root @ spin_flip(rho) @ root
    mu, _ = eig_hermitian((m + dagger(m)) / 2.0)
    mu = np.sqrt(np.where(mu > 0.0, mu, 0.0))[::-1]  # descending
    return float(max(0.0, mu[0] - mu[1:].sum()))


def diagnostics(rho: np.ndarray) -> StateDiagnostics:
    """Concurrence, purity, angular-basis populations, and Bell fidelity."""
    rho = _check_density(rho)
    rho_ang = to_angular(rho)
    pops = tuple(float(x) for x in np.real(np.diag(rho_ang)))
    return StateDiagnostics(
        concurrence=concurrence(rho),
        purity=float(np.trace(rho @ rho).real),
        populations=pops,
        fidelity_bell4=pops[3],
    )


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of (a - b) for Hermitian a, b."""
    diff = np.asarray(a, dtype=np.complex128) - np.asarray(b, dtype=np.complex128)
    values, _ = eig_hermitian(diff)
    return float(0.5 * np.abs(values).sum())
