"""Stationary states of the master-equation generators.

Three routes, cross-checking each other:

* a trace-constrained linear solve when the generator kernel is
  one-dimensional;
* long-time RK4 propagation for degenerate generators, where the limit
  depends on the initial state;
* the real coherence-vector form v' = G v + k in a traceless Hermitian
  operator basis, whose G is nonsingular exactly when the stationary state
  is unique (then v_ss = -G^-1 k).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DegenerateSteadyState, DimensionUnsupported, NoConvergence, Singular
from .linalg import dagger, solve
from .liouville import Superoperator, devectorize, vectorize
from .trajectory import rk4_fixed

_CONVERGENCE_STRIDE = 100  # RK4 steps between stationarity checks


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=np.complex128)
    row[np.arange(d) * d + np.arange(d)] = 1.0
    return row


def nullspace_dimension(L: Superoperator) -> int:
    """Number of singular values below RANK_RTOL times the largest."""
    s = np.linalg.svd(L.matrix, compute_uv=False)
    if s[0] == 0.0:
        return L.dim * L.dim
    return int(np.sum(s < tol.RANK_RTOL * s[0]))


def steady_state_unique(
    L: Superoperator, constraint_state: int = 0, rank_check: bool = True
) -> np.ndarray:
    """Unique stationary density matrix of a generator with 1-D kernel.

    The row for diagonal element (constraint_state, constraint_state) is
    replaced by the trace constraint; that row is redundant for any
    trace-preserving generator, so the replacement is lossless.  With
    rank_check=True (the default) the kernel dimension is verified by SVD;
    otherwise degeneracy is still caught through the pivot cutoff of the
    solve, which is the economical route for the large composite-space
    generators.
    """
    d = L.dim
    if rank_check and nullspace_dimension(L) != 1:
        raise DegenerateSteadyState("generator kernel is not one-dimensional")
    a = L.matrix.copy()
    r = constraint_state * d + constraint_state
    a[r, :] = _trace_row(d)
    b = np.zeros(d * d, dtype=np.complex128)
    b[r] = 1.0
    try:
        x = solve(a, b)
    except Singular as exc:
        raise DegenerateSteadyState("trace-constrained system is singular") from exc
    rho = devectorize(x, d)
    rho = (rho + dagger(rho)) / 2.0
    rho = rho / np.trace(rho).real
    residual = float(np.abs(L.matrix @ vectorize(rho)).max())
    if residual > tol.STEADY_RESIDUAL_TOL * max(1.0, float(np.abs(L.matrix).max())):
        raise DegenerateSteadyState(f"stationarity residual {residual:.2e} too large")
    return rho


def steady_state_from(
    L: Superoperator,
    rho0: np.ndarray,
    rate_scale: float | None = None,
    max_time: float = tol.DEFAULT_MAX_TIME,
) -> np.ndarray:
    """Asymptotic state reached from rho0 under a (possibly degenerate)
    generator, by fixed-step RK4 until max |drho/dt| falls below tolerance.
    """
    if rate_scale is None:
        rate_scale = max(float(np.abs(L.matrix).sum(axis=1).max()), 1e-12)
    h = 0.01 / rate_scale
    d = L.dim
    v = vectorize(np.asarray(rho0, dtype=np.complex128))
    t = 0.0
    while t < max_time:
        v = rk4_fixed(L.matrix, v, h, _CONVERGENCE_STRIDE)
        t += h * _CONVERGENCE_STRIDE
        if float(np.abs(L.matrix @ v).max()) < tol.RHODOT_TOL:
            rho = devectorize(v, d)
            rho = (rho + dagger(rho)) / 2.0
            return rho / np.trace(rho).real
    raise NoConvergence(f"no stationary state within t = {max_time:g}")


def gell_mann_basis(d: int = 4) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices, normalized to tr(b_i b_j) = 2 delta_ij.

    Ordering: symmetric off-diagonal pairs (j,k) with j<k in lexicographic
    order, then the antisymmetric pairs in the same order, then the d-1
    diagonal matrices.
    """
    basis: list[np.ndarray] = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = m[k, j] = 1.0
            basis.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = -1.0j
            m[k, j] = 1.0j
            basis.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=np.complex128)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -float(l)
        basis.append(m * np.sqrt(2.0 / (l * (l + 1))))
    return basis


@dataclass(frozen=True, eq=False)
class CoherenceForm:
    """Real form v' = G v + k with v_i = <b_i> in the Gell-Mann basis."""

    G: np.ndarray  # (d^2-1, d^2-1) real
    k: np.ndarray  # (d^2-1,) real
    basis: list[np.ndarray]


def coherence_form(L: Superoperator) -> CoherenceForm:
    """Coherence-vector form of a two-atom generator (d = 4 only)."""
    d = L.dim
    if d != 4:
        raise DimensionUnsupported(f"coherence form defined for d=4, got d={d}")
    basis = gell_mann_basis(d)
    n = len(basis)
    images = [L.apply(b) for b in basis]
    image_id = L.apply(np.eye(d, dtype=np.complex128))
    g = np.empty((n, n))
    k = np.empty(n)
    for i, bi in enumerate(basis):
        for j in range(n):
            val = np.trace(bi @ images[j]) / 2.0
            g[i, j] = val.real
        k[i] = (np.trace(bi @ image_id) / d).real
    return CoherenceForm(G=g, k=k, basis=basis)


def is_unique(form: CoherenceForm) -> bool:
    """True when G is numerically nonsingular (unique stationary state)."""
    s = np.linalg.svd(form.G, compute_uv=False)
    return s[0] > 0.0 and s[-1] >= tol.RANK_RTOL * s[0]


def coherence_steady_state(form: CoherenceForm) -> np.ndarray:
    """Stationary state -G^-1 k mapped back to a density matrix."""
    if not is_unique(form):
        raise DegenerateSteadyState("G is singular; no unique stationary state")
    v = np.linalg.solve(form.G, -form.k)
    d = form.basis[0].shape[0]
    rho = np.eye(d, dtype=np.complex128) / d
    for vi, bi in zip(v, form.basis):
        rho = rho + 0.5 * vi * bi
    return rho


def dump_coherence_form(form: CoherenceForm, path) -> None:
    """Debug CSV: rows of G followed by a final row holding k."""
    n = form.k.size
    header = ",".join(f"g{j}" for j in range(n))
    lines = [header]
    for row in form.G:
        lines.append(",".join(f"{x:.12g}" for x in row))
    lines.append(",".join(f"{x:.12g}" for x in form.k))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
