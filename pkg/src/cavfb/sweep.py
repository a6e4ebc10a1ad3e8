"""Parameter-space exploration: 2-D steady-state concurrence grids and
constrained maximization of the steady concurrence.

Grid nodes are independent; they are evaluated either serially or in a
process pool, and the assembled result is identical either way.  Nodes
where the generator is degenerate fall back to long-time propagation from
a reference initial state and are flagged, not fatal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import hilbert
from .entangle import diagnostics
from .errors import DegenerateSteadyState, InvalidSpec, NoConvergence
from .linalg import dagger
from .liouville import ModelSpec, build_liouvillian, with_params
from .steady import steady_state_from, steady_state_unique

METHODS = ("unique", "from_state", "symmetric_subspace")
_RANK_CHECK_MAX_DIM = 16  # SVD-based kernel check only for small generators


@dataclass(frozen=True)
class Axis:
    name: str  # parameter name understood by liouville.with_params
    values: np.ndarray
    unit: str = ""


@dataclass(frozen=True, eq=False)
class SweepResult:
    axis1: Axis
    axis2: Axis
    concurrence: np.ndarray  # (n1, n2)
    populations: np.ndarray | None  # (n1, n2, 4) angular-basis diagonals
    status: np.ndarray  # (n1, n2) of "ok" | "fallback" | "error:<name>"
    metadata: dict = field(default_factory=dict)

    @property
    def max_concurrence(self) -> float:
        """Largest concurrence over nodes that solved (error nodes are NaN)."""
        return float(np.nanmax(self.concurrence))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(int(np.nanargmax(self.concurrence)), self.concurrence.shape)
        return float(self.axis1.values[i]), float(self.axis2.values[j])


def default_initial_state(spec: ModelSpec) -> np.ndarray:
    """Both atoms in the ground state; cavity (if any) in the vacuum."""
    if spec.kind == "FULL_NONADIABATIC":
        dim = spec.dim()
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = 1.0
        return rho
    ket = hilbert.product_ket("gg")
    return np.outer(ket, ket.conj())


def _atomic_state(spec: ModelSpec, rho: np.ndarray, symmetric: bool) -> np.ndarray:
    """Reduce a solver-space state to the 4x4 two-atom state."""
    if symmetric:
        p = hilbert.symmetric_isometry()
        if spec.kind == "FULL_NONADIABATIC":
            n = int(spec.fock_cutoff)
            p = np.kron(p, np.eye(n, dtype=np.complex128))
            return hilbert.partial_trace_cavity(p @ rho @ dagger(p), n)
        return p @ rho @ dagger(p)
    if spec.kind == "FULL_NONADIABATIC":
        return hilbert.partial_trace_cavity(rho, int(spec.fock_cutoff))
    return rho


def _restrict_state(spec: ModelSpec, rho: np.ndarray) -> np.ndarray:
    p = hilbert.symmetric_isometry()
    if spec.kind == "FULL_NONADIABATIC":
        p = np.kron(p, np.eye(int(spec.fock_cutoff), dtype=np.complex128))
    sub = dagger(p) @ rho @ p
    trace = np.trace(sub).real
    if trace < 1e-12:
        raise InvalidSpec("initial state has no weight in the symmetric subspace")
    return sub / trace


def solve_node(
    spec: ModelSpec,
    method: str = "unique",
    rho0: np.ndarray | None = None,
    fallback: bool = True,
) -> tuple[np.ndarray, str]:
    """Steady two-atom state at one parameter node, with a status flag.

    With fallback=False a degenerate generator raises instead of silently
    propagating from the reference initial state.
    """
    if method not in METHODS:
        raise InvalidSpec(f"unknown method {method!r}")
    symmetric = method == "symmetric_subspace"
    L = build_liouvillian(spec, symmetric_only=symmetric)
    start = default_initial_state(spec) if rho0 is None else rho0
    if symmetric:
        start = _restrict_state(spec, start)
    if method == "from_state":
        rho = steady_state_from(L, start, rate_scale=spec.rate_scale())
        return _atomic_state(spec, rho, symmetric), "ok"
    try:
        rho = steady_state_unique(L, rank_check=(L.dim <= _RANK_CHECK_MAX_DIM))
        return _atomic_state(spec, rho, symmetric), "ok"
    except DegenerateSteadyState:
        if not fallback:
            raise
        rho = steady_state_from(L, start, rate_scale=spec.rate_scale())
        return _atomic_state(spec, rho, symmetric), "fallback"


def _eval_node(args) -> tuple[float, tuple[float, float, float, float], str]:
    spec, method, rho0 = args
    try:
        rho_atoms, status = solve_node(spec, method, rho0)
        diag = diagnostics(rho_atoms)
        return diag.concurrence, diag.populations, status
    except (NoConvergence, InvalidSpec) as exc:
        return np.nan, (np.nan,) * 4, f"error:{type(exc).__name__}"


def sweep2d(
    template: ModelSpec,
    axis1: Axis,
    axis2: Axis,
    method: str = "unique",
    rho0: np.ndarray | None = None,
    jobs: int = 1,
    want_populations: bool = True,
    metadata: dict | None = None,
) -> SweepResult:
    """Steady-state concurrence over the grid axis1 x axis2."""
    if axis1.values.size == 0 or axis2.values.size == 0:
        raise InvalidSpec("sweep axes must be non-empty")
    n1, n2 = axis1.values.size, axis2.values.size
    tasks = [
        (with_params(template, **{axis1.name: v1, axis2.name: v2}), method, rho0)
        for v1 in axis1.values
        for v2 in axis2.values
    ]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_eval_node, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        results = [_eval_node(t) for t in tasks]

    conc = np.array([r[0] for r in results]).reshape(n1, n2)
    pops = (
        np.array([r[1] for r in results]).reshape(n1, n2, 4) if want_populations else None
    )
    status = np.array([r[2] for r in results], dtype=object).reshape(n1, n2)
    meta = dict(metadata or {})
    meta.setdefault("method", method)
    return SweepResult(
        axis1=axis1, axis2=axis2, concurrence=conc, populations=pops, status=status, metadata=meta
    )


def maximize_concurrence(
    template: ModelSpec,
    param1: str,
    bounds1: tuple[float, float],
    param2: str,
    bounds2: tuple[float, float],
    coarse: tuple[int, int] = (41, 41),
    method: str = "unique",
    jobs: int = 1,
) -> dict:
    """Maximum steady concurrence over a rectangle of two parameters.

    A coarse grid locates the basin; a Nelder-Mead simplex refines it to
    1e-4 in concurrence.  Deterministic, and never worse than the best
    coarse node.
    """
    ax1 = Axis(param1, np.linspace(bounds1[0], bounds1[1], coarse[0]))
    ax2 = Axis(param2, np.linspace(bounds2[0], bounds2[1], coarse[1]))
    grid = sweep2d(template, ax1, ax2, method=method, jobs=jobs, want_populations=False)
    coarse_best = float(np.nanmax(grid.concurrence))
    x1, x2 = grid.argmax()

    def negative_concurrence(x) -> float:
        spec = with_params(template, **{param1: float(x[0]), param2: float(x[1])})
        c, _, _ = _eval_node((spec, method, None))
        return -c if np.isfinite(c) else 0.0

    span1 = bounds1[1] - bounds1[0]
    span2 = bounds2[1] - bounds2[0]
    result = scipy.optimize.minimize(
        negative_concurrence,
        x0=np.array([x1, x2]),
        method="Nelder-Mead",
        bounds=[bounds1, bounds2],
        options={
            "xatol": 1e-4 * max(span1, span2),
            "fatol": 1e-4,
            "initial_simplex": _initial_simplex(x1, x2, span1 / 40.0, span2 / 40.0, bounds1, bounds2),
        },
    )
    refined = -float(result.fun)
    if refined >= coarse_best:
        best = refined
        best_params = {param1: float(result.x[0]), param2: float(result.x[1])}
    else:
        best = coarse_best
        best_params = {param1: x1, param2: x2}
    return {
        "best_params": best_params,
        "best_concurrence": best,
        "coarse_best": coarse_best,
        "coarse_shape": coarse,
    }


def _initial_simplex(x1, x2, step1, step2, bounds1, bounds2) -> np.ndarray:
    def clip(x, lo, hi):
        return min(max(x, lo), hi)

    d1 = step1 if x1 + step1 <= bounds1[1] else -step1
    d2 = step2 if x2 + step2 <= bounds2[1] else -step2
    return np.array(
        [
            [x1, x2],
            [clip(x1 + d1, *bounds1), x2],
            [x1, clip(x2 + d2, *bounds2)],
        ]
    )
