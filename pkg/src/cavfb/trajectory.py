"""Quantum-jump unraveling of the click-feedback models, plus a fixed-step
RK4 master-equation propagator for ensemble-average comparisons.

Between jumps the state evolves under the non-Hermitian effective
Hamiltonian H - (i/2) sum_k c_k^dag c_k, applied through exact matrix
exponentials precomputed at the sampling step and its dyadic subdivisions.
Waiting times are drawn by thresholding the squared norm against a uniform
variate; the crossing is located by bisection over the dyadic grid, so jump
statistics carry no first-order step bias.  Undetected photons are realized
as clicks where the feedback unitary fails to apply, which keeps every
trajectory pure and reproduces the inefficient master equation on average.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import hilbert
from . import tolerances as tol
from .entangle import concurrence
from .errors import (
    CutoffSaturated,
    InvalidModel,
    NonPureInitial,
    StepTooLarge,
)
from .hilbert import partial_trace_cavity
from .linalg import dagger, kron
from .liouville import ModelSpec, Superoperator, vectorize

RNG_NAME = "PCG64"
JUMP_KINDS = ("JUMP_FB", "JUMP_FB_INEFF", "FULL_NONADIABATIC")
_BISECT_LEVELS = 20  # time resolution 2^-20 of a sampling step, ~1e-6 relative
_SATURATION_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class JumpChannel:
    """One decay channel: its detector label and scaled jump operator."""

    label: str  # DETECTED_FEEDBACK | UNDETECTED | ATOM1_SE | ATOM2_SE
    op: np.ndarray

    @property
    def rate_operator(self) -> np.ndarray:
        return dagger(self.op) @ self.op


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    seed: int
    times: np.ndarray
    states: np.ndarray  # (n_samples, dim), unit norm
    jumps: list[tuple[float, str]]
    rng_name: str = RNG_NAME


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    times: np.ndarray
    rho_mean: np.ndarray  # (n_samples, dim, dim)
    concurrence: np.ndarray
    mean_photon: np.ndarray


def hamiltonian_and_channels(spec: ModelSpec) -> tuple[np.ndarray, list[JumpChannel]]:
    """Hamiltonian and jump channels whose dissipators sum to the model's."""
    if spec.kind not in JUMP_KINDS:
        raise InvalidModel(f"no jump unraveling for kind {spec.kind!r}")
    channels: list[JumpChannel] = []
    if spec.kind == "FULL_NONADIABATIC":
        n = int(spec.fock_cutoff)
        atom = hilbert.atomic_ops()
        cav = hilbert.cavity_ops(n)
        jm = hilbert.embed_atom(atom["jminus"], n)
        jp = hilbert.embed_atom(atom["jplus"], n)
        a = hilbert.embed_cavity(cav["a"])
        # quadrature coupling g/2, matching the generator in liouville
        h = spec.omega * (jp + jm) + 0.5 * spec.g * (
            kron(atom["jplus"], cav["a"]) + kron(atom["jminus"], cav["adag"])
        )
        ua = hilbert.embed_atom(spec.feedback.jump_unitary(), n) @ a
        if spec.eta > 0.0:
            channels.append(
                JumpChannel("DETECTED_FEEDBACK", np.sqrt(spec.kappa * spec.eta) * ua)
            )
        if spec.eta < 1.0:
            channels.append(
                JumpChannel("UNDETECTED", np.sqrt(spec.kappa * (1.0 - spec.eta)) * a)
            )
        se1 = hilbert.embed_atom(atom["sigma1"], n)
        se2 = hilbert.embed_atom(atom["sigma2"], n)
    else:
        atom = hilbert.atomic_ops()
        jm = atom["jminus"]
        h = spec.omega * (atom["jplus"] + jm)
        ujm = spec.feedback.jump_unitary() @ jm
        eta = spec.eta if spec.kind == "JUMP_FB_INEFF" else 1.0
        if eta > 0.0:
            channels.append(
                JumpChannel("DETECTED_FEEDBACK", np.sqrt(spec.big_gamma * eta) * ujm)
            )
        if eta < 1.0:
            channels.append(
                JumpChannel("UNDETECTED", np.sqrt(spec.big_gamma * (1.0 - eta)) * jm)
            )
        se1, se2 = atom["sigma1"], atom["sigma2"]
    if spec.gamma1 > 0.0:
        channels.append(JumpChannel("ATOM1_SE", np.sqrt(spec.gamma1) * se1))
    if spec.gamma2 > 0.0:
        channels.append(JumpChannel("ATOM2_SE", np.sqrt(spec.gamma2) * se2))
    return h, channels


def effective_hamiltonian(h: np.ndarray, channels: list[JumpChannel]) -> np.ndarray:
    heff = h.astype(np.complex128, copy=True)
    for ch in channels:
        heff = heff - 0.5j * ch.rate_operator
    return heff


class _Propagator:
    """Precomputed no-jump propagators for one sampling step and its halves."""

    def __init__(self, spec: ModelSpec, sample_dt: float):
        self.spec = spec
        self.sample_dt = float(sample_dt)
        self.h, self.channels = hamiltonian_and_channels(spec)
        self.heff = effective_hamiltonian(self.h, self.channels)
        self.dim = self.heff.shape[0]
        self.steps = [
            scipy.linalg.expm(-1j * self.heff * self.sample_dt / 2**k)
            for k in range(_BISECT_LEVELS + 1)
        ]
        if spec.kind == "FULL_NONADIABATIC":
            n = int(spec.fock_cutoff)
            self.number_op = hilbert.embed_cavity(hilbert.cavity_ops(n)["num"])
            self.top_level = n - 1
        else:
            self.number_op = None
            self.top_level = None


class _Walker:
    """Mutable per-trajectory state threaded through the dyadic stepper."""

    __slots__ = ("psi", "threshold", "rng", "jumps")

    def __init__(self, psi: np.ndarray, rng: np.random.Generator):
        self.psi = psi
        self.rng = rng
        self.threshold = rng.random()
        self.jumps: list[tuple[float, str]] = []


def _apply_jump(prop: _Propagator, walker: _Walker, t: float) -> None:
    candidates = [ch.op @ walker.psi for ch in prop.channels]
    weights = np.array([float(np.vdot(c, c).real) for c in candidates])
    total = weights.sum()
    if total <= 0.0:  # norm loss without open channels cannot occur
        raise ArithmeticError("jump triggered with zero total jump rate")
    pick = walker.rng.random() * total
    index = int(np.searchsorted(np.cumsum(weights), pick))
    index = min(index, len(prop.channels) - 1)
    walker.psi = candidates[index] / np.sqrt(weights[index])
    walker.threshold = walker.rng.random()
    walker.jumps.append((t, prop.channels[index].label))


def _advance(prop: _Propagator, walker: _Walker, level: int, t: float) -> None:
    """Propagate by sample_dt / 2**level from time t, resolving any jumps."""
    trial = prop.steps[level] @ walker.psi
    norm2 = float(np.vdot(trial, trial).real)
    if norm2 >= walker.threshold:
        walker.psi = trial
        return
    if level == _BISECT_LEVELS:
        # crossing bracketed to 2^-20 of a step; jump from the left edge
        _apply_jump(prop, walker, t + prop.sample_dt / 2**level)
        return
    half = prop.sample_dt / 2 ** (level + 1)
    _advance(prop, walker, level + 1, t)
    _advance(prop, walker, level + 1, t + half)


def _check_saturation(prop: _Propagator, psi_normed: np.ndarray, t: float) -> None:
    if prop.top_level is None:
        return
    top = np.abs(psi_normed.reshape(4, prop.top_level + 1)[:, prop.top_level]) ** 2
    if top.sum() > _SATURATION_TOL:
        raise CutoffSaturated(
            f"top Fock level population {top.sum():.2e} at t={t:.4f}; raise fock_cutoff"
        )


def _as_state_vector(state, dim: int) -> np.ndarray:
    psi = np.asarray(state, dtype=np.complex128)
    if psi.ndim == 2:  # accept a rank-one density matrix
        if psi.shape != (dim, dim):
            raise NonPureInitial(f"expected dim {dim}, got {psi.shape}")
        values, vectors = np.linalg.eigh((psi + dagger(psi)) / 2.0)
        if values[:-1].max(initial=0.0) > 1e-9 or abs(values[-1] - 1.0) > 1e-9:
            raise NonPureInitial("initial density matrix is not pure")
        psi = vectors[:, -1]
    if psi.shape != (dim,):
        raise NonPureInitial(f"expected a length-{dim} state vector, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise NonPureInitial(f"initial state norm {norm:.6f} != 1")
    return psi / norm


def _run(prop: _Propagator, psi0: np.ndarray, t_final: float, seed: int) -> TrajectoryRecord:
    n_samples = int(round(t_final / prop.sample_dt)) + 1
    times = np.arange(n_samples) * prop.sample_dt
    states = np.empty((n_samples, prop.dim), dtype=np.complex128)
    walker = _Walker(psi0.copy(), np.random.Generator(np.random.PCG64(seed)))
    states[0] = psi0
    _check_saturation(prop, psi0, 0.0)
    for i in range(n_samples - 1):
        _advance(prop, walker, 0, times[i])
        normed = walker.psi / np.linalg.norm(walker.psi)
        states[i + 1] = normed
        _check_saturation(prop, normed, times[i + 1])
    return TrajectoryRecord(seed=seed, times=times, states=states, jumps=walker.jumps)


def simulate_trajectory(
    spec: ModelSpec, state0, t_final: float, sample_dt: float, seed: int
) -> TrajectoryRecord:
    """One stochastic realization; bit-reproducible for a given (spec, seed)."""
    prop = _Propagator(spec, sample_dt)
    psi0 = _as_state_vector(state0, prop.dim)
    return _run(prop, psi0, t_final, seed)


_ENSEMBLE_CHUNK = 32  # trajectories summed per partial; fixed so that the
# chunked accumulation order (and hence the result) never depends on `jobs`


def ensemble_average(
    spec: ModelSpec,
    state0,
    t_final: float,
    sample_dt: float,
    n_traj: int,
    base_seed: int,
    jobs: int = 1,
) -> EnsembleResult:
    """Mean projector over trajectories with seeds base_seed..base_seed+n-1.

    Partial sums are accumulated per fixed-size seed chunk in seed order,
    so the result is bitwise independent of scheduling and of `jobs`.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    prop = _Propagator(spec, sample_dt)
    psi0 = _as_state_vector(state0, prop.dim)
    n_samples = int(round(t_final / sample_dt)) + 1
    rho_sum = np.zeros((n_samples, prop.dim, prop.dim), dtype=np.complex128)

    chunks = [
        (spec, state0, t_final, sample_dt, base_seed + lo, min(lo + _ENSEMBLE_CHUNK, n_traj) - lo)
        for lo in range(0, n_traj, _ENSEMBLE_CHUNK)
    ]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for partial in pool.map(_ensemble_chunk_worker, chunks):
                rho_sum += partial
    else:
        for chunk in chunks:
            rho_sum += _chunk_sum(prop, psi0, chunk[2], chunk[4], chunk[5])

    rho_mean = rho_sum / n_traj
    times = np.arange(n_samples) * sample_dt
    conc = np.empty(n_samples)
    photon = np.full(n_samples, np.nan)
    for t in range(n_samples):
        rho_t = rho_mean[t]
        if spec.kind == "FULL_NONADIABATIC":
            photon[t] = float(np.trace(rho_t @ prop.number_op).real)
            rho_t = partial_trace_cavity(rho_t, int(spec.fock_cutoff))
        conc[t] = concurrence(rho_t)
    return EnsembleResult(times=times, rho_mean=rho_mean, concurrence=conc, mean_photon=photon)


def _chunk_sum(
    prop: _Propagator, psi0: np.ndarray, t_final: float, seed0: int, count: int
) -> np.ndarray:
    n_samples = int(round(t_final / prop.sample_dt)) + 1
    partial = np.zeros((n_samples, prop.dim, prop.dim), dtype=np.complex128)
    for i in range(count):
        rec = _run(prop, psi0, t_final, seed0 + i)
        partial += np.einsum("ti,tj->tij", rec.states, rec.states.conj())
    return partial


def _ensemble_chunk_worker(args) -> np.ndarray:
    spec, state0, t_final, sample_dt, seed0, count = args
    prop = _Propagator(spec, sample_dt)
    psi0 = _as_state_vector(state0, prop.dim)
    return _chunk_sum(prop, psi0, t_final, seed0, count)


def rk4_fixed(matrix: np.ndarray, v: np.ndarray, h: float, n_steps: int) -> np.ndarray:
    """n_steps of classic RK4 for v' = matrix v with fixed step h."""
    for _ in range(n_steps):
        k1 = matrix @ v
        k2 = matrix @ (v + (0.5 * h) * k1)
        k3 = matrix @ (v + (0.5 * h) * k2)
        k4 = matrix @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


def propagate_me(
    L: Superoperator,
    rho0: np.ndarray,
    t_grid: np.ndarray,
    rate_scale: float | None = None,
) -> np.ndarray:
    """Deterministic master-equation solution sampled on t_grid.

    Classic RK4 with a fixed step bounded by the grid spacing and by
    0.01 / rate_scale; the trace is monitored and renormalized at each
    sample.  `rate_scale` defaults to a spectral-radius bound from the
    generator's infinity norm.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a non-empty 1-D array")
    if rate_scale is None:
        rate_scale = max(float(np.abs(L.matrix).sum(axis=1).max()), 1e-12)
    h_max = 0.01 / rate_scale
    spacing = np.diff(t_grid)
    if spacing.size and spacing.min() <= 0.0:
        raise ValueError("t_grid must be strictly increasing")

    v = vectorize(np.asarray(rho0, dtype=np.complex128))
    d = L.dim
    trace_idx = np.arange(d) * d + np.arange(d)
    out = np.empty((t_grid.size, d, d), dtype=np.complex128)
    out[0] = v.reshape(d, d)
    for i, dt in enumerate(spacing):
        n_steps = max(1, int(np.ceil(dt / h_max)))
        v = rk4_fixed(L.matrix, v, dt / n_steps, n_steps)
        trace = v[trace_idx].sum()
        drift = abs(trace - 1.0)
        if drift > tol.TRACE_DRIFT_HARD:
            raise StepTooLarge(f"trace drifted by {drift:.2e}; reduce the step")
        v = v / trace
        out[i + 1] = v.reshape(d, d)
    return out
