"""Master-equation generators as dense superoperators on vectorized states.

Density matrices are vectorized row-major, vec(rho)[i*d + j] = rho[i, j],
so that vec(A rho B) = (A kron B^T) vec(rho).  Six model variants are
supported:

* DICKE             two driven atoms with collective decay
* ADIABATIC_SE      DICKE plus independent spontaneous emission
* HOMODYNE_FB       continuous feedback driven by a homodyne current
* JUMP_FB           feedback unitary applied after each detector click
* JUMP_FB_INEFF     jump feedback with finite detection efficiency
* FULL_NONADIABATIC atoms + cavity mode retained, click feedback on the
                    cavity output

Adiabatic kinds act on the 4-dimensional two-atom space with the collective
decay rate as the unit; the full model acts on the 4n composite space with
the spontaneous emission rate as the unit.

The full model's coupling parameter g is defined through the effective
collective decay g^2/kappa that emerges when the cavity is eliminated, and
through the cooperativity g^2/(kappa gamma).  With the photon-number decay
written as kappa D[a], that definition puts the quadrature coupling in the
Hamiltonian at g/2: the interaction term is (g/2)(J+ a + J- a^dag), and
adiabatic elimination then yields exactly (g^2/kappa) D[J-].
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import hilbert
from . import tolerances as tol
from .errors import DimensionMismatch, InvalidSpec, NotHermitian
from .linalg import cmatrix, dagger, herm_defect, is_unitary, kron, unitary_exp

MODEL_KINDS = (
    "DICKE",
    "ADIABATIC_SE",
    "HOMODYNE_FB",
    "JUMP_FB",
    "JUMP_FB_INEFF",
    "FULL_NONADIABATIC",
)
ADIABATIC_KINDS = MODEL_KINDS[:5]
MEASUREMENTS = ("NONE", "HOMODYNE", "PHOTODETECTION")
GENERATORS = ("COLLECTIVE_JX", "LOCAL_SIGMA_X", "CUSTOM")

_KIND_MEASUREMENT = {
    "DICKE": "NONE",
    "ADIABATIC_SE": "NONE",
    "HOMODYNE_FB": "HOMODYNE",
    "JUMP_FB": "PHOTODETECTION",
    "JUMP_FB_INEFF": "PHOTODETECTION",
    "FULL_NONADIABATIC": "PHOTODETECTION",
}


@dataclass(frozen=True, eq=False)
class FeedbackSpec:
    """Control law: what is measured, which Hermitian generator is applied,
    and how strongly.

    For homodyne feedback `strength` is the rate multiplying the generator
    in the control Hamiltonian; for jump feedback it is the dimensionless
    rotation angle of the post-click unitary exp(-i strength generator).
    The sigma_x and collective jx generators are used with their natural
    eigenvalues (+-1 and 0, +-2 respectively); no renormalization.
    """

    measurement: str = "NONE"
    generator: str = "COLLECTIVE_JX"
    target_atom: int = 1
    strength: float = 0.0
    custom_generator: np.ndarray | None = None

    def generator_matrix(self) -> np.ndarray:
        ops = hilbert.atomic_ops()
        if self.generator == "COLLECTIVE_JX":
            return ops["jx"]
        if self.generator == "LOCAL_SIGMA_X":
            eye2 = np.eye(2, dtype=np.complex128)
            if self.target_atom == 1:
                return kron(hilbert.SIGMA_X, eye2)
            if self.target_atom == 2:
                return kron(eye2, hilbert.SIGMA_X)
            raise InvalidSpec(f"target_atom must be 1 or 2, got {self.target_atom}")
        if self.generator == "CUSTOM":
            if self.custom_generator is None:
                raise InvalidSpec("CUSTOM generator needs custom_generator")
            f = cmatrix(self.custom_generator)
            if f.shape != (4, 4):
                raise DimensionMismatch(f"custom generator must be 4x4, got {f.shape}")
            if herm_defect(f) > tol.HERMITIAN_TOL:
                raise NotHermitian("custom feedback generator is not Hermitian")
            return f
        raise InvalidSpec(f"unknown generator {self.generator!r}")

    def control_hamiltonian(self) -> np.ndarray:
        """strength * generator, the homodyne control Hamiltonian F."""
        return self.strength * self.generator_matrix()

    def jump_unitary(self) -> np.ndarray:
        """exp(-i strength generator), applied to the atoms after a click."""
        u = unitary_exp(self.generator_matrix(), self.strength)
        assert is_unitary(u)
        return u


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Full parameterization of one dynamical model.

    Rates are in units of the collective decay for adiabatic kinds
    (unit="Gamma", big_gamma = 1 by convention) and in units of the
    spontaneous emission rate for the full model (unit="gamma"), where the
    effective collective decay g^2/kappa is derived, not set.
    """

    kind: str
    omega: float = 0.0
    big_gamma: float = 1.0
    g: float = 0.0
    kappa: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    eta: float = 1.0
    feedback: FeedbackSpec = field(default_factory=FeedbackSpec)
    fock_cutoff: int | None = None
    unit: str = "Gamma"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise InvalidSpec(f"unknown model kind {self.kind!r}")
        for name in ("big_gamma", "g", "kappa", "gamma1", "gamma2"):
            if getattr(self, name) < 0.0:
                raise InvalidSpec(f"rate {name} must be >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidSpec(f"eta must be in [0, 1], got {self.eta}")
        expected = _KIND_MEASUREMENT[self.kind]
        if self.feedback.measurement != expected:
            raise InvalidSpec(
                f"{self.kind} requires measurement={expected}, "
                f"got {self.feedback.measurement}"
            )
        if self.kind == "FULL_NONADIABATIC":
            if self.fock_cutoff is None:
                raise InvalidSpec("FULL_NONADIABATIC needs fock_cutoff")
            if self.kappa <= 0.0 or self.g <= 0.0:
                raise InvalidSpec("FULL_NONADIABATIC needs g > 0 and kappa > 0")

    @property
    def effective_big_gamma(self) -> float:
        """Collective decay rate; g^2/kappa for the full model."""
        if self.kind == "FULL_NONADIABATIC":
            return self.g**2 / self.kappa
        return self.big_gamma

    @property
    def cooperativity(self) -> float | None:
        """Ratio of collective decay to spontaneous emission, if defined."""
        if self.gamma1 != self.gamma2 or self.gamma1 <= 0.0:
            return None
        return self.effective_big_gamma / self.gamma1

    def dim(self) -> int:
        if self.kind == "FULL_NONADIABATIC":
            return 4 * int(self.fock_cutoff)
        return 4

    def rate_scale(self) -> float:
        """Fastest rate in the generator, used to pick integration steps."""
        rates = [abs(self.omega), self.gamma1, self.gamma2]
        if self.kind == "FULL_NONADIABATIC":
            rates += [self.g, self.kappa]
        else:
            rates.append(self.big_gamma)
        if self.kind == "HOMODYNE_FB":
            lam = abs(self.feedback.strength)
            # D[F]/Gamma contributes at (2 lam)^2 / Gamma for the jx generator
            rates += [lam, 4.0 * lam**2 / self.big_gamma]
        return max(rates + [1e-12])


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Dense matrix acting on row-major vectorized density matrices."""

    dim: int
    matrix: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return devectorize(self.matrix @ vectorize(rho), self.dim)


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Row-major flattening of a square matrix into a vector."""
    rho = cmatrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"expected square matrix, got {rho.shape}")
    return rho.reshape(-1).copy()


def devectorize(v: np.ndarray, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != d * d:
        raise DimensionMismatch(f"vector of length {v.size} is not {d}x{d}")
    return v.reshape(d, d).copy()


def left_mul(a: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> a rho."""
    a = cmatrix(a)
    return kron(a, np.eye(a.shape[1], dtype=np.complex128))


def right_mul(b: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> rho b."""
    b = cmatrix(b)
    return kron(np.eye(b.shape[0], dtype=np.complex128), b.T)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> a rho b."""
    return kron(cmatrix(a), cmatrix(b).T)


def hamiltonian_part(h: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> -i [h, rho]."""
    return -1j * (left_mul(h) - right_mul(h))


def dissipator(c: np.ndarray) -> Superoperator:
    """Lindblad dissipator rho -> c rho c^dag - (c^dag c rho + rho c^dag c)/2."""
    c = cmatrix(c)
    if c.shape[0] != c.shape[1]:
        raise DimensionMismatch(f"jump operator must be square, got {c.shape}")
    cdc = dagger(c) @ c
    m = sandwich(c, dagger(c)) - 0.5 * (left_mul(cdc) + right_mul(cdc))
    return Superoperator(dim=c.shape[0], matrix=m)


def _homodyne_feedback_part(f: np.ndarray, jminus: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> -i [F, -i J- rho + i rho J+]."""
    jplus = dagger(jminus)
    return (
        -left_mul(f @ jminus)
        + sandwich(jminus, f)
        + sandwich(f, jplus)
        - right_mul(jplus @ f)
    )


def _adiabatic_operators(symmetric_only: bool) -> dict[str, np.ndarray]:
    ops = hilbert.atomic_ops()
    if symmetric_only:
        p = hilbert.symmetric_isometry()
        ops = {k: dagger(p) @ v @ p for k, v in ops.items()}
    return ops


def _restrict_feedback(op: np.ndarray, symmetric_only: bool) -> np.ndarray:
    if not symmetric_only:
        return op
    p = hilbert.symmetric_isometry()
    restricted = dagger(p) @ op @ p
    # the restriction is only exact when the operator preserves the block
    leak = np.abs(op @ p - p @ restricted).max()
    if leak > 1e-12:
        raise InvalidSpec("feedback operator does not preserve the symmetric subspace")
    return restricted


def build_liouvillian(spec: ModelSpec, symmetric_only: bool = False) -> Superoperator:
    """Assemble the generator of the master equation selected by `spec`.

    With symmetric_only=True the atomic operators are restricted to the
    symmetric triplet |1>,|2>,|3> before assembly, which is exact whenever
    every operator in the model preserves that subspace (collective drive
    and decay, collective-jx feedback).
    """
    spec.validate()
    kind = spec.kind

    if kind == "FULL_NONADIABATIC":
        if symmetric_only:
            return _build_full(spec, symmetric_atoms=True)
        return _build_full(spec, symmetric_atoms=False)

    ops = _adiabatic_operators(symmetric_only)
    jminus, jplus = ops["jminus"], ops["jplus"]
    gamma_terms = spec.gamma1 * dissipator(ops["sigma1"]).matrix
    gamma_terms = gamma_terms + spec.gamma2 * dissipator(ops["sigma2"]).matrix
    drive = hamiltonian_part(spec.omega * (jplus + jminus))
    big_gamma = spec.big_gamma

    if kind == "DICKE":
        m = drive + big_gamma * dissipator(jminus).matrix
    elif kind == "ADIABATIC_SE":
        m = drive + big_gamma * dissipator(jminus).matrix + gamma_terms
    elif kind == "HOMODYNE_FB":
        f = _restrict_feedback(spec.feedback.control_hamiltonian(), symmetric_only)
        m = (
            drive
            + big_gamma * dissipator(jminus).matrix
            + dissipator(f).matrix / big_gamma
            + _homodyne_feedback_part(f, jminus)
            + gamma_terms
        )
    elif kind == "JUMP_FB":
        u = _restrict_feedback(spec.feedback.jump_unitary(), symmetric_only)
        m = drive + big_gamma * dissipator(u @ jminus).matrix + gamma_terms
    elif kind == "JUMP_FB_INEFF":
        u = _restrict_feedback(spec.feedback.jump_unitary(), symmetric_only)
        m = (
            drive
            + big_gamma * spec.eta * dissipator(u @ jminus).matrix
            + big_gamma * (1.0 - spec.eta) * dissipator(jminus).matrix
            + gamma_terms
        )
    else:  # pragma: no cover
        raise InvalidSpec(f"unhandled kind {kind!r}")

    return Superoperator(dim=jminus.shape[0], matrix=m)


def _build_full(spec: ModelSpec, symmetric_atoms: bool) -> Superoperator:
    n = int(spec.fock_cutoff)
    atom = _adiabatic_operators(symmetric_atoms)
    adim = atom["jminus"].shape[0]
    cav = hilbert.cavity_ops(n)
    eye_n = np.eye(n, dtype=np.complex128)

    jm = kron(atom["jminus"], eye_n)
    jp = kron(atom["jplus"], eye_n)
    a = kron(np.eye(adim, dtype=np.complex128), cav["a"])
    # quadrature coupling g/2 so that the eliminated-cavity decay is g^2/kappa
    h = spec.omega * (jp + jm) + 0.5 * spec.g * (
        kron(atom["jplus"], cav["a"]) + kron(atom["jminus"], cav["adag"])
    )

    u_atoms = _restrict_feedback(spec.feedback.jump_unitary(), symmetric_atoms)
    ua = kron(u_atoms, eye_n) @ a

    m = hamiltonian_part(h)
    m = m + spec.kappa * spec.eta * dissipator(ua).matrix
    m = m + spec.kappa * (1.0 - spec.eta) * dissipator(a).matrix
    if spec.gamma1 > 0.0:
        m = m + spec.gamma1 * dissipator(kron(atom["sigma1"], eye_n)).matrix
    if spec.gamma2 > 0.0:
        m = m + spec.gamma2 * dissipator(kron(atom["sigma2"], eye_n)).matrix
    return Superoperator(dim=adim * n, matrix=m)


def with_params(spec: ModelSpec, **params) -> ModelSpec:
    """Copy of `spec` with model or feedback parameters replaced.

    Accepted names: omega, gamma (sets both decay rates), gamma1, gamma2,
    eta, g, kappa, fock_cutoff, lambda/lambda_tilde (feedback strength).
    """
    fb_updates = {}
    model_updates = {}
    for name, value in params.items():
        if name in ("lambda", "lambda_tilde", "strength"):
            fb_updates["strength"] = float(value)
        elif name == "gamma":
            model_updates["gamma1"] = float(value)
            model_updates["gamma2"] = float(value)
        elif name in ("omega", "gamma1", "gamma2", "eta", "g", "kappa", "big_gamma"):
            model_updates[name] = float(value)
        elif name == "fock_cutoff":
            model_updates[name] = int(value)
        else:
            raise InvalidSpec(f"unknown parameter {name!r}")
    feedback = replace(spec.feedback, **fb_updates) if fb_updates else spec.feedback
    return replace(spec, feedback=feedback, **model_updates)
