import numpy as np
import pytest
import scipy.linalg

from cavfb import hilbert
from cavfb.entangle import concurrence, trace_distance
from cavfb.errors import CutoffSaturated, InvalidModel, NonPureInitial
from cavfb.liouville import FeedbackSpec, ModelSpec, build_liouvillian, dissipator
from cavfb.trajectory import (
    effective_hamiltonian,
    ensemble_average,
    hamiltonian_and_channels,
    propagate_me,
    simulate_trajectory,
)


def local_jump_spec(omega=0.5, strength=1.0, **kw):
    fb = FeedbackSpec(measurement="PHOTODETECTION", generator="LOCAL_SIGMA_X",
                      target_atom=1, strength=strength)
    return ModelSpec(kind="JUMP_FB", omega=omega, feedback=fb, **kw)


def full_spec(**kw):
    fb = FeedbackSpec(measurement="PHOTODETECTION", generator="LOCAL_SIGMA_X",
                      target_atom=1, strength=kw.pop("strength", 1.0))
    defaults = dict(kind="FULL_NONADIABATIC", omega=0.3, g=2.0, kappa=4.0,
                    eta=1.0, fock_cutoff=4, unit="gamma")
    defaults.update(kw)
    return ModelSpec(feedback=fb, **defaults)


def test_rejects_models_without_jump_unraveling():
    with pytest.raises(InvalidModel):
        simulate_trajectory(ModelSpec(kind="DICKE", omega=0.5),
                            hilbert.product_ket("gg"), 1.0, 0.1, 0)


def test_rejects_mixed_initial_state():
    with pytest.raises(NonPureInitial):
        simulate_trajectory(local_jump_spec(), np.eye(4, dtype=complex) / 4.0, 1.0, 0.1, 0)


def test_global_dark_state_never_jumps():
    spec = full_spec(omega=0.0)
    psi0 = np.zeros(16, dtype=complex)
    psi0[0] = 1.0  # |gg, vacuum>
    rec = simulate_trajectory(spec, psi0, 2.0, 0.05, seed=5)
    assert rec.jumps == []
    assert np.abs(rec.states - psi0).max() < 1e-12


def test_singlet_is_trajectory_fixed_point():
    spec = local_jump_spec(omega=0.8, strength=1.3)
    ket4 = hilbert.angular_ket(4)
    rec = simulate_trajectory(spec, ket4, 3.0, 0.05, seed=9)
    assert rec.jumps == []
    for psi in rec.states:
        rho = np.outer(psi, psi.conj())
        assert concurrence(rho) == pytest.approx(1.0, abs=1e-7)


def test_states_stay_normalized():
    spec = local_jump_spec(omega=0.7, strength=0.9, gamma1=0.1, gamma2=0.1)
    rec = simulate_trajectory(spec, hilbert.product_ket("gg"), 5.0, 0.05, seed=2)
    norms = np.linalg.norm(rec.states, axis=1)
    assert np.abs(norms - 1.0).max() < 1e-9
    assert len(rec.jumps) > 0  # decay channels must fire eventually


def test_seed_determinism():
    spec = full_spec(omega=1.0, gamma1=0.2, gamma2=0.2, fock_cutoff=8)
    psi0 = np.zeros(32, dtype=complex)
    psi0[0] = 1.0
    a = simulate_trajectory(spec, psi0, 8.0, 0.02, seed=42)
    b = simulate_trajectory(spec, psi0, 8.0, 0.02, seed=42)
    assert np.array_equal(a.states, b.states)
    assert a.jumps == b.jumps
    assert len(a.jumps) > 0
    c = simulate_trajectory(spec, psi0, 8.0, 0.02, seed=43)
    assert a.jumps != c.jumps


def test_norm_decay_rate_matches_channel_weights():
    spec = full_spec(omega=1.0, gamma1=0.3, gamma2=0.1, eta=0.6)
    h, channels = hamiltonian_and_channels(spec)
    heff = effective_hamiltonian(h, channels)
    rng = np.random.default_rng(61)
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    delta = 1e-7
    stepped = scipy.linalg.expm(-1j * heff * delta) @ psi
    rate_fd = (1.0 - float(np.vdot(stepped, stepped).real)) / delta
    rate_channels = sum(float(np.vdot(ch.op @ psi, ch.op @ psi).real) for ch in channels)
    assert rate_fd == pytest.approx(rate_channels, rel=1e-6)


def test_channel_rate_operators_sum_to_heff_antihermitian_part():
    spec = full_spec(omega=0.5, gamma1=0.2, gamma2=0.4, eta=0.3)
    h, channels = hamiltonian_and_channels(spec)
    heff = effective_hamiltonian(h, channels)
    anti = 1j * (heff - heff.conj().T)  # equals sum of c^dag c
    total = sum(ch.rate_operator for ch in channels)
    assert np.abs(anti - total).max() < 1e-12


def test_detected_jump_rate_matches_master_equation():
    # empirical click rate vs Gamma <J+ J-> from the deterministic solution
    spec = local_jump_spec(omega=0.5, strength=1.0)
    gg = hilbert.product_ket("gg")
    t_final, sample_dt, n_traj = 5.0, 0.05, 2000
    counts = []
    for i in range(n_traj):
        rec = simulate_trajectory(spec, gg, t_final, sample_dt, seed=1000 + i)
        counts.append(sum(1 for _, label in rec.jumps if label == "DETECTED_FEEDBACK"))
    counts = np.array(counts, dtype=float)

    L = build_liouvillian(spec)
    t_grid = np.linspace(0.0, t_final, 501)
    rhos = propagate_me(L, np.outer(gg, gg.conj()), t_grid, rate_scale=1.0)
    ops = hilbert.atomic_ops()
    jpjm = ops["jplus"] @ ops["jminus"]
    flux = np.array([np.trace(r @ jpjm).real for r in rhos])
    expected = spec.big_gamma * np.trapezoid(flux, t_grid)

    sem = counts.std(ddof=1) / np.sqrt(n_traj)
    assert abs(counts.mean() - expected) < 3.0 * sem


def test_inefficiency_splits_clicks():
    spec = local_jump_spec(omega=0.5, strength=1.0)
    spec = ModelSpec(kind="JUMP_FB_INEFF", omega=0.5, eta=0.25, feedback=spec.feedback)
    gg = hilbert.product_ket("gg")
    detected = undetected = 0
    for i in range(300):
        rec = simulate_trajectory(spec, gg, 4.0, 0.1, seed=i)
        detected += sum(1 for _, lab in rec.jumps if lab == "DETECTED_FEEDBACK")
        undetected += sum(1 for _, lab in rec.jumps if lab == "UNDETECTED")
    total = detected + undetected
    assert total > 200
    # binomial with p = eta = 0.25
    sigma = np.sqrt(total * 0.25 * 0.75)
    assert abs(detected - 0.25 * total) < 4.0 * sigma


def test_ensemble_single_trajectory_reduces_to_projectors():
    spec = local_jump_spec(omega=0.6, strength=1.1, gamma1=0.05, gamma2=0.05)
    gg = hilbert.product_ket("gg")
    rec = simulate_trajectory(spec, gg, 2.0, 0.1, seed=0)
    ens = ensemble_average(spec, gg, 2.0, 0.1, n_traj=1, base_seed=0)
    expected = np.einsum("ti,tj->tij", rec.states, rec.states.conj())
    assert np.abs(ens.rho_mean - expected).max() < 1e-14


def test_ensemble_stationary_initial_state():
    spec = local_jump_spec(omega=0.6, strength=1.1)
    ket4 = hilbert.angular_ket(4)
    ens = ensemble_average(spec, ket4, 1.0, 0.1, n_traj=5, base_seed=3)
    bell = np.outer(ket4, ket4.conj())
    assert np.abs(ens.rho_mean - bell).max() < 1e-12
    assert np.abs(ens.concurrence - 1.0).max() < 1e-7


def test_ensemble_parallel_is_bitwise_identical():
    spec = local_jump_spec(omega=0.6, strength=1.1, gamma1=0.1, gamma2=0.1)
    gg = hilbert.product_ket("gg")
    serial = ensemble_average(spec, gg, 1.0, 0.1, n_traj=40, base_seed=0, jobs=1)
    parallel = ensemble_average(spec, gg, 1.0, 0.1, n_traj=40, base_seed=0, jobs=2)
    assert np.array_equal(serial.rho_mean, parallel.rho_mean)
    assert np.array_equal(serial.concurrence, parallel.concurrence)


def test_ensemble_mean_approaches_master_equation():
    spec = local_jump_spec(omega=0.5, strength=1.0, gamma1=0.05, gamma2=0.05)
    gg = hilbert.product_ket("gg")
    t_final, dt, n_traj = 6.0, 0.1, 400
    ens = ensemble_average(spec, gg, t_final, dt, n_traj=n_traj, base_seed=0)
    L = build_liouvillian(spec)
    rhos = propagate_me(L, np.outer(gg, gg.conj()), ens.times, rate_scale=1.0)
    for t in range(len(ens.times)):
        assert trace_distance(ens.rho_mean[t], rhos[t]) < 0.08


def test_cutoff_saturation_aborts():
    spec = full_spec(omega=5.0, g=4.0, kappa=1.0, fock_cutoff=2)
    psi0 = np.zeros(8, dtype=complex)
    psi0[0] = 1.0
    with pytest.raises(CutoffSaturated):
        simulate_trajectory(spec, psi0, 5.0, 0.05, seed=0)


def test_propagate_me_single_qubit_decay():
    gamma = 0.7
    sigma = np.array([[0, 1], [0, 0]], dtype=complex)
    L_m = gamma * dissipator(sigma).matrix
    from cavfb.liouville import Superoperator

    L = Superoperator(dim=2, matrix=L_m)
    excited = np.diag([0.0, 1.0]).astype(complex)
    t_grid = np.linspace(0.0, 3.0, 31)
    rhos = propagate_me(L, excited, t_grid, rate_scale=gamma)
    assert np.abs(rhos[:, 1, 1].real - np.exp(-gamma * t_grid)).max() < 1e-8


def test_propagate_me_stationary_input():
    spec = local_jump_spec(omega=0.5, strength=1.0)
    L = build_liouvillian(spec)
    ket4 = hilbert.angular_ket(4)
    bell = np.outer(ket4, ket4.conj())
    rhos = propagate_me(L, bell, np.linspace(0, 5, 11), rate_scale=1.0)
    assert np.abs(rhos - bell).max() < 1e-12


def test_propagate_me_matches_long_time_limit():
    from cavfb.steady import steady_state_from

    L = build_liouvillian(ModelSpec(kind="DICKE", omega=0.38))
    gg = hilbert.product_ket("gg")
    rho0 = np.outer(gg, gg.conj())
    rhos = propagate_me(L, rho0, np.linspace(0.0, 60.0, 61), rate_scale=1.0)
    limit = steady_state_from(L, rho0, rate_scale=1.0)
    assert concurrence(rhos[-1]) == pytest.approx(concurrence(limit), abs=1e-6)
