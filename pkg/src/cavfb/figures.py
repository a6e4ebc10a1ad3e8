"""Parameter presets for the figure-reproduction subcommands.

Each preset is a flat config dict in the same key = value schema the CLI
accepts, so `figure <name>` is exactly `sweep`/`traj` with a canned config
(plus per-figure extras such as the deterministic reference curve emitted
alongside trajectories).

The trajectory-figure feedback angles are read as plain radians
(lambda_reading = "radians"); the alternative reading that divides the
quoted numbers by the collective-decay/spontaneous-emission ratio is kept
available through `fig7_lambda` for comparison runs.
"""
from __future__ import annotations

import math

LAMBDA_READING = "radians"
_RATE_RATIO = 100.0  # collective decay over spontaneous emission in the fig7/8 regimes

FIG7A_LAMBDA_QUOTED = -18.0
FIG7B_LAMBDA_QUOTED = -10.0528


def fig7_lambda(quoted: float, reading: str = LAMBDA_READING) -> float:
    """Feedback rotation angle under either unit reading of the quoted value."""
    if reading == "radians":
        return quoted
    if reading == "per_Gamma":
        return quoted / _RATE_RATIO
    raise ValueError(f"unknown lambda reading {reading!r}")


_SWEEP_81 = {"command": "sweep", "axis1_n": "81", "axis2_n": "81", "populations": "true"}

FIGURES: dict[str, dict[str, str]] = {
    # no-feedback baseline: steady concurrence vs drive for two initial states
    "fig2": {
        "command": "fig2",
        "kind": "DICKE",
        "axis1": "omega_over_Gamma",
        "axis1_min": "0.0",
        "axis1_max": "1.5",
        "axis1_n": "76",
    },
    # collective-jx feedback maps, symmetric subspace, no spontaneous emission
    "fig3a": {
        **_SWEEP_81,
        "kind": "HOMODYNE_FB",
        "generator": "COLLECTIVE_JX",
        "method": "symmetric_subspace",
        "axis1": "omega_over_Gamma",
        "axis1_min": "-1.0",
        "axis1_max": "1.0",
        "axis2": "lambda_over_Gamma",
        "axis2_min": "-1.6",
        "axis2_max": "1.6",
    },
    "fig3c": {
        **_SWEEP_81,
        "kind": "JUMP_FB",
        "generator": "COLLECTIVE_JX",
        "method": "symmetric_subspace",
        "axis1": "omega_over_Gamma",
        "axis1_min": "-1.0",
        "axis1_max": "1.0",
        "axis2": "lambda_tilde",
        "axis2_min": str(-math.pi),
        "axis2_max": str(math.pi),
    },
    # local sigma_x feedback maps
    "fig4a": {
        **_SWEEP_81,
        "kind": "HOMODYNE_FB",
        "generator": "LOCAL_SIGMA_X",
        "target_atom": "1",
        "method": "unique",
        "axis1": "omega_over_Gamma",
        "axis1_min": "-0.3",
        "axis1_max": "0.3",
        "axis2": "lambda_over_Gamma",
        "axis2_min": "-0.1",
        "axis2_max": "0.1",
    },
    "fig4c": {
        **_SWEEP_81,
        "kind": "JUMP_FB",
        "generator": "LOCAL_SIGMA_X",
        "target_atom": "1",
        "method": "unique",
        "axis1": "omega_over_Gamma",
        "axis1_min": "-2.0",
        "axis1_max": "2.0",
        "axis2": "lambda_tilde",
        "axis2_min": "0.0",
        "axis2_max": str(2.0 * math.pi),
    },
    # inefficiency map: maximum concurrence over (drive, angle) per node
    "fig6": {
        "command": "fig6",
        "kind": "JUMP_FB_INEFF",
        "generator": "LOCAL_SIGMA_X",
        "target_atom": "1",
        "axis1": "gamma_over_Gamma",
        "axis1_min": "0.0",
        "axis1_max": "0.04",
        "axis1_n": "21",
        "axis2": "eta",
        "axis2_min": "0.0",
        "axis2_max": "1.0",
        "axis2_n": "21",
        "opt_omega_min": "-1.0",
        "opt_omega_max": "1.0",
        "opt_lambda_tilde_min": "0.0",
        "opt_lambda_tilde_max": str(2.0 * math.pi),
        "opt_coarse_n": "41",
    },
    # quantum trajectories in the full atom-cavity model
    "fig7a": {
        "command": "traj",
        "kind": "FULL_NONADIABATIC",
        "omega_over_gamma": "40.0",
        "g_over_gamma": "200.0",
        "kappa_over_gamma": "400.0",
        "gamma_over_gamma": "1.0",
        "eta": "1.0",
        "generator": "LOCAL_SIGMA_X",
        "target_atom": "1",
        "lambda_tilde": str(fig7_lambda(FIG7A_LAMBDA_QUOTED)),
        "fock_cutoff": "7",
        "t_final": "4.0",
        "sample_dt": "0.005",
        "seed": "0",
        "with_me_curve": "true",
    },
    "fig7b": {
        "command": "traj",
        "kind": "FULL_NONADIABATIC",
        "omega_over_gamma": "20.8",
        "g_over_gamma": "40.0",
        "kappa_over_gamma": "16.0",
        "gamma_over_gamma": "1.0",
        "eta": "1.0",
        "generator": "LOCAL_SIGMA_X",
        "target_atom": "1",
        "lambda_tilde": str(fig7_lambda(FIG7B_LAMBDA_QUOTED)),
        "fock_cutoff": "7",
        "t_final": "6.0",
        "sample_dt": "0.005",
        "seed": "0",
        "with_me_curve": "true",
    },
    # steady concurrence map of the full model at half detection efficiency
    "fig8": {
        "command": "sweep",
        "kind": "FULL_NONADIABATIC",
        "g_over_gamma": "40.0",
        "kappa_over_gamma": "16.0",
        "gamma_over_gamma": "1.0",
        "eta": "0.5",
        "generator": "LOCAL_SIGMA_X",
        "target_atom": "1",
        "fock_cutoff": "6",
        "method": "unique",
        "axis1": "omega_over_gamma",
        "axis1_min": "0.0",
        "axis1_max": "40.0",
        "axis1_n": "41",
        "axis2": "lambda_tilde",
        "axis2_min": str(-2.0 * math.pi),
        "axis2_max": "0.0",
        "axis2_n": "41",
        "populations": "true",
    },
}

# spontaneous-emission variants of the four feedback maps
for _src, _dst in (("fig3a", "fig5a"), ("fig4a", "fig5b"), ("fig3c", "fig5c"), ("fig4c", "fig5d")):
    _cfg = dict(FIGURES[_src])
    _cfg["gamma_over_Gamma"] = "0.01"
    _cfg["method"] = "unique"
    FIGURES[_dst] = _cfg


def figure_config(name: str, overrides: dict[str, str] | None = None) -> dict[str, str]:
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}")
    cfg = dict(FIGURES[name])
    cfg["figure"] = name
    cfg["lambda_reading"] = LAMBDA_READING
    if overrides:
        cfg.update(overrides)
    return cfg
