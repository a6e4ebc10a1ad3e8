"""Command-line front end: steady states, concurrence sweeps, quantum
trajectories, and figure-reproduction presets, all emitting CSV.

Config files are plain text, one `key = value` per line with `#` comments;
command-line `key=value` arguments override file values.  Rates carry an
explicit unit suffix (`_over_Gamma` for the adiabatic models, `_over_gamma`
for the full atom-cavity model); unknown keys are rejected.  Every output
file starts with a `# key = value` provenance block that reconstructs the
run: re-parsing the header and re-running the command reproduces the file
byte for byte (given the same seed).

Exit codes: 0 success, 2 config error or unknown figure, 3 degenerate
steady state without a from_state fallback, 4 Fock cutoff saturated.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, hilbert
from .entangle import concurrence, diagnostics
from .errors import CutoffSaturated, DegenerateSteadyState, InvalidSpec
from .figures import FIGURES, figure_config
from .hilbert import partial_trace_cavity
from .liouville import (
    _KIND_MEASUREMENT,
    MODEL_KINDS,
    FeedbackSpec,
    ModelSpec,
    build_liouvillian,
    with_params,
)
from .sweep import Axis, solve_node, sweep2d, maximize_concurrence
from .steady import steady_state_unique
from .trajectory import RNG_NAME, propagate_me, simulate_trajectory

PRODUCT_STATES = ("gg", "ge", "eg", "ee", "bell4")

# key -> (parser, default); defaults of None mean "not set"
_MODEL_KEYS = {
    "kind": str,
    "eta": float,
    "measurement": str,
    "generator": str,
    "target_atom": int,
    "fock_cutoff": int,
    "omega_over_Gamma": float,
    "gamma_over_Gamma": float,
    "gamma1_over_Gamma": float,
    "gamma2_over_Gamma": float,
    "lambda_over_Gamma": float,
    "omega_over_gamma": float,
    "g_over_gamma": float,
    "kappa_over_gamma": float,
    "gamma_over_gamma": float,
    "gamma1_over_gamma": float,
    "gamma2_over_gamma": float,
    "lambda_tilde": float,
}
_RUN_KEYS = {
    "command": str,
    "figure": str,
    "from_state": str,
    "method": str,
    "populations": str,
    "axis1": str,
    "axis1_min": float,
    "axis1_max": float,
    "axis1_n": int,
    "axis2": str,
    "axis2_min": float,
    "axis2_max": float,
    "axis2_n": int,
    "t_final": float,
    "sample_dt": float,
    "seed": int,
    "jobs": int,
    "with_me_curve": str,
    "lambda_reading": str,
    "opt_omega_min": float,
    "opt_omega_max": float,
    "opt_lambda_tilde_min": float,
    "opt_lambda_tilde_max": float,
    "opt_coarse_n": int,
}
KNOWN_KEYS = {**_MODEL_KEYS, **_RUN_KEYS}

# config axis/rate key -> with_params parameter name
_AXIS_PARAMS = {
    "omega_over_Gamma": "omega",
    "gamma_over_Gamma": "gamma",
    "gamma1_over_Gamma": "gamma1",
    "gamma2_over_Gamma": "gamma2",
    "lambda_over_Gamma": "lambda",
    "omega_over_gamma": "omega",
    "gamma_over_gamma": "gamma",
    "gamma1_over_gamma": "gamma1",
    "gamma2_over_gamma": "gamma2",
    "g_over_gamma": "g",
    "kappa_over_gamma": "kappa",
    "lambda_tilde": "lambda_tilde",
    "eta": "eta",
}


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; `#` starts a comment; unknown keys rejected."""
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, value = (part.strip() for part in pair.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        cfg[key] = value
    return cfg


def _get(cfg: dict[str, str], key: str, default=None):
    if key not in cfg:
        return default
    try:
        return KNOWN_KEYS[key](cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {cfg[key]!r}") from exc


def _get_bool(cfg: dict[str, str], key: str, default: bool = False) -> bool:
    raw = cfg.get(key)
    if raw is None:
        return default
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"bad boolean for {key}: {raw!r}")


def spec_from_config(cfg: dict[str, str]) -> ModelSpec:
    kind = _get(cfg, "kind")
    if kind is None:
        raise ConfigError("config needs a model kind")
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}")
    full = kind == "FULL_NONADIABATIC"
    unit = "gamma" if full else "Gamma"
    wrong = "Gamma" if full else "gamma"
    for key in cfg:
        if key.endswith(f"_over_{wrong}"):
            raise ConfigError(f"{key} uses the wrong rate unit for kind {kind}")

    gamma_both = _get(cfg, f"gamma_over_{unit}")
    gamma_default = 1.0 if (full and gamma_both is None) else (gamma_both or 0.0)
    gamma1 = _get(cfg, f"gamma1_over_{unit}", gamma_default)
    gamma2 = _get(cfg, f"gamma2_over_{unit}", gamma_default)

    measurement = _get(cfg, "measurement", _KIND_MEASUREMENT[kind])
    if measurement == "HOMODYNE":
        strength = _get(cfg, "lambda_over_Gamma", 0.0)
    elif measurement == "PHOTODETECTION":
        strength = _get(cfg, "lambda_tilde", 0.0)
    else:
        strength = 0.0
    feedback = FeedbackSpec(
        measurement=measurement,
        generator=_get(cfg, "generator", "COLLECTIVE_JX"),
        target_atom=_get(cfg, "target_atom", 1),
        strength=strength,
    )
    try:
        return ModelSpec(
            kind=kind,
            omega=_get(cfg, f"omega_over_{unit}", 0.0),
            big_gamma=1.0,
            g=_get(cfg, "g_over_gamma", 0.0) if full else 0.0,
            kappa=_get(cfg, "kappa_over_gamma", 0.0) if full else 0.0,
            gamma1=gamma1,
            gamma2=gamma2,
            eta=_get(cfg, "eta", 1.0),
            feedback=feedback,
            fock_cutoff=_get(cfg, "fock_cutoff") if full else None,
            unit=unit,
        )
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from exc


def initial_ket(label: str, spec: ModelSpec) -> np.ndarray:
    if label not in PRODUCT_STATES:
        raise ConfigError(f"unknown from_state {label!r}")
    ket = hilbert.angular_ket(4) if label == "bell4" else hilbert.product_ket(label)
    if spec.kind == "FULL_NONADIABATIC":
        vac = np.zeros(int(spec.fock_cutoff), dtype=np.complex128)
        vac[0] = 1.0
        ket = np.kron(ket, vac)
    return ket


def initial_state(cfg: dict[str, str], spec: ModelSpec) -> np.ndarray | None:
    label = cfg.get("from_state")
    if label is None:
        return None
    ket = initial_ket(label, spec)
    return np.outer(ket, ket.conj())


def _axis_from_config(cfg: dict[str, str], which: str, spec: ModelSpec) -> Axis:
    name = _get(cfg, which)
    if name is None:
        raise ConfigError(f"sweep needs {which}")
    if name not in _AXIS_PARAMS:
        raise ConfigError(f"{which}={name!r} is not a sweepable parameter")
    if name.endswith("_over_Gamma") and spec.unit != "Gamma":
        raise ConfigError(f"{name} uses the wrong rate unit for kind {spec.kind}")
    if name.endswith("_over_gamma") and spec.unit != "gamma":
        raise ConfigError(f"{name} uses the wrong rate unit for kind {spec.kind}")
    lo = _get(cfg, f"{which}_min")
    hi = _get(cfg, f"{which}_max")
    n = _get(cfg, f"{which}_n")
    if lo is None or hi is None or n is None or n < 1:
        raise ConfigError(f"{which} needs {which}_min/{which}_max/{which}_n")
    return Axis(name=_AXIS_PARAMS[name], values=np.linspace(lo, hi, n), unit=spec.unit)


# ---------------------------------------------------------------- CSV I/O


def format_number(x) -> str:
    """Decimal with 9 significant digits (used for all data cells)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x != x:  # nan
        return "nan"
    return f"{float(x):.9g}"


def write_csv(path, meta: dict[str, str], columns: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in meta.items():
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else format_number(cell) for cell in row) + "\n")


def read_csv_header(path) -> dict[str, str]:
    """Parse the `# key = value` provenance block of an output file."""
    meta: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                key, value = (part.strip() for part in body.split("=", 1))
                meta[key] = value
    return meta


def config_from_header(meta: dict[str, str]) -> dict[str, str]:
    """Config dict reconstructed from a provenance block (round-trip)."""
    return {k: v for k, v in meta.items() if k in KNOWN_KEYS}


def _meta_block(cfg: dict[str, str], extra: dict[str, str] | None = None) -> dict[str, str]:
    meta = {k: cfg[k] for k in sorted(cfg)}
    meta["code_version"] = __version__
    meta["rng"] = RNG_NAME
    if extra:
        meta.update(extra)
    return meta


# ---------------------------------------------------------------- commands


def cmd_steady(cfg: dict[str, str], out_path) -> int:
    spec = spec_from_config(cfg)
    rho0 = initial_state(cfg, spec)
    method = _get(cfg, "method", "from_state" if rho0 is not None else "unique")
    try:
        rho, status = solve_node(spec, method=method, rho0=rho0, fallback=rho0 is not None)
    except DegenerateSteadyState:
        print("error: degenerate steady state; set from_state to pick a branch", file=sys.stderr)
        return 3
    diag = diagnostics(rho)
    unit = spec.unit
    columns = [
        f"omega_over_{unit}",
        "feedback_strength",
        f"gamma1_over_{unit}",
        f"gamma2_over_{unit}",
        "eta",
        "concurrence",
        "p11",
        "p22",
        "p33",
        "p44",
        "purity",
        "status",
    ]
    row = (
        spec.omega,
        spec.feedback.strength,
        spec.gamma1,
        spec.gamma2,
        spec.eta,
        diag.concurrence,
        *diag.populations,
        diag.purity,
        status,
    )
    write_csv(out_path, _meta_block(cfg), columns, [row])
    return 0


def cmd_sweep(cfg: dict[str, str], out_path, jobs: int = 1) -> int:
    spec = spec_from_config(cfg)
    ax1 = _axis_from_config(cfg, "axis1", spec)
    ax2 = _axis_from_config(cfg, "axis2", spec)
    method = _get(cfg, "method", "unique")
    rho0 = initial_state(cfg, spec)
    want_pops = _get_bool(cfg, "populations", True)
    result = sweep2d(spec, ax1, ax2, method=method, rho0=rho0, jobs=jobs, want_populations=want_pops)
    name1, name2 = _get(cfg, "axis1"), _get(cfg, "axis2")
    columns = [name1, name2, "concurrence"]
    if want_pops:
        columns += ["p11", "p22", "p33", "p44"]
    columns.append("status")
    rows = []
    for i, v1 in enumerate(ax1.values):
        for j, v2 in enumerate(ax2.values):
            row = [v1, v2, result.concurrence[i, j]]
            if want_pops:
                row += list(result.populations[i, j])
            row.append(str(result.status[i, j]))
            rows.append(tuple(row))
    extra = {
        "max_concurrence": format_number(result.max_concurrence),
        "argmax": ",".join(format_number(v) for v in result.argmax()),
    }
    write_csv(out_path, _meta_block(cfg, extra), columns, rows)
    return 0


def cmd_traj(cfg: dict[str, str], out_path, jobs: int = 1) -> int:
    spec = spec_from_config(cfg)
    seed = _get(cfg, "seed", 0)
    t_final = _get(cfg, "t_final", 4.0)
    sample_dt = _get(cfg, "sample_dt", 0.005)
    label = cfg.get("from_state", "gg")
    psi0 = initial_ket(label, spec)
    rho0 = np.outer(psi0, psi0.conj())
    try:
        rec = simulate_trajectory(spec, psi0, t_final, sample_dt, seed)
    except CutoffSaturated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    full = spec.kind == "FULL_NONADIABATIC"
    n = int(spec.fock_cutoff) if full else None
    num_op = hilbert.embed_cavity(hilbert.cavity_ops(n)["num"]) if full else None
    rows = []
    for t, psi in zip(rec.times, rec.states):
        rho = np.outer(psi, psi.conj())
        atoms = partial_trace_cavity(rho, n) if full else rho
        photon = float(np.trace(rho @ num_op).real) if full else float("nan")
        rows.append((t, concurrence(atoms), photon, ""))
    for t, channel in rec.jumps:
        rows.append((t, "", "", channel))
    rows.sort(key=lambda r: (float(r[0]), 1 if r[3] else 0))
    meta = _meta_block(cfg, {"n_jumps": str(len(rec.jumps))})
    write_csv(out_path, meta, ["time", "concurrence", "mean_photon_number", "jump_channel"], rows)

    if _get_bool(cfg, "with_me_curve", False):
        me_path = Path(str(out_path)).with_suffix("")
        me_path = me_path.parent / (me_path.name + "_me.csv")
        L = build_liouvillian(spec)
        t_grid = np.arange(0.0, t_final + 1e-12, sample_dt)
        rhos = propagate_me(L, rho0, t_grid, rate_scale=spec.rate_scale())
        me_rows = []
        for t, rho in zip(t_grid, rhos):
            atoms = partial_trace_cavity(rho, n) if full else rho
            photon = float(np.trace(rho @ num_op).real) if full else float("nan")
            me_rows.append((t, concurrence(atoms), photon))
        write_csv(me_path, _meta_block(cfg, {"curve": "master_equation_rk4"}),
                  ["time", "concurrence", "mean_photon_number"], me_rows)
    return 0


def _cmd_fig2(cfg: dict[str, str], out_path) -> int:
    spec = spec_from_config(cfg)
    ax = _axis_from_config(cfg, "axis1", spec)
    rows = []
    for omega in ax.values:
        node = with_params(spec, omega=float(omega))
        row = [omega]
        for label in ("ge", "gg"):
            rho0 = initial_state({**cfg, "from_state": label}, node)
            rho, _ = solve_node(node, method="from_state", rho0=rho0)
            row.append(concurrence(rho))
        rows.append(tuple(row))
    write_csv(out_path, _meta_block(cfg),
              [_get(cfg, "axis1"), "concurrence_from_ge", "concurrence_from_gg"], rows)
    return 0


def _cmd_fig6(cfg: dict[str, str], out_path, jobs: int = 1) -> int:
    spec = spec_from_config(cfg)
    ax1 = _axis_from_config(cfg, "axis1", spec)
    ax2 = _axis_from_config(cfg, "axis2", spec)
    bounds_om = (_get(cfg, "opt_omega_min", -1.0), _get(cfg, "opt_omega_max", 1.0))
    bounds_lt = (_get(cfg, "opt_lambda_tilde_min", 0.0), _get(cfg, "opt_lambda_tilde_max", 2.0 * np.pi))
    coarse_n = _get(cfg, "opt_coarse_n", 41)
    rows = []
    for v1 in ax1.values:
        for v2 in ax2.values:
            node = with_params(spec, **{ax1.name: float(v1), ax2.name: float(v2)})
            best = maximize_concurrence(
                node, "omega", bounds_om, "lambda_tilde", bounds_lt,
                coarse=(coarse_n, coarse_n), jobs=jobs,
            )
            rows.append(
                (v1, v2, best["best_concurrence"],
                 best["best_params"]["omega"], best["best_params"]["lambda_tilde"])
            )
    write_csv(out_path, _meta_block(cfg),
              [_get(cfg, "axis1"), _get(cfg, "axis2"), "max_concurrence",
               "best_omega", "best_lambda_tilde"], rows)
    return 0


def run_command(cfg: dict[str, str], out_path, jobs: int = 1) -> int:
    command = cfg.get("command")
    if command == "steady":
        return cmd_steady(cfg, out_path)
    if command == "sweep":
        return cmd_sweep(cfg, out_path, jobs)
    if command == "traj":
        return cmd_traj(cfg, out_path, jobs)
    if command == "fig2":
        return _cmd_fig2(cfg, out_path)
    if command == "fig6":
        return _cmd_fig6(cfg, out_path, jobs)
    raise ConfigError(f"unknown command {command!r}")


def cmd_figure(name: str, overrides: dict[str, str], out_path, jobs: int = 1) -> int:
    try:
        cfg = figure_config(name, overrides)
    except KeyError:
        print(f"error: unknown figure {name!r}; known: {', '.join(sorted(FIGURES))}", file=sys.stderr)
        return 2
    return run_command(cfg, out_path, jobs)


# ---------------------------------------------------------------- entry


def _load_config(args) -> dict[str, str]:
    cfg: dict[str, str] = {}
    if args.config:
        cfg.update(parse_config_text(Path(args.config).read_text(encoding="utf-8")))
    cfg.update(parse_overrides(args.overrides))
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavfb",
        description="Steady-state entanglement of two atoms in a damped cavity "
        "under direct measurement-based feedback",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
        ("steady", "one steady state, one CSV row"),
        ("sweep", "2-D steady-state concurrence grid"),
        ("traj", "single quantum trajectory"),
        ("figure", "figure-reproduction presets"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name == "figure":
            p.add_argument("name", help=f"one of: {', '.join(sorted(FIGURES))}")
        p.add_argument("overrides", nargs="*", help="key=value config overrides")
        p.add_argument("--config", help="config file (key = value lines)")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args)
        if args.subcommand == "figure":
            return cmd_figure(args.name, cfg, args.out, args.jobs)
        cfg["command"] = args.subcommand
        return run_command(cfg, args.out, args.jobs)
    except (ConfigError, InvalidSpec) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateSteadyState:
        print("error: degenerate steady state; set from_state to pick a branch", file=sys.stderr)
        return 3
    except CutoffSaturated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
