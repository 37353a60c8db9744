"""Command-line front end: simulate, gramian, hum and verify pipelines.

Exit codes: 0 success, 1 numerical failure, 2 invalid configuration,
3 integrability guard (r <= 1/2 with eps = 0), 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controllability import default_state_modes, gramian
from .fracops import ControlSignal, FracParams, IntegrabilityError, mild_solution
from .hum import DEFAULT_STEPS, RankDeficiencyError, regional_error, solve_hum, verify
from .mittag_leffler import MittagLefflerError
from .spectral import Pointwise, Region, Zonal, modal_vector, synthesize

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


_KEYS = {
    "r", "tau", "h", "eps", "tol", "modes", "state_modes", "steps",
    "actuator", "region", "z0", "zd", "phi", "u", "control_csv",
    "reg", "residual_tol", "output_times", "spatial_points", "with_matrix",
    "draws", "seed",
}  # fmt: skip


@dataclass
class ExperimentConfig:
    params: FracParams
    modes: int
    state_modes: int
    steps: int
    actuator: Zonal | Pointwise
    region: Region
    z0: np.ndarray
    zd: np.ndarray
    phi: float | list
    u: float | list
    control_csv: str | None = None
    reg: float | None = None
    residual_tol: float = 5e-2
    output_times: list = field(default_factory=list)
    spatial_points: int = 0
    with_matrix: bool = False
    draws: int = 20
    seed: int = 0


def _modal(entry, n: int, name: str) -> np.ndarray:
    if entry is None or entry == "zero":
        return np.zeros(n)
    if isinstance(entry, str):
        if entry.startswith("mode-"):
            try:
                k = int(entry[5:])
            except ValueError:
                raise ConfigError(f"{name}: bad preset {entry!r}") from None
            if not 1 <= k <= n:
                raise ConfigError(f"{name}: mode index {k} outside 1..{n}")
            v = np.zeros(n)
            v[k - 1] = 1.0
            return v
        raise ConfigError(f"{name}: unknown preset {entry!r} (use 'zero', 'mode-k' or a list)")
    try:
        return modal_vector(entry, n)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _actuator(entry):
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError("actuator: expected an object with a 'kind'")
    kind = entry["kind"]
    extra = set(entry) - {"kind", "beta1", "beta2", "b"}
    if extra:
        raise ConfigError(f"actuator: unknown keys {sorted(extra)}")
    if kind == "zonal":
        return Zonal(float(entry["beta1"]), float(entry["beta2"]))
    if kind == "pointwise":
        return Pointwise(float(entry["b"]))
    raise ConfigError(f"actuator: unknown kind {kind!r}")


def _region(entry):
    if isinstance(entry, dict):
        extra = set(entry) - {"a", "b"}
        if extra:
            raise ConfigError(f"region: unknown keys {sorted(extra)}")
        return Region(float(entry["a"]), float(entry["b"]))
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return Region(float(entry[0]), float(entry[1]))
    raise ConfigError("region: expected {'a': .., 'b': ..} or [a, b]")


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    try:
        params = FracParams(
            r=float(raw["r"]),
            tau=float(raw.get("tau", 1.0)),
            h=float(raw.get("h", 0.1)),
            eps=None if raw.get("eps") is None else float(raw["eps"]),
            tol=float(raw.get("tol", 1e-12)),
        )
        modes = int(raw.get("modes", 15))
        if modes < 1:
            raise ConfigError("modes must be >= 1")
        state_modes = int(raw.get("state_modes") or default_state_modes(modes))
        if state_modes < modes:
            raise ConfigError("state_modes must be >= modes")
        steps = int(raw.get("steps", DEFAULT_STEPS))
        if steps < 1:
            raise ConfigError("steps must be >= 1")
        if "actuator" not in raw or "region" not in raw:
            raise ConfigError("config needs 'actuator' and 'region'")
        times = raw.get("output_times", 11)
        if isinstance(times, int):
            if times < 1:
                raise ConfigError("output_times must be >= 1")
            times = list(np.linspace(0.0, params.tau, times)) if times > 1 else [params.tau]
        reg = raw.get("reg")
        return ExperimentConfig(
            params=params,
            modes=modes,
            state_modes=state_modes,
            steps=steps,
            actuator=_actuator(raw["actuator"]),
            region=_region(raw["region"]),
            z0=_modal(raw.get("z0"), state_modes, "z0"),
            zd=_modal(raw.get("zd"), state_modes, "zd"),
            phi=raw.get("phi", 0.0),
            u=raw.get("u", 0.0),
            control_csv=raw.get("control_csv"),
            reg=None if reg is None else float(reg),
            residual_tol=float(raw.get("residual_tol", 5e-2)),
            output_times=[float(t) for t in times],
            spatial_points=int(raw.get("spatial_points", 0)),
            with_matrix=bool(raw.get("with_matrix", False)),
            draws=int(raw.get("draws", 20)),
            seed=int(raw.get("seed", 0)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        if isinstance(exc, KeyError):
            msg = f"missing key {msg!r}"
        raise ConfigError(str(msg)) from None


# {{{ output helpers


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj):
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (np.floating, float)):
            v = float(v)
            return v if math.isfinite(v) else str(v)
        if isinstance(v, np.integer):
            return int(v)
        return v

    path.write_text(json.dumps(clean(obj), indent=2, sort_keys=True) + "\n")


def read_control_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


# }}}


def _signal(cfg: ExperimentConfig) -> ControlSignal:
    p = cfg.params
    if cfg.control_csv:
        t, u = read_control_csv(cfg.control_csv)
        hist = ControlSignal.uniform(p, t.size - 1, phi=cfg.phi)
        if not math.isclose(t[-1], p.horizon, rel_tol=1e-12):
            raise ConfigError(f"control_csv ends at {t[-1]}, expected tau - h = {p.horizon}")
        return ControlSignal(t, u, hist.history_grid, hist.history)
    return ControlSignal.uniform(p, cfg.steps, u=cfg.u, phi=cfg.phi)


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    sig = _signal(cfg)
    traj = mild_solution(cfg.params, cfg.z0, cfg.actuator, sig, cfg.output_times)
    n = cfg.state_modes
    write_csv(
        out / "trajectory.csv",
        ["t"] + [f"mode_{i}" for i in range(1, n + 1)],
        (np.concatenate([[t], z]) for t, z in zip(traj.times, traj.states)),
    )
    if cfg.spatial_points > 0:
        xs = np.linspace(0.0, 1.0, cfg.spatial_points)
        rows = []
        for t, z in zip(traj.times, traj.states):
            rows.extend((t, x, v) for x, v in zip(xs, synthesize(z, xs)))
        write_csv(out / "field.csv", ["t", "x", "z"], rows)
    final = mild_solution(cfg.params, cfg.z0, cfg.actuator, sig, [cfg.params.tau]).states[0]
    write_json(
        out / "simulate.json",
        {"residual": regional_error(final, cfg.zd, cfg.region), "final_state": list(final)},
    )
    return EXIT_OK


def cmd_gramian(cfg: ExperimentConfig, out: Path) -> int:
    rep = gramian(cfg.params, cfg.actuator, cfg.region, cfg.modes, cfg.state_modes)
    write_json(out / "gramian.json", rep.to_dict(with_matrix=cfg.with_matrix))
    return EXIT_OK


def _solve(cfg: ExperimentConfig):
    return solve_hum(
        cfg.params,
        cfg.actuator,
        cfg.region,
        cfg.z0,
        cfg.zd,
        cfg.modes,
        cfg.reg,
        steps=cfg.steps,
        state_modes=cfg.state_modes,
        phi=cfg.phi,
    )


def _feasibility_note(sol, cfg) -> str | None:
    if sol.residual <= cfg.residual_tol:
        return None
    return (
        "residual above tolerance: the target has components the actuator cannot "
        "reach on this region at this truncation (or regularization is too strong)"
    )


def cmd_hum(cfg: ExperimentConfig, out: Path) -> int:
    sol = _solve(cfg)
    write_csv(out / "control.csv", ["t", "u_star"], zip(sol.control.grid, sol.control.u))
    summary = sol.summary()
    summary["note"] = _feasibility_note(sol, cfg)
    write_json(out / "summary.json", summary)
    return EXIT_OK if sol.residual <= cfg.residual_tol else EXIT_VERIFY


def cmd_verify(cfg: ExperimentConfig, out: Path) -> int:
    sol = _solve(cfg)
    rec = verify(
        cfg.params, cfg.actuator, cfg.region, cfg.z0, sol, cfg.zd, draws=cfg.draws, seed=cfg.seed
    )
    write_csv(out / "control.csv", ["t", "u_star"], zip(sol.control.grid, sol.control.u))
    write_json(
        out / "verify.json",
        {
            "residual": rec.residual,
            "energy": rec.energy,
            "perturbed_energies": list(rec.perturbed_energies),
            "min_energy_gap": rec.min_energy_gap,
            "row_space_defect": rec.row_space_defect,
            "violation": rec.violation,
            "note": _feasibility_note(sol, cfg),
        },
    )
    ok = rec.residual <= cfg.residual_tol and not rec.violation
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "simulate": cmd_simulate,
    "gramian": cmd_gramian,
    "hum": cmd_hum,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fraccontrol",
        description="Delayed fractional diffusion: simulation, regional Gramian and HUM control.",
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON experiment configuration")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--modes", type=int, help="override the number of modes N")
    ap.add_argument("--steps", type=int, help="override the number of time steps M")
    ap.add_argument("--reg", type=float, help="override the Tikhonov parameter")
    ap.add_argument("--eps", type=float, help="override the cutoff near the kernel singularity")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"modes": args.modes, "steps": args.steps, "reg": args.reg, "eps": args.eps}
    try:
        cfg = load_config(args.config, overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except IntegrabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except RankDeficiencyError as exc:
        # checked before ValueError, which LinAlgError subclasses
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MittagLefflerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
