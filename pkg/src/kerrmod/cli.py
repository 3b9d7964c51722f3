"""Command-line front end: ``kerrmod <command> --config FILE [--workers N] [--seed S] [--out DIR]``.

Configuration files are TOML, conventionally written with flat dotted keys::

    # Fig. 3 parameters
    model.delta = -15
    model.chi0 = 2
    run.n_traj = 3000

A ``manifest.json`` written by a previous run is also accepted as a config,
which reproduces that run exactly.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, analytic, io, lindblad, qsd, semiclassical, wigner
from .errors import ConfigError, InvalidParameterError, KerrmodError
from .model import OscillatorParams

COMMANDS = ("ensemble", "wigner", "analytic", "poincare", "sweep", "oracle-check")

# key -> (type, default); REQUIRED marks keys without a default
REQUIRED = object()
SCHEMA = {
    "model.delta": (float, 0.0),
    "model.chi0": (float, 0.0),
    "model.chi1": (float, 0.0),
    "model.mod_freq_chi": (float, 0.0),
    "model.phase_chi": (float, 0.0),
    "model.f0": (float, 0.0),
    "model.f1": (float, 0.0),
    "model.mod_freq_f": (float, 0.0),
    "model.gamma": (float, 1.0),
    "model.nbar": (float, 0.0),
    "run.n_traj": (int, 1000),
    "run.seed": (int, 0),
    "run.dt": (float, 1e-3),
    "run.t_end": (float, 10.0),
    "run.dim": (int, 40),
    "run.initial_state": (str, "vacuum"),
    "run.sample_dt": (float, 0.1),
    "run.sample_times": (list, None),
    "run.rho_times": (list, []),
    "run.tail_threshold": (float, 1e-6),
    "wigner.source": (str, "ensemble"),
    "wigner.nx": (int, 201),
    "wigner.ny": (int, 201),
    "wigner.half_width": (float, None),
    "wigner.center": (str, "0"),
    "analytic.alpha0": (str, "2"),
    "analytic.chi0": (float, 1.0),
    "analytic.chi1": (float, 0.0),
    "analytic.delta_mod": (float, 0.0),
    "analytic.phase_chi": (float, 0.0),
    "analytic.dim": (int, 40),
    "analytic.times": (list, None),
    "poincare.alpha0": (str, "0"),
    "poincare.n_points": (int, 2000),
    "poincare.t0": (float, 0.0),
    "poincare.transient": (float, 50.0),
    "sweep.f_min": (float, REQUIRED),
    "sweep.f_max": (float, REQUIRED),
    "sweep.n_f": (int, 81),
    "oracle.n_traj": (int, 2000),
    "oracle.sigmas": (float, 3.0),
    "oracle.max_halvings": (int, 0),
}


@dataclass
class RunSpec:
    command: str
    params: OscillatorParams
    trajectory: qsd.TrajectoryConfig
    wigner_grid: tuple
    output_dir: Path
    n_traj: int
    values: dict = field(default_factory=dict)

    def get(self, key):
        return self.values[key]


# --------------------------------------------------------------------------
# parsing


def _flatten(table, prefix=""):
    out = {}
    for key, value in table.items():
        name = prefix + key
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def parse_document(text):
    """Flat ``{dotted.key: raw value}`` mapping from TOML config text or manifest JSON."""
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad manifest JSON: {exc}") from exc
        return dict(doc.get("config", doc))
    try:
        return _flatten(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config syntax: {exc}") from exc


def _coerce(key, value, typ):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}", key=key, kind="type-mismatch")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            raise ConfigError(f"{key} must be an integer, got {value!r}", key=key, kind="type-mismatch")
        return int(value)
    if typ is str:
        if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
            return str(value)
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}", key=key, kind="type-mismatch")
        return value
    if typ is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key} must be a list, got {value!r}", key=key, kind="type-mismatch")
        try:
            return [float(v) for v in value]
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a list of numbers", key=key, kind="type-mismatch")
    raise AssertionError(typ)


def resolve(raw, command):
    """Validate raw keys against the schema and fill defaults."""
    for key in raw:
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key}", key=key, kind="unknown-key")
    values = {}
    for key, (typ, default) in SCHEMA.items():
        section = key.split(".")[0]
        if key in raw:
            values[key] = _coerce(key, raw[key], typ)
        elif default is REQUIRED:
            needed = section == "sweep" and command == "sweep"
            if needed:
                raise ConfigError(f"missing required key {key}", key=key, kind="missing-key")
            values[key] = None
        else:
            values[key] = list(default) if isinstance(default, list) else default
    return values


def _complex(key, text):
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise ConfigError(f"{key} must be a complex number, got {text!r}", key=key, kind="type-mismatch")


def parse_config(text, command="ensemble", output_dir=".", seed=None):
    """Build a validated :class:`RunSpec` from config text."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", key="command")
    raw = parse_document(text)
    if seed is not None:
        raw["run.seed"] = int(seed)
    v = resolve(raw, command)

    model_kwargs = {k.split(".", 1)[1]: v[k] for k in SCHEMA if k.startswith("model.")}
    try:
        params = OscillatorParams(**model_kwargs)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), key=_guess_key(str(exc), "model."), kind=exc.kind) from exc

    sample_times = v["run.sample_times"]
    if sample_times is None:
        n = int(math.floor(v["run.t_end"] / v["run.sample_dt"] + 1e-9))
        sample_times = [round(k * v["run.sample_dt"], 12) for k in range(n + 1)]
    try:
        traj = qsd.TrajectoryConfig(
            dt=v["run.dt"],
            t_end=v["run.t_end"],
            sample_times=tuple(sample_times),
            seed=v["run.seed"],
            initial_state=v["run.initial_state"],
            dim=v["run.dim"],
            tail_threshold=v["run.tail_threshold"],
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), key=_guess_key(str(exc), "run."), kind=exc.kind) from exc
    if v["run.n_traj"] < 1:
        raise ConfigError("run.n_traj must be >= 1", key="run.n_traj")
    for t in v["run.rho_times"]:
        if not 0 <= t <= traj.t_end:
            raise ConfigError(f"run.rho_times entry {t} outside [0, t_end]", key="run.rho_times")

    half = v["wigner.half_width"]
    center = _complex("wigner.center", v["wigner.center"])
    grid = None
    if half is not None:
        grid = (center.real - half, center.real + half, center.imag - half, center.imag + half,
                v["wigner.nx"], v["wigner.ny"])
    if v["wigner.source"] not in ("ensemble", "analytic", "master"):
        raise ConfigError("wigner.source must be ensemble, analytic or master", key="wigner.source")
    if command == "sweep" and v["sweep.f_max"] <= v["sweep.f_min"]:
        raise ConfigError("sweep.f_max must exceed sweep.f_min", key="sweep.f_max")

    return RunSpec(
        command=command,
        params=params,
        trajectory=traj,
        wigner_grid=grid,
        output_dir=Path(output_dir),
        n_traj=v["run.n_traj"],
        values=v,
    )


def _guess_key(message, prefix):
    name = message.split()[0]
    return prefix + name


def load_config(path, command="ensemble", output_dir=".", seed=None):
    return parse_config(Path(path).read_text(), command, output_dir, seed)


# --------------------------------------------------------------------------
# commands


def _analytic_spec(spec):
    v = spec.values
    return analytic.UnitaryKerrSpec(
        alpha0=_complex("analytic.alpha0", v["analytic.alpha0"]),
        chi0=v["analytic.chi0"],
        chi1=v["analytic.chi1"],
        delta_mod=v["analytic.delta_mod"],
        phase_chi=v["analytic.phase_chi"],
        dim=v["analytic.dim"],
    )


def _tag(t):
    return f"{t:.4f}".rstrip("0").rstrip(".") if t is not None else "na"


def _cmd_ensemble(spec, workers):
    out = spec.output_dir
    stats, rhos = qsd.run_ensemble(spec.n_traj, spec.trajectory, spec.params,
                                   spec.values["run.rho_times"], workers=workers)
    io.write_stats(out / "stats.csv", stats)
    files = ["stats.csv"]
    for t, rho in zip(spec.values["run.rho_times"], rhos):
        name = f"rho_t{_tag(t)}.ndjson"
        io.write_density(out / name, rho)
        files.append(name)
    return {"files": files, "n_traj": stats.n_traj}


def _densities_for_wigner(spec, workers):
    v = spec.values
    source = v["wigner.source"]
    if source == "analytic":
        aspec = _analytic_spec(spec)
        times = v["analytic.times"] or [analytic.superposition_time(aspec)]
        return [(t, analytic.unitary_density_matrix(t, aspec)) for t in times], None
    times = v["run.rho_times"]
    if not times:
        raise ConfigError("wigner command needs run.rho_times", key="run.rho_times")
    if source == "master":
        rho0 = lindblad.density_from_state(qsd.initial_vector(spec.trajectory.initial_state, spec.trajectory.dim))
        rhos = lindblad.integrate_master(rho0, sorted(times), spec.params, dt=spec.trajectory.dt)
        by_t = dict(zip(sorted(times), rhos))
        return [(t, by_t[t]) for t in times], None
    stats, rhos = qsd.run_ensemble(spec.n_traj, spec.trajectory, spec.params, times, workers=workers)
    return list(zip(times, rhos)), stats


def _cmd_wigner(spec, workers):
    out = spec.output_dir
    pairs, stats = _densities_for_wigner(spec, workers)
    files = []
    if stats is not None:
        io.write_stats(out / "stats.csv", stats)
        files.append("stats.csv")
    records = []
    for t, rho in pairs:
        g = wigner.wigner_from_rho(rho, spec.wigner_grid, t=t)
        tag = _tag(t)
        io.write_density(out / f"rho_t{tag}.ndjson", rho)
        io.write_wigner_csv(out / f"wigner_t{tag}.csv", g)
        io.write_wigner_matrix(out / f"wigner_t{tag}.dat", g)
        files += [f"rho_t{tag}.ndjson", f"wigner_t{tag}.csv", f"wigner_t{tag}.dat"]
        mn, nv = wigner.negativity(g)
        records.append(io.negativity_record(mn, nv, t))
    (out / "negativity.json").write_text("\n".join(records) + "\n")
    files.append("negativity.json")
    return {"files": files}


def _cmd_analytic(spec, workers):
    out = spec.output_dir
    aspec = _analytic_spec(spec)
    t_sup = analytic.superposition_time(aspec)
    times = spec.values["analytic.times"] or [0.0, t_sup]
    files = []
    summary = {"superposition_time": t_sup, "times": times,
               "phase": [float(analytic.phase_accum(t, aspec)) for t in times]}
    for t in times:
        name = f"rho_t{_tag(t)}.ndjson"
        io.write_density(out / name, analytic.unitary_density_matrix(t, aspec))
        files.append(name)
    io.write_json(out / "analytic.json", summary)
    files.append("analytic.json")
    return {"files": files, "superposition_time": t_sup}


def _cmd_poincare(spec, workers):
    v = spec.values
    sec = semiclassical.poincare_section(
        _complex("poincare.alpha0", v["poincare.alpha0"]), spec.params,
        v["poincare.n_points"], v["poincare.t0"], v["poincare.transient"],
    )
    io.write_csv(spec.output_dir / "poincare.csv", ["x", "y"], sec.points)
    return {"files": ["poincare.csv"], "strobe_period": sec.strobe_period,
            "bounding_box_area": sec.bounding_box_area()}


def _cmd_sweep(spec, workers):
    v = spec.values
    p = spec.params.with_(f1=0.0, chi1=0.0)
    fs = np.linspace(v["sweep.f_min"], v["sweep.f_max"], v["sweep.n_f"])
    rows = []
    for branch in ("up", "down"):
        rows += [(f, i, branch) for f, i in semiclassical.hysteresis_sweep(p, fs, branch)]
    io.write_csv(spec.output_dir / "sweep.csv", ["f", "intensity", "branch"], rows)
    return {"files": ["sweep.csv"]}


def oracle_check(params, cfg, n_traj, sigmas=3.0, workers=None):
    """Compare an ensemble against the master equation at every sample time.

    Returns a report dict with per-time deviations and an overall ``passed``.
    """
    stats, _ = qsd.run_ensemble(n_traj, cfg, params, workers=workers)
    rho0 = lindblad.density_from_state(qsd.initial_vector(cfg.initial_state, cfg.dim))
    rhos = lindblad.integrate_master(rho0, cfg.sample_times, params)
    me_n = np.array([lindblad.expect_number(r)[0] for r in rhos])
    me_n2 = np.array([lindblad.expect_number(r)[1] for r in rhos])
    with np.errstate(invalid="ignore", divide="ignore"):
        me_q = np.where(me_n > 0, (me_n2 - me_n**2 - me_n) / me_n, np.nan)
    dn = np.abs(stats.mean_n - me_n)
    dq = np.abs(stats.q - me_q)
    ok_n = dn <= sigmas * stats.se_n + 1e-12
    valid_q = np.isfinite(me_q) & np.isfinite(stats.q)
    ok_q = ~valid_q | (dq <= sigmas * stats.se_q + 1e-12)
    return {
        "passed": bool(ok_n.all() and ok_q.all()),
        "n_traj": n_traj,
        "sigmas": sigmas,
        "times": list(map(float, stats.times)),
        "mean_n_qsd": stats.mean_n.tolist(),
        "mean_n_me": me_n.tolist(),
        "se_n": stats.se_n.tolist(),
        "q_qsd": [None if not np.isfinite(x) else float(x) for x in stats.q],
        "q_me": [None if not np.isfinite(x) else float(x) for x in me_q],
        "se_q": stats.se_q.tolist(),
        "failures_n": int((~ok_n).sum()),
        "failures_q": int((~ok_q).sum()),
    }, stats


def calibrate_dt(params, cfg, n_traj, sigmas=3.0, max_halvings=3, workers=None):
    """Halve ``cfg.dt`` until :func:`oracle_check` passes or halvings run out.

    Returns ``(report, stats, cfg)`` for the last attempt.
    """
    for attempt in range(max_halvings + 1):
        report, stats = oracle_check(params, cfg, n_traj, sigmas, workers)
        report["dt"] = cfg.dt
        report["halvings"] = attempt
        if report["passed"] or attempt == max_halvings:
            return report, stats, cfg
        cfg = cfg.with_(dt=cfg.dt / 2)


def _cmd_oracle(spec, workers):
    v = spec.values
    report, stats, _ = calibrate_dt(spec.params, spec.trajectory, v["oracle.n_traj"],
                                    v["oracle.sigmas"], v["oracle.max_halvings"], workers)
    io.write_stats(spec.output_dir / "stats.csv", stats)
    io.write_json(spec.output_dir / "oracle.json", report)
    return {"files": ["stats.csv", "oracle.json"], "passed": report["passed"]}


_DISPATCH = {
    "ensemble": _cmd_ensemble,
    "wigner": _cmd_wigner,
    "analytic": _cmd_analytic,
    "poincare": _cmd_poincare,
    "sweep": _cmd_sweep,
    "oracle-check": _cmd_oracle,
}


def manifest(spec):
    config = {}
    for key, value in spec.values.items():
        if value is None:
            continue
        config[key] = value
    config["run.initial_state"] = qsd.format_initial_state(spec.trajectory.initial_state)
    config["run.sample_times"] = list(spec.trajectory.sample_times)
    return {"command": spec.command, "version": __version__, "seed": spec.trajectory.seed,
            "config": config}


def run(spec, workers=None):
    """Execute a run, writing ``manifest.json`` plus command outputs.

    Returns the process exit status (0 on success).  Failures write
    ``error.json`` and a one-line JSON record to stderr.
    """
    out = spec.output_dir
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "manifest.json", manifest(spec))
    try:
        result = _DISPATCH[spec.command](spec, workers)
    except KerrmodError as exc:
        record = exc.to_record()
        io.write_json(out / "error.json", record)
        print(json.dumps(record), file=sys.stderr)
        return 2
    if spec.command == "oracle-check" and not result.get("passed", True):
        print(json.dumps({"command": spec.command, **result}))
        return 1
    print(json.dumps({"command": spec.command, **result}))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="kerrmod", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="config file or manifest.json")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $KERRMOD_WORKERS or 1)")
    parser.add_argument("--seed", type=int, default=None, help="override run.seed")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)
    try:
        spec = load_config(args.config, args.command, args.out, args.seed)
    except (KerrmodError, OSError) as exc:
        record = exc.to_record() if isinstance(exc, KerrmodError) else {"error": "io", "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 2
    workers = args.workers if args.workers is not None else qsd.resolve_workers(None)
    return run(spec, workers)


if __name__ == "__main__":
    sys.exit(main())
