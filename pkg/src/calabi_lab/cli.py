"""Command line entry points.

    calabi-lab flow run --config cfg.json --out outdir
    calabi-lab flow fit-decay trajectory.csv --tail-fraction 0.5
    calabi-lab functionals eval --field field.json
    calabi-lab fs sweep --p 1,1.5 --lambda 1,10,100 --out fs.csv
    calabi-lab lelong probe --gamma 1 --sigma 0.015625 --radii 1,0.5,0.25 --out lelong.csv

Floats are written with ``repr`` (shortest round-trip), so identical inputs
give byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__, fields, flow, functionals, regularity
from . import fubini_study as fs
from .errors import InsufficientData, NotKahler, QuadratureNotConverged
from .geometry import GeometryConfig, zero_field

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MATH = 3
EXIT_DATA = 4
EXIT_QUADRATURE = 5

DEFAULT_PROBE_RADII = (1.0, 0.5, 0.25)


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}") from exc


# ---------------------------------------------------------------- config

def _geometry(d: dict) -> GeometryConfig:
    allowed = {"backend", "grid_n", "period", "polytope_length", "n"}
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown geometry keys {sorted(extra)}")
    kw = dict(d)
    if "period" in kw and isinstance(kw["period"], str):
        # "2pi" is accepted as a convenience
        if kw["period"].replace(" ", "") != "2pi":
            raise ConfigError(f"bad period {kw['period']!r}")
        kw["period"] = 2 * math.pi
    return GeometryConfig(**kw)


def _initial(geom: GeometryConfig, d: dict, base: Path):
    kind = d.get("kind", "zero")
    if kind == "zero":
        return zero_field(geom)
    if kind == "modes":
        if geom.backend != "torus":
            raise ConfigError("'modes' initial data is torus only")
        return fields.trig_field(geom, [tuple(m) for m in d["modes"]])
    if kind == "random":
        if geom.backend != "torus":
            raise ConfigError("'random' initial data is torus only")
        return fields.random_kahler_field(
            geom, int(d["seed"]), float(d.get("min_u", fields.RANDOM_MIN_U))
        )
    if kind == "field":
        fld = fields.load_field(base / d["path"])
        if fld.geometry != geom:
            raise ConfigError("field file geometry differs from the configured geometry")
        return fld
    if kind == "toric_poly":
        if geom.backend != "toric":
            raise ConfigError("'toric_poly' initial data is toric only")
        return fields.toric_polynomial(geom, d["coeffs"])
    raise ConfigError(f"unknown initial kind {kind!r}")


def load_run_config(path) -> tuple[flow.FlowConfig, dict, dict]:
    """Parse and validate a flow config file.

    Returns the FlowConfig, the probe settings and the resolved config dict
    (hashed into the manifest).  Any problem raises ConfigError.
    """
    path = Path(path)
    try:
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(raw) - {"geometry", "initial", "flow", "probe", "fit"}
        if extra:
            raise ConfigError(f"unknown top-level keys {sorted(extra)}")
        geom = _geometry(raw.get("geometry", {}))
        initial = _initial(geom, raw.get("initial", {"kind": "zero"}), path.parent)
        flow_kw = dict(raw.get("flow", {}))
        cfg = flow.FlowConfig(geometry=geom, initial=initial, **flow_kw)
        probe = dict(raw.get("probe", {}))
        fit = dict(raw.get("fit", {}))
        tail = float(fit.get("tail_fraction", 0.5))
        if not (0 < tail <= 1):
            raise ConfigError("fit.tail_fraction must lie in (0, 1]")
        probe_cfg = None
        if geom.backend == "torus":
            P = geom.period
            probe_cfg = regularity.ProbeConfig(
                centers=[tuple(map(float, c)) for c in probe.get("centers", [[P / 2, P / 2]])],
                radii=[float(r) for r in probe.get("radii", DEFAULT_PROBE_RADII)],
                epsilon=float(probe.get("epsilon", cfg.epsilon_probe)),
            )
            if max(probe_cfg.radii) >= P / 2:
                raise ConfigError("probe radii must be below half the period")
    except ConfigError:
        raise
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc
    resolved = {
        "geometry": geom.to_dict(),
        "initial": raw.get("initial", {"kind": "zero"}),
        "flow": {k: getattr(cfg, k) for k in (
            "dt_init", "dt_max", "t_max", "stop_calabi_tol", "stabilization",
            "monitor_every", "epsilon_probe", "k_threshold", "dt_growth", "dt_min_factor")},
        "probe": None if probe_cfg is None else {
            "centers": [list(c) for c in probe_cfg.centers],
            "radii": list(probe_cfg.radii),
            "epsilon": probe_cfg.epsilon,
        },
        "fit": {"tail_fraction": tail},
    }
    return cfg, {"probe": probe_cfg, "tail_fraction": tail}, resolved


def config_digest(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------- commands

def cmd_flow_run(config_path, out_dir) -> int:
    try:
        cfg, extras, resolved = load_run_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = extras["probe"]
    probe_rows = []
    lelong_final = {}

    def on_record(state):
        if probe is None:
            return
        rep = regularity.epsilon_report(state.field, probe)
        for row in rep.rows:
            probe_rows.append([state.t] + regularity.probe_row_values(row))
        lelong_final.clear()
        for (x, y), est in rep.lelong.items():
            lelong_final[f"{x!r},{y!r}"] = est.extrapolated

    start = time.perf_counter()
    traj = flow.run(cfg, on_record=on_record)
    wall = time.perf_counter() - start

    written = ["trajectory.csv", "summary.json"]
    rows = [[getattr(r, c) for c in flow.TRAJECTORY_COLUMNS] for r in traj.records]
    _atomic_write(out / "trajectory.csv", _csv_text(flow.TRAJECTORY_COLUMNS, rows))
    if probe is not None:
        _atomic_write(
            out / "regularity.csv", _csv_text(("t",) + regularity.PROBE_COLUMNS, probe_rows)
        )
        written.append("regularity.csv")

    try:
        decay = flow.fit_decay(traj, extras["tail_fraction"]).to_dict()
    except InsufficientData as exc:
        decay = {"rate": None, "r_squared": None, "window": None, "error": str(exc)}
    k = cfg.k_threshold
    summary = {
        "terminal_status": traj.terminal_status,
        "message": traj.message,
        "steps": traj.steps,
        "n_records": len(traj.records),
        "final_t": traj.records[-1].t if traj.records else None,
        "final_report": None if traj.final_state is None else traj.final_state.report.to_dict(),
        "decay_fit": decay,
        "k_threshold": k,
        "k_monitor": None if (k is None or not traj.records) else {
            "sup_s_below_k": bool(max(r.sup_s for r in traj.records) < k),
            "aubin_I_below_k": bool(max(r.aubin_I for r in traj.records) < k),
        },
        "properness_scatter": [[r.aubin_I, r.mabuchi] for r in traj.records],
        "lelong_final": lelong_final,
        "wall_time_s": wall,
        "manifest": {
            "command": "flow run",
            "config_digest": config_digest(resolved),
            "artifact_version": __version__,
            "seed": int(resolved["initial"].get("seed", 0)) if isinstance(resolved["initial"], dict) else 0,
            "outputs": written,
        },
    }
    _atomic_write(out / "summary.json", _json_text(summary))
    if traj.terminal_status in (flow.NOT_KAHLER, flow.STEP_FAILURE):
        print(f"flow ended with {traj.terminal_status}: {traj.message}", file=sys.stderr)
        return EXIT_MATH
    print(json.dumps({"terminal_status": traj.terminal_status, "decay_fit": decay}))
    return EXIT_OK


def cmd_fit_decay(csv_path, tail_fraction: float) -> int:
    try:
        with open(csv_path, newline="") as fh:
            reader = csv.DictReader(fh)
            cols = reader.fieldnames or []
            missing = [c for c in ("t", "calabi_energy") if c not in cols]
            if missing:
                print(f"missing columns {missing}", file=sys.stderr)
                return EXIT_CONFIG
            data = [(float(r["t"]), float(r["calabi_energy"])) for r in reader]
    except (OSError, ValueError) as exc:
        print(f"cannot read {csv_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        t, e = (np.array(c) for c in zip(*data)) if data else (np.array([]), np.array([]))
        fit = flow.fit_decay_series(t, e, tail_fraction)
    except InsufficientData as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    d = fit.to_dict()
    print(json.dumps({"rate": d["rate"], "r_squared": d["r_squared"], "window": d["window"]}))
    return EXIT_OK


def cmd_functionals_eval(field_path) -> int:
    try:
        fld = fields.load_field(field_path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"cannot parse field: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = functionals.report(fld)
    except NotKahler as exc:
        print(f"not Kähler: {exc}", file=sys.stderr)
        return EXIT_MATH
    residual = abs(rep.energy_E - (rep.aubin_I - functionals.potential_mean(fld)))
    out = rep.to_dict()
    out["identity_residual"] = residual
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_fs_sweep(p_list, lambda_list, out_csv) -> int:
    if not p_list or not lambda_list:
        print("empty parameter list", file=sys.stderr)
        return EXIT_CONFIG
    bad = [p for p in p_list if not (0 < p <= 2)] + [lam for lam in lambda_list if lam < 1]
    if bad:
        print(f"invalid parameters {bad}: need 0 < p <= 2 and lambda >= 1", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    try:
        for p in p_list:
            for lam in lambda_list:
                r = fs.sweep_row(lam, p)
                rows.append([r[c] for c in fs.SWEEP_COLUMNS])
    except QuadratureNotConverged as exc:
        print(f"quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    _atomic_write(Path(out_csv), _csv_text(fs.SWEEP_COLUMNS, rows))
    return EXIT_OK


LELONG_COLUMNS = ("x", "y", "r", "estimate", "closed_form")


def cmd_lelong_probe(gamma: float, sigma: float, radii, out_csv, center=(0.0, 0.0)) -> int:
    radii = list(radii)
    if not radii or any(r <= 0 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        print("radii must be positive and strictly decreasing", file=sys.stderr)
        return EXIT_CONFIG
    if sigma < 0:
        print("sigma must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    psi = regularity.mollified_log(gamma, sigma, center)
    est = regularity.lelong_estimate(psi, center, radii)
    rows = [
        [center[0], center[1], r, v, regularity.mollified_log_mass(gamma, sigma, r)]
        for r, v in est.sequence
    ]
    _atomic_write(Path(out_csv), _csv_text(LELONG_COLUMNS, rows))
    print(json.dumps({"gamma": gamma, "sigma": sigma, "extrapolated": est.extrapolated}))
    return EXIT_OK


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="calabi-lab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    top = ap.add_subparsers(dest="group", required=True)

    g = top.add_parser("flow").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("run", help="integrate a flow from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p = g.add_parser("fit-decay", help="fit the Calabi energy decay rate of a trajectory CSV")
    p.add_argument("csv")
    p.add_argument("--tail-fraction", type=float, default=0.5)

    g = top.add_parser("functionals").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("eval", help="functional report of a field file")
    p.add_argument("--field", required=True)

    g = top.add_parser("fs").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("sweep", help="gradient L^p norms of the rescaled Fubini-Study family")
    p.add_argument("--p", type=_float_list, required=True)
    p.add_argument("--lambda", dest="lam", type=_float_list, required=True)
    p.add_argument("--out", required=True)

    g = top.add_parser("lelong").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("probe", help="Lelong estimate of a mollified logarithm")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--radii", type=_float_list, required=True)
    p.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    key = (args.group, args.cmd)
    if key == ("flow", "run"):
        return cmd_flow_run(args.config, args.out)
    if key == ("flow", "fit-decay"):
        return cmd_fit_decay(args.csv, args.tail_fraction)
    if key == ("functionals", "eval"):
        return cmd_functionals_eval(args.field)
    if key == ("fs", "sweep"):
        return cmd_fs_sweep(args.p, args.lam, args.out)
    if key == ("lelong", "probe"):
        return cmd_lelong_probe(args.gamma, args.sigma, args.radii, args.out)
    ap.error("unknown command")
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
