"""Command-line front end.

Exit codes: 0 success/pass, 1 invariant or comparison failure, 2 usage
error, 3 numerical blow-up.

Settings are resolved as built-in defaults, then an optional ``--config``
file of ``key=value`` lines, then command-line flags. Config keys ``t0``,
``t1``, ``T``, ``dt``, ``x0``, ``potential`` and ``tol`` set run options;
any other key is treated as a system parameter.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .catalog import ENTRIES, build_system, list_catalog
from .diagnostics import config_divergence, linear_stability, run_invariant_suite
from .integrate import BlowUpError, integrate, sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
RUN_KEYS = {"t0", "t1", "T", "dt", "x0", "potential", "tol"}


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    system: str
    params: dict
    x0: list
    t0: float
    t1: float
    dt: float
    outputs: dict = field(default_factory=dict)
    potential: Optional[str] = None
    tool_version: str = __version__
    timestamp: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def fmt(v: float) -> str:
    """Shortest round-trip decimal."""
    return repr(float(v))


def parse_kv(items, what: str = "param") -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--{what} expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if not k:
            raise UsageError(f"--{what} has an empty name in {item!r}")
        out[k] = v.strip()
    return out


def parse_floats(text: str, what: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None
    if not all(np.isfinite(vals)):
        raise UsageError(f"{what} must be finite")
    return vals


def read_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def resolve(args) -> tuple:
    """Merge config file and flags into (run options, system params)."""
    cfg = read_config(getattr(args, "config", None))
    run = {k: v for k, v in cfg.items() if k in RUN_KEYS}
    params = {k: v for k, v in cfg.items() if k not in RUN_KEYS}
    for key in RUN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            run[key] = val
    params.update(parse_kv(getattr(args, "param", None)))
    try:
        params = {k: float(v) for k, v in params.items()}
    except ValueError as exc:
        raise UsageError(f"parameter values must be numbers ({exc})") from None
    return run, params


def _float(run: dict, key: str, default: float) -> float:
    v = run.get(key, default)
    try:
        return float(v)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be a number, got {v!r}") from None


def _system(name: str, params: dict, potential: Optional[str]):
    if name not in ENTRIES:
        raise UsageError(f"unknown system {name!r}; run `curlforge list`")
    try:
        return build_system(name, params, potential if ENTRIES[name].takes_potential else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _x0(sys_def, run: dict) -> np.ndarray:
    if "x0" not in run:
        return np.array(sys_def.default_x0, dtype=float)
    vals = parse_floats(str(run["x0"]), "--x0")
    if len(vals) == sys_def.dim:
        return np.array(vals)
    if len(vals) == 2 * sys_def.n and sys_def.dim == 2 * sys_def.n + 1:
        return np.array(vals + [0.0])
    raise UsageError(f"--x0 for {sys_def.name} needs {sys_def.dim} values ({','.join(sys_def.coordinates)})")


def _time_window(run: dict, default_t1: float = 10.0) -> tuple:
    t0 = _float(run, "t0", 0.0)
    if "T" in run and "t1" not in run:
        t1 = t0 + _float(run, "T", default_t1)
    else:
        t1 = _float(run, "t1", t0 + default_t1)
    dt = _float(run, "dt", 1e-3)
    if not dt > 0:
        raise UsageError("dt must be positive")
    if not t1 > t0:
        raise UsageError("t1 must exceed t0")
    if dt > t1 - t0:
        raise UsageError("dt must not exceed the time window")
    return t0, t1, dt


def trajectory_csv(traj, coordinates) -> str:
    buf = io.StringIO()
    buf.write(",".join(("t",) + tuple(coordinates)) + "\n")
    for t, row in zip(traj.times, traj.states):
        buf.write(",".join([fmt(t)] + [fmt(v) for v in row]) + "\n")
    return buf.getvalue()


def manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def cmd_list(args) -> int:
    rows = []
    for e in list_catalog():
        params = " ".join(f"{k}={fmt(v)}" for k, v in e.schema.items()) or "-"
        if e.takes_potential:
            params += " [U: linear|quadratic|sine, default quadratic]"
        rows.append((e.name, e.formulation, params, e.reference))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    for r in rows:
        print(f"{r[0]:<{w0}}  {r[1]:<{w1}}  {r[2]}  | {r[3]}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    run, params = resolve(args)
    sys_def = _system(args.system, params, run.get("potential"))
    t0, t1, dt = _time_window(run)
    x0 = _x0(sys_def, run)
    out = Path(args.out)
    try:
        traj = integrate(sys_def, x0, t0, t1, dt)
    except BlowUpError as exc:
        print(f"error: numerical blow-up at t={exc.t!r}; last finite time {exc.last_time!r}", file=sys.stderr)
        return EXIT_NUMERIC
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(trajectory_csv(traj, sys_def.coordinates))
    man = RunManifest(sys_def.name, {k: v for k, v in sys_def.params.items()}, [float(v) for v in x0],
                      t0, t1, dt, {"trajectory": str(out)},
                      sys_def.potential.name if sys_def.potential else None,
                      timestamp=datetime.now(timezone.utc).isoformat())
    manifest_path(out).write_text(man.to_json() + "\n")
    print(f"wrote {len(traj)} samples to {out}")
    return EXIT_OK


def cmd_check(args) -> int:
    run, params = resolve(args)
    sys_def = _system(args.system, params, run.get("potential"))
    t0, t1, dt = _time_window(run)
    x0 = _x0(sys_def, run)
    try:
        traj = integrate(sys_def, x0, t0, t1, dt)
    except BlowUpError as exc:
        print(f"error: numerical blow-up at t={exc.t!r}; last finite time {exc.last_time!r}", file=sys.stderr)
        return EXIT_NUMERIC
    report = run_invariant_suite(sys_def, traj)
    text = json.dumps(report.to_json(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_compare(args) -> int:
    run, params = resolve(args)
    if len(args.systems) < 2:
        raise UsageError("compare needs at least two systems")
    for name in args.systems:
        if name not in ENTRIES:
            raise UsageError(f"unknown system {name!r}")
    ns = {ENTRIES[name].n for name in args.systems}
    if len(ns) != 1:
        raise UsageError("systems do not share a configuration space")
    n = ns.pop()
    known = set().union(*(ENTRIES[name].schema for name in args.systems))
    unknown = sorted(set(params) - known)
    if unknown:
        raise UsageError(f"parameter(s) {', '.join(unknown)} not used by any compared system")
    t0, t1, dt = _time_window(run)
    tol = _float(run, "tol", 1e-7)
    if "x0" in run:
        cfg = parse_floats(str(run["x0"]), "--x0")
    else:
        cfg = [0.5, 0.3, 0.2, 0.1] if n == 2 else [1.0, 0.0]
    if len(cfg) != 2 * n:
        raise UsageError(f"--x0 for compare is a configuration and velocity: {2 * n} values")
    trajs = {}
    for name in args.systems:
        own = {k: v for k, v in params.items() if k in ENTRIES[name].schema}
        sys_def = _system(name, own, run.get("potential"))
        x0 = sys_def.state_from_config(cfg[:n], cfg[n:], t=t0)
        try:
            trajs[name] = integrate(sys_def, x0, t0, t1, dt)
        except BlowUpError as exc:
            print(f"error: {name}: numerical blow-up at t={exc.t!r}", file=sys.stderr)
            return EXIT_NUMERIC
    pairs = []
    for a, b in itertools.combinations(args.systems, 2):
        d = config_divergence(trajs[a], trajs[b], n)
        pairs.append({"a": a, "b": b, "max_config_divergence": d, "pass": d <= tol})
    result = {"systems": list(args.systems), "params": params, "x0_config": cfg,
              "t0": t0, "t1": t1, "dt": dt, "tolerance": tol, "pairs": pairs,
              "verdict": "pass" if all(p["pass"] for p in pairs) else "fail"}
    print(json.dumps(result, indent=2))
    return EXIT_OK if result["verdict"] == "pass" else EXIT_FAIL


def parse_grid(specs) -> dict:
    grid = {}
    for spec in specs or []:
        for part in spec.split(";"):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise UsageError(f"--grid expects name=v1,v2,..., got {part!r}")
            k, v = part.split("=", 1)
            vals = parse_floats(v, f"grid values for {k}")
            if not vals:
                raise UsageError(f"grid for {k.strip()} is empty")
            grid[k.strip()] = vals
    if not grid:
        raise UsageError("empty grid: give at least one --grid name=v1,v2,...")
    return grid


def cmd_stability(args) -> int:
    run, params = resolve(args)
    name = args.system
    if name not in ENTRIES:
        raise UsageError(f"unknown system {name!r}")
    entry = ENTRIES[name]
    if not entry.linear:
        raise UsageError(f"{name} is nonlinear; stability needs kapitsa, gyro_dissipative_km or galley_forced_km")
    grid = parse_grid(args.grid)
    bad = sorted((set(grid) | set(params)) - set(entry.schema))
    if bad:
        raise UsageError(f"unknown parameter(s) for {name}: {', '.join(bad)}")
    keys = list(grid)
    points = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        p = dict(entry.schema)
        p.update(params)
        p.update(dict(zip(keys, combo)))
        points.append(p)

    def analyse(p):
        return linear_stability(name, p)

    try:
        results = sweep(analyse, points, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cols = list(entry.schema)
    header = cols + [f"{part}{i}" for i in range(1, 5) for part in ("re", "im")] + ["max_re", "classification"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for p, r in zip(points, results):
        eig = [fmt(x) for lam in r.eigenvalues for x in (lam.real, lam.imag)]
        w.writerow([fmt(p[c]) for c in cols] + eig + [fmt(r.max_real_part), r.classification])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curlforge", description="Curl-force dynamics with dissipative couplings.")
    ap.add_argument("--version", action="version", version=f"curlforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, window=True):
        p.add_argument("--param", action="append", metavar="NAME=VALUE", help="system parameter (repeatable)")
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--potential", help="U choice: linear, quadratic or sine")
        if window:
            p.add_argument("--x0", help="initial state, comma-separated")
            p.add_argument("--t0", type=float)
            p.add_argument("--t1", type=float)
            p.add_argument("--T", type=float, help="duration (alternative to --t1)")
            p.add_argument("--dt", type=float)

    sub.add_parser("list", help="show the catalog").set_defaults(func=cmd_list)

    p = sub.add_parser("simulate", help="integrate a system and write CSV plus manifest")
    p.add_argument("system")
    common(p)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="run the invariant suite and print a JSON report")
    p.add_argument("system")
    common(p)
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="pairwise configuration divergence between formulations")
    p.add_argument("systems", nargs="+")
    common(p)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stability", help="eigenvalue sweep of a linear system")
    p.add_argument("system")
    common(p, window=False)
    p.add_argument("--grid", action="append", metavar="NAME=V1,V2,...")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="also write the CSV here")
    p.set_defaults(func=cmd_stability)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
