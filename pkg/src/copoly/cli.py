"""Command-line interface: ``copoly {analyze,simulate,compare,sweep,rerun}``.

Exit codes: 0 ok, 2 usage / invalid input, 3 regime error, 4 I/O failure.
Every command that writes files also writes a run manifest from which
``copoly rerun`` reproduces the outputs byte for byte.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, analysis, io, theory
from .exceptions import CopolyError, RegimeError
from .model import RegimeClass, parse_rate_list, validate_rates
from .parallel import map_ordered
from .simulator import SimConfig, simulate

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_IO = 0, 2, 3, 4
MANIFEST_NAME = "manifest.json"


class UsageError(CopolyError):
    pass


# ---------------------------------------------------------------- config

def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - {"k_plus", "k_minus", "seed", "t_max", "max_jumps", "tol"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def _resolve(args, *, stop: bool = False, seed: bool = False) -> dict:
    """Merge ``--config`` with command-line flags (flags win)."""
    base = _load_config_file(getattr(args, "config", None))
    cfg = {}
    for key in ("k_plus", "k_minus"):
        flag = getattr(args, key)
        value = parse_rate_list(flag) if flag is not None else base.get(key)
        if value is None:
            raise UsageError(f"--{key.replace('_', '-')} is required (or give it in --config)")
        cfg[key] = [float(v) for v in value]
    validate_rates(cfg["k_plus"], cfg["k_minus"])
    cfg["tol"] = float(args.tol if getattr(args, "tol", None) is not None
                       else base.get("tol", theory.DEFAULT_TOL))
    if seed:
        s = args.seed if args.seed is not None else base.get("seed", 1)
        if not 0 <= int(s) < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        cfg["seed"] = int(s)
    if stop:
        t_max = args.t_max if args.t_max is not None else None
        max_jumps = args.max_jumps if args.max_jumps is not None else None
        if t_max is None and max_jumps is None:
            t_max, max_jumps = base.get("t_max"), base.get("max_jumps")
        if (t_max is None) == (max_jumps is None):
            raise UsageError("give exactly one of --t-max and --max-jumps")
        cfg["t_max"] = None if t_max is None else float(t_max)
        cfg["max_jumps"] = None if max_jumps is None else int(max_jumps)
        if (cfg["t_max"] is not None and not cfg["t_max"] >= 0) or (
                cfg["max_jumps"] is not None and cfg["max_jumps"] < 0):
            raise UsageError("stop bound must be non-negative")
    return cfg


def _rates(cfg):
    return validate_rates(cfg["k_plus"], cfg["k_minus"])


# -------------------------------------------------------------- commands

def run_analyze(cfg: dict, out: Optional[Path]) -> dict:
    summary = theory.summarize(_rates(cfg), cfg["tol"])
    if cfg.get("require_transient") and not summary.transient:
        raise RegimeError(f"regime is {summary.regime.value}, --require-transient was given")
    text = io.dumps(summary.to_dict())
    sys.stdout.write(text)
    if out is None:
        return {}
    Path(out).write_text(text, encoding="utf-8")
    return {"summary": Path(out).name}


def run_simulate(cfg: dict, out: Path) -> dict:
    sim = SimConfig(_rates(cfg), cfg["seed"], cfg["t_max"], cfg["max_jumps"], cfg["record_stride"])
    traj = simulate(sim)
    io.write_events_csv(out, traj)
    return {"events": Path(out).name}


def _simulate_replicas(cfg: dict) -> list:
    base = SimConfig(_rates(cfg), cfg["seed"], cfg["t_max"], cfg["max_jumps"])
    return map_ordered(lambda i: simulate(base.replica(i)), range(cfg["replicas"]))


def run_compare(cfg: dict, out: Path) -> dict:
    rates = _rates(cfg)
    summary = theory.summarize(rates, cfg["tol"])
    if not summary.transient and not cfg["root_only"]:
        raise RegimeError(f"regime is {summary.regime.value}; composition and velocity "
                          "comparisons need transient rates (use --root-only)")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    trajs = _simulate_replicas(cfg)
    report = analysis.compare(trajs, summary, cfg["grid"], cfg["burn_in"], cfg["tail_guard"],
                              root_only=cfg["root_only"])
    d = rates.d
    outputs = {"report": "report.csv", "summary": "summary.json"}
    io.write_report_csv(out / "report.csv", report, d)

    doc = {
        "theory": summary.to_dict(),
        "replica_seeds": [cfg["seed"] + i for i in range(cfg["replicas"])],
        "max_dev": report.max_dev,
        "root_occupation": report.root_occupation,
        "root_occupation_replicas": report.root_occupation_replicas,
        "root_mass_theory": report.root_mass_theory,
    }
    if report.sigma_emp is not None:
        doc.update({
            "sigma_final": report.sigma_emp[-1],
            "sigma_final_replicas": report.sigma_emp_replicas[:, -1, :],
            "velocity_window": report.velocity_window,
            "velocity_window_replicas": report.velocity_window_replicas,
            "level_fractions": report.level_emp,
            "root_visit_fraction": report.root_visit_fraction,
        })
        if report.boundaries:
            io.write_boundary_csv(out / "boundary.csv", report.boundaries[0])
            outputs["boundary"] = "boundary.csv"
        cone = report.cone_chain.to_dict() if report.cone_chain is not None else {
            "rows": [None] * d, "counts": np.zeros((d, d), dtype=int)}
        io.write_json(out / "cone_matrix.json", cone)
        outputs["cone_matrix"] = "cone_matrix.json"
    io.write_json(out / "summary.json", doc)

    if cfg["svg"]:
        outputs.update(_write_svgs(out, report, trajs[0], d))
    return outputs


def _write_svgs(out: Path, report, first, d: int) -> dict:
    files = {}
    t = report.times
    if report.sigma_emp is not None:
        for i in range(d):
            name = f"sigma_{i + 1}.svg"
            (out / name).write_text(io.svg_line_chart(
                [{"x": t, "y": report.sigma_emp[:, i], "label": f"empirical M{i + 1}"},
                 {"x": t[[0, -1]], "y": [report.sigma_theory[i]] * 2, "label": "limit",
                  "dashed": True, "color": "#777777"}],
                title=f"Fraction of M{i + 1}", xlabel="t", ylabel="sigma"), encoding="utf-8")
            files[f"svg_sigma_{i + 1}"] = name
        (out / "velocity.svg").write_text(io.svg_line_chart(
            [{"x": t, "y": report.vel_emp, "label": "|X(t)|/t"},
             {"x": t[[0, -1]], "y": [report.vel_theory] * 2, "label": "v", "dashed": True,
              "color": "#777777"}],
            title="Growth velocity", xlabel="t", ylabel="|X(t)|/t"), encoding="utf-8")
        files["svg_velocity"] = "velocity.svg"
        if report.boundaries:
            bv = report.boundaries[0]
            (out / "boundary.svg").write_text(io.svg_line_chart(
                [{"x": t, "y": report.length_replicas[0], "label": "|X(t)|"},
                 {"x": t, "y": bv.length_at(t), "label": "boundary", "step": True}],
                title="Process vs boundary process", xlabel="t", ylabel="length"),
                encoding="utf-8")
            files["svg_boundary"] = "boundary.svg"
    else:
        (out / "length.svg").write_text(io.svg_line_chart(
            [{"x": t, "y": report.length, "label": "mean |X(t)|"}],
            title="Polymer length", xlabel="t", ylabel="length"), encoding="utf-8")
        files["svg_length"] = "length.svg"
    return files


_VARY_RE = re.compile(r"^\s*(k_plus|k_minus)\[(\d+)\]\s*=\s*([^:]+)(?::([^:]+):([^:]+))?\s*$")


def parse_vary(text: str) -> dict:
    """Parse ``k_plus[1]=0.1:3:0.05`` (1-based index, inclusive stop)."""
    m = _VARY_RE.match(text)
    if not m:
        raise UsageError(f"malformed --vary {text!r}; expected NAME[i]=start:stop:step")
    name, idx, start = m.group(1), int(m.group(2)), m.group(3)
    try:
        start = float(start)
        if m.group(4) is None:
            values = [start]
        else:
            stop, step = float(m.group(4)), float(m.group(5))
            if step <= 0 or stop < start:
                raise UsageError(f"--vary {text!r}: need step > 0 and stop >= start")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = [start + j * step for j in range(n)]
    except ValueError:
        raise UsageError(f"malformed number in --vary {text!r}") from None
    if idx < 1:
        raise UsageError("--vary index is 1-based")
    return {"name": name, "index": idx, "values": values}


def _sweep_cell(cfg, point):
    kp, km = list(cfg["k_plus"]), list(cfg["k_minus"])
    for spec, value in zip(cfg["vary"], point):
        target = kp if spec["name"] == "k_plus" else km
        target[spec["index"] - 1] = value
    rates = validate_rates(kp, km)
    summary = theory.summarize(rates, cfg["tol"])
    sig = summary.sigma_bar if summary.transient else [None] * rates.d
    return [point[0], point[1] if len(point) > 1 else None, summary.alpha,
            summary.regime.value, summary.m, summary.v, *sig]


def run_sweep(cfg: dict, out: Optional[Path]) -> dict:
    d = len(cfg["k_plus"])
    for spec in cfg["vary"]:
        if spec["index"] > d:
            raise UsageError(f"--vary index {spec['index']} exceeds d = {d}")
    grids = [spec["values"] for spec in cfg["vary"]]
    points = [(a,) for a in grids[0]] if len(grids) == 1 else [
        (a, b) for a in grids[0] for b in grids[1]]
    rows = map_ordered(lambda p: _sweep_cell(cfg, p), points)
    header = ["param1", "param2", "alpha", "regime", "m", "v"] + [
        f"sigma_bar_{i + 1}" for i in range(d)]
    if out is None:
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(x if isinstance(x, str) else io.fmt_num(x) for x in row) + "\n")
        return {}
    io.write_rows_csv(out, header, rows)
    return {"sweep": Path(out).name}


COMMANDS = {"analyze": run_analyze, "simulate": run_simulate, "compare": run_compare,
            "sweep": run_sweep}
DIR_OUTPUT = {"compare"}


def manifest_path(command: str, out: Path) -> Path:
    out = Path(out)
    return out / MANIFEST_NAME if command in DIR_OUTPUT else out.with_name(out.name + ".manifest.json")


def execute(command: str, cfg: dict, out: Optional[Path]) -> int:
    outputs = COMMANDS[command](cfg, out)
    if out is not None:
        manifest = {"command": command, "config": cfg, "outputs": outputs,
                    "version": __version__}
        io.write_json(manifest_path(command, out), manifest)
    return EXIT_OK


def run_rerun(manifest_file: Path, out: Optional[Path]) -> int:
    try:
        manifest = json.loads(Path(manifest_file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"manifest {manifest_file}: {exc}") from None
    command, cfg = manifest.get("command"), manifest.get("config")
    if command not in COMMANDS or not isinstance(cfg, dict):
        raise UsageError(f"{manifest_file} is not a copoly run manifest")
    if out is None:
        here = Path(manifest_file).parent
        if command in DIR_OUTPUT:
            out = here
        else:
            primary = next(iter(manifest.get("outputs", {}).values()), None)
            if primary is None:
                raise UsageError("manifest lists no output file")
            out = here / primary
    return execute(command, cfg, out)


# ---------------------------------------------------------------- parser

def _add_rates(p):
    p.add_argument("--k-plus", dest="k_plus", help="attachment rates, comma separated")
    p.add_argument("--k-minus", dest="k_minus", help="detachment rates, comma separated")
    p.add_argument("--config", help="JSON file with k_plus, k_minus, seed, t_max|max_jumps, tol")
    p.add_argument("--tol", type=float, default=None, help="root-solve tolerance (default 1e-12)")


def _add_stop(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--t-max", dest="t_max", type=float, help="simulate up to this time")
    g.add_argument("--max-jumps", dest="max_jumps", type=int, help="simulate this many jumps")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copoly", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print closed-form quantities as JSON")
    _add_rates(p)
    p.add_argument("--require-transient", action="store_true")
    p.add_argument("--out", type=Path, help="also write the JSON (and a manifest) here")

    p = sub.add_parser("simulate", help="simulate one trajectory to an event CSV")
    _add_rates(p)
    _add_stop(p)
    p.add_argument("--record-stride", type=int, default=1024)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("compare", help="simulate replicas and compare with theory")
    _add_rates(p)
    _add_stop(p)
    p.add_argument("--replicas", type=int, default=10)
    p.add_argument("--grid", type=int, default=200, help="number of sample times")
    p.add_argument("--burn-in", type=float, default=0.2)
    p.add_argument("--tail-guard", type=int, default=None)
    p.add_argument("--svg", action="store_true", help="also write static SVG plots")
    p.add_argument("--root-only", action="store_true",
                   help="only compare root occupation (allowed in recurrent regimes)")
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("sweep", help="map regime, m, v and limiting fractions over a grid")
    _add_rates(p)
    p.add_argument("--vary", action="append", required=True,
                   help="NAME[i]=start:stop:step with NAME k_plus or k_minus (repeat once for 2-D)")
    p.add_argument("--out", type=Path, help="CSV path (default stdout)")

    p = sub.add_parser("rerun", help="reproduce the outputs recorded in a run manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, help="write outputs here instead of next to the manifest")
    return parser


def _config_for(args) -> dict:
    if args.command == "analyze":
        cfg = _resolve(args)
        cfg["require_transient"] = bool(args.require_transient)
    elif args.command == "simulate":
        cfg = _resolve(args, stop=True, seed=True)
        if args.record_stride < 1:
            raise UsageError("--record-stride must be >= 1")
        cfg["record_stride"] = args.record_stride
    elif args.command == "compare":
        cfg = _resolve(args, stop=True, seed=True)
        if args.replicas < 1 or args.grid < 1 or not 0 <= args.burn_in < 1:
            raise UsageError("need --replicas >= 1, --grid >= 1 and 0 <= --burn-in < 1")
        cfg.update(replicas=args.replicas, grid=args.grid, burn_in=args.burn_in,
                   tail_guard=args.tail_guard, svg=bool(args.svg), root_only=bool(args.root_only))
    else:
        cfg = _resolve(args)
        if len(args.vary) > 2:
            raise UsageError("at most two --vary parameters")
        cfg["vary"] = [parse_vary(v) for v in args.vary]
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "rerun":
            return run_rerun(args.manifest, args.out)
        return execute(args.command, _config_for(args), args.out)
    except RegimeError as exc:
        print(f"copoly: regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except OSError as exc:
        print(f"copoly: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CopolyError, ValueError) as exc:
        print(f"copoly: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
