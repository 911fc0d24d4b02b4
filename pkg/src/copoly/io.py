"""Flat-file outputs: event/report/boundary CSV, JSON documents and SVG charts.

All writers are deterministic: identical inputs give identical bytes.
Monomers are labelled 1-based in every file.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .model import DETACH, RateSet
from .simulator import Trajectory

EVENT_HEADER = ("n", "time", "event", "monomer", "length")


def fmt_time(t: float) -> str:
    return "%.17g" % t


def fmt_num(x) -> str:
    """Shortest round-trip text for floats, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def write_events_csv(path, traj: Trajectory) -> None:
    lengths = traj.lengths[1:]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(EVENT_HEADER) + "\n")
        lines = []
        for n, (t, c, L) in enumerate(zip(traj.jump_times.tolist(), traj.codes.tolist(),
                                          lengths.tolist()), start=1):
            if c == DETACH:
                lines.append(f"{n},{fmt_time(t)},D,,{L}\n")
            else:
                lines.append(f"{n},{fmt_time(t)},A,{c + 1},{L}\n")
            if len(lines) >= 65536:
                fh.writelines(lines)
                lines.clear()
        fh.writelines(lines)


def read_events_csv(path, rates: RateSet, t_end: Optional[float] = None) -> Trajectory:
    """Rebuild a :class:`Trajectory` from an event CSV written by this package."""
    times, codes = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != EVENT_HEADER:
            raise ValueError(f"unexpected event CSV header {header!r}")
        for row in reader:
            times.append(float(row[1]))
            codes.append(DETACH if row[2] == "D" else int(row[3]) - 1)
    traj = Trajectory.from_codes(rates, times, codes, t_end)
    return traj


def write_rows_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_num(x) if not isinstance(x, str) else x for x in row) + "\n")


def report_header(d: int) -> List[str]:
    return (["t"] + [f"sigma_emp_{i + 1}" for i in range(d)]
            + [f"sigma_theory_{i + 1}" for i in range(d)] + ["len", "vel_emp", "vel_theory"])


def write_report_csv(path, report, d: int) -> None:
    rows = []
    for s, t in enumerate(report.times):
        emp = report.sigma_emp[s] if report.sigma_emp is not None else [None] * d
        th = report.sigma_theory if report.sigma_theory is not None else [None] * d
        vel = report.vel_emp[s] if report.vel_emp is not None else None
        rows.append([t, *emp, *th, report.length[s], vel, report.vel_theory])
    write_rows_csv(path, report_header(d), rows)


def write_boundary_csv(path, bv) -> None:
    rows = ([k, int(bv.e[k]), "" if bv.tip[k] < 0 else str(int(bv.tip[k]) + 1),
             "1" if bv.provisional[k] else "0"] for k in range(bv.e.shape[0]))
    write_rows_csv(path, ("k", "e_k", "tip", "provisional"), rows)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    return obj


# --------------------------------------------------------------------- SVG

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_chart(series: Sequence[dict], title: str = "", xlabel: str = "",
                   ylabel: str = "", width: int = 640, height: int = 400) -> str:
    """Render a static line chart.

    Each series is a dict with ``x``, ``y`` and optional ``label``, ``dashed``
    and ``step`` (draw as a right-continuous staircase).
    """
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(s["x"], float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = (float(xs[ok].min()), float(xs[ok].max())) if ok.any() else (0.0, 1.0)
    y0, y1 = (float(ys[ok].min()), float(ys[ok].max())) if ok.any() else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{px(xv):.2f}" y="{mt + ph + 18}" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<text x="{ml - 6}" y="{py(yv) + 4:.2f}" text-anchor="end">{yv:.4g}</text>')
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for k, s in enumerate(series):
        x = np.asarray(s["x"], float)
        y = np.asarray(s["y"], float)
        keep = np.isfinite(x) & np.isfinite(y)
        x, y = x[keep], y[keep]
        if s.get("step") and x.size > 1:
            x = np.repeat(x, 2)[1:]
            y = np.repeat(y, 2)[:-1]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = s.get("color", _PALETTE[k % len(_PALETTE)])
        dash = ' stroke-dasharray="6,4"' if s.get("dashed") else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>')
        if s.get("label"):
            ly = mt + 16 + 16 * k
            out.append(f'<line x1="{ml + pw - 150}" y1="{ly - 4}" x2="{ml + pw - 125}" y2="{ly - 4}" '
                       f'stroke="{color}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{ml + pw - 120}" y="{ly}">{_esc(s["label"])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
