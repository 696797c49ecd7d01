"""CSV / JSON / SVG serialisation of trajectories and grids.

All writers go through :func:`atomic_write`, so a file is either fully
written or left untouched.
"""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .dynamics import Trajectory
from .models import PhaseLabel
from .sweeps import BoundaryCurve, PhaseDiagram

TRAJECTORY_COLUMNS = ("n", "t", "p0_raw", "p1_raw", "norm", "p0_norm", "p1_norm")
GRID_COLUMNS = ("omega_t0", "gamma_t1", "discriminant", "phase", "kappa")
BOUNDARY_COLUMNS = ("omega_t0", "gamma_t1")

PHASE_COLORS = {PhaseLabel.PTSP: "#3b6fb6", PhaseLabel.PTBP: "#d1553c", PhaseLabel.EP: "#222222"}


def fmt(x: float) -> str:
    """12 significant digits, the on-disk precision of every float."""
    return f"{x:.12g}"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def header_block(params: Mapping[str, object]) -> str:
    lines = [f"# floquet-pt {__version__}"]
    for key, value in params.items():
        lines.append(f"# {key}: {value!r}" if isinstance(value, float) else f"# {key}: {value}")
    return "\n".join(lines) + "\n"


def trajectory_rows(traj: Trajectory) -> list[tuple]:
    norm = traj.norm
    normed = traj.normalized
    return [
        (int(traj.n[k]), traj.t[k], traj.raw[k, 0], traj.raw[k, 1], norm[k], normed[k, 0], normed[k, 1])
        for k in range(len(traj))
    ]


def trajectory_csv(traj: Trajectory, params: Mapping[str, object]) -> str:
    buf = io.StringIO()
    buf.write(header_block({**params, "truncated": traj.truncated}))
    buf.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    for row in trajectory_rows(traj):
        buf.write(str(row[0]) + "," + ",".join(fmt(x) for x in row[1:]) + "\n")
    return buf.getvalue()


def trajectory_json(traj: Trajectory, params: Mapping[str, object]) -> str:
    rows = trajectory_rows(traj)
    doc = {
        "version": __version__,
        "params": dict(params),
        "truncated": traj.truncated,
        "columns": list(TRAJECTORY_COLUMNS),
        "rows": [[r[0]] + [float(fmt(x)) for x in r[1:]] for r in rows],
    }
    return json.dumps(doc, indent=1)


def read_csv(text: str) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Split a CSV artifact into header parameters, column names and raw rows."""
    params: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            params[key] = value
        elif not columns:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    return params, columns, rows


def read_trajectory_csv(text: str) -> tuple[dict[str, str], np.ndarray]:
    """Parse a trajectory CSV back into ``(params, array)`` with columns in file order."""
    params, columns, rows = read_csv(text)
    if tuple(columns) != TRAJECTORY_COLUMNS:
        raise ValueError(f"unexpected trajectory columns {columns}")
    return params, np.array([[float(x) for x in r] for r in rows]).reshape(-1, len(columns))


def grid_csv(diagram: PhaseDiagram, params: Mapping[str, object]) -> str:
    buf = io.StringIO()
    buf.write(header_block(params))
    buf.write(",".join(GRID_COLUMNS) + "\n")
    for a, g, d, phase, kappa in diagram.cells():
        buf.write(f"{fmt(a)},{fmt(g)},{fmt(d)},{phase.value},{fmt(kappa)}\n")
    return buf.getvalue()


def _json_float(x: float):
    return float(fmt(x)) if math.isfinite(x) else str(x)


def grid_json(diagram: PhaseDiagram, params: Mapping[str, object]) -> str:
    doc = {
        "version": __version__,
        "params": dict(params),
        "omega_t0": [_json_float(x) for x in diagram.omega_t0],
        "gamma_t1": [_json_float(x) for x in diagram.gamma_t1],
        "discriminant": [[_json_float(x) for x in row] for row in diagram.discriminant],
        "phase": [[diagram.phase(i, j).value for j in range(diagram.shape[1])] for i in range(diagram.shape[0])],
        "kappa": [[_json_float(x) for x in row] for row in diagram.kappa],
    }
    return json.dumps(doc)


def boundary_csv(curve: BoundaryCurve, params: Mapping[str, object]) -> str:
    buf = io.StringIO()
    buf.write(header_block({**params, "skipped": len(curve.skipped)}))
    buf.write(",".join(BOUNDARY_COLUMNS) + "\n")
    for a, g in curve.points:
        buf.write(f"{fmt(a)},{fmt(g)}\n")
    return buf.getvalue()


def phase_svg(diagram: PhaseDiagram, curve: BoundaryCurve | None = None, size: int = 512, margin: int = 48) -> str:
    """Heatmap of phase labels with the EP curve drawn on top.

    Each row of equal labels is merged into one rectangle, which keeps a
    256x256 grid to a few thousand elements.
    """
    xs, ys = diagram.omega_t0, diagram.gamma_t1
    nx, ny = len(xs), len(ys)
    x0, x1 = float(xs[0]), float(xs[-1])
    y0, y1 = float(ys[0]), float(ys[-1])
    cw, ch = size / nx, size / ny

    def px(a: float) -> float:
        return margin + (a - x0) / (x1 - x0) * size * (nx - 1) / nx + cw / 2

    def py(g: float) -> float:
        return margin + size - ((g - y0) / (y1 - y0) * size * (ny - 1) / ny + ch / 2)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * margin}" height="{size + 2 * margin}" '
        f'viewBox="0 0 {size + 2 * margin} {size + 2 * margin}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for j in range(ny):
        y = margin + size - (j + 1) * ch
        i = 0
        while i < nx:
            code = diagram.phase_code[i, j]
            k = i
            while k + 1 < nx and diagram.phase_code[k + 1, j] == code:
                k += 1
            color = PHASE_COLORS[diagram.phase(i, j)]
            out.append(
                f'<rect x="{margin + i * cw:.3f}" y="{y:.3f}" width="{(k - i + 1) * cw:.3f}" '
                f'height="{ch:.3f}" fill="{color}"/>'
            )
            i = k + 1
    if curve is not None:
        pts = [(a, g) for a, g in curve.points if x0 <= a <= x1 and y0 <= g <= y1]
        if pts:
            coords = " ".join(f"{px(a):.3f},{py(g):.3f}" for a, g in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="#f5d000" stroke-width="2"/>')
    out.append(
        f'<text x="{margin + size / 2}" y="{size + 1.6 * margin}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">omega t0</text>'
    )
    out.append(
        f'<text x="{margin / 3}" y="{margin + size / 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 {margin / 3} {margin + size / 2})">gamma t1</text>'
    )
    for k, phase in enumerate((PhaseLabel.PTSP, PhaseLabel.PTBP)):
        lx = margin + k * 90
        out.append(f'<rect x="{lx}" y="{margin / 4}" width="14" height="14" fill="{PHASE_COLORS[phase]}"/>')
        out.append(
            f'<text x="{lx + 20}" y="{margin / 4 + 12}" font-family="sans-serif" font-size="13">{phase.value}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
