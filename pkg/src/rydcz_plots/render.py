"""Deterministic figure rendering from simulation output files."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm, Normalize

FIGURE_KINDS = ("heatmap", "line", "chi-bars", "qec-bars")

_SCHEMAS = {
    "heatmap": ("T_tot_us", "V_MHz", "infidelity"),
    "line": ("t_us", "omega_rad_per_us", "delta_rad_per_us", "f0", "f1"),
    "qec-bars": ("configuration", "fidelity_ecd", "fidelity_adiabatic"),
}


class FigureSpecError(ValueError):
    """Invalid figure specification or input schema mismatch."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw, from which files, to which image path.

    ``output`` is the image path without extension; both a .png and an .svg
    are written next to each other.
    """

    kind: str
    inputs: tuple
    output: str
    log_scale: bool = True
    color_by_phase: bool = True

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise FigureSpecError(f"kind must be one of {FIGURE_KINDS}")
        if not self.inputs:
            raise FigureSpecError("at least one input file is required")


def load_spec(path) -> FigureSpec:
    with open(path) as fh:
        data = json.load(fh)
    known = {"kind", "inputs", "output", "log_scale", "color_by_phase"}
    unknown = set(data) - known
    if unknown:
        raise FigureSpecError(f"unknown spec keys: {sorted(unknown)}")
    try:
        return FigureSpec(
            kind=data["kind"],
            inputs=tuple(data["inputs"]),
            output=data["output"],
            log_scale=bool(data.get("log_scale", True)),
            color_by_phase=bool(data.get("color_by_phase", True)),
        )
    except KeyError as exc:
        raise FigureSpecError(f"missing spec key: {exc.args[0]}") from exc


def _read_table(path, kind: str) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FigureSpecError(f"{path}: empty file")
    header = rows[0]
    required = _SCHEMAS[kind]
    missing = [c for c in required if c not in header]
    if missing:
        raise FigureSpecError(f"{path}: missing columns {missing} for '{kind}'")
    if len(rows) == 1:
        raise FigureSpecError(f"{path}: no data rows")
    cols = {name: [] for name in header}
    for row in rows[1:]:
        for name, value in zip(header, row):
            cols[name].append(value)
    out = {}
    for name, values in cols.items():
        try:
            out[name] = np.array([float(v) for v in values])
        except ValueError:
            out[name] = np.array(values)
    return out


def _save(fig, output: str) -> list[str]:
    paths = [f"{output}.png", f"{output}.svg"]
    for path in paths:
        fig.savefig(path, dpi=150, bbox_inches="tight", metadata=None)
    plt.close(fig)
    return paths


def _render_heatmap(spec: FigureSpec) -> list[str]:
    data = _read_table(spec.inputs[0], "heatmap")
    times = np.unique(data["T_tot_us"])
    blockades = np.unique(data["V_MHz"])
    grid = np.full((len(times), len(blockades)), np.nan)
    ti = {t: i for i, t in enumerate(times)}
    vi = {v: j for j, v in enumerate(blockades)}
    for t, v, inf in zip(data["T_tot_us"], data["V_MHz"], data["infidelity"]):
        grid[ti[t], vi[v]] = inf
    if grid.size == 0:
        raise FigureSpecError("empty sweep grid")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    finite = grid[np.isfinite(grid) & (grid > 0)]
    if spec.log_scale and finite.size:
        norm = LogNorm(vmin=finite.min(), vmax=finite.max())
    else:
        norm = Normalize()
    mesh = ax.pcolormesh(blockades, times, grid, norm=norm, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="infidelity")
    ax.set_xlabel("blockade $V/2\\pi$ (MHz)")
    ax.set_ylabel("protocol duration $T_{tot}$ ($\\mu$s)")
    return _save(fig, spec.output)


def _render_line(spec: FigureSpec) -> list[str]:
    data = _read_table(spec.inputs[0], "line")
    t = data["t_us"]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 5.5), sharex=True)
    top.plot(t, data["omega_rad_per_us"], label="$\\Omega(t)$")
    top.plot(t, data["delta_rad_per_us"], label="$\\Delta(t)$")
    top.set_ylabel("rad/$\\mu$s")
    top.legend(loc="upper right")
    bottom.plot(t, data["f0"], label="$f_0(t)$")
    bottom.plot(t, data["f1"], label="$f_1(t)$")
    bottom.set_xlabel("t ($\\mu$s)")
    bottom.set_ylabel("rad/$\\mu$s")
    bottom.legend(loc="upper right")
    return _save(fig, spec.output)


def _render_chi_bars(spec: FigureSpec) -> list[str]:
    with open(spec.inputs[0]) as fh:
        report = json.load(fh)
    for key in ("basis", "deviation_magnitude", "deviation_phase"):
        if key not in report:
            raise FigureSpecError(f"{spec.inputs[0]}: missing '{key}'")
    labels = report["basis"]
    mag = np.asarray(report["deviation_magnitude"], dtype=float)
    phase = np.asarray(report["deviation_phase"], dtype=float)
    n = len(labels)
    if mag.shape != (n, n):
        raise FigureSpecError("deviation table does not match the basis size")
    fig, ax = plt.subplots(figsize=(9.0, 4.5))
    xs = np.arange(n * n)
    cmap = plt.get_cmap("twilight")
    norm = Normalize(vmin=-np.pi, vmax=np.pi)
    colors = cmap(norm(phase.ravel())) if spec.color_by_phase else None
    ax.bar(xs, mag.ravel(), color=colors, width=1.0)
    if spec.log_scale:
        ax.set_yscale("log")
        floor = max(mag.max() * 1e-8, 1e-300)
        ax.set_ylim(bottom=floor)
    step = n  # one tick per row of the process matrix
    ax.set_xticks(xs[::step])
    ax.set_xticklabels([labels[i // n] for i in xs[::step]], fontsize=7)
    ax.set_ylabel("$|\\Delta\\chi|$")
    if spec.color_by_phase:
        sm = plt.cm.ScalarMappable(cmap=cmap, norm=norm)
        fig.colorbar(sm, ax=ax, label="arg $\\Delta\\chi$ (rad)")
    return _save(fig, spec.output)


def _render_qec_bars(spec: FigureSpec) -> list[str]:
    data = _read_table(spec.inputs[0], "qec-bars")
    labels = list(data["configuration"])
    f_ecd = data["fidelity_ecd"]
    f_ad = data["fidelity_adiabatic"]
    xs = np.arange(len(labels))
    width = 0.38
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.bar(xs - width / 2, f_ecd, width, label="effective drive")
    ax.bar(xs + width / 2, f_ad, width, label="adiabatic")
    ax.axhline(float(np.mean(f_ecd)), color="C0", linestyle="--", linewidth=1)
    ax.axhline(float(np.mean(f_ad)), color="C1", linestyle="--", linewidth=1)
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("recovery fidelity")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right")
    return _save(fig, spec.output)


_RENDERERS = {
    "heatmap": _render_heatmap,
    "line": _render_line,
    "chi-bars": _render_chi_bars,
    "qec-bars": _render_qec_bars,
}


def render(spec: FigureSpec) -> list[str]:
    """Render the figure; returns the list of written image paths."""
    return _RENDERERS[spec.kind](spec)
