"""Render the canned experiment CSVs into publication-style figures.

Each preset produced by the simulation CLI has a matching script here
(``python3 -m figplots.fig3 fig3.csv --out fig3.png``). The scripts share
one ``render`` entry point; everything is driven by the documented CSV
schemas, so the plotting layer never imports the simulation package.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "PRESET_COLUMNS",
    "PlotSpec",
    "SchemaError",
    "build_figure",
    "load_preset_csv",
    "render",
]

__version__ = "0.1.0"

_SERIES_STATS = ("fid_be_plus", "fid_bo_plus", "fid_closest", "z_parity", "coherence")
_FIG2_COLUMNS = ["alpha2", "step"] + [
    f"{stat}_{kind}" for stat in _SERIES_STATS for kind in ("mean", "sem")
]

# required columns per preset, as documented in docs/presets.md
PRESET_COLUMNS = {
    "fig2a": _FIG2_COLUMNS,
    "fig2b": _FIG2_COLUMNS,
    "fig3": ["eta", "alpha2", "n_meas", "f_meas", "n_meas_lambert", "lambert_reliable"],
    "thyvssim": [
        "step",
        "sim_fid_closest",
        "analytic_parity",
        "analytic_coherence",
        "analytic_product",
    ],
    "fbfid": ["eta", "t1_ratio", "alpha2", "fid_mean", "fid_sem", "p_steady"],
}


class SchemaError(ValueError):
    """Input CSV does not match the documented preset schema."""


@dataclass(frozen=True)
class PlotSpec:
    """One rendering job: which preset schema, which files, axis overrides."""

    preset: str
    csv_path: Path
    out_path: Path
    xlabel: str | None = None
    ylabel: str | None = None
    yscale: str | None = None
    title: str | None = None


def load_preset_csv(preset: str, path: Path) -> dict[str, np.ndarray]:
    """Read and validate one preset CSV, returning a column -> array map."""
    if preset not in PRESET_COLUMNS:
        raise SchemaError(f"unknown preset {preset!r}; expected one of {sorted(PRESET_COLUMNS)}")
    try:
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror or exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty CSV, nothing to plot")
    header, data = rows[0], rows[1:]
    missing = [c for c in PRESET_COLUMNS[preset] if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)} for preset {preset!r}"
        )
    if not data:
        raise SchemaError(f"{path}: no data rows")
    out: dict[str, np.ndarray] = {}
    for name in PRESET_COLUMNS[preset]:
        idx = header.index(name)
        values = np.empty(len(data))
        for k, row in enumerate(data):
            try:
                values[k] = float(row[idx])
            except (ValueError, IndexError) as exc:
                raise SchemaError(
                    f"{path}: row {k + 2}, column {name!r} is not numeric"
                ) from exc
        out[name] = values
    return out


def _apply_overrides(ax, spec: PlotSpec) -> None:
    if spec.xlabel is not None:
        ax.set_xlabel(spec.xlabel)
    if spec.ylabel is not None:
        ax.set_ylabel(spec.ylabel)
    if spec.yscale is not None:
        ax.set_yscale(spec.yscale)
    if spec.title is not None:
        ax.set_title(spec.title)


def _build_fig2(data: dict, spec: PlotSpec, stat: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    a2 = data["alpha2"]
    for value in np.unique(a2):
        sel = a2 == value
        order = np.argsort(data["step"][sel])
        step = data["step"][sel][order]
        mean = data[f"{stat}_mean"][sel][order]
        sem = data[f"{stat}_sem"][sel][order]
        (line,) = ax.plot(step, mean, lw=1.6, label=rf"$|\alpha|^2 = {value:g}$")
        ax.fill_between(step, mean - sem, mean + sem, alpha=0.2, color=line.get_color(), lw=0)
    ax.set_xlabel("measurement step")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend()
    _apply_overrides(ax, spec)
    return fig


def _build_fig2a(data: dict, spec: PlotSpec):
    return _build_fig2(data, spec, "fid_closest", "closest Bell-state fidelity")


def _build_fig2b(data: dict, spec: PlotSpec):
    return _build_fig2(data, spec, "fid_be_plus", "target Bell-state fidelity")


def _build_fig3(data: dict, spec: PlotSpec):
    # fidelity on the left axis, iteration counts on a log right axis
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    order = np.argsort(data["eta"])
    eta = data["eta"][order]
    ax.plot(eta, data["f_meas"][order], color="black", lw=2.4, label="balanced fidelity")
    ax.set_xlabel("line transmission")
    ax.set_ylabel("balanced-error fidelity")
    ax.grid(alpha=0.3)
    right = ax.twinx()
    right.plot(eta, data["n_meas"][order], color="tab:red", lw=1.0, label="iterations")
    reliable = data["lambert_reliable"][order] >= 0.5
    right.plot(
        eta[reliable],
        data["n_meas_lambert"][order][reliable],
        color="tab:red",
        lw=1.0,
        ls="--",
        label="iterations (closed form)",
    )
    right.set_yscale("log")
    right.set_ylabel("iterations needed")
    handles, labels = ax.get_legend_handles_labels()
    more_h, more_l = right.get_legend_handles_labels()
    ax.legend(handles + more_h, labels + more_l, loc="center right")
    _apply_overrides(ax, spec)
    return fig


def _build_thyvssim(data: dict, spec: PlotSpec):
    # exactly four curves: solid simulation, dashed analytics
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    order = np.argsort(data["step"])
    step = data["step"][order]
    ax.plot(step, data["sim_fid_closest"][order], color="tab:blue", lw=1.8, label="simulation")
    ax.plot(
        step, data["analytic_parity"][order], ls="--", lw=1.2, color="tab:orange",
        label="parity capture",
    )
    ax.plot(
        step, data["analytic_coherence"][order], ls="--", lw=1.2, color="tab:purple",
        label="phase retention",
    )
    ax.plot(
        step, data["analytic_product"][order], ls="--", lw=1.6, color="tab:green",
        label="product",
    )
    ax.set_xlabel("measurement step")
    ax.set_ylabel("closest Bell-state fidelity")
    ax.grid(alpha=0.3)
    ax.legend()
    _apply_overrides(ax, spec)
    return fig


def _build_fbfid(data: dict, spec: PlotSpec):
    etas = np.unique(data["eta"])
    t1s = np.unique(data["t1_ratio"])
    grid = np.full((etas.size, t1s.size), math.nan)
    for eta, t1, fid in zip(data["eta"], data["t1_ratio"], data["fid_mean"]):
        grid[np.searchsorted(etas, eta), np.searchsorted(t1s, t1)] = fid
    fig, ax = plt.subplots(figsize=(5.8, 4.4))
    image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(t1s.size), [f"{v:g}" for v in t1s])
    ax.set_yticks(range(etas.size), [f"{v:g}" for v in etas])
    ax.set_xlabel("lifetime over iteration time")
    ax.set_ylabel("line transmission")
    midpoint = (np.nanmin(grid) + np.nanmax(grid)) / 2.0
    for i in range(etas.size):
        for j in range(t1s.size):
            if math.isnan(grid[i, j]):
                continue
            shade = "white" if grid[i, j] < midpoint else "black"
            ax.text(j, i, f"{grid[i, j]:.4f}", ha="center", va="center",
                    fontsize=8, color=shade)
    fig.colorbar(image, ax=ax, label="window-averaged target fidelity")
    _apply_overrides(ax, spec)
    return fig


_BUILDERS = {
    "fig2a": _build_fig2a,
    "fig2b": _build_fig2b,
    "fig3": _build_fig3,
    "thyvssim": _build_thyvssim,
    "fbfid": _build_fbfid,
}


def build_figure(spec: PlotSpec):
    """Validate the CSV and return the assembled matplotlib figure."""
    data = load_preset_csv(spec.preset, Path(spec.csv_path))
    return _BUILDERS[spec.preset](data, spec)


def render(spec: PlotSpec) -> Path:
    """Render one preset CSV to ``spec.out_path``.

    Validation happens before the output path is touched, so a schema
    failure never leaves a file behind.
    """
    fig = build_figure(spec)
    out = Path(spec.out_path)
    try:
        fig.savefig(out, dpi=200, bbox_inches="tight")
    finally:
        plt.close(fig)
    return out
