"""Canned experiment configurations and their CSV writers.

Five presets cover the standard plots.  ``fig2a`` sweeps the probe photon
number for the bare repeated measurement and shows the rise-then-dephase of
the Bell fidelity; ``fig2b`` repeats the sweep with feedback closed.
``fig3`` is purely analytic: for each transmission it finds the photon
number at which the balanced-error fidelity reaches 0.99 and reports the
required iteration count.  ``thyvssim`` overlays one simulated ensemble with
the two-rate analytic curves.  ``fbfid`` runs the feedback loop under qubit
decay on a small (transmission, lifetime) grid at the per-cell optimal
photon number and averages the target fidelity over a late window.

The photon-number values {0.5, 1, 2, 4} of the fig2 sweeps and the fbfid
grid are choices of this package, picked to span the qualitative regimes;
see ``docs/presets.md`` for every column schema.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import (
    alpha2_for_fmeas,
    nmeas_lambert,
    optimize_alpha,
    product_curve,
    rates,
    solve_nmeas,
    steady_state,
)
from ._version import __version__
from .ensemble import EnsembleConfig, run_ensemble, series_header, series_rows, write_csv
from .errors import ConfigError
from .feedback import FeedbackConfig
from .qmath import CatParams, DecayParams
from .rng import stream_seed

__all__ = ["PRESET_NAMES", "PresetPlan", "PresetPoint", "experiment_preset", "run_preset"]

PRESET_NAMES = ("fig2a", "fig2b", "fig3", "thyvssim", "fbfid")

_DEFAULT_MASTER_SEED = 7
_FIG2_ALPHA2 = (0.5, 1.0, 2.0, 4.0)
_FBFID_ETAS = (0.75, 0.85, 0.95)
_FBFID_T1 = (1000.0, 3000.0, 10000.0)
_FIG3_ETAS = tuple(round(0.55 + 0.01 * k, 2) for k in range(41))


@dataclass(frozen=True)
class PresetPoint:
    """One sweep cell: extra CSV columns, the run config, optional window."""

    label: dict
    config: EnsembleConfig | None = None
    window: tuple[int, int] | None = None


@dataclass(frozen=True)
class PresetPlan:
    name: str
    kind: str  # "ensemble" or "analytic"
    points: tuple[PresetPoint, ...]


def _fig2_points(feedback: bool, steps: int, trajectories, seed) -> tuple:
    master = _DEFAULT_MASTER_SEED if seed is None else int(seed)
    n = 1000 if trajectories is None else int(trajectories)
    points = []
    for k, a2 in enumerate(_FIG2_ALPHA2):
        base = FeedbackConfig(
            cat=CatParams(alpha2=a2, eta=0.75),
            steps=steps,
            seed=stream_seed(master, k),
        )
        points.append(
            PresetPoint(
                label={"alpha2": a2},
                config=EnsembleConfig(base=base, trajectories=n, feedback_enabled=feedback),
            )
        )
    return tuple(points)


def experiment_preset(name: str, trajectories=None, seed=None) -> PresetPlan:
    """The declarative sweep behind a preset name.

    ``trajectories`` and ``seed`` override the preset defaults where they
    apply; analytic presets ignore both.
    """
    if name == "fig2a":
        return PresetPlan(name, "ensemble", _fig2_points(False, 600, trajectories, seed))
    if name == "fig2b":
        return PresetPlan(name, "ensemble", _fig2_points(True, 1000, trajectories, seed))
    if name == "fig3":
        points = tuple(PresetPoint(label={"eta": eta}) for eta in _FIG3_ETAS)
        return PresetPlan(name, "analytic", points)
    if name == "thyvssim":
        master = _DEFAULT_MASTER_SEED if seed is None else int(seed)
        n = 1000 if trajectories is None else int(trajectories)
        base = FeedbackConfig(
            cat=CatParams(alpha2=2.0, eta=0.75), steps=600, seed=stream_seed(master, 0)
        )
        point = PresetPoint(
            label={"alpha2": 2.0, "eta": 0.75},
            config=EnsembleConfig(base=base, trajectories=n, feedback_enabled=False),
        )
        return PresetPlan(name, "ensemble", (point,))
    if name == "fbfid":
        master = _DEFAULT_MASTER_SEED if seed is None else int(seed)
        n = 1000 if trajectories is None else int(trajectories)
        points = []
        k = 0
        for eta in _FBFID_ETAS:
            for t1 in _FBFID_T1:
                decay = DecayParams(t1_ratio=t1)
                opt = optimize_alpha(eta, decay)
                steps = int(round(6.0 * t1))
                base = FeedbackConfig(
                    cat=CatParams(alpha2=opt.alpha2, eta=eta),
                    decay=decay,
                    initial_state="bell_e_plus",
                    steps=steps,
                    seed=stream_seed(master, k),
                )
                points.append(
                    PresetPoint(
                        label={
                            "eta": eta,
                            "t1_ratio": t1,
                            "alpha2": opt.alpha2,
                            "p_steady": opt.p_steady,
                        },
                        config=EnsembleConfig(
                            base=base,
                            trajectories=n,
                            feedback_enabled=True,
                            record_every=max(1, int(t1) // 100),
                        ),
                        window=(int(round(3.0 * t1)), steps),
                    )
                )
                k += 1
        return PresetPlan(name, "ensemble", tuple(points))
    raise ConfigError(f"unknown preset {name!r}; expected one of {list(PRESET_NAMES)}")


def _run_fig3(path: Path) -> None:
    header = ["eta", "alpha2", "n_meas", "f_meas", "n_meas_lambert", "lambert_reliable"]
    rows = []
    for eta in _FIG3_ETAS:
        a2 = alpha2_for_fmeas(eta, f_target=0.99)
        params = CatParams(alpha2=a2, eta=eta)
        est = solve_nmeas(params)
        shortcut = nmeas_lambert(params)
        rows.append([eta, a2, est.n_meas, est.f_meas, shortcut.n_meas, shortcut.reliable])
    write_csv(path, header, rows, metadata={"preset": "fig3", "version": __version__})


def _run_thyvssim(plan: PresetPlan, path: Path, workers: int) -> None:
    point = plan.points[0]
    result = run_ensemble(point.config, workers=workers)
    rp_rd = rates(point.config.base.cat)
    t = result.step.astype(float)
    parity = 1.0 - np.exp(-rp_rd.r_parity * t) / 2.0
    coherence = (1.0 + np.exp(-rp_rd.r_dephasing * t)) / 2.0
    product = product_curve(rp_rd, t)
    header = ["step", "sim_fid_closest", "analytic_parity", "analytic_coherence", "analytic_product"]
    rows = [
        [int(result.step[i]), result.mean["fid_closest"][i], parity[i], coherence[i], product[i]]
        for i in range(len(result.step))
    ]
    meta = dict(result.metadata, preset="thyvssim")
    write_csv(path, header, rows, metadata=meta)


def _run_fbfid(plan: PresetPlan, path: Path, workers: int) -> None:
    header = ["eta", "t1_ratio", "alpha2", "fid_mean", "fid_sem", "p_steady"]
    rows = []
    for point in plan.points:
        result = run_ensemble(point.config, workers=workers, window=point.window)
        lab = point.label
        rows.append(
            [
                lab["eta"],
                lab["t1_ratio"],
                lab["alpha2"],
                result.window_mean,
                result.window_sem,
                lab["p_steady"],
            ]
        )
    meta = {
        "preset": "fbfid",
        "version": __version__,
        "trajectories": plan.points[0].config.trajectories,
        "window": "steps in [3, 6] * t1_ratio",
    }
    write_csv(path, header, rows, metadata=meta)


def _run_fig2(plan: PresetPlan, path: Path, workers: int) -> None:
    header = ["alpha2"] + series_header()
    rows = []
    for point in plan.points:
        result = run_ensemble(point.config, workers=workers)
        rows.extend(series_rows(result, prefix=(point.label["alpha2"],)))
    meta = {
        "preset": plan.name,
        "version": __version__,
        "eta": 0.75,
        "alpha2_sweep": list(_FIG2_ALPHA2),
        "trajectories": plan.points[0].config.trajectories,
        "feedback_enabled": plan.points[0].config.feedback_enabled,
    }
    write_csv(path, header, rows, metadata=meta)


def run_preset(
    name: str,
    out_path: str | Path,
    trajectories=None,
    seed=None,
    workers: int = 1,
) -> Path:
    """Execute a preset end to end and write its CSV (plus metadata sidecar)."""
    plan = experiment_preset(name, trajectories=trajectories, seed=seed)
    path = Path(out_path)
    if name == "fig3":
        _run_fig3(path)
    elif name == "thyvssim":
        _run_thyvssim(plan, path, workers)
    elif name == "fbfid":
        _run_fbfid(plan, path, workers)
    else:
        _run_fig2(plan, path, workers)
    return path
