"""Monte-Carlo ensemble runner with a deterministic reduction contract.

Trajectories are independent given the master seed: trajectory ``i`` draws
from its own generator derived by :func:`catparity.rng.stream_seed`, so
results do not depend on how trajectories are grouped or scheduled.  The
runner processes trajectories in fixed chunks of :data:`CHUNK_SIZE` as
vectorized ``(chunk, 4, 4)`` array operations, accumulates per-chunk sums,
and merges the chunks in index order.  Worker pools only reorder *when*
chunks are computed, never what they contain or how they are combined, which
makes the output bytes independent of the worker count.

The vectorized stepper mirrors the single-trajectory contract functions of
:mod:`catparity.feedback` operation for operation (same operators, same
accumulation order, one uniform variate per step), so the two paths agree to
floating-point precision and produce identical outcome streams.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._version import __version__
from .errors import ConfigError, ImpossibleOutcomeError
from .feedback import (
    _PERM_HH,
    _PERM_X_A,
    _PERM_Y2,
    FeedbackConfig,
    StepTrace,
    bell_damping_matrix,
    bell_outcome_matrix,
    feedback_step,
    heisenberg_step,
    make_filter,
)
from .kraus import build_kraus, sample_measurement
from .qmath import (
    BELL_KET,
    GATES,
    HADAMARD_BOTH,
    amplitude_damp,
    bell_diagonal,
    fidelity,
    initial_density,
    two_qubit_damping_kraus,
)
from .rng import trajectory_rng

__all__ = [
    "CHUNK_SIZE",
    "STAT_NAMES",
    "EnsembleConfig",
    "EnsembleResult",
    "TrajectoryEvent",
    "run_ensemble",
    "run_trajectory",
    "series_header",
    "write_events_csv",
    "write_series_csv",
]

# Recorded per-step statistics of the true state, in column order.
STAT_NAMES = ("fid_be_plus", "fid_bo_plus", "fid_closest", "z_parity", "coherence")

# Reduction granularity.  Fixed, never configurable: the chunk boundaries are
# part of the determinism contract.
CHUNK_SIZE = 100

_Z_WEIGHTS = np.array([1.0, -1.0, -1.0, 1.0])


class TrajectoryEvent(NamedTuple):
    """One event-log row: what happened during one iteration of one trajectory."""

    step: int
    outcome: int
    pulse_fired: bool
    fid_be_plus: float
    p_odd_filter: float


@dataclass(frozen=True)
class EnsembleConfig:
    """A batch of identically configured trajectories."""

    base: FeedbackConfig
    trajectories: int = 1000
    feedback_enabled: bool = True
    record_every: int = 1

    def __post_init__(self) -> None:
        if self.trajectories < 1:
            raise ConfigError(f"trajectories must be >= 1, got {self.trajectories}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if self.base.steps < self.record_every:
            raise ConfigError(
                f"record_every = {self.record_every} exceeds steps = {self.base.steps}"
            )


@dataclass(frozen=True)
class EnsembleResult:
    """Trajectory-averaged series plus an echo of how they were produced.

    ``mean`` and ``sem`` map each name in :data:`STAT_NAMES` to an array over
    recorded steps; ``step`` holds the 1-based iteration numbers.  When a
    window was requested, ``window_mean``/``window_sem`` summarize each
    trajectory's time average of ``fid_be_plus`` over that step range.
    """

    step: np.ndarray
    mean: dict[str, np.ndarray]
    sem: dict[str, np.ndarray]
    metadata: dict
    window_mean: float | None = None
    window_sem: float | None = None


def _stats_scalar(rho: np.ndarray) -> tuple[float, float, float, float, float]:
    fbe = fidelity(rho, BELL_KET["bell_e_plus"])
    fbo = fidelity(rho, BELL_KET["bell_o_plus"])
    diag = np.real(np.diagonal(rho))
    return (
        fbe,
        fbo,
        max(fbe, fbo),
        float(diag @ _Z_WEIGHTS),
        abs(rho[0, 3]) + abs(rho[1, 2]),
    )


def run_trajectory(
    cfg: FeedbackConfig,
    feedback: bool,
    rng: np.random.Generator,
    record_every: int = 1,
    events: list[TrajectoryEvent] | None = None,
) -> dict[str, np.ndarray]:
    """Evolve one trajectory and return its per-step statistics.

    ``feedback = False`` runs the bare repeated measurement: optional decay,
    then one sampled parity measurement per step, no pulses and no filter.
    ``feedback = True`` delegates each step to the configured stepper.  The
    returned dict maps :data:`STAT_NAMES` to arrays sampled every
    ``record_every`` steps (plus ``"step"`` with the iteration numbers), all
    evaluated on the true state after the full step.
    """
    rho = initial_density(cfg.initial_state)
    ks = build_kraus(cfg.cat)
    fs = make_filter(cfg) if feedback else None
    n_rec = cfg.steps // record_every
    out = {name: np.empty(n_rec) for name in STAT_NAMES}
    steps_col = np.empty(n_rec, dtype=int)
    trace: list[StepTrace] = []
    rec = 0
    for t in range(cfg.steps):
        if feedback:
            if cfg.picture == "heisenberg":
                rho, fs, _ = heisenberg_step(rho, fs, cfg, rng, trace=trace)
            else:
                rho, fs, _ = feedback_step(rho, fs, cfg, ks, rng, trace=trace)
        else:
            if cfg.decay is not None:
                rho = amplitude_damp(rho, cfg.decay.gamma)
            outcome, rho = sample_measurement(rho, ks, rng)
            trace.append(
                StepTrace(outcome, False, float(np.real(rho[1, 1] + rho[2, 2])))
            )
        if events is not None:
            last = trace[-1]
            events.append(
                TrajectoryEvent(
                    step=t + 1,
                    outcome=last.outcome,
                    pulse_fired=last.pulse_fired,
                    fid_be_plus=fidelity(rho, BELL_KET["bell_e_plus"]),
                    p_odd_filter=last.p_odd_filter,
                )
            )
        if (t + 1) % record_every == 0:
            vals = _stats_scalar(rho)
            for name, v in zip(STAT_NAMES, vals):
                out[name][rec] = v
            steps_col[rec] = t + 1
            rec += 1
        if events is None:
            trace.clear()
    out["step"] = steps_col
    return out


def _batch_damp(rho: np.ndarray, damp_ops: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for op in damp_ops:
        out += op @ rho @ op.conj().T
    return out


def _batch_apply_outcome(rho, mask, plus_pair, minus_pair):
    out = np.empty_like(rho)
    for sel, (m1, m2) in ((mask, plus_pair), (~mask, minus_pair)):
        if not sel.any():
            continue
        sub = rho[sel]
        res = m1 @ sub @ m1.conj().T + m2 @ sub @ m2.conj().T
        weight = np.einsum("nii->n", res).real
        if weight.min() < 1e-14:
            raise ImpossibleOutcomeError(
                f"an outcome with probability {weight.min():.3e} was sampled"
            )
        out[sel] = res / weight[:, None, None]
    return out


def _batch_stats(rho: np.ndarray) -> np.ndarray:
    """The five statistics for a stack of states, shape (len(STAT_NAMES), n)."""
    b_e = BELL_KET["bell_e_plus"]
    b_o = BELL_KET["bell_o_plus"]
    fbe = np.einsum("i,nij,j->n", b_e.conj(), rho, b_e).real
    fbo = np.einsum("i,nij,j->n", b_o.conj(), rho, b_o).real
    diag = np.real(np.diagonal(rho, axis1=1, axis2=2))
    return np.stack(
        [
            fbe,
            fbo,
            np.maximum(fbe, fbo),
            diag @ _Z_WEIGHTS,
            np.abs(rho[:, 0, 3]) + np.abs(rho[:, 1, 2]),
        ]
    )


def _run_chunk(
    cfg: EnsembleConfig, start: int, count: int, window: tuple[int, int] | None
):
    """Simulate trajectories [start, start+count) and reduce them.

    Returns ``(sums, sumsq, wsum, wsumsq)`` where the first two have shape
    ``(len(STAT_NAMES), recorded steps)`` and the last two are scalars over
    the per-trajectory window averages of ``fid_be_plus`` (zeros when no
    window was requested).
    """
    base = cfg.base
    ks = build_kraus(base.cat)
    m_pp, m_pm, m_mp, m_mm = ks.operators()
    d = ks.diagonals()
    w_plus = d[0] ** 2 + d[1] ** 2

    uniforms = np.empty((count, base.steps))
    for i in range(count):
        uniforms[i] = trajectory_rng(base.seed, start + i).random(base.steps)

    rho0 = initial_density(base.initial_state)
    rho = np.broadcast_to(rho0, (count, 4, 4)).copy()

    feedback = cfg.feedback_enabled
    heisenberg = feedback and base.picture == "heisenberg"
    bell_filter = feedback and base.filter_mode == "bell"
    # The full filter receives exactly the updates the true state receives and
    # starts equal to it, so tracking it separately would duplicate `rho`;
    # full-mode decisions read the true state directly.
    pops = None
    if bell_filter:
        pops = np.broadcast_to(bell_diagonal(rho0), (count, 4)).copy()

    gamma = base.decay.gamma if base.decay is not None else None
    if gamma is not None:
        damp_ops = two_qubit_damping_kraus(gamma)
        bell_damp_t = bell_damping_matrix(gamma).T if bell_filter else None

    x_a = GATES["X_A_pi"]
    y2 = GATES["Y_both_halfpi"]
    w_out = {1: bell_outcome_matrix(ks, 1).T, -1: bell_outcome_matrix(ks, -1).T}
    perm_xa, perm_y2, perm_hh = list(_PERM_X_A), list(_PERM_Y2), list(_PERM_HH)

    n_rec = base.steps // cfg.record_every
    sums = np.zeros((len(STAT_NAMES), n_rec))
    sumsq = np.zeros_like(sums)
    win_acc = np.zeros(count)
    win_len = 0
    rec = 0

    for t in range(base.steps):
        if gamma is not None:
            rho = _batch_damp(rho, damp_ops)
            if bell_filter:
                pops = pops @ bell_damp_t
        x_basis = heisenberg and t % 2 == 1
        if x_basis:
            rho = HADAMARD_BOTH @ rho @ HADAMARD_BOTH
            if bell_filter:
                pops = pops[:, perm_hh]

        diag = np.real(np.diagonal(rho, axis1=1, axis2=2))
        p_plus = diag @ w_plus
        mask = uniforms[:, t] < p_plus
        rho = _batch_apply_outcome(rho, mask, (m_pp, m_pm), (m_mp, m_mm))

        if feedback:
            if bell_filter:
                unnorm = np.where(mask[:, None], pops @ w_out[1], pops @ w_out[-1])
                weight = unnorm.sum(axis=1)
                if weight.min() < 1e-14:
                    raise ImpossibleOutcomeError(
                        "an outcome the filter deems impossible was sampled"
                    )
                pops = unnorm / weight[:, None]
                p_odd = pops[:, 2] + pops[:, 3]
            else:
                p_odd = np.real(rho[:, 1, 1] + rho[:, 2, 2])
            fire = p_odd > 0.5
            if fire.any():
                sub = rho[fire]
                rho[fire] = x_a @ sub @ x_a.conj().T
                if bell_filter:
                    pops[fire] = pops[fire][:, perm_xa]
            if heisenberg:
                if x_basis:
                    rho = HADAMARD_BOTH @ rho @ HADAMARD_BOTH
                    if bell_filter:
                        pops = pops[:, perm_hh]
            else:
                rho = y2 @ rho @ y2.conj().T
                if bell_filter:
                    pops = pops[:, perm_y2]

        if window is not None and window[0] <= t + 1 <= window[1]:
            b_e = BELL_KET["bell_e_plus"]
            win_acc += np.einsum("i,nij,j->n", b_e.conj(), rho, b_e).real
            win_len += 1
        if (t + 1) % cfg.record_every == 0:
            vals = _batch_stats(rho)
            sums[:, rec] = vals.sum(axis=1)
            sumsq[:, rec] = (vals**2).sum(axis=1)
            rec += 1

    if window is not None and win_len > 0:
        wmeans = win_acc / win_len
        return sums, sumsq, float(wmeans.sum()), float((wmeans**2).sum())
    return sums, sumsq, 0.0, 0.0


def _mean_sem(total: np.ndarray, total_sq: np.ndarray, n: int):
    mean = total / n
    if n < 2:
        return mean, np.zeros_like(mean)
    var = np.maximum(total_sq - n * mean**2, 0.0) / (n - 1)
    return mean, np.sqrt(var / n)


def config_metadata(cfg: EnsembleConfig) -> dict:
    base = cfg.base
    return {
        "version": __version__,
        "alpha2": base.cat.alpha2,
        "eta": base.cat.eta,
        "t1_ratio": base.decay.t1_ratio if base.decay is not None else None,
        "gamma": base.decay.gamma if base.decay is not None else None,
        "picture": base.picture,
        "filter_mode": base.filter_mode,
        "initial_state": base.initial_state,
        "steps": base.steps,
        "seed": base.seed,
        "trajectories": cfg.trajectories,
        "feedback_enabled": cfg.feedback_enabled,
        "record_every": cfg.record_every,
    }


def run_ensemble(
    cfg: EnsembleConfig,
    workers: int = 1,
    window: tuple[int, int] | None = None,
) -> EnsembleResult:
    """Average ``cfg.trajectories`` trajectories of ``cfg.base``.

    ``workers`` sizes a thread pool over fixed chunks; it affects wall time
    only, never the result.  ``window = (lo, hi)`` additionally averages
    ``fid_be_plus`` over that inclusive 1-based step range within each
    trajectory and reports the across-trajectory mean and standard error.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    if window is not None:
        lo, hi = window
        if not 1 <= lo <= hi <= cfg.base.steps:
            raise ConfigError(f"window {window} does not fit in [1, {cfg.base.steps}]")

    n = cfg.trajectories
    spans = [(s, min(CHUNK_SIZE, n - s)) for s in range(0, n, CHUNK_SIZE)]
    if workers == 1 or len(spans) == 1:
        parts = [_run_chunk(cfg, s, c, window) for s, c in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sc: _run_chunk(cfg, sc[0], sc[1], window), spans))

    # Merge strictly in chunk-index order; addition order is part of the
    # determinism contract.
    total = parts[0][0].copy()
    total_sq = parts[0][1].copy()
    wsum = parts[0][2]
    wsumsq = parts[0][3]
    for s2, q2, w2, wq2 in parts[1:]:
        total += s2
        total_sq += q2
        wsum += w2
        wsumsq += wq2

    mean, sem = _mean_sem(total, total_sq, n)
    n_rec = cfg.base.steps // cfg.record_every
    step = np.arange(1, n_rec + 1) * cfg.record_every

    window_mean = window_sem = None
    if window is not None:
        wmean, wsem = _mean_sem(np.array([wsum]), np.array([wsumsq]), n)
        window_mean, window_sem = float(wmean[0]), float(wsem[0])

    return EnsembleResult(
        step=step,
        mean={name: mean[i] for i, name in enumerate(STAT_NAMES)},
        sem={name: sem[i] for i, name in enumerate(STAT_NAMES)},
        metadata=config_metadata(cfg),
        window_mean=window_mean,
        window_sem=window_sem,
    )


def _fmt(value) -> str:
    """Canonical CSV cell: shortest round-trip decimal for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(
    path: str | Path,
    header: list[str] | tuple[str, ...],
    rows,
    metadata: dict | None = None,
) -> None:
    """Write rows in the canonical byte format, plus an optional JSON sidecar.

    The CSV bytes depend only on the data: fixed header order, ``\\n`` line
    endings, floats via shortest round-trip repr.  Metadata goes to
    ``<path>.meta.json`` so it never perturbs the CSV.
    """
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="")
    if metadata is not None:
        sidecar = path.with_name(path.name + ".meta.json")
        sidecar.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")


def series_header(prefix_cols: tuple[str, ...] = ()) -> list[str]:
    header = list(prefix_cols) + ["step"]
    for name in STAT_NAMES:
        header += [f"{name}_mean", f"{name}_sem"]
    return header


def series_rows(result: EnsembleResult, prefix: tuple = ()):
    for i, step in enumerate(result.step):
        row = list(prefix) + [int(step)]
        for name in STAT_NAMES:
            row += [result.mean[name][i], result.sem[name][i]]
        yield row


def write_series_csv(path: str | Path, result: EnsembleResult) -> None:
    """One ensemble's averaged series as CSV, with config echo in a sidecar."""
    write_csv(path, series_header(), series_rows(result), metadata=result.metadata)


def write_events_csv(path: str | Path, events: list[TrajectoryEvent]) -> None:
    """Single-trajectory event log: one row per iteration."""
    header = ["step", "outcome", "pulse_fired", "fid_be_plus", "p_odd_filter"]
    write_csv(path, header, events)
