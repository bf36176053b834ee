"""Closed-loop stabilization of the even-plus Bell state.

Each iteration measures the joint parity once, feeds the outcome to a filter
(an estimator of the state), fires a conditional pi pulse on qubit A whenever
the filter puts more than half the weight on odd parity, and finishes with
unconditional pi/2 pulses on both qubits.  The pi/2 pulses convert leftover
within-parity phase errors into parity errors the next measurement can see,
so the loop funnels population into the target from every corner of Bell
space.

Two filters are provided.  The full filter propagates a complete density
matrix through exactly the maps the true state undergoes.  The bell filter
keeps only the four Bell-state populations: the measurement restricted to
Bell-diagonal states acts block-linearly within each parity pair, pulses
permute populations, and relaxation contributes its Bell-diagonal part.
After the first measurement no coherences relevant to the controller
survive, so both filters decide identically (decay off).

An alternating-basis stepper is included for the picture in which the pi/2
rotations are absorbed into the measurement axis: even iterations measure
z-parity, odd iterations x-parity, with corrective pi pulses fired in the
matching basis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, ImpossibleOutcomeError
from .kraus import KrausSet, Outcome, apply_outcome, build_kraus, outcome_probs, sample_measurement
from .qmath import (
    BELL_KET,
    BELL_ORDER,
    GATES,
    HADAMARD_BOTH,
    CatParams,
    DecayParams,
    amplitude_damp,
    apply_unitary,
    bell_diagonal,
    density,
    initial_density,
)

__all__ = [
    "BellPopulations",
    "FeedbackConfig",
    "FilterState",
    "StepTrace",
    "bell_damping_matrix",
    "bell_outcome_matrix",
    "controller_decide",
    "feedback_step",
    "filter_update",
    "heisenberg_step",
    "make_filter",
]


class StepTrace(NamedTuple):
    """What the controller saw and did during one iteration."""

    outcome: int
    pulse_fired: bool
    p_odd_filter: float

# Population index permutations induced by the pulses (order e+, e-, o+, o-):
# X on qubit A swaps the parity pairs; the joint pi/2 Y pulse swaps e- with o+;
# Z on qubit A swaps plus and minus within each parity.
_PERM_X_A = (2, 3, 0, 1)
_PERM_Y2 = (0, 2, 1, 3)
_PERM_Z_A = (1, 0, 3, 2)
# Hadamard on both qubits exchanges the roles of z- and x-parity: it swaps
# e- with o+ and fixes the other two Bell populations.
_PERM_HH = (0, 2, 1, 3)

# Computational-basis index permutation of X otimes I.
_XA_INDEX = (2, 3, 0, 1)

BellPopulations = np.ndarray  # four reals >= 0 summing to 1, order BELL_ORDER


@dataclass(frozen=True)
class FeedbackConfig:
    """Everything one stabilization run needs."""

    cat: CatParams
    decay: DecayParams | None = None
    picture: str = "schrodinger"
    filter_mode: str = "bell"
    initial_state: str = "plus_x_plus_x"
    steps: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.picture not in ("schrodinger", "heisenberg"):
            raise ConfigError(f"picture must be schrodinger or heisenberg, got {self.picture!r}")
        if self.filter_mode not in ("full", "bell"):
            raise ConfigError(f"filter_mode must be full or bell, got {self.filter_mode!r}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")


@dataclass(frozen=True)
class FilterState:
    """Controller's state estimate: a density matrix or four Bell populations.

    Exactly one representation is active, selected by ``mode``.  ``step``
    counts completed iterations and drives the measurement-axis alternation
    of the alternating-basis stepper.
    """

    mode: str
    full_rho: np.ndarray | None = None
    pops: BellPopulations | None = None
    step: int = 0

    def __post_init__(self) -> None:
        if self.mode == "full":
            if self.full_rho is None or self.pops is not None:
                raise ConfigError("full mode requires full_rho and no pops")
        elif self.mode == "bell":
            if self.pops is None or self.full_rho is not None:
                raise ConfigError("bell mode requires pops and no full_rho")
        else:
            raise ConfigError(f"mode must be full or bell, got {self.mode!r}")

    def odd_probability(self) -> float:
        if self.mode == "full":
            return float(np.real(self.full_rho[1, 1] + self.full_rho[2, 2]))
        return float(self.pops[2] + self.pops[3])

    def bell_populations(self) -> BellPopulations:
        if self.mode == "full":
            return bell_diagonal(self.full_rho)
        return self.pops.copy()


def make_filter(cfg: FeedbackConfig) -> FilterState:
    """Initial filter state for a run: the true initial state, or its Bell diagonal."""
    rho0 = initial_density(cfg.initial_state)
    if cfg.filter_mode == "full":
        return FilterState(mode="full", full_rho=rho0)
    return FilterState(mode="bell", pops=bell_diagonal(rho0))


def _parity_block_matrix(d1: float, d2: float) -> np.ndarray:
    """Unnormalized population map of diag(d1, d2) acting on one parity pair.

    On the pair basis (plus, minus) of ``(|u> +- |v>)/sqrt2`` with Kraus
    entries d1 at |u> and d2 at |v>, conjugation sends populations through
    ``[[(d1+d2)^2, (d1-d2)^2], [(d1-d2)^2, (d1+d2)^2]] / 4``.
    """
    s = (d1 + d2) ** 2 / 4.0
    x = (d1 - d2) ** 2 / 4.0
    return np.array([[s, x], [x, s]])


def bell_outcome_matrix(ks: KrausSet, outcome: Outcome) -> np.ndarray:
    """Unnormalized 4x4 linear map on Bell populations for one detector outcome."""
    m_even, m_odd = ks.outcome_pair(outcome)
    de = np.diag(m_even).real
    do = np.diag(m_odd).real
    if outcome == -1:  # even-support operator is m_mm, odd-support is m_mp
        de, do = do, de
    out = np.zeros((4, 4))
    out[:2, :2] = _parity_block_matrix(de[0], de[3])
    out[2:, 2:] = _parity_block_matrix(do[1], do[2])
    return out


@lru_cache(maxsize=32)
def bell_damping_matrix(gamma: float) -> np.ndarray:
    """Bell-diagonal part of two-qubit amplitude damping, as a population map.

    Built by embedding each Bell state, damping it exactly, and reading the
    Bell diagonal back; relaxation also creates within-parity coherences,
    which the bell filter discards by construction.
    """
    cols = []
    for name in BELL_ORDER:
        rho = amplitude_damp(density(BELL_KET[name]), gamma)
        cols.append(bell_diagonal(rho))
    out = np.stack(cols, axis=1)
    out.setflags(write=False)
    return out


def filter_update(fs: FilterState, ks: KrausSet, outcome: Outcome) -> FilterState:
    """Condition the filter on one detector outcome."""
    if fs.mode == "full":
        return replace(fs, full_rho=apply_outcome(fs.full_rho, ks, outcome))
    unnorm = bell_outcome_matrix(ks, outcome) @ fs.pops
    weight = float(unnorm.sum())
    if weight < 1e-14:
        raise ImpossibleOutcomeError(
            f"outcome {outcome:+d} has probability {weight:.3e} on the filter state"
        )
    return replace(fs, pops=unnorm / weight)


def controller_decide(fs: FilterState) -> str:
    """``apply_pi`` iff the filter's odd-parity probability exceeds 1/2; ties skip."""
    return "apply_pi" if fs.odd_probability() > 0.5 else "skip"


def _filter_damp(fs: FilterState, gamma: float) -> FilterState:
    if fs.mode == "full":
        return replace(fs, full_rho=amplitude_damp(fs.full_rho, gamma))
    return replace(fs, pops=bell_damping_matrix(gamma) @ fs.pops)


def _filter_gate(fs: FilterState, gate: str, perm: tuple[int, ...]) -> FilterState:
    if fs.mode == "full":
        return replace(fs, full_rho=apply_unitary(fs.full_rho, GATES[gate]))
    return replace(fs, pops=fs.pops[list(perm)])


def feedback_step(
    rho: np.ndarray,
    fs: FilterState,
    cfg: FeedbackConfig,
    ks: KrausSet,
    rng: np.random.Generator,
    trace: list[StepTrace] | None = None,
) -> tuple[np.ndarray, FilterState, Outcome]:
    """One closed-loop iteration: damp, measure, filter, pi pulse, pi/2 pulses."""
    if cfg.decay is not None:
        rho = amplitude_damp(rho, cfg.decay.gamma)
        fs = _filter_damp(fs, cfg.decay.gamma)
    outcome, rho = sample_measurement(rho, ks, rng)
    fs = filter_update(fs, ks, outcome)
    fire = controller_decide(fs) == "apply_pi"
    if trace is not None:
        trace.append(StepTrace(outcome, fire, fs.odd_probability()))
    if fire:
        rho = apply_unitary(rho, GATES["X_A_pi"])
        fs = _filter_gate(fs, "X_A_pi", _PERM_X_A)
    rho = apply_unitary(rho, GATES["Y_both_halfpi"])
    fs = _filter_gate(fs, "Y_both_halfpi", _PERM_Y2)
    return rho, replace(fs, step=fs.step + 1), outcome


def _conjugate_hh(rho: np.ndarray) -> np.ndarray:
    return HADAMARD_BOTH @ rho @ HADAMARD_BOTH


def _filter_hh(fs: FilterState) -> FilterState:
    if fs.mode == "full":
        return replace(fs, full_rho=_conjugate_hh(fs.full_rho))
    return replace(fs, pops=fs.pops[list(_PERM_HH)])


def heisenberg_step(
    rho: np.ndarray,
    fs: FilterState,
    cfg: FeedbackConfig,
    rng: np.random.Generator,
    trace: list[StepTrace] | None = None,
) -> tuple[np.ndarray, FilterState, Outcome]:
    """One iteration with alternating measurement axes instead of pi/2 pulses.

    Iteration parity comes from ``fs.step``: even steps measure z-parity with
    the operators as built; odd steps measure x-parity by conjugating the
    state with Hadamards on both qubits, measuring, and rotating back.  After
    a z-basis (x-basis) measurement the corrective pulse is X on qubit A
    (Z on qubit A), fired when the filter's odd probability in the measured
    basis exceeds 1/2.
    """
    ks = _cached_kraus(cfg.cat)
    if cfg.decay is not None:
        rho = amplitude_damp(rho, cfg.decay.gamma)
        fs = _filter_damp(fs, cfg.decay.gamma)
    x_basis = fs.step % 2 == 1
    if x_basis:
        rho = _conjugate_hh(rho)
        fs = _filter_hh(fs)
    outcome, rho = sample_measurement(rho, ks, rng)
    fs = filter_update(fs, ks, outcome)
    fire = controller_decide(fs) == "apply_pi"
    if trace is not None:
        trace.append(StepTrace(outcome, fire, fs.odd_probability()))
    if fire:
        rho = apply_unitary(rho, GATES["X_A_pi"])
        fs = _filter_gate(fs, "X_A_pi", _PERM_X_A)
    if x_basis:
        rho = _conjugate_hh(rho)
        fs = _filter_hh(fs)
    return rho, replace(fs, step=fs.step + 1), outcome


@lru_cache(maxsize=64)
def _cached_kraus(cat: CatParams) -> KrausSet:
    return build_kraus(cat)
