"""Exact measurement back-action of one probe round.

A shared even cat probe interrogates the joint parity of two remote qubits.
Along the way a fraction ``1 - eta`` of the probe light is lost into an
unmonitored environment mode, which performs a second, hidden parity
measurement.  Conditioning on the detector result (+ or -) while averaging
over the environment yields a two-outcome channel built from four diagonal
operators, one per (detector, environment) result pair.

With ``N+-(b2) = sqrt(2 +- 2 exp(-2 b2))`` the cat normalizations, and
writing ``e = eta*alpha2`` (light reaching the detector) and
``l = (1-eta)*alpha2`` (light lost), the operators are diagonal in the
computational basis ``|00>, |01>, |10>, |11>``:

    M(+,+) = N+(l)/2 * diag( N+(e)/N+(a),  0,            0,            N-(e)/N-(a) )
    M(+,-) = N-(l)/2 * diag( 0,            N-(e)/N+(a),  N+(e)/N-(a),  0           )
    M(-,+) = N+(l)/2 * diag( 0,            N+(e)/N+(a),  N-(e)/N-(a),  0           )
    M(-,-) = N-(l)/2 * diag( N-(e)/N+(a),  0,            0,            N+(e)/N-(a) )

where ``a = alpha2``.  The + outcome keeps even-parity weight through M(+,+)
and odd-parity weight through M(+,-); the four operators together resolve the
identity.  Computational basis states are eigenstates of every operator, so
the measurement never transfers population between them: parity eigenspaces
are exactly preserved, and the only back-action inside a parity subspace is a
slow contraction of coherence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProbeError, ImpossibleOutcomeError
from .qmath import CatParams, norm_const

__all__ = [
    "KrausSet",
    "Outcome",
    "apply_outcome",
    "build_kraus",
    "outcome_probs",
    "sample_measurement",
]

# Detector outcome: +1 (even parity reported) or -1 (odd parity reported).
Outcome = int

_OUTCOMES = (1, -1)


@dataclass(frozen=True)
class KrausSet:
    """The four measurement operators for one parameter point.

    Operators are stored as dense real (4, 4) arrays for uniformity with
    gate conjugation, even though they are diagonal.  ``m_pp`` pairs detector
    + with environment +, ``m_pm`` detector + with environment -, and so on.
    """

    params: CatParams
    m_pp: np.ndarray
    m_pm: np.ndarray
    m_mp: np.ndarray
    m_mm: np.ndarray

    def operators(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.m_pp, self.m_pm, self.m_mp, self.m_mm)

    def outcome_pair(self, outcome: Outcome) -> tuple[np.ndarray, np.ndarray]:
        """The two operators consistent with a detector ``outcome``."""
        if outcome == 1:
            return (self.m_pp, self.m_pm)
        if outcome == -1:
            return (self.m_mp, self.m_mm)
        raise ImpossibleOutcomeError(f"outcome must be +1 or -1, got {outcome!r}")

    def diagonals(self) -> np.ndarray:
        """All four diagonals stacked as a (4, 4) float array, row order pp, pm, mp, mm."""
        return np.stack([np.diag(m).real for m in self.operators()])


def build_kraus(params: CatParams) -> KrausSet:
    """Assemble the measurement operators for ``params``.

    At ``eta = 1`` the lost-light cat has zero odd weight, so the two
    environment-odd operators vanish identically and the measurement is the
    ideal projective parity measurement for every ``alpha2``.  ``alpha2 = 0``
    with ``eta < 1`` leaves the odd-cat normalizations 0/0 and is rejected.
    """
    a2, eta = params.alpha2, params.eta
    if a2 == 0.0:
        if eta < 1.0:
            raise DegenerateProbeError(
                "alpha2 = 0 with eta < 1: probe carries no parity information"
            )
        return KrausSet(
            params=params,
            m_pp=np.diag([1.0, 0.0, 0.0, 1.0]),
            m_pm=np.zeros((4, 4)),
            m_mp=np.diag([0.0, 1.0, 1.0, 0.0]),
            m_mm=np.zeros((4, 4)),
        )

    e2 = eta * a2  # photons reaching the detector
    l2 = (1.0 - eta) * a2  # photons lost to the environment
    lp = norm_const(l2, +1) / 2.0
    lm = norm_const(l2, -1) / 2.0
    a = norm_const(e2, +1) / norm_const(a2, +1)
    b = norm_const(e2, -1) / norm_const(a2, -1)
    c = norm_const(e2, -1) / norm_const(a2, +1)
    d = norm_const(e2, +1) / norm_const(a2, -1)

    return KrausSet(
        params=params,
        m_pp=np.diag([lp * a, 0.0, 0.0, lp * b]),
        m_pm=np.diag([0.0, lm * c, lm * d, 0.0]),
        m_mp=np.diag([0.0, lp * a, lp * b, 0.0]),
        m_mm=np.diag([lm * c, 0.0, 0.0, lm * d]),
    )


def outcome_probs(rho: np.ndarray, ks: KrausSet) -> tuple[float, float]:
    """Probabilities of detector outcomes (+, -) on state ``rho``."""
    diag = np.real(np.diagonal(rho))
    d = ks.diagonals()
    p_plus = float((d[0] ** 2 + d[1] ** 2) @ diag)
    p_minus = float((d[2] ** 2 + d[3] ** 2) @ diag)
    return p_plus, p_minus


def apply_outcome(rho: np.ndarray, ks: KrausSet, outcome: Outcome) -> np.ndarray:
    """Normalized post-measurement state given a detector ``outcome``.

    Raises ``ImpossibleOutcomeError`` when the outcome has probability below
    1e-14 on ``rho``.
    """
    m1, m2 = ks.outcome_pair(outcome)
    out = m1 @ rho @ m1.conj().T + m2 @ rho @ m2.conj().T
    weight = float(np.trace(out).real)
    if weight < 1e-14:
        raise ImpossibleOutcomeError(
            f"outcome {outcome:+d} has probability {weight:.3e} on this state"
        )
    return out / weight


def sample_measurement(
    rho: np.ndarray, ks: KrausSet, rng: np.random.Generator
) -> tuple[Outcome, np.ndarray]:
    """Draw one detector outcome and return it with the updated state.

    Consumes exactly one uniform variate from ``rng``; identical (state,
    seed) pairs reproduce identical results on any platform.
    """
    p_plus, _ = outcome_probs(rho, ks)
    outcome: Outcome = 1 if rng.random() < p_plus else -1
    return outcome, apply_outcome(rho, ks, outcome)
