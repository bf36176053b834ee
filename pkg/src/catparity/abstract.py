"""Idealized models of eigenstate-preserving parity meters.

Strips the cat-probe physics down to its information content: a meter that
reports joint parity correctly with probability ``xi`` and never disturbs
parity eigenstates.  Also hosts three structural demonstrations: a classical
bit-flip channel reduces to such a meter; any probe channel that is a root of
the identity can be compensated so the targets are untouched for every loss
count; and a phase-flip channel cannot (a single inserted Z converts the
even-plus Bell state into even-minus).  A four-qubit circuit using a shared
entangled ancilla pair realizes the same meter with local operations only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ImpossibleOutcomeError
from .kraus import Outcome
from .qmath import BASIS_LABELS, Q_MINUS, Q_PLUS, density

__all__ = [
    "PhaseFlipReport",
    "ProbeChannelSpec",
    "RootChannelReport",
    "XiModel",
    "entanglement_based_parity",
    "entanglement_parity_branches",
    "phaseflip_counterexample",
    "poisson_pmf",
    "root_channel_demo",
    "xi_from_bitflips",
    "xi_measurement",
]


@dataclass(frozen=True)
class XiModel:
    """Readout assignment fidelity: parity is reported correctly with probability xi."""

    xi: float

    def __post_init__(self) -> None:
        if not 0.5 <= self.xi <= 1.0:
            raise ConfigError(f"xi must lie in [0.5, 1], got {self.xi}")


def xi_measurement(
    rho: np.ndarray, xm: XiModel, outcome: Outcome
) -> tuple[float, np.ndarray]:
    """Outcome probability and back-action of the noisy parity meter.

    p(+) = xi <Q+> + (1-xi) <Q->, and the conditioned state mixes the two
    parity-projected components with the same weights.  States supported in a
    single parity block are exact fixed points for every outcome.
    """
    if outcome not in (1, -1):
        raise ImpossibleOutcomeError(f"outcome must be +1 or -1, got {outcome!r}")
    w_plus = xm.xi if outcome == 1 else 1.0 - xm.xi
    w_minus = 1.0 - w_plus
    proj_plus = Q_PLUS @ rho @ Q_PLUS
    proj_minus = Q_MINUS @ rho @ Q_MINUS
    prob = float(np.trace(w_plus * proj_plus + w_minus * proj_minus).real)
    if prob < 1e-14:
        raise ImpossibleOutcomeError(
            f"outcome {outcome:+d} has probability {prob:.3e} on this state"
        )
    return prob, (w_plus * proj_plus + w_minus * proj_minus) / prob


def xi_from_bitflips(pmf) -> float:
    """Assignment fidelity of a meter read through a bit-flip channel.

    ``pmf`` maps flip counts to probabilities (mapping, or sequence indexed
    from zero).  An even number of flips leaves the report correct, so
    ``xi = sum over even n of P(n)``.  Values below 1/2 are returned as-is
    but flagged with a warning: they describe a meter whose labels are
    inverted, not a broken one.
    """
    if hasattr(pmf, "items"):
        items = list(pmf.items())
    else:
        items = list(enumerate(pmf))
    total = math.fsum(p for _, p in items)
    if abs(total - 1.0) > 1e-9 or any(p < 0 for _, p in items):
        raise ConfigError(f"pmf must be nonnegative and sum to 1, got sum {total}")
    xi = math.fsum(p for n, p in items if n % 2 == 0)
    if xi < 0.5:
        warnings.warn(
            f"xi = {xi} < 1/2: detection labels are inverted; consider relabeling",
            stacklevel=2,
        )
    return xi


def poisson_pmf(lam: float, tail: float = 1e-18) -> list[float]:
    """Poisson probabilities P(0), P(1), ... truncated once terms fall below ``tail``.

    The cutoff tests the terms themselves, past the distribution's mode;
    testing the remaining mass instead can stall on cancellation error.
    """
    if lam < 0:
        raise ConfigError(f"rate must be >= 0, got {lam}")
    out = [math.exp(-lam)]
    n = 0
    while out[-1] > tail or n <= lam:
        n += 1
        out.append(out[-1] * lam / n)
    return out


@dataclass(frozen=True)
class ProbeChannelSpec:
    """A probe error channel that is a root of the identity.

    ``u_c`` is the per-error unitary on a d-dimensional probe and ``n_root``
    the even N with ``u_c**N = 1``.  ``loss_distribution`` gives the
    probability of each applied count n.
    """

    u_c: np.ndarray
    n_root: int
    loss_distribution: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        u = np.asarray(self.u_c, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ConfigError(f"u_c must be square, got shape {u.shape}")
        if not np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12):
            raise ConfigError("u_c is not unitary")
        if self.n_root < 2 or self.n_root % 2 != 0:
            raise ConfigError(f"n_root must be an even integer >= 2, got {self.n_root}")
        if np.linalg.norm(np.linalg.matrix_power(u, self.n_root) - np.eye(u.shape[0])) > 1e-12:
            raise ConfigError("u_c ** n_root differs from the identity")
        pm = self.loss_distribution
        if any(p < 0 for p in pm) or abs(math.fsum(pm) - 1.0) > 1e-9:
            raise ConfigError("loss_distribution must be a pmf")
        object.__setattr__(self, "u_c", u)

    def compensator(self) -> np.ndarray:
        """V = u_c ** (N/2); applying it once per target excitation undoes the parity kick."""
        return np.linalg.matrix_power(self.u_c, self.n_root // 2)


@dataclass(frozen=True)
class RootChannelReport:
    probe_out: np.ndarray
    target_preserved: bool
    target_fidelity: float


def root_channel_demo(
    spec: ProbeChannelSpec, target_parity: str, n_applied: int
) -> RootChannelReport:
    """Send a probe past two targets through a channel erring ``n_applied`` times.

    The circuit applies ``V = u_c**(N/2)`` conditioned on target A, then the
    channel error ``u_c**n``, then ``V`` conditioned on target B.  Because the
    two conditionings contribute ``V**(qA+qB)`` and ``V**2 = 1``, the probe
    picks up a factor that depends only on the target parity, and the target
    superposition is exactly preserved whatever ``n`` is.

    The target is prepared in the maximally coherent state of the requested
    parity; preservation is asserted against that worst case.
    """
    if target_parity not in ("even", "odd"):
        raise ConfigError(f"target_parity must be even or odd, got {target_parity!r}")
    if n_applied < 0:
        raise ConfigError(f"n_applied must be >= 0, got {n_applied}")
    d = spec.u_c.shape[0]
    psi0 = np.zeros(d, dtype=complex)
    psi0[0] = 1.0
    v = spec.compensator()
    channel = np.linalg.matrix_power(spec.u_c, n_applied)

    labels = ("00", "11") if target_parity == "even" else ("01", "10")
    # Joint state as one probe vector per equal-weight target label.
    probes = {}
    for label in labels:
        qa, qb = int(label[0]), int(label[1])
        op = np.linalg.matrix_power(v, qb) @ channel @ np.linalg.matrix_power(v, qa)
        probes[label] = op @ psi0

    # Reduced target state: gram matrix of the probe vectors on the 2-dim support.
    # A relative phase between the branches is a real target rotation, so the
    # fidelity uses the signed overlap, not its magnitude.
    l0, l1 = labels
    g01 = complex(np.vdot(probes[l0], probes[l1]))
    target_fid = 0.5 + 0.5 * g01.real
    preserved = bool(abs(target_fid - 1.0) <= 1e-12)
    return RootChannelReport(
        probe_out=probes[l0], target_preserved=preserved, target_fidelity=float(target_fid)
    )


@dataclass(frozen=True)
class PhaseFlipReport:
    target_clean: np.ndarray
    target_flipped: np.ndarray
    target_mixture: np.ndarray
    flip_overlap: float


def phaseflip_counterexample() -> PhaseFlipReport:
    """A single probe phase flip rewrites the target state: no compensation exists.

    The probe qubit starts in |0>, picks up a CNOT from each target qubit,
    and is measured.  Without errors the even-plus Bell target is returned
    intact.  Inserting one Z on the probe between the two CNOTs flips the
    sign of the |11> branch: the target emerges as the even-minus Bell state,
    orthogonal to what it was, even though the probe reading is unchanged.
    The unread-error average destroys the target coherence entirely.
    """
    plus = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    minus = np.array([1.0, 0.0, 0.0, -1.0], dtype=complex) / math.sqrt(2.0)

    def run(insert_z: bool) -> np.ndarray:
        # probe amplitude per target label after CNOT(A->p), optional Z_p, CNOT(B->p)
        out = np.zeros(4, dtype=complex)
        for idx, label in enumerate(BASIS_LABELS):
            qa, qb = int(label[0]), int(label[1])
            amp = plus[idx]
            if amp == 0:
                continue
            sign = -1.0 if (insert_z and qa == 1) else 1.0  # Z acts on probe state |qa>
            # second CNOT returns the probe to |0> whenever qa == qb
            if qa != qb:
                raise ConfigError("unreachable: even-parity input")
            out[idx] = sign * amp
        return out / np.linalg.norm(out)

    clean = run(False)
    flipped = run(True)
    mixture = 0.5 * density(clean) + 0.5 * density(flipped)
    return PhaseFlipReport(
        target_clean=clean,
        target_flipped=flipped,
        target_mixture=mixture,
        flip_overlap=float(abs(np.vdot(minus, flipped))),
    )


_PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)


def _cnot_pair_permutation() -> np.ndarray:
    """Permutation on |qA qB qA1 qB1> applying CNOT(A->A1) and CNOT(B->B1)."""
    perm = np.zeros((16, 16))
    for idx in range(16):
        qa, qb, qa1, qb1 = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        j = (qa << 3) | (qb << 2) | ((qa1 ^ qa) << 1) | (qb1 ^ qb)
        perm[j, idx] = 1.0
    return perm


def entanglement_parity_branches(
    rho_targets: np.ndarray,
) -> list[tuple[Outcome, float, np.ndarray]]:
    """Outcome distribution of the ancilla-pair parity circuit.

    Both targets pick up a CNOT onto their half of a shared (|00>+|11>)/sqrt2
    ancilla pair; the ancillas are then read out in the computational basis.
    Correlated results report even parity, anticorrelated odd.  Returns
    ``(outcome, probability, post target state)`` for both outcomes.
    """
    total = np.kron(np.asarray(rho_targets, dtype=complex), density(_PHI_PLUS))
    perm = _cnot_pair_permutation()
    total = perm @ total @ perm.T
    branches: list[tuple[Outcome, float, np.ndarray]] = []
    for outcome, results in ((1, ((0, 0), (1, 1))), (-1, ((0, 1), (1, 0)))):
        acc = np.zeros((4, 4), dtype=complex)
        for qa1, qb1 in results:
            sel = np.zeros(4, dtype=bool)
            sel[(qa1 << 1) | qb1] = True
            block = total.reshape(4, 4, 4, 4)[:, sel][:, 0][:, :, sel][:, :, 0]
            acc += block
        prob = float(np.trace(acc).real)
        branches.append((outcome, prob, acc / prob if prob > 1e-14 else acc))
    return branches


def entanglement_based_parity(
    rho_targets: np.ndarray, rng: np.random.Generator | None = None
) -> tuple[Outcome, np.ndarray]:
    """Sample one run of the ancilla-pair circuit: (outcome, post target state)."""
    branches = entanglement_parity_branches(rho_targets)
    if rng is None:
        rng = np.random.default_rng()
    u = rng.random()
    outcome, prob, post = branches[0]
    if u >= prob:
        outcome, prob, post = branches[1]
    if prob < 1e-14:
        raise ImpossibleOutcomeError("degenerate branch sampled with zero probability")
    return outcome, post
