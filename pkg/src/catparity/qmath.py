"""Two-qubit state algebra, Bell basis, local gates, and decay channel.

Density matrices are plain complex ``numpy`` arrays of shape (4, 4) in the
computational basis ordered ``|00>, |01>, |10>, |11>`` (first qubit A, second
qubit B).  All operations return fresh arrays; nothing mutates its input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "BASIS_LABELS",
    "BELL_KET",
    "BELL_ORDER",
    "CatParams",
    "DecayParams",
    "GATES",
    "HADAMARD_BOTH",
    "PARITY_Z",
    "Q_MINUS",
    "Q_PLUS",
    "amplitude_damp",
    "apply_local_gate",
    "apply_unitary",
    "bell_diagonal",
    "check_density",
    "density",
    "fidelity",
    "initial_density",
    "norm_const",
    "random_density",
]

BASIS_LABELS = ("00", "01", "10", "11")

_SQRT_HALF = math.sqrt(0.5)

# Bell kets, ordered: even-parity plus, even-parity minus, odd plus, odd minus.
BELL_ORDER = ("bell_e_plus", "bell_e_minus", "bell_o_plus", "bell_o_minus")
BELL_KET = {
    "bell_e_plus": np.array([_SQRT_HALF, 0.0, 0.0, _SQRT_HALF], dtype=complex),
    "bell_e_minus": np.array([_SQRT_HALF, 0.0, 0.0, -_SQRT_HALF], dtype=complex),
    "bell_o_plus": np.array([0.0, _SQRT_HALF, _SQRT_HALF, 0.0], dtype=complex),
    "bell_o_minus": np.array([0.0, _SQRT_HALF, -_SQRT_HALF, 0.0], dtype=complex),
}

# Projectors onto the even (+) and odd (-) joint-parity subspaces, and the
# parity observable sigma_z otimes sigma_z.
Q_PLUS = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
Q_MINUS = np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex)
PARITY_Z = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)

_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_H = np.array([[1.0, 1.0], [1.0, -1.0]]) * _SQRT_HALF
_EYE2 = np.eye(2)
# pi/2 rotation about Y: R|0> = (|0>+|1>)/sqrt2, R|1> = (-|0>+|1>)/sqrt2.
_RY2 = np.array([[1.0, -1.0], [1.0, 1.0]]) * _SQRT_HALF

GATES = {
    "X_A_pi": np.kron(_X, _EYE2).astype(complex),
    "Z_A_pi": np.kron(_Z, _EYE2).astype(complex),
    "Y_both_halfpi": np.kron(_RY2, _RY2).astype(complex),
}
HADAMARD_BOTH = np.kron(_H, _H).astype(complex)


@dataclass(frozen=True)
class CatParams:
    """Probe parameters: mean photon number ``alpha2`` and line transmission ``eta``."""

    alpha2: float
    eta: float

    def __post_init__(self) -> None:
        if not (self.alpha2 >= 0.0 and math.isfinite(self.alpha2)):
            raise ConfigError(f"alpha2 must be finite and >= 0, got {self.alpha2}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class DecayParams:
    """Single-qubit energy relaxation per measurement iteration.

    ``t1_ratio`` is the qubit lifetime divided by the duration of one
    iteration.  ``gamma`` is the matching per-iteration decay probability,
    ``1 - exp(-1/t1_ratio)``; it is derived unless supplied, in which case it
    must agree with the derived value to 1e-14.
    """

    t1_ratio: float
    gamma: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not self.t1_ratio > 0.0:
            raise ConfigError(f"t1_ratio must be > 0, got {self.t1_ratio}")
        expected = -math.expm1(-1.0 / self.t1_ratio)
        if self.gamma is None:
            object.__setattr__(self, "gamma", expected)
        elif abs(self.gamma - expected) > 1e-14:
            raise ConfigError(
                f"gamma={self.gamma} inconsistent with t1_ratio={self.t1_ratio} "
                f"(expected {expected})"
            )


def norm_const(beta2: float, sign) -> float:
    """Normalization of a cat state with mean photon number ``beta2``.

    Returns ``sqrt(2 + 2*exp(-2*beta2))`` for the even (+) superposition and
    ``sqrt(2 - 2*exp(-2*beta2))`` for the odd (-) one.  ``sign`` may be +1/-1
    or the strings "+"/"-".
    """
    s = _parity_sign(sign)
    if beta2 < 0:
        raise ConfigError(f"beta2 must be >= 0, got {beta2}")
    if s > 0:
        return math.sqrt(2.0 + 2.0 * math.exp(-2.0 * beta2))
    # 2 - 2exp(-2b) = -2*expm1(-2b), exact at beta2 = 0
    return math.sqrt(-2.0 * math.expm1(-2.0 * beta2))


def _parity_sign(sign) -> int:
    if sign in (1, +1, "+", "plus", "even"):
        return 1
    if sign in (-1, "-", "minus", "odd"):
        return -1
    raise ConfigError(f"parity sign must be +1 or -1, got {sign!r}")


def density(ket: np.ndarray) -> np.ndarray:
    """Rank-one density matrix |ket><ket| (ket need not be normalized)."""
    v = np.asarray(ket, dtype=complex)
    return np.outer(v, v.conj()) / float(np.vdot(v, v).real)


def fidelity(rho: np.ndarray, ket: np.ndarray) -> float:
    """<ket| rho |ket> for a normalized pure target state."""
    v = np.asarray(ket, dtype=complex)
    return float(np.real(v.conj() @ rho @ v))


def check_density(rho: np.ndarray, atol: float = 1e-10) -> None:
    """Assert Hermiticity, unit trace, and positive semidefiniteness."""
    if rho.shape != (4, 4):
        raise ConfigError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ConfigError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > max(atol, 1e-12):
        raise ConfigError(f"trace is {np.trace(rho).real}, expected 1")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -atol:
        raise ConfigError(f"negative eigenvalue {eigs.min()}")


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def apply_local_gate(rho: np.ndarray, gate: str) -> np.ndarray:
    """Apply a named local pulse.

    ``X_A_pi``: pi rotation of qubit A about X, exchanging the two
    joint-parity subspaces.  ``Y_both_halfpi``: simultaneous pi/2 rotation of
    both qubits about Y, exchanging the even-minus and odd-plus Bell states
    while fixing the other two.
    """
    try:
        u = GATES[gate]
    except KeyError:
        raise ConfigError(f"unknown gate {gate!r}; expected one of {sorted(GATES)}") from None
    return apply_unitary(rho, u)


def amplitude_damp(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Exact amplitude damping of both qubits with per-iteration probability ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for ka in (k0, k1):
        for kb in (k0, k1):
            op = np.kron(ka, kb)
            out += op @ rho @ op.conj().T
    return out


def two_qubit_damping_kraus(gamma: float) -> np.ndarray:
    """The four product Kraus operators of ``amplitude_damp`` stacked as (4, 4, 4)."""
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return np.stack([np.kron(ka, kb) for ka in (k0, k1) for kb in (k0, k1)])


def bell_diagonal(rho: np.ndarray) -> np.ndarray:
    """Populations of the four Bell states, ordered as ``BELL_ORDER``."""
    return np.array([fidelity(rho, BELL_KET[name]) for name in BELL_ORDER])


def initial_density(name: str) -> np.ndarray:
    """Named initial states: ``plus_x_plus_x`` or any of ``BELL_ORDER``."""
    if name == "plus_x_plus_x":
        return density(np.full(4, 0.5, dtype=complex))
    if name in BELL_KET:
        return density(BELL_KET[name])
    raise ConfigError(
        f"unknown initial state {name!r}; expected 'plus_x_plus_x' or one of {list(BELL_ORDER)}"
    )


def random_density(rng: np.random.Generator) -> np.ndarray:
    """Full-rank random density matrix from the Ginibre ensemble."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
