"""Closed-form predictors for the repeated parity measurement.

Two exponential rates govern everything.  Per measurement iteration the
average parity purity converges at

    r_parity    = (1/2) log( (1 - exp(-4 a)) / (1 - exp(-4 (1-eta) a)) )

while coherence inside a parity subspace is lost at

    r_dephasing = (1/2) log( (1 - exp(-4 a)) / (1 - exp(-4 eta a)) )

with ``a = alpha2``.  Both follow from exact single-step contraction
identities for two functionals of the state: the parity Lyapunov function

    V(rho) = sqrt(rho_00 rho_10) + sqrt(rho_11 rho_01)

(indices label computational populations) contracts on average by
``exp(-r_parity)`` per step, and the within-parity coherence

    C(rho) = |<00|rho|11>| + |<01|rho|10>|

contracts on average by ``exp(-r_dephasing)``.

From the two rates the module predicts the iteration count at which the two
error contributions balance, the resulting best fidelity, a closed-form
shortcut through the Lambert W function, the coarse-grained population flow
among the four Bell states under measurement plus feedback, its steady state,
and the photon number maximizing that steady state under qubit decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, NoSolutionError
from .kraus import KrausSet, apply_outcome, outcome_probs
from .qmath import CatParams, DecayParams

__all__ = [
    "AlphaOptimum",
    "MeasEstimate",
    "RatePair",
    "alpha2_for_fmeas",
    "coherence_C",
    "coherence_curve",
    "contraction_factor",
    "expected_contraction",
    "integrate_rate_ode",
    "lambert_w0",
    "lyapunov_V",
    "nmeas_lambert",
    "optimize_alpha",
    "parity_curve",
    "product_curve",
    "rate_generator",
    "rate_ode",
    "rates",
    "solve_nmeas",
    "solve_nmeas_from_rates",
    "steady_populations",
    "steady_state",
]


@dataclass(frozen=True)
class RatePair:
    """Per-iteration convergence (parity) and decoherence (dephasing) rates."""

    r_parity: float
    r_dephasing: float


class MeasEstimate(NamedTuple):
    n_meas: float
    f_meas: float


class LambertEstimate(NamedTuple):
    n_meas: float
    reliable: bool


@dataclass(frozen=True)
class SteadyState:
    delta: float
    p_target: float
    populations: np.ndarray  # Bell-state populations, order e+, e-, o+, o-


@dataclass(frozen=True)
class AlphaOptimum:
    alpha2: float
    p_steady: float
    delta: float
    at_boundary: bool


_LOG_TWO = math.log(2.0)


def _log_one_minus_exp(x: float) -> float:
    """log(1 - exp(-x)) for x > 0, stable for both tails."""
    if x <= 0.0:
        raise ConfigError(f"need x > 0, got {x}")
    if x > _LOG_TWO:
        return math.log1p(-math.exp(-x))
    return math.log(-math.expm1(-x))


def rates(params: CatParams) -> RatePair:
    """Both rates for one parameter point.

    At ``eta = 1`` dephasing vanishes and the parity rate diverges (the
    measurement is projective); the divergent member is returned as ``inf``
    rather than raising.  Symmetrically at ``eta = 0``.
    """
    a2, eta = params.alpha2, params.eta
    if a2 <= 0.0:
        raise ConfigError("rates need alpha2 > 0")
    if eta == 1.0:
        return RatePair(r_parity=math.inf, r_dephasing=0.0)
    if eta == 0.0:
        return RatePair(r_parity=0.0, r_dephasing=math.inf)
    full = _log_one_minus_exp(4.0 * a2)
    rp = 0.5 * (full - _log_one_minus_exp(4.0 * (1.0 - eta) * a2))
    rd = 0.5 * (full - _log_one_minus_exp(4.0 * eta * a2))
    return RatePair(r_parity=rp, r_dephasing=rd)


def lyapunov_V(rho: np.ndarray) -> float:
    """Parity Lyapunov function; zero exactly on definite-parity states."""
    d = np.real(np.diagonal(rho))
    d = np.maximum(d, 0.0)
    return math.sqrt(d[0] * d[2]) + math.sqrt(d[3] * d[1])


def coherence_C(rho: np.ndarray) -> float:
    """Total within-parity coherence magnitude."""
    return abs(rho[0, 3]) + abs(rho[1, 2])


def contraction_factor(params: CatParams, which: str) -> float:
    """Exact one-step average contraction of V ("parity") or C ("coherence")."""
    a2, eta = params.alpha2, params.eta
    if a2 <= 0.0:
        raise ConfigError("contraction factor needs alpha2 > 0")
    part = (1.0 - eta) if which == "parity" else eta if which == "coherence" else None
    if part is None:
        raise ConfigError(f"which must be 'parity' or 'coherence', got {which!r}")
    if part == 0.0:
        return 0.0
    return math.sqrt(-math.expm1(-4.0 * part * a2) / -math.expm1(-4.0 * a2))


def expected_contraction(
    rho: np.ndarray, ks: KrausSet, which: str
) -> tuple[float, float]:
    """(value before, outcome-averaged value after) for the chosen functional.

    The average is taken explicitly over both detector outcomes with their
    probabilities; it should match ``contraction_factor`` times the starting
    value to floating-point accuracy for every state.
    """
    fn = lyapunov_V if which == "parity" else coherence_C if which == "coherence" else None
    if fn is None:
        raise ConfigError(f"which must be 'parity' or 'coherence', got {which!r}")
    before = fn(rho)
    probs = outcome_probs(rho, ks)
    after = 0.0
    for outcome, p in zip((1, -1), probs):
        if p <= 1e-14:
            continue
        after += p * fn(apply_outcome(rho, ks, outcome))
    return before, after


def lambert_w0(x: float) -> float:
    """Principal Lambert W for x >= 0, by guarded Halley iteration.

    Relative accuracy 1e-12 or better across [0, 1e9].
    """
    if x < 0.0:
        raise ConfigError(f"lambert_w0 needs x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < math.e:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        step = f / denom
        w_next = w - step
        if w_next < 0.0:  # guard: W0(x) >= 0 on this domain
            w_next = w / 2.0
        if abs(w_next - w) <= 1e-13 * max(abs(w_next), 1e-300):
            return w_next
        w = w_next
    raise NoSolutionError(f"lambert_w0 failed to converge for x = {x}")


def solve_nmeas_from_rates(rp: float, rd: float) -> MeasEstimate:
    """Iteration count T solving exp(-rp T) + exp(-rd T) = 1, and the fidelity there.

    Requires rp >= rd > 0.  The left side decreases monotonically from 1 at
    T = 0+ excess, so the root is bracketed by [ln2/rp, ln2/rd]; bisection is
    followed by a Newton polish.
    """
    if not (math.isfinite(rp) and math.isfinite(rd) and rp >= rd > 0.0):
        raise NoSolutionError(f"need finite rates with r_parity >= r_dephasing > 0, got {rp}, {rd}")
    ln2 = math.log(2.0)
    lo, hi = ln2 / rp, ln2 / rd

    def g(t: float) -> float:
        return math.exp(-rp * t) + math.exp(-rd * t) - 1.0

    for _ in range(200):
        if hi - lo <= 1e-12 * hi:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(4):
        gp = -rp * math.exp(-rp * t) - rd * math.exp(-rd * t)
        t -= g(t) / gp
    return MeasEstimate(n_meas=t, f_meas=1.0 - math.exp(-rp * t) / 2.0)


def solve_nmeas(params: CatParams) -> MeasEstimate:
    """Balanced-error iteration count and best expected fidelity for ``params``."""
    if not 0.5 < params.eta < 1.0:
        raise NoSolutionError(
            f"a balanced iteration count needs 0.5 < eta < 1, got eta = {params.eta}"
        )
    rp_rd = rates(params)
    return solve_nmeas_from_rates(rp_rd.r_parity, rp_rd.r_dephasing)


def nmeas_lambert(params: CatParams) -> LambertEstimate:
    """Closed-form iteration count ``W0(r_parity/r_dephasing) / r_parity``.

    A good approximation when the rate ratio is large; the ``reliable`` flag
    is set when ``exp(4 (2 eta - 1) alpha2) >= 100``, the regime where the
    neglected term is under about a percent.
    """
    if not 0.5 < params.eta < 1.0:
        raise NoSolutionError(
            f"the shortcut needs 0.5 < eta < 1, got eta = {params.eta}"
        )
    rp_rd = rates(params)
    value = lambert_w0(rp_rd.r_parity / rp_rd.r_dephasing) / rp_rd.r_parity
    reliable = 4.0 * (2.0 * params.eta - 1.0) * params.alpha2 >= math.log(100.0)
    return LambertEstimate(n_meas=value, reliable=reliable)


def parity_curve(rp_rd: RatePair, t):
    """Predicted dominant-parity population after ``t`` iterations: 1 - exp(-r_p t)/2."""
    return 1.0 - np.exp(-rp_rd.r_parity * np.asarray(t, dtype=float)) / 2.0


def coherence_curve(rp_rd: RatePair, t):
    """Predicted dominant-phase population after ``t`` iterations: (1 + exp(-r_d t))/2."""
    return (1.0 + np.exp(-rp_rd.r_dephasing * np.asarray(t, dtype=float))) / 2.0


def product_curve(rp_rd: RatePair, t):
    """Fidelity estimate combining both effects; peaks near ``solve_nmeas``."""
    return parity_curve(rp_rd, t) * coherence_curve(rp_rd, t)


def alpha2_for_fmeas(eta: float, f_target: float = 0.99) -> float:
    """Photon number at which the balanced-error fidelity equals ``f_target``.

    At the balance point ``exp(-r_p T) = 2 (1 - F)`` and ``exp(-r_d T) =
    2 F - 1``, so hitting F exactly pins the rate ratio to ``log(2 - 2F) /
    log(2F - 1)``.  The ratio grows monotonically with ``alpha2`` from its
    ``alpha2 -> 0`` limit ``log(1 - eta) / log(eta)``, so a bisection on the
    log of the ratio finds the unique solution when one exists.
    """
    if not 0.5 < eta < 1.0:
        raise NoSolutionError(f"need 0.5 < eta < 1, got eta = {eta}")
    if not 0.5 < f_target < 1.0:
        raise NoSolutionError(f"need 0.5 < f_target < 1, got {f_target}")
    ratio_target = math.log(2.0 - 2.0 * f_target) / math.log(2.0 * f_target - 1.0)

    def excess(a2: float) -> float:
        rp_rd = rates(CatParams(alpha2=a2, eta=eta))
        return math.log(rp_rd.r_parity / rp_rd.r_dephasing) - math.log(ratio_target)

    lo = 1e-6
    if excess(lo) > 0.0:
        raise NoSolutionError(
            f"f_meas = {f_target} is exceeded for every alpha2 at eta = {eta}"
        )
    hi = 1.0
    while excess(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise NoSolutionError(
                f"f_meas = {f_target} is unreachable at eta = {eta}"
            )
    for _ in range(200):
        if hi - lo <= 1e-13 * hi:
            break
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _dephasing_drift(rp_rd: RatePair, decay: DecayParams | None) -> float:
    """Effective rate out of a phase-definite Bell pair: r_d/2 plus decay leakage."""
    s = rp_rd.r_dephasing / 2.0
    if decay is not None:
        s += 1.0 / decay.t1_ratio
    return s


def rate_generator(rp_rd: RatePair, decay: DecayParams | None = None) -> np.ndarray:
    """Generator G of the Bell-population flow, d p/dt = G p.

    Populations are ordered (even+, even-, odd+, odd-).  Measurement feedback
    funnels weight toward even+ at ``r_parity`` while dephasing (plus qubit
    decay, when given) mixes each phase pair at the drift rate.  Columns sum
    to zero, so the flow conserves total population by construction.
    """
    rp = rp_rd.r_parity
    s = _dephasing_drift(rp_rd, decay)
    h = (rp + s) / 2.0
    return np.array(
        [
            [-s, h, h, 0.0],
            [s / 2.0, -(rp / 2.0 + s), 0.0, h],
            [s / 2.0, 0.0, -(rp / 2.0 + s), h],
            [0.0, s / 2.0, s / 2.0, -(rp + s)],
        ]
    )


def rate_ode(p: np.ndarray, rp_rd: RatePair, decay: DecayParams | None = None) -> np.ndarray:
    """Time derivative of the Bell populations ``p`` (order e+, e-, o+, o-)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ConfigError(f"expected 4 populations, got shape {p.shape}")
    return rate_generator(rp_rd, decay) @ p


def integrate_rate_ode(
    p0: np.ndarray,
    rp_rd: RatePair,
    decay: DecayParams | None,
    t_final: float,
    dt: float = 0.1,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step RK4 integration, returning (times, trajectory)."""
    g = rate_generator(rp_rd, decay)
    steps = max(1, int(round(t_final / dt)))
    times = np.linspace(0.0, steps * dt, steps + 1)
    out = np.empty((steps + 1, 4))
    p = np.asarray(p0, dtype=float).copy()
    out[0] = p
    for i in range(steps):
        k1 = g @ p
        k2 = g @ (p + 0.5 * dt * k1)
        k3 = g @ (p + 0.5 * dt * k2)
        k4 = g @ (p + dt * k3)
        p = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = p
    return times, out


def steady_populations(delta: float) -> np.ndarray:
    """Steady Bell populations ``(d^2, d, d, 1) / (1 + d)^2`` for ratio ``delta``."""
    if math.isinf(delta):
        return np.array([1.0, 0.0, 0.0, 0.0])
    v = np.array([delta * delta, delta, delta, 1.0])
    return v / ((1.0 + delta) ** 2)


def steady_state(rp_rd: RatePair, decay: DecayParams | None = None) -> SteadyState:
    """Fixed point of the population flow.

    ``delta = 1 + r_parity / (r_dephasing/2 + decay leakage)`` sets the
    geometric population ladder; the target population is
    ``delta^2 / (1 + delta)^2``.  Without any loss channel the fixed point is
    pure and ``delta`` is infinite.
    """
    s = _dephasing_drift(rp_rd, decay)
    if s == 0.0:
        return SteadyState(delta=math.inf, p_target=1.0, populations=steady_populations(math.inf))
    delta = 1.0 + rp_rd.r_parity / s
    pops = steady_populations(delta)
    return SteadyState(delta=delta, p_target=float(pops[0]), populations=pops)


_ALPHA2_WINDOW = (0.05, 30.0)


def optimize_alpha(eta: float, decay: DecayParams) -> AlphaOptimum:
    """Photon number maximizing the steady target population under decay.

    Maximizes ``r_parity / (r_dephasing/2 + 1/t1_ratio)`` over ``alpha2`` in
    a fixed search window by a coarse log-spaced scan followed by
    golden-section refinement.  ``at_boundary`` is set when the optimum pins
    to a window edge (as happens for vanishing decay, where larger probes are
    always better).
    """
    if not 0.5 < eta <= 1.0:
        raise NoSolutionError(f"optimization needs 0.5 < eta <= 1, got eta = {eta}")

    def objective(a2: float) -> float:
        rp_rd = rates(CatParams(alpha2=a2, eta=eta))
        return rp_rd.r_parity / _dephasing_drift(rp_rd, decay)

    lo, hi = _ALPHA2_WINDOW
    grid = np.geomspace(lo, hi, 160)
    values = [objective(a2) for a2 in grid]
    k = int(np.argmax(values))

    if k in (0, len(grid) - 1):
        a2_best = float(grid[k])
        at_boundary = True
    else:
        a2_best = _golden_max(objective, float(grid[k - 1]), float(grid[k + 1]))
        at_boundary = False

    delta = 1.0 + objective(a2_best)
    pops = steady_populations(delta)
    return AlphaOptimum(
        alpha2=a2_best, p_steady=float(pops[0]), delta=delta, at_boundary=at_boundary
    )


def _golden_max(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol * max(1.0, abs(b)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)
