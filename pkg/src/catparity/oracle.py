"""Independent derivation of the measurement operators from first principles.

This module never touches :mod:`catparity.kraus`.  It simulates the physical
probe round exactly, in a symbolic-strength representation: joint kets are
finite superpositions of ``|qubit label> x |probe coherent state> x |env
coherent state>`` with real coherent amplitudes.  Coherent states are not
truncated to a Fock cutoff; every inner product is evaluated through the
closed-form overlap ``<b1|b2> = exp(-(b1-b2)^2/2)``, so the pipeline is exact
to floating point.

The round is: prepare the even cat on the probe and vacuum in the
environment; conditionally flip the cat parity on qubit A; send the probe
through a transmission-``eta`` beam splitter coupling it to the environment;
conditionally flip the (attenuated) cat parity on qubit B; finally read the
photon-number parity of the probe and, fictitiously, of the environment.
Conditioning on the two parities and normalizing against the reference
post-measurement cats yields the matrix elements of each measurement
operator, which :func:`derive_kraus` assembles for comparison against the
closed-form construction.

The conditional parity flip is the unitary swapping the even and odd cat
states on the span of ``|b>, |-b>``; in coherent components, with
``w = exp(-2 b^2)``:

    F|b>  = ( |b> - w |-b> ) / sqrt(1 - w^2)
    F|-b> = ( w |b> - |-b> ) / sqrt(1 - w^2)

and the parity projector splits each coherent component in place:

    P(s)|b> = ( |b> + s |-b> ) / 2        s = +1 even, -1 odd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateProbeError, PipelineOrderError
from .qmath import BASIS_LABELS, CatParams, norm_const

__all__ = [
    "JointKet",
    "KetTerm",
    "apply_UA",
    "apply_UB",
    "apply_beamsplitter",
    "coherent_overlap",
    "derive_kraus",
    "initial_probe_ket",
    "project_parity",
]


def coherent_overlap(b1: float, b2: float) -> float:
    """Overlap of two coherent states with real amplitudes."""
    d = b1 - b2
    return math.exp(-0.5 * d * d)


@dataclass(frozen=True)
class KetTerm:
    """One coherent component: label in BASIS_LABELS, real mode amplitudes, coefficient."""

    label: str
    probe: float
    env: float
    coeff: complex


@dataclass(frozen=True)
class JointKet:
    """Finite coherent superposition of qubit x probe x environment states."""

    terms: tuple[KetTerm, ...]

    def merged(self) -> "JointKet":
        """Combine terms sharing (label, probe, env); drop exact-zero coefficients."""
        acc: dict[tuple[str, float, float], complex] = {}
        for t in self.terms:
            key = (t.label, t.probe + 0.0, t.env + 0.0)  # +0.0 folds -0.0 into 0.0
            acc[key] = acc.get(key, 0.0) + t.coeff
        kept = tuple(
            KetTerm(label, probe, env, c)
            for (label, probe, env), c in acc.items()
            if c != 0.0
        )
        return JointKet(kept)

    def inner(self, other: "JointKet") -> complex:
        """<self|other> via the coherent-state Gram matrix."""
        total = 0.0 + 0.0j
        for ti in self.terms:
            for tj in other.terms:
                if ti.label != tj.label:
                    continue
                ov = coherent_overlap(ti.probe, tj.probe) * coherent_overlap(ti.env, tj.env)
                total += ti.coeff.conjugate() * tj.coeff * ov
        return total

    def norm_sq(self) -> float:
        return float(self.inner(self).real)


def initial_probe_ket(label: str, alpha2: float, weight: complex = 1.0) -> JointKet:
    """``weight * |label> x |even cat(alpha)> x |vacuum>`` as coherent terms."""
    if label not in BASIS_LABELS:
        raise PipelineOrderError(f"label must be one of {BASIS_LABELS}, got {label!r}")
    alpha = math.sqrt(alpha2)
    inv = weight / norm_const(alpha2, +1)
    return JointKet(
        (
            KetTerm(label, +alpha, 0.0, inv),
            KetTerm(label, -alpha, 0.0, inv),
        )
    )


def _flip_parity_terms(ket: JointKet, scale: float, qubit_index: int) -> JointKet:
    """Flip the probe cat parity on terms whose qubit ``qubit_index`` is 1.

    ``scale`` is the magnitude the probe amplitudes must currently have; the
    flip matrix depends on it through ``w = exp(-2 scale^2)``.
    """
    if scale <= 0.0:
        raise DegenerateProbeError("parity flip undefined on a zero-amplitude probe")
    w = math.exp(-2.0 * scale * scale)
    root = math.sqrt(1.0 - w * w)
    out: list[KetTerm] = []
    for t in ket.terms:
        if abs(abs(t.probe) - scale) > 1e-12 * max(1.0, scale):
            raise PipelineOrderError(
                f"probe amplitude {t.probe} does not match expected scale {scale}"
            )
        if t.label[qubit_index] == "0":
            out.append(t)
            continue
        if t.probe > 0:
            # F|b> = (|b> - w|-b>)/root
            out.append(replace(t, coeff=t.coeff / root))
            out.append(replace(t, probe=-t.probe, coeff=-w * t.coeff / root))
        else:
            # F|-b> = (w|b> - |-b>)/root
            out.append(replace(t, probe=-t.probe, coeff=w * t.coeff / root))
            out.append(replace(t, coeff=-t.coeff / root))
    return JointKet(tuple(out)).merged()


def apply_UA(ket: JointKet, alpha: float) -> JointKet:
    """Conditional cat parity flip controlled by qubit A, at probe scale ``alpha``."""
    return _flip_parity_terms(ket, alpha, qubit_index=0)


def apply_UB(ket: JointKet, sqrt_eta_alpha: float) -> JointKet:
    """Conditional cat parity flip controlled by qubit B, after attenuation."""
    return _flip_parity_terms(ket, sqrt_eta_alpha, qubit_index=1)


def apply_beamsplitter(ket: JointKet, eta: float) -> JointKet:
    """Couple probe to environment: ``|b>|0> -> |sqrt(eta) b>|sqrt(1-eta) b>``."""
    if not 0.0 <= eta <= 1.0:
        raise PipelineOrderError(f"eta must lie in [0, 1], got {eta}")
    se, sl = math.sqrt(eta), math.sqrt(1.0 - eta)
    out = []
    for t in ket.terms:
        if t.env != 0.0:
            raise PipelineOrderError("beam splitter expects the environment in vacuum")
        out.append(replace(t, probe=se * t.probe, env=sl * t.probe))
    return JointKet(tuple(out)).merged()


def project_parity(ket: JointKet, mode: str, sign: int) -> tuple[JointKet, float]:
    """Project one mode onto photon-number parity ``sign``.

    Returns the unnormalized projected ket and its squared norm (the outcome
    weight).  Structural zeros cancel exactly: the projected ket then has no
    terms and weight 0.0.
    """
    if mode not in ("probe", "env"):
        raise PipelineOrderError(f"mode must be 'probe' or 'env', got {mode!r}")
    if sign not in (1, -1):
        raise PipelineOrderError(f"sign must be +1 or -1, got {sign!r}")
    out: list[KetTerm] = []
    for t in ket.terms:
        half = t.coeff * 0.5
        if mode == "probe":
            out.append(replace(t, coeff=half))
            out.append(replace(t, probe=-t.probe, coeff=sign * half))
        else:
            out.append(replace(t, coeff=half))
            out.append(replace(t, env=-t.env, coeff=sign * half))
    projected = JointKet(tuple(out)).merged()
    return projected, projected.norm_sq()


def _cat_reference_overlap(
    ket: JointKet, label: str, probe_b2: float, probe_sign: int, env_b2: float, env_sign: int
) -> complex:
    """Amplitude of ``|label> x |cat(probe)> x |cat(env)>`` in ``ket``."""
    np_ = norm_const(probe_b2, probe_sign)
    ne_ = norm_const(env_b2, env_sign)
    if np_ == 0.0 or ne_ == 0.0:
        raise ZeroDivisionError("reference cat state has zero norm")
    bp, be = math.sqrt(probe_b2), math.sqrt(env_b2)
    total = 0.0 + 0.0j
    for t in ket.terms:
        if t.label != label:
            continue
        ovp = coherent_overlap(bp, t.probe) + probe_sign * coherent_overlap(-bp, t.probe)
        ove = coherent_overlap(be, t.env) + env_sign * coherent_overlap(-be, t.env)
        total += t.coeff * ovp * ove / (np_ * ne_)
    return total


def derive_kraus(params: CatParams) -> dict[tuple[int, int], np.ndarray]:
    """Run the full pipeline and return the four measurement operators.

    Keys are (probe parity, environment parity) pairs with values the
    (4, 4) real matrices.  Derived with no reference to the closed-form
    construction; intended as its cross-check.
    """
    a2, eta = params.alpha2, params.eta
    if a2 <= 0.0:
        raise DegenerateProbeError("derivation needs alpha2 > 0")
    alpha = math.sqrt(a2)
    probe_b2 = eta * a2
    env_b2 = (1.0 - eta) * a2

    out = {(sp, se): np.zeros((4, 4)) for sp in (1, -1) for se in (1, -1)}
    for idx, label in enumerate(BASIS_LABELS):
        ket = initial_probe_ket(label, a2)
        ket = apply_UA(ket, alpha)
        ket = apply_beamsplitter(ket, eta)
        ket = apply_UB(ket, math.sqrt(probe_b2))
        nrm = ket.norm_sq()
        if abs(nrm - 1.0) > 1e-12:
            raise PipelineOrderError(f"pipeline norm drifted to {nrm} on |{label}>")
        for sp in (1, -1):
            probe_proj, _ = project_parity(ket, "probe", sp)
            for se in (1, -1):
                both, weight = project_parity(probe_proj, "env", se)
                if not both.terms:
                    continue  # structurally forbidden branch
                amp = _cat_reference_overlap(both, label, probe_b2, sp, env_b2, se)
                if abs(amp.imag) > 1e-12:
                    raise PipelineOrderError(f"complex amplitude {amp} on |{label}>")
                if abs(weight - abs(amp) ** 2) > 1e-10:
                    raise PipelineOrderError(
                        "projected ket is not proportional to the reference cat product"
                    )
                out[(sp, se)][idx, idx] = amp.real
    return out
