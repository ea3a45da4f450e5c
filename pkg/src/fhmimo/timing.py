"""Pilot-phase estimation and timing-offset candidate enumeration.

The pilot hop's per-antenna amplitudes are Y_m = b * e^{-j*2*pi*m*u/M} * w^{k_m}
with w = e^{j*angle} the per-sub-band rotator produced by the timing offset
(angle = -2*pi*B*eta/K).  Dividing adjacent amplitudes twice cancels both the
common gain b and the linear spatial phase, leaving

    Ybar_m = w^{kappa_m},   kappa_m = k_m - 2*k_{m+1} + k_{m+2},

so each ratio term measures kappa_m times the wanted angle.  Unit-curvature
terms are averaged coherently after conjugating the kappa = -1 ones (folding
estimator); higher-curvature co-prime terms are de-wrapped jointly through
their remainder structure (remainder estimator), which trades a smaller
asymptotic floor for outlier risk at low SNR.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .config import RadarConfig
from .errors import (
    DivZero,
    EmptySet,
    NeitherApplicable,
    NoConsistentTuple,
)
from .seqdesign import KappaProfile

__all__ = [
    "CAE",
    "CRE",
    "TimingEstimate",
    "wrap_angle",
    "ratio_chain",
    "cae",
    "cre",
    "default_gate",
    "select_estimator",
    "eta_candidates",
]

CAE = "cae"
CRE = "cre"


def wrap_angle(x):
    """Wrap radians into [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


@dataclass
class TimingEstimate:
    """Estimated rotator angle and the offset candidates it implies."""

    angle_omega: float
    estimator: str
    eta_candidates: np.ndarray  # (D,) seconds, ascending
    l_eta_candidates: np.ndarray  # (D,) whole-sample offsets


def ratio_chain(amplitudes: np.ndarray) -> np.ndarray:
    """Double adjacent-ratio of the pilot amplitudes; gain/steering cancel."""
    y = np.asarray(amplitudes, dtype=complex)
    if np.any(np.abs(y) == 0):
        raise DivZero("pilot amplitude is exactly zero")
    single = y[:-1] / y[1:]
    return single[:-1] / single[1:]


def cae(ybar: np.ndarray, profile: KappaProfile) -> float:
    """Folding estimator: coherent mean over the unit-curvature terms.

    Terms with kappa = -1 rotate opposite to the wanted angle; flipping the
    sign of their imaginary part folds them onto the kappa = +1 terms before
    averaging.
    """
    if profile.m_bar == 0:
        raise EmptySet("no unit-curvature terms to fold")
    idx = np.asarray(profile.fold_idx)
    terms = np.asarray(ybar)[idx]
    kap = profile.fold_kappas()
    folded = terms.real + 1j * kap * terms.imag
    return float(np.angle(np.mean(folded)))


def _circ_dist(a, b):
    return np.abs(wrap_angle(a - b))


def _circ_mean(angles: np.ndarray) -> float:
    ref = angles[0]
    return float(wrap_angle(ref + np.mean(wrap_angle(angles - ref))))


def default_gate(profile: KappaProfile) -> float:
    """Consistency gate 2*pi/(3*min|kappa|) over the remainder set."""
    return 2 * np.pi / (3 * np.min(np.abs(profile.crt_kappas())))


def cre(
    ybar: np.ndarray,
    profile: KappaProfile,
    d_max: int | None = None,
    gate: float | None = None,
) -> float:
    """Remainder estimator: de-wrap each high-curvature term and reconcile.

    Term m constrains the angle to the residue set
    {(angle(Ybar_m) + 2*pi*d)/kappa_m} within [-pi, pi); co-prime curvatures
    make exactly one choice per term line up across terms.  The tuple with
    the smallest maximum pairwise circular spread wins and its circular mean
    is returned.  With ``gate`` set, a best spread beyond it raises
    NoConsistentTuple instead (low-SNR failure signal); sweeps that must
    always produce a number leave the gate off.
    """
    if profile.m_breve < 2:
        raise EmptySet("remainder set needs at least 2 terms")
    kap = profile.crt_kappas()
    if d_max is None:
        d_max = int(np.max(np.abs(kap)))
    ybar = np.asarray(ybar)
    cand_sets = []
    for i, m in enumerate(profile.crt_idx):
        theta = np.angle(ybar[m])
        d = np.arange(-d_max, d_max + 1)
        c = (theta + 2 * np.pi * d) / kap[i]
        cand_sets.append(c[(c >= -np.pi) & (c < np.pi)])
    best_spread, best_tuple = np.inf, None
    for combo in product(*cand_sets):
        combo = np.asarray(combo)
        spread = max(
            _circ_dist(combo[i], combo[j])
            for i in range(combo.size)
            for j in range(i + 1, combo.size)
        )
        if spread < best_spread:
            best_spread, best_tuple = spread, combo
    if gate is not None and best_spread > gate:
        raise NoConsistentTuple(
            f"best candidate spread {best_spread:.3f} rad exceeds gate {gate:.3f}"
        )
    return _circ_mean(best_tuple)


def select_estimator(
    gamma_db: float, gamma_t_db: float, profile: KappaProfile
) -> str:
    """Pick the working-regime estimator around the SNR threshold.

    The remainder estimator wins above the threshold (smaller floor) but
    degrades catastrophically below it; the folding estimator is the safe
    low-SNR choice.  Falls back to whichever set is non-empty.
    """
    has_cae = profile.m_bar >= 1
    has_cre = profile.m_breve >= 2
    if not has_cae and not has_cre:
        raise NeitherApplicable("sequence supports neither estimator")
    if has_cre and (gamma_db > gamma_t_db or not has_cae):
        return CRE
    return CAE


def eta_candidates(angle_omega: float, cfg: RadarConfig) -> tuple[np.ndarray, np.ndarray]:
    """All offsets in (0, T) consistent with the estimated rotator angle.

    Inverting w = e^{-j*2*pi*B*eta/K} gives eta = K*(2*pi*d - angle)/(2*pi*B)
    for integer d; the strict (0, T) window keeps B*T/K of them (one fewer
    when the angle is exactly 0), spaced exactly K/B apart.  Also returns the
    rounded whole-sample offsets.
    """
    spacing = cfg.subbands / cfg.bandwidth  # K/B seconds between candidates
    base = -angle_omega / (2 * np.pi) * spacing
    d_lo = int(np.floor(-base / spacing)) - 1
    d_hi = int(np.ceil((cfg.hop_duration - base) / spacing)) + 1
    etas = base + spacing * np.arange(d_lo, d_hi + 1)
    etas = etas[(etas > 0) & (etas < cfg.hop_duration)]
    l_etas = np.round(etas / cfg.sample_period).astype(int)
    return etas, l_etas
