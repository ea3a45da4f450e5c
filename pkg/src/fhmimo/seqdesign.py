"""Pilot hopping-sequence design and the phase-estimator error bounds.

A pilot sequence k_0 < k_1 < ... < k_{M-1} of sub-band indices determines,
through its second difference

    kappa_m = k_m - 2*k_{m+1} + k_{m+2},   m = 0..M-3,

how well the pilot's common phase increment can be estimated.  Terms with
|kappa| = 1 feed the folding (coherent accumulation) estimator; terms with
|kappa| >= 2 whose magnitudes are jointly co-prime feed the remainder
(Chinese-remainder) estimator.  The asymptotic mean-square error floors for
both are closed-form in the kappa profile, which is what the greedy designs
below optimise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigError

__all__ = [
    "KappaProfile",
    "kappa_profile",
    "mselb_cae",
    "mselb_cre",
    "design_cae",
    "design_cre",
    "design_suboptimal",
    "design_sequence",
    "corollary_crossover",
]


@dataclass(frozen=True)
class KappaProfile:
    """Second-difference profile of a pilot sequence and its usable terms.

    ``fold_idx`` lists ratio-chain terms with |kappa| = 1 (folding set,
    cardinality M-bar); ``crt_idx`` lists terms with |kappa| >= 2 kept only
    when there are at least two of them and their magnitudes share no common
    factor, which is what makes the remainder estimator unambiguous.
    """

    kappa: tuple
    fold_idx: tuple
    crt_idx: tuple

    @property
    def m_bar(self) -> int:
        return len(self.fold_idx)

    @property
    def m_breve(self) -> int:
        return len(self.crt_idx)

    def crt_kappas(self) -> np.ndarray:
        return np.asarray([self.kappa[i] for i in self.crt_idx], dtype=int)

    def fold_kappas(self) -> np.ndarray:
        return np.asarray([self.kappa[i] for i in self.fold_idx], dtype=int)

    def restrict(self, valid_antennas) -> "KappaProfile":
        """Profile using only ratio terms whose three antennas are all valid.

        Term m is the double ratio of antennas m, m+1, m+2; dropping an
        antenna (destructive fade, interference) removes every term that
        touches it.  The co-primality rule for the remainder set is
        re-checked on the survivors.
        """
        valid = np.asarray(valid_antennas, dtype=bool)
        keep = [m for m in range(len(self.kappa)) if valid[m : m + 3].all()]
        return _build_profile(self.kappa, keep)


def _build_profile(kappa, active) -> KappaProfile:
    kappa = tuple(int(k) for k in kappa)
    fold = tuple(m for m in active if abs(kappa[m]) == 1)
    crt_cand = [m for m in active if abs(kappa[m]) >= 2]
    mags = [abs(kappa[m]) for m in crt_cand]
    if len(crt_cand) >= 2 and math.gcd(*mags) == 1:
        crt = tuple(crt_cand)
    else:
        crt = ()
    return KappaProfile(kappa=kappa, fold_idx=fold, crt_idx=crt)


def kappa_profile(seq) -> KappaProfile:
    """Second differences of ``seq`` and the derived estimator term sets."""
    seq = np.asarray(seq, dtype=int)
    if seq.ndim != 1 or seq.size < 3:
        raise ConfigError("sequence needs at least 3 entries")
    kappa = seq[:-2] - 2 * seq[1:-1] + seq[2:]
    return _build_profile(kappa, range(seq.size - 2))


# -- error floors ----------------------------------------------------------


def mselb_cae(m_bar: int, samples_per_hop: int, gamma: float) -> float:
    """Asymptotic phase MSE floor of the folding estimator.

    ``gamma`` is the linear per-sample SNR.  The floor is 3/(M_bar*L*gamma):
    each of the M-bar unit-curvature terms contributes an identically
    distributed phase noise of variance 3/(L*gamma) after the double ratio.
    """
    if m_bar < 1:
        raise ConfigError("folding set is empty")
    return 3.0 / (m_bar * samples_per_hop * gamma)


def mselb_cre(kappas, samples_per_hop: int, gamma: float) -> float:
    """Asymptotic phase MSE floor of the remainder estimator.

    Averaging M-breve de-wrapped remainders divides each term's phase noise
    by its curvature squared:  (1/M_breve^2) * sum 3/(kappa^2*L*gamma).
    """
    kappas = np.abs(np.asarray(kappas, dtype=float))
    if kappas.size < 2:
        raise ConfigError("remainder set needs at least 2 terms")
    return float(np.sum(3.0 / (kappas**2 * samples_per_hop * gamma)) / kappas.size**2)


# -- sequence construction -------------------------------------------------


def _cae_recursion(length: int, subbands: int) -> list[int]:
    """Greedy unit-curvature chain: k_{m+2} = 2k_{m+1} - k_m -/+ 1.

    Prefers the -1 branch (slower growth) whenever it keeps the sequence
    strictly increasing, which alternates kappa between +1 and -1.
    """
    if length < 2:
        return list(range(length))
    seq = [0, 1]
    while len(seq) < length:
        lo = 2 * seq[-1] - seq[-2] - 1
        nxt = lo if lo > seq[-1] else lo + 2
        if nxt >= subbands:
            raise ConfigError(
                f"cannot fit a {length}-term unit-curvature chain in {subbands} sub-bands"
            )
        seq.append(nxt)
    return seq


def design_cae(antennas: int, subbands: int) -> np.ndarray:
    """Pilot sequence maximising the folding set (all |kappa| = 1)."""
    if antennas >= subbands:
        raise ConfigError("need antennas < subbands")
    return np.asarray(_cae_recursion(antennas, subbands), dtype=int)


def _best_tail(prefix, subbands: int):
    """Append two sub-bands minimising the remainder-estimator floor shape.

    Scans every pair from the still-free upper range, keeps pairs whose two
    curvatures are >= 2 in magnitude and co-prime, and minimises
    (1/4)*(1/kappa_a^2 + 1/kappa_b^2).  Ties break to the lexicographically
    smallest pair, so the result is deterministic.
    """
    pool = range(prefix[-1] + 1, subbands)
    best = None
    for a, b in combinations(pool, 2):
        cand = list(prefix) + [a, b]
        ka = cand[-3] - 2 * cand[-2] + cand[-1]  # curvature ending at b
        kb = cand[-4] - 2 * cand[-3] + cand[-2]  # curvature ending at a
        if abs(ka) < 2 or abs(kb) < 2 or math.gcd(abs(ka), abs(kb)) != 1:
            continue
        score = (1.0 / ka**2 + 1.0 / kb**2) / 4.0
        key = (score, a, b)
        if best is None or key < best[0]:
            best = (key, (a, b))
    if best is None:
        raise ConfigError("no co-prime tail pair fits the sub-band budget")
    return best[1]


def design_cre(antennas: int, subbands: int) -> np.ndarray:
    """Pilot sequence optimising the remainder estimator's floor.

    Consecutive sub-bands 0..M-3 make every interior curvature zero (those
    terms drop out), then a searched tail pair supplies the two co-prime
    curvatures the remainder estimator runs on.
    """
    if antennas < 4:
        raise ConfigError("remainder design needs at least 4 antennas")
    if antennas >= subbands:
        raise ConfigError("need antennas < subbands")
    prefix = list(range(antennas - 2))
    return np.asarray(prefix + list(_best_tail(prefix, subbands)), dtype=int)


def design_suboptimal(antennas: int, subbands: int) -> np.ndarray:
    """Pilot sequence serving both estimators at once.

    Unit-curvature chain over the first M-2 entries (folding terms for the
    low-SNR regime) plus the co-prime tail pair (remainder terms for the
    high-SNR regime).
    """
    if antennas < 4:
        raise ConfigError("combined design needs at least 4 antennas")
    if antennas >= subbands:
        raise ConfigError("need antennas < subbands")
    prefix = _cae_recursion(antennas - 2, subbands)
    return np.asarray(prefix + list(_best_tail(prefix, subbands)), dtype=int)


_DESIGNS = {"cae": design_cae, "cre": design_cre, "suboptimal": design_suboptimal}


def design_sequence(antennas: int, subbands: int, mode: str = "suboptimal") -> np.ndarray:
    try:
        fn = _DESIGNS[mode]
    except KeyError:
        raise ConfigError(f"unknown design mode: {mode!r}") from None
    return fn(antennas, subbands)


def corollary_crossover(antennas: int) -> bool:
    """Whether the combined design can beat the pure folding design.

    Compares the folding floor of an all-unit-curvature sequence,
    3/((M-2)*L*gamma), with the best remainder floor reachable by spending
    two entries on a minimal co-prime tail {2, 3}: (13/144)*3/(L*gamma).
    True iff 1/(M-2) > 13/144, i.e. M <= 13.
    """
    if antennas < 5:
        raise ConfigError("comparison needs at least 5 antennas")
    return 1.0 / (antennas - 2) > 13.0 / 144.0
