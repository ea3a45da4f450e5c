"""Hop schedules, baseband synthesis and the range ambiguity function.

A schedule assigns each (hop, antenna) pair a sub-band index and a
unit-modulus modulation term.  Orthogonality inside a hop needs the M
sub-bands distinct; the ordered variant additionally sorts each hop's
sub-bands ascending across antennas, which is what lets a receiver pair
spectral peaks with transmit antennas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RadarConfig
from .errors import ConfigError, FrameTooShort

__all__ = [
    "HopSchedule",
    "random_schedule",
    "order_schedule",
    "frame_schedule",
    "probe_safe_subbands",
    "synth_baseband",
    "ambiguity_function",
]


@dataclass
class HopSchedule:
    """Per-hop sub-band indices and modulation terms, hop-major.

    ``subband`` is an (H, M) int matrix, ``mod`` an (H, M) complex matrix of
    unit-modulus terms (exactly 1 when nothing is embedded).
    """

    subband: np.ndarray
    mod: np.ndarray = field(default=None)

    def __post_init__(self):
        self.subband = np.asarray(self.subband, dtype=int)
        if self.subband.ndim != 2:
            raise ConfigError("subband matrix must be H x M")
        if self.mod is None:
            self.mod = np.ones(self.subband.shape, dtype=complex)
        else:
            self.mod = np.asarray(self.mod, dtype=complex)
            if self.mod.shape != self.subband.shape:
                raise ConfigError("mod matrix must match subband shape")

    @property
    def hops(self) -> int:
        return self.subband.shape[0]

    @property
    def antennas(self) -> int:
        return self.subband.shape[1]

    def check(self, cfg: RadarConfig | None = None) -> "HopSchedule":
        """Assert per-hop distinctness (and range, when cfg is given)."""
        for h, row in enumerate(self.subband):
            if len(set(row.tolist())) != row.size:
                raise ConfigError(f"hop {h} reuses a sub-band: {row}")
        if cfg is not None and (
            self.subband.min() < 0 or self.subband.max() >= cfg.subbands
        ):
            raise ConfigError("sub-band index out of range")
        return self

    def copy(self) -> "HopSchedule":
        return HopSchedule(self.subband.copy(), self.mod.copy())


def random_schedule(cfg: RadarConfig, rng: np.random.Generator) -> HopSchedule:
    """Conventional waveform: each hop draws M of the K sub-bands uniformly."""
    cfg.validate()
    rows = np.stack(
        [rng.choice(cfg.subbands, size=cfg.antennas, replace=False) for _ in range(cfg.hops)]
    )
    return HopSchedule(rows)


def order_schedule(sched: HopSchedule) -> HopSchedule:
    """Sort every hop's sub-bands ascending, carrying modulation terms along.

    Idempotent, and preserves each hop's sub-band multiset, which is the
    property that keeps the range ambiguity function unchanged.
    """
    perm = np.argsort(sched.subband, axis=1, kind="stable")
    return HopSchedule(
        np.take_along_axis(sched.subband, perm, axis=1),
        np.take_along_axis(sched.mod, perm, axis=1),
    )


def probe_safe_subbands(cfg: RadarConfig) -> np.ndarray:
    """Sub-bands that stay invisible to a half-hop DFT at bin 0.

    A tone on sub-band k sums to zero over L/2 samples iff k*L_sub/2 is an
    integer: every k >= 1 when L_sub is even, only even k otherwise.
    """
    k = np.arange(1, cfg.subbands)
    return k[(k * cfg.bins_per_subband) % 2 == 0]


def frame_schedule(
    sched: HopSchedule,
    pilot,
    probe: bool = False,
    cfg: RadarConfig | None = None,
    rng: np.random.Generator | None = None,
) -> HopSchedule:
    """Stamp the frame structure onto a data schedule.

    Hops 0 and 1 both carry the pilot sequence (two identical hops are what
    make the straddling pilot look like one clean hop to the receiver); with
    ``probe`` set, hop m+2 silences antenna m onto sub-band 0 with unit
    modulation and moves the other antennas to half-hop-invisible sub-bands
    so the per-antenna composite gain can be probed one antenna at a time.
    """
    out = sched.copy()
    pilot = np.asarray(pilot, dtype=int)
    if pilot.ndim != 1 or pilot.size != out.antennas:
        raise ConfigError("pilot length must equal antenna count")
    if out.hops < 2:
        raise FrameTooShort("need at least 2 hops for the pilot pair")
    out.subband[0] = pilot
    out.subband[1] = pilot
    out.mod[0] = 1.0
    out.mod[1] = 1.0
    if probe:
        if cfg is None:
            raise ConfigError("probe rows need the radar config")
        if out.hops < out.antennas + 2:
            raise FrameTooShort(
                f"{out.hops} hops cannot fit 2 pilots + {out.antennas} probe rows"
            )
        safe = probe_safe_subbands(cfg)
        if safe.size < out.antennas - 1:
            raise ConfigError("not enough half-hop-invisible sub-bands for probing")
        for m in range(out.antennas):
            h = m + 2
            if rng is None:
                others = safe[: out.antennas - 1]
            else:
                others = rng.choice(safe, size=out.antennas - 1, replace=False)
            row = np.empty(out.antennas, dtype=int)
            row[m] = 0
            row[np.arange(out.antennas) != m] = others
            out.subband[h] = row
            out.mod[h, m] = 1.0
    return out.check(cfg)


def synth_baseband(sched: HopSchedule, cfg: RadarConfig) -> np.ndarray:
    """Per-antenna transmit samples, (M, H*L) complex, RF lower edge removed.

    Antenna m during hop h emits mod[h,m] * exp(-j*2*pi*k[h,m]*(B/K)*t) with
    t restarted at each hop boundary; because every tone holds an integer
    number of cycles per hop, hop-relative and absolute time agree.
    """
    cfg.validate()
    L = cfg.samples_per_hop
    t = np.arange(L) * cfg.sample_period
    out = np.empty((sched.antennas, sched.hops * L), dtype=complex)
    for h in range(sched.hops):
        freqs = cfg.tone_freq(sched.subband[h])  # (M,)
        block = np.exp(-2j * np.pi * np.outer(freqs, t))
        out[:, h * L : (h + 1) * L] = sched.mod[h][:, None] * block
    return out


def _chi(x, nu, T):
    """Cross term of two rectangular tone pulses offset by x with beat nu.

    (T-|x|) * sinc(nu*(T-|x|)) * exp(j*pi*nu*(x+T)) inside |x| < T, zero
    outside; np.sinc supplies the sin(pi z)/(pi z) convention.
    """
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < T
    width = np.where(inside, T - np.abs(x), 0.0)
    out = width * np.sinc(nu * width) * np.exp(1j * np.pi * nu * (x + T))
    return np.where(inside, out, 0.0)


def ambiguity_function(sched: HopSchedule, cfg: RadarConfig, tau_grid) -> np.ndarray:
    """Zero-Doppler range ambiguity magnitude |R(tau)| on ``tau_grid``.

    Evaluated in closed form: every (hop, antenna) x (hop, antenna) cross
    term is a rectangular-pulse cross ambiguity, and all terms sharing a hop
    separation and a sub-band pair are identical, so the quadruple sum
    collapses to K x K occupancy correlations per hop separation.  The RF
    carrier contributes a common phase ramp that drops out of the magnitude,
    and the per-hop phase anchor exp(j*2*pi*nu*h*T) is unity because nu*T is
    an integer number of cycles for on-grid tones.
    """
    cfg.validate()
    tau = np.asarray(tau_grid, dtype=float)
    T = cfg.hop_duration
    H, K = sched.hops, cfg.subbands
    df = cfg.subband_spacing

    # complex occupancy: occ[h, k] sums the modulation of antennas on k at hop h
    occ = np.zeros((H, K), dtype=complex)
    for h in range(H):
        np.add.at(occ[h], sched.subband[h], sched.mod[h])

    dk = np.arange(K)[:, None] - np.arange(K)[None, :]  # k1 - k2
    acc = np.zeros(tau.size, dtype=complex)
    dmin = int(np.floor(tau.min() / T)) - 1
    dmax = int(np.ceil(tau.max() / T)) + 1
    for delta in range(max(dmin, -(H - 1)), min(dmax, H - 1) + 1):
        if delta >= 0:
            corr = occ[: H - delta].T @ np.conj(occ[delta:])
        else:
            corr = occ[-delta:].T @ np.conj(occ[: H + delta])
        x = tau - delta * T
        sel = np.abs(x) < T
        if not sel.any():
            continue
        chi = _chi(x[sel][:, None, None], dk[None] * df, T)  # (n, K, K)
        phase = np.exp(2j * np.pi * df * np.outer(tau[sel], np.arange(K)))  # (n, K)
        acc[sel] += np.einsum("kl,nkl,nl->n", corr, chi, phase)
    return np.abs(acc)
