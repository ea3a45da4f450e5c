"""Communication-side channel: timing offset, multipath, noise, interference.

The receiver's hop clock lags the transmitter by a residual offset eta in
[0, T), so receiver hop h holds the last part of transmit hop h-1's wavefront
and the head of transmit hop h's.  With L_eta = round(eta/T_s), sample i of
receiver hop h is

    sum_p beta_p sum_m mod[h,m]  e^{-j pi m sin(phi_p)} e^{-j 2 pi f_km (i T_s + eta)}
                                                 for i < L - L_eta, and
    the same expression with hop h+1's terms and (i - L) T_s + eta
                                                 for i >= L - L_eta,

which is exactly how :func:`synth_rx` fills the frame (transmit hop h lands
on absolute receiver samples h*L - L_eta .. (h+1)*L - L_eta - 1 with phase
grid j*T_s + (eta - L_eta*T_s)).  Samples after the last transmit hop hold
noise only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ChannelConfig, InterfererSpec, RadarConfig
from .errors import ConfigError
from .waveform import HopSchedule

__all__ = [
    "SampledFrame",
    "synth_rx",
    "snr_to_noise",
    "draw_timing_offset",
    "draw_los_channel",
    "draw_rician_channel",
    "draw_interferer",
]


def snr_to_noise(gamma_db: float, los_gain: float = 1.0) -> float:
    """Per-sample complex noise variance giving SNR gamma_db at |beta_0|."""
    return abs(los_gain) ** 2 * 10.0 ** (-gamma_db / 10.0)


@dataclass
class SampledFrame:
    """One digitized receive frame plus the ground truth that produced it."""

    samples: np.ndarray  # (H*L,) complex, receiver hop clock
    l_eta: int  # applied whole-sample part of the offset
    truth: ChannelConfig
    cfg: RadarConfig

    @property
    def frac(self) -> float:
        """Sub-sample remainder eta - L_eta*T_s of the timing offset."""
        return self.truth.timing_offset - self.l_eta * self.cfg.sample_period

    def hop(self, h: int) -> np.ndarray:
        L = self.cfg.samples_per_hop
        return self.samples[h * L : (h + 1) * L]

    @property
    def hops(self) -> int:
        return self.samples.size // self.cfg.samples_per_hop


def _steered_amplitudes(sched: HopSchedule, gains, aods_deg) -> np.ndarray:
    """(H, M) per-antenna amplitudes: sum_p beta_p e^{-j pi m sin(phi_p)}."""
    m = np.arange(sched.antennas)
    steer = np.exp(-1j * np.pi * np.outer(np.sin(np.deg2rad(aods_deg)), m))  # (P, M)
    return sched.mod * (np.asarray(gains) @ steer)[None, :]


def _add_tones(out, sched, cfg, amps, delay):
    """Accumulate a delayed tone frame into ``out`` (length H*L of the victim).

    ``amps`` is (H, M) per-antenna complex amplitude, ``delay`` the emitter's
    offset in seconds relative to the receiver clock.
    """
    L = cfg.samples_per_hop
    l_int = int(round(delay / cfg.sample_period))
    frac = delay - l_int * cfg.sample_period
    t = np.arange(L) * cfg.sample_period + frac
    total = out.size
    for h in range(sched.hops):
        freqs = cfg.tone_freq(sched.subband[h])
        block = amps[h] @ np.exp(-2j * np.pi * np.outer(freqs, t))
        start = h * L - l_int
        lo, hi = max(start, 0), min(start + L, total)
        if lo < hi:
            out[lo:hi] += block[lo - start : hi - start]
    return l_int


def synth_rx(
    sched: HopSchedule,
    cfg: RadarConfig,
    chan: ChannelConfig,
    rng: np.random.Generator | None = None,
) -> SampledFrame:
    """Digitize the frame seen by the single-antenna communication receiver."""
    cfg.validate()
    if not 0 <= chan.timing_offset < cfg.hop_duration:
        raise ConfigError("timing offset must lie in [0, T)")
    if sched.hops != cfg.hops:
        raise ConfigError("schedule hop count disagrees with config")
    L = cfg.samples_per_hop
    y = np.zeros(cfg.hops * L, dtype=complex)
    amps = _steered_amplitudes(sched, chan.gains, chan.aods_deg)
    l_eta = _add_tones(y, sched, cfg, amps, chan.timing_offset)
    if chan.interferer is not None:
        spec = chan.interferer
        scale = 10.0 ** (spec.power_db / 20.0) * abs(chan.gains[0])
        iamps = spec.schedule.mod * scale * np.exp(1j * spec.phase)
        _add_tones(y, spec.schedule, cfg, iamps, spec.delay)
    if chan.noise_var > 0:
        if rng is None:
            raise ConfigError("noise requested but no rng supplied")
        sigma = np.sqrt(chan.noise_var / 2.0)
        y += rng.normal(scale=sigma, size=y.size) + 1j * rng.normal(scale=sigma, size=y.size)
    return SampledFrame(samples=y, l_eta=l_eta, truth=chan, cfg=cfg)


# -- random scenario draws -------------------------------------------------


def draw_timing_offset(
    rng: np.random.Generator, low: float = 0.05e-6, high: float = 0.35e-6
) -> float:
    """Residual offset drawn uniformly, default over [0.05, 0.35] us."""
    return float(rng.uniform(low, high))


def draw_los_channel(
    rng: np.random.Generator,
    gamma_db: float | None,
    aod_deg: float = 20.0,
    eta: float | None = None,
) -> ChannelConfig:
    """Single-path channel: unit gain with uniform phase, fixed departure angle."""
    eta = draw_timing_offset(rng) if eta is None else eta
    gain = np.exp(2j * np.pi * rng.uniform())
    noise = 0.0 if gamma_db is None else snr_to_noise(gamma_db)
    return ChannelConfig(
        timing_offset=eta, gains=(gain,), aods_deg=(aod_deg,), noise_var=noise
    )


def draw_rician_channel(
    rng: np.random.Generator,
    gamma_db: float | None,
    aod_deg: float = 20.0,
    eta: float | None = None,
    nlos_paths: int = 4,
    nlos_power_db: float = -5.0,
) -> ChannelConfig:
    """Line of sight plus ``nlos_paths`` complex-Gaussian scatter paths.

    Each extra path draws a circular complex gain of power 10^(nlos_power_db/10)
    relative to the unit line-of-sight gain, with a departure angle uniform in
    [-90, 90] degrees.
    """
    eta = draw_timing_offset(rng) if eta is None else eta
    los = np.exp(2j * np.pi * rng.uniform())
    var = 10.0 ** (nlos_power_db / 10.0)
    scatter = np.sqrt(var / 2.0) * (
        rng.normal(size=nlos_paths) + 1j * rng.normal(size=nlos_paths)
    )
    aods = np.concatenate(([aod_deg], rng.uniform(-90.0, 90.0, size=nlos_paths)))
    gains = np.concatenate(([los], scatter))
    noise = 0.0 if gamma_db is None else snr_to_noise(gamma_db)
    return ChannelConfig(
        timing_offset=eta,
        gains=tuple(gains),
        aods_deg=tuple(aods),
        noise_var=noise,
    )


def draw_interferer(
    cfg: RadarConfig,
    rng: np.random.Generator,
    min_subband: int = 0,
    power_db: float = -5.0,
) -> InterfererSpec:
    """Unsynchronised same-geometry radar with random per-tone phases.

    Its per-hop sub-bands are drawn without replacement from
    [min_subband, K); raising ``min_subband`` keeps the victim's lowest
    sub-bands clean, which is what the interference-robust pilot subset
    relies on.
    """
    pool = np.arange(min_subband, cfg.subbands)
    if pool.size < cfg.antennas:
        raise ConfigError("interferer pool smaller than its antenna count")
    rows = np.stack(
        [rng.choice(pool, size=cfg.antennas, replace=False) for _ in range(cfg.hops)]
    )
    phases = np.exp(2j * np.pi * rng.uniform(size=rows.shape))
    sched = HopSchedule(rows, phases)
    return InterfererSpec(
        schedule=sched,
        delay=float(rng.uniform(0.0, cfg.hop_duration)),
        power_db=power_db,
        phase=float(2 * np.pi * rng.uniform()),
    )
