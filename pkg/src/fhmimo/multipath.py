"""Per-antenna composite-gain probing for scatter-rich channels.

With P paths the pilot amplitudes become Y_m = rho_m * w^{k_m} where
rho_m = sum_p b_p e^{-j*pi*m*sin(phi_p)} mixes all paths per antenna; the
double-ratio trick no longer cancels it because rho_m is not a single
spatial tone.  The cure is to measure rho_m directly: antenna m transmits
sub-band 0 (a DC tone, immune to the timing offset) during hop m+2 while
the other antennas sit on sub-bands that complete whole cycles in half a
hop.  Summing the first L/2 samples of that hop then returns rho_m/2
exactly, provided the whole-sample offset stays under L/2 so no foreign
hop leaks into the sum.  Antenna 0 needs no probe hop: the pilot sequence
starts at sub-band 0, so the pilot's first bin already reads rho_0.
Normalising Y_m by the probed rho_m restores w^{k_m} and the phase
estimators run unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RadarConfig
from .errors import CompositeTooSmall, NullingViolated, ProbeMissing
from .rx_frontend import half_hop_dft, hop_dft
from .waveform import HopSchedule, probe_safe_subbands

__all__ = ["CompositeEstimate", "estimate_rho", "normalize", "bin_noise_scale"]


@dataclass
class CompositeEstimate:
    """Probed per-antenna composite gains (DFT scale, factor L included)."""

    rho_hat: np.ndarray  # (M,) complex
    source_hops: np.ndarray  # (M,) int, hop each estimate came from
    valid: np.ndarray  # (M,) bool, False where the fade guard tripped
    floor: np.ndarray  # (M,) float, per-antenna guard level used


def bin_noise_scale(spectrum: np.ndarray, cfg: RadarConfig) -> float:
    """RMS noise per full-hop DFT bin, from the pilot's off-grid bins.

    |bin|^2 of a noise-only bin is exponential with mean L*sigma^2, so the
    median over off-grid bins divided by ln 2 estimates that mean robustly.
    """
    off = np.ones(cfg.samples_per_hop, dtype=bool)
    off[cfg.grid_bins()] = False
    if not off.any():
        return 0.0
    return float(np.sqrt(np.median(np.abs(spectrum[off]) ** 2) / np.log(2.0)))


def estimate_rho(
    frame,
    sched: HopSchedule,
    cfg: RadarConfig,
    guard: bool = True,
    guard_factor: float = 10.0,
) -> CompositeEstimate:
    """Read every antenna's composite gain off its probe hop.

    Antenna 0 comes from the pilot hop's sub-band-0 bin, antenna m >= 1 from
    twice the half-hop sum of hop m+2.  With ``guard`` on, antennas whose
    magnitude falls below guard_factor times the per-estimate noise RMS are
    flagged invalid (destructive multipath fade) so callers can drop them.
    """
    cfg.validate()
    M = cfg.antennas
    if frame.l_eta > cfg.samples_per_hop // 2:
        raise ProbeMissing(
            "whole-sample offset exceeds half a hop; probe sums would mix hops"
        )
    safe = set(probe_safe_subbands(cfg).tolist())
    for m in range(M):
        h = m + 2
        if h >= sched.hops:
            raise ProbeMissing(f"schedule has no probe hop for antenna {m}")
        row = sched.subband[h]
        if row[m] != 0 or sched.mod[h, m] != 1:
            raise ProbeMissing(f"hop {h} does not silence antenna {m} onto sub-band 0")
        others = np.delete(row, m)
        if not all(int(k) in safe for k in others):
            raise NullingViolated(f"hop {h} carries sub-bands visible to the half-hop sum")

    pilot_spec = hop_dft(frame, 0)
    if sched.subband[0, 0] != 0:
        raise ProbeMissing("pilot sequence must start at sub-band 0")
    rho = np.empty(M, dtype=complex)
    hops = np.empty(M, dtype=int)
    rho[0] = pilot_spec[0]
    hops[0] = 0
    for m in range(1, M):
        rho[m] = 2.0 * half_hop_dft(frame, m + 2, 0)
        hops[m] = m + 2

    sigma_bin = bin_noise_scale(pilot_spec, cfg)
    # probe estimates double a half-length sum: noise variance 2*L*sigma^2
    floor = guard_factor * sigma_bin * np.where(np.arange(M) == 0, 1.0, np.sqrt(2.0))
    valid = np.abs(rho) >= floor if guard else np.ones(M, dtype=bool)
    return CompositeEstimate(rho_hat=rho, source_hops=hops, valid=valid, floor=floor)


def normalize(
    amplitudes: np.ndarray,
    composite: CompositeEstimate,
    require_all: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Divide the pilot amplitudes by the probed composites.

    Returns (normalized, valid_mask).  Antennas flagged invalid get a zero
    placeholder (their ratio terms must be excluded via the mask;
    KappaProfile.restrict does exactly that).  ``require_all`` escalates any
    invalid antenna to CompositeTooSmall instead.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    valid = composite.valid.copy()
    if require_all and not valid.all():
        bad = np.flatnonzero(~valid)
        raise CompositeTooSmall(f"antennas {bad.tolist()} under the fade floor")
    out = np.zeros_like(amps)
    ok = valid & (np.abs(composite.rho_hat) > 0)
    out[ok] = amps[ok] / composite.rho_hat[ok]
    return out, ok
