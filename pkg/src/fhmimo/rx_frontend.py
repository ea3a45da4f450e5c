"""Spectral front-end: hop DFT, tone detection, antenna pairing.

Every transmitted tone sits exactly on the L-point DFT grid (sub-band k on
bin (L - k*L_sub) mod L), so a noise-free hop shows M bare bins and the
detector only ever has to look at the K on-grid bins.  Pairing works in
k-space: sorting the detected sub-bands ascending matches them to antennas
0..M-1, because the ordered waveform gives antenna m the m-th smallest
frequency.  Sorting bins instead would mis-place k = 0, which aliases to
bin 0 rather than bin L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RadarConfig
from .errors import ConfigError, PeakCollision

__all__ = ["HopSpectrum", "hop_dft", "detect_and_pair", "analyze_hop", "half_hop_dft"]


@dataclass
class HopSpectrum:
    """L-point spectrum of one hop plus the detected tone set."""

    spectrum: np.ndarray  # (L,) complex
    peak_bins: np.ndarray  # (M,) int, ascending k order
    k_hat: np.ndarray  # (M,) int, strictly increasing
    amplitudes: np.ndarray  # (M,) complex, bin values in antenna order


def hop_dft(frame, hop_index: int) -> np.ndarray:
    """L-point DFT of receiver hop ``hop_index``."""
    if not 0 <= hop_index < frame.hops:
        raise ConfigError(f"hop index {hop_index} outside frame")
    return np.fft.fft(frame.hop(hop_index))


def detect_and_pair(
    spectrum: np.ndarray,
    cfg: RadarConfig,
    n_tones: int | None = None,
    margin_db: float = 6.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Find the M strongest on-grid tones and pair them with antennas.

    Returns (k_hat, amplitudes): sub-band indices sorted ascending and the
    complex bin values in that (= antenna) order.  Raises PeakCollision when
    fewer than M grid bins clear the noise floor by ``margin_db``, with the
    floor taken as the median off-grid bin power.
    """
    cfg.validate()
    m = cfg.antennas if n_tones is None else n_tones
    spectrum = np.asarray(spectrum)
    if spectrum.size != cfg.samples_per_hop:
        raise ConfigError("spectrum length must be L")
    bins = cfg.grid_bins()
    power = np.abs(spectrum[bins]) ** 2
    off = np.ones(cfg.samples_per_hop, dtype=bool)
    off[bins] = False
    floor = np.median(np.abs(spectrum[off]) ** 2) if off.any() else 0.0
    order = np.argsort(power)[::-1]
    chosen = order[:m]
    if np.any(power[chosen] <= floor * 10.0 ** (margin_db / 10.0)):
        raise PeakCollision(
            f"only {int(np.sum(power > floor * 10 ** (margin_db / 10)))} of {m} "
            "tones clear the noise floor"
        )
    k_hat = np.sort(chosen)  # sub-band index == grid position, sort in k-space
    return k_hat, spectrum[bins[k_hat]]


def analyze_hop(frame, hop_index: int, cfg: RadarConfig, **kw) -> HopSpectrum:
    """DFT one hop and run tone detection on it."""
    spec = hop_dft(frame, hop_index)
    k_hat, amps = detect_and_pair(spec, cfg, **kw)
    return HopSpectrum(
        spectrum=spec, peak_bins=cfg.subband_bin(k_hat), k_hat=k_hat, amplitudes=amps
    )


def half_hop_dft(frame, hop_index: int, bin_index: int = 0) -> complex:
    """L-point-grid DFT coefficient using only the first L/2 hop samples.

    Tones whose sub-band satisfies k*L_sub/2 integer complete whole cycles in
    half a hop and vanish here, which is what isolates a single silent
    antenna on bin 0 during probe hops.
    """
    L = frame.cfg.samples_per_hop
    half = frame.hop(hop_index)[: L // 2]
    i = np.arange(L // 2)
    return complex(np.sum(half * np.exp(-2j * np.pi * i * bin_index / L)))
