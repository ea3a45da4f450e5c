"""Radar/channel configuration and the sampling constants derived from it.

The central consistency rule is that every hop must hold an integer number of
cycles of every tone: with K sub-bands of width B/K across bandwidth B and hop
duration T, that means B*T/K is a positive integer.  At sample rate fs each
hop spans L = T*fs samples and each sub-band step moves a tone by
L_sub = B*T/K DFT bins, so all tone frequencies sit exactly on the L-point
bin grid.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import (
    ConfigError,
    NonIntegerOrthogonality,
    OddL,
    TooManyAntennas,
)

__all__ = [
    "RadarConfig",
    "ChannelConfig",
    "InterfererSpec",
    "validate",
    "load_ini",
    "radar_from_mapping",
]

_INT_TOL = 1e-6  # slack for float products that must land on integers


@dataclass(frozen=True)
class RadarConfig:
    """Static transmitter/receiver geometry and timing.

    Defaults match the reference set-up used throughout the simulations:
    10 half-wavelength-spaced transmit antennas hopping over 20 sub-bands of
    a 100 MHz band starting at 8 GHz, 0.8 us hops, 15 hops per pulse, and a
    communication receiver sampling at twice the bandwidth.
    """

    antennas: int = 10
    subbands: int = 20
    bandwidth: float = 100e6  # Hz
    rf_lower: float = 8e9  # Hz, lower edge of the hopping band
    hop_duration: float = 0.8e-6  # s
    hops: int = 15
    sample_rate: float = 200e6  # Hz
    rx_antennas: int = 10  # radar-side receive elements (virtual array)

    # -- derived quantities ------------------------------------------------

    @property
    def samples_per_hop(self) -> int:
        """L: receiver samples in one hop."""
        return int(round(self.hop_duration * self.sample_rate))

    @property
    def bins_per_subband(self) -> int:
        """B*T/K: DFT bins between adjacent sub-band tones."""
        return int(round(self.bandwidth * self.hop_duration / self.subbands))

    @property
    def sample_period(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def subband_spacing(self) -> float:
        """Hz between adjacent sub-band centre frequencies."""
        return self.bandwidth / self.subbands

    def tone_freq(self, k) -> np.ndarray:
        """Baseband frequency of sub-band ``k`` (RF lower edge removed)."""
        return np.asarray(k) * self.subband_spacing

    def subband_bin(self, k):
        """DFT bin index where sub-band ``k`` peaks in an L-point transform.

        The tones rotate as exp(-j*2*pi*k*B/K*t), so sub-band k lands on bin
        (L - k*L_sub) mod L; k = 0 is bin 0.
        """
        k = np.asarray(k)
        return (self.samples_per_hop - k * self.bins_per_subband) % self.samples_per_hop

    def bin_to_subband(self, l):
        """Inverse of :meth:`subband_bin` for bins on the sub-band grid."""
        l = np.asarray(l)
        L = self.samples_per_hop
        num = (L - l) % L
        if np.any(num % self.bins_per_subband):
            raise ConfigError(f"bin {l} is not on the sub-band grid")
        return num // self.bins_per_subband

    def grid_bins(self) -> np.ndarray:
        """All K on-grid bins, indexed by sub-band."""
        return self.subband_bin(np.arange(self.subbands))

    def validate(self) -> "RadarConfig":
        """Check every cross-field constraint; return self if consistent."""
        if self.antennas < 1 or self.subbands < 2:
            raise ConfigError("need at least 1 antenna and 2 sub-bands")
        if self.antennas >= self.subbands:
            raise TooManyAntennas(
                f"antennas={self.antennas} must be < subbands={self.subbands}"
            )
        if min(self.bandwidth, self.hop_duration, self.sample_rate) <= 0:
            raise ConfigError("bandwidth, hop_duration and sample_rate must be > 0")
        if self.hops < 1:
            raise ConfigError("hops must be >= 1")
        if self.rf_lower < 0:
            raise ConfigError("rf_lower must be >= 0")
        if self.sample_rate < 2 * self.bandwidth:
            raise ConfigError(
                f"sample_rate={self.sample_rate:g} under-samples bandwidth "
                f"{self.bandwidth:g} (need fs >= 2B)"
            )
        lsub = self.bandwidth * self.hop_duration / self.subbands
        if lsub < 1 - _INT_TOL or abs(lsub - round(lsub)) > _INT_TOL:
            raise NonIntegerOrthogonality(
                f"B*T/K = {lsub:g} must be a positive integer"
            )
        L = self.hop_duration * self.sample_rate
        if abs(L - round(L)) > _INT_TOL:
            raise ConfigError(f"T*fs = {L:g} must be an integer sample count")
        if round(L) % 2:
            raise OddL(f"samples per hop L = {round(L)} must be even")
        return self


def validate(cfg: RadarConfig) -> RadarConfig:
    """Functional alias for :meth:`RadarConfig.validate` (idempotent)."""
    return cfg.validate()


@dataclass(frozen=True)
class InterfererSpec:
    """An unsynchronised same-band radar overlapping the victim frame.

    ``schedule`` is a HopSchedule drawn independently of the victim (see
    channel.draw_interferer); ``delay`` is its timing offset relative to the
    victim's receiver clock and ``power_db`` its per-tone power relative to
    the victim's line-of-sight gain.
    """

    schedule: object
    delay: float  # s, in [0, T)
    power_db: float = -5.0
    phase: float = 0.0  # common carrier phase, rad


@dataclass(frozen=True)
class ChannelConfig:
    """One draw of the communication channel.

    ``gains``/``aods_deg`` hold the P path amplitudes and departure angles;
    index 0 is the line-of-sight path.  All paths share the sub-sample timing
    offset ``timing_offset`` (delay spread within a hop is not modelled).
    """

    timing_offset: float  # s, residual offset in [0, T)
    gains: tuple = (1.0 + 0.0j,)
    aods_deg: tuple = (20.0,)
    noise_var: float = 0.0  # per-sample complex noise variance
    interferer: InterfererSpec | None = None

    def __post_init__(self):
        if len(self.gains) != len(self.aods_deg):
            raise ConfigError("gains and aods_deg must have equal length")
        if len(self.gains) == 0:
            raise ConfigError("need at least one propagation path")
        if self.noise_var < 0:
            raise ConfigError("noise_var must be >= 0")

    @property
    def paths(self) -> int:
        return len(self.gains)

    def los_only(self) -> "ChannelConfig":
        """Same draw with the non-line-of-sight paths removed."""
        return replace(self, gains=self.gains[:1], aods_deg=self.aods_deg[:1])


# -- INI loading -----------------------------------------------------------

_RADAR_FIELDS = {
    "antennas": int,
    "subbands": int,
    "bandwidth": float,
    "rf_lower": float,
    "hop_duration": float,
    "hops": int,
    "sample_rate": float,
    "rx_antennas": int,
}


def radar_from_mapping(section: Mapping[str, str]) -> RadarConfig:
    """Build a validated RadarConfig from string key/value pairs."""
    kwargs = {}
    for key, raw in section.items():
        if key not in _RADAR_FIELDS:
            raise ConfigError(f"unknown [radar] key: {key}")
        try:
            kwargs[key] = _RADAR_FIELDS[key](float(raw)) if _RADAR_FIELDS[key] is int else float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return RadarConfig(**kwargs).validate()


def load_ini(path) -> tuple[RadarConfig, dict, dict]:
    """Read an INI file with [radar], [channel] and [sweep] sections.

    Returns the validated radar config plus the raw channel/sweep sections as
    plain dicts (callers interpret those; missing sections come back empty).
    """
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file: {path}")
    radar = radar_from_mapping(cp["radar"]) if cp.has_section("radar") else RadarConfig().validate()
    channel = dict(cp["channel"]) if cp.has_section("channel") else {}
    sweep = dict(cp["sweep"]) if cp.has_section("sweep") else {}
    return radar, channel, sweep
