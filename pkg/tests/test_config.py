"""Configuration validation and derived sampling constants."""

from dataclasses import replace

import numpy as np
import pytest

from fhmimo.config import RadarConfig, ChannelConfig, load_ini, radar_from_mapping
from fhmimo.errors import (
    ConfigError,
    NonIntegerOrthogonality,
    OddL,
    TooManyAntennas,
)


def test_default_derived_quantities(cfg):
    assert cfg.samples_per_hop == 160
    assert cfg.bins_per_subband == 4
    assert cfg.subband_spacing == 5e6
    assert cfg.sample_period == 5e-9


def test_subband_bin_mapping(cfg):
    # tone k rotates as exp(-j*2*pi*k*(B/K)*t): negative frequency, so the
    # L-point DFT peak sits at (L - k*L_sub) mod L
    assert cfg.subband_bin(0) == 0
    assert cfg.subband_bin(1) == 156
    assert cfg.subband_bin(19) == 84
    k = np.arange(cfg.subbands)
    bins = cfg.subband_bin(k)
    assert len(set(bins.tolist())) == cfg.subbands
    assert np.array_equal(cfg.bin_to_subband(bins), k)


def test_bin_to_subband_off_grid(cfg):
    with pytest.raises(ConfigError):
        cfg.bin_to_subband(1)


def test_grid_bins(cfg):
    assert np.array_equal(cfg.grid_bins(), cfg.subband_bin(np.arange(20)))


def test_validate_rejects_non_integer_orthogonality():
    bad = RadarConfig(hop_duration=0.81e-6, sample_rate=400e6)
    with pytest.raises(NonIntegerOrthogonality):
        bad.validate()


def test_validate_rejects_too_many_antennas():
    with pytest.raises(TooManyAntennas):
        RadarConfig(antennas=20).validate()
    with pytest.raises(TooManyAntennas):
        RadarConfig(antennas=21).validate()


def test_validate_rejects_odd_sample_count():
    # T*fs = 45 samples per hop, with B*T/K = 1 still integer
    with pytest.raises(OddL):
        RadarConfig(
            subbands=18, bandwidth=40e6, hop_duration=0.45e-6, sample_rate=100e6
        ).validate()


def test_validate_rejects_undersampling():
    with pytest.raises(ConfigError):
        RadarConfig(sample_rate=150e6).validate()


def test_tone_freq(cfg):
    assert np.allclose(cfg.tone_freq([0, 1, 19]), [0.0, 5e6, 95e6])


def test_channel_config_checks():
    with pytest.raises(ConfigError):
        ChannelConfig(timing_offset=0.1e-6, gains=(1.0,), aods_deg=(0.0, 1.0))
    with pytest.raises(ConfigError):
        ChannelConfig(timing_offset=0.1e-6, gains=(), aods_deg=())
    with pytest.raises(ConfigError):
        ChannelConfig(timing_offset=0.1e-6, noise_var=-1.0)


def test_channel_los_only():
    chan = ChannelConfig(
        timing_offset=0.1e-6,
        gains=(1.0, 0.3j, 0.2),
        aods_deg=(20.0, -5.0, 40.0),
        noise_var=0.25,
    )
    los = chan.los_only()
    assert los.paths == 1
    assert los.gains == (1.0,)
    assert los.aods_deg == (20.0,)
    assert los.noise_var == 0.25
    assert los.timing_offset == chan.timing_offset


def test_radar_from_mapping_roundtrip():
    got = radar_from_mapping(
        {"antennas": "10", "subbands": "20", "bandwidth": "100e6", "hops": "15"}
    )
    assert got.antennas == 10
    assert got.bandwidth == 100e6


def test_radar_from_mapping_unknown_key():
    with pytest.raises(ConfigError):
        radar_from_mapping({"antenas": "10"})


def test_load_ini(tmp_path):
    path = tmp_path / "cfg.ini"
    path.write_text(
        "[radar]\nantennas = 4\nsubbands = 8\nbandwidth = 100e6\n"
        "hop_duration = 0.8e-6\nsample_rate = 200e6\n"
        "[sweep]\ngrid = 0:10:5\ntrials = 7\n"
    )
    radar, channel, sweep = load_ini(path)
    assert radar.antennas == 4
    assert radar.subbands == 8
    assert channel == {}
    assert sweep == {"grid": "0:10:5", "trials": "7"}


def test_load_ini_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_ini(tmp_path / "absent.ini")


def test_validate_is_idempotent(cfg):
    assert cfg.validate() is cfg
    assert replace(cfg, hops=2).validate().hops == 2
