"""Receive-side frame synthesis and channel draws."""

from dataclasses import replace

import numpy as np
import pytest

from fhmimo.channel import (
    draw_interferer,
    draw_los_channel,
    draw_rician_channel,
    draw_timing_offset,
    snr_to_noise,
    synth_rx,
)
from fhmimo.config import ChannelConfig, RadarConfig
from fhmimo.errors import ConfigError
from fhmimo.rx_frontend import hop_dft
from fhmimo.seqdesign import design_suboptimal
from fhmimo.waveform import HopSchedule, frame_schedule, random_schedule

from conftest import pilot_bin_model


def _pilot_frame(cfg, chan, rng=None, seq=None):
    seq = design_suboptimal(cfg.antennas, cfg.subbands) if seq is None else seq
    sched = frame_schedule(HopSchedule(np.tile(seq, (cfg.hops, 1))), seq)
    return synth_rx(sched, cfg, chan, rng=rng), seq


def test_snr_to_noise():
    assert snr_to_noise(0.0) == 1.0
    assert snr_to_noise(10.0) == pytest.approx(0.1)
    assert snr_to_noise(20.0, los_gain=2.0) == pytest.approx(0.04)


def test_pilot_bins_match_closed_form(cfg):
    eta = 0.2371e-6
    gain = 0.8 * np.exp(0.6j)
    chan = ChannelConfig(timing_offset=eta, gains=(gain,), aods_deg=(20.0,))
    frame, seq = _pilot_frame(cfg, chan)
    got = hop_dft(frame, 0)[cfg.subband_bin(seq)]
    want = pilot_bin_model(cfg, seq, eta, (gain,), (20.0,))
    assert np.abs(got - want).max() < 1e-9 * cfg.samples_per_hop


def test_pilot_bins_closed_form_multipath(cfg):
    eta = 0.1234e-6
    gains = (1.0, 0.4 * np.exp(1.1j), 0.25 * np.exp(-2.0j))
    aods = (20.0, -35.0, 55.0)
    chan = ChannelConfig(timing_offset=eta, gains=gains, aods_deg=aods)
    frame, seq = _pilot_frame(cfg, chan)
    got = hop_dft(frame, 0)[cfg.subband_bin(seq)]
    want = pilot_bin_model(cfg, seq, eta, gains, aods)
    assert np.abs(got - want).max() < 1e-9 * cfg.samples_per_hop


def test_integer_offset_recorded(cfg):
    # eta = 47.42 samples: whole part 47, remainder positive sub-sample
    eta = 47.42 * cfg.sample_period
    chan = ChannelConfig(timing_offset=eta)
    frame, _ = _pilot_frame(cfg, chan)
    assert frame.l_eta == 47
    assert frame.frac == pytest.approx(0.42 * cfg.sample_period)
    assert frame.hops == cfg.hops
    assert frame.hop(3).size == cfg.samples_per_hop


def test_offset_out_of_range_rejected(cfg):
    chan = ChannelConfig(timing_offset=cfg.hop_duration)
    with pytest.raises(ConfigError):
        _pilot_frame(cfg, chan)


def test_schedule_hops_must_match(cfg, rng):
    sched = random_schedule(replace(cfg, hops=5).validate(), rng)
    with pytest.raises(ConfigError):
        synth_rx(sched, cfg, ChannelConfig(timing_offset=0.1e-6))


def test_noise_requires_rng(cfg):
    chan = ChannelConfig(timing_offset=0.1e-6, noise_var=0.1)
    with pytest.raises(ConfigError):
        _pilot_frame(cfg, chan)


def test_noise_variance_calibration(cfg):
    chan = ChannelConfig(timing_offset=0.1e-6, gains=(0.0,), noise_var=0.5)
    frame, _ = _pilot_frame(cfg, chan, rng=np.random.default_rng(9))
    var = np.mean(np.abs(frame.samples) ** 2)
    assert var == pytest.approx(0.5, rel=0.05)


def test_draw_timing_offset_range():
    rng = np.random.default_rng(0)
    draws = np.array([draw_timing_offset(rng) for _ in range(500)])
    assert draws.min() >= 0.05e-6
    assert draws.max() <= 0.35e-6
    assert draws.std() > 0


def test_draw_los_channel():
    rng = np.random.default_rng(1)
    chan = draw_los_channel(rng, gamma_db=20.0, aod_deg=35.0)
    assert chan.paths == 1
    assert abs(chan.gains[0]) == pytest.approx(1.0)
    assert chan.aods_deg == (35.0,)
    assert chan.noise_var == pytest.approx(0.01)
    quiet = draw_los_channel(rng, gamma_db=None)
    assert quiet.noise_var == 0.0


def test_draw_rician_channel():
    rng = np.random.default_rng(2)
    chan = draw_rician_channel(rng, gamma_db=None, nlos_paths=4, nlos_power_db=-5.0)
    assert chan.paths == 5
    assert abs(chan.gains[0]) == pytest.approx(1.0)
    assert chan.aods_deg[0] == 20.0
    assert all(-90.0 <= a <= 90.0 for a in chan.aods_deg[1:])
    power = np.mean(
        [
            np.mean(np.abs(draw_rician_channel(rng, None).gains[1:]) ** 2)
            for _ in range(400)
        ]
    )
    assert power == pytest.approx(10 ** (-0.5), rel=0.15)


def test_los_only_strips_scatter():
    rng = np.random.default_rng(3)
    chan = draw_rician_channel(rng, gamma_db=10.0)
    los = chan.los_only()
    assert los.paths == 1
    assert los.gains[0] == chan.gains[0]


def test_draw_interferer_respects_pool(cfg):
    rng = np.random.default_rng(4)
    spec = draw_interferer(cfg, rng, min_subband=4, power_db=-5.0)
    assert spec.schedule.subband.min() >= 4
    assert spec.schedule.subband.shape == (cfg.hops, cfg.antennas)
    assert 0.0 <= spec.delay < cfg.hop_duration
    assert spec.power_db == -5.0
    with pytest.raises(ConfigError):
        draw_interferer(cfg, rng, min_subband=11)


def test_interferer_adds_power(cfg, rng):
    chan = ChannelConfig(timing_offset=0.1e-6)
    clean, seq = _pilot_frame(cfg, chan)
    spec = draw_interferer(cfg, rng, min_subband=4)
    dirty, _ = _pilot_frame(cfg, replace(chan, interferer=spec))
    assert np.mean(np.abs(dirty.samples) ** 2) > np.mean(np.abs(clean.samples) ** 2)
    # sub-bands < 4 never take a direct hit (which would be ~0.56*L); the
    # fractional-delay spectral leakage they do see stays far below that
    low = [k for k in seq if k < 4]
    bins = cfg.subband_bin(np.asarray(low))
    leak = np.abs(hop_dft(dirty, 0)[bins] - hop_dft(clean, 0)[bins]).max()
    assert leak < 0.25 * cfg.samples_per_hop
