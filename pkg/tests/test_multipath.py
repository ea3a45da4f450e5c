"""Per-antenna composite probing in scatter-rich channels."""

import numpy as np
import pytest

from fhmimo.channel import synth_rx
from fhmimo.config import ChannelConfig, RadarConfig
from fhmimo.errors import CompositeTooSmall, NullingViolated, ProbeMissing
from fhmimo.multipath import bin_noise_scale, estimate_rho, normalize
from fhmimo.rx_frontend import hop_dft
from fhmimo.seqdesign import design_suboptimal, kappa_profile
from fhmimo.waveform import HopSchedule, frame_schedule, random_schedule


def _probe_frame(cfg, chan, rng, seq=None):
    seq = design_suboptimal(cfg.antennas, cfg.subbands) if seq is None else seq
    sched = frame_schedule(
        random_schedule(cfg, rng), seq, probe=True, cfg=cfg, rng=rng
    )
    noise_rng = np.random.default_rng(rng.integers(2**32)) if chan.noise_var else None
    return synth_rx(sched, cfg, chan, rng=noise_rng), sched


def _composites(cfg, gains, aods_deg):
    m = np.arange(cfg.antennas)
    steer = np.exp(-1j * np.pi * np.outer(np.sin(np.deg2rad(aods_deg)), m))
    return cfg.samples_per_hop * (np.asarray(gains) @ steer)


def test_estimate_rho_exact_noise_free(cfg, rng):
    gains = (1.0, 0.4 * np.exp(1.3j), 0.3 * np.exp(-0.7j), 0.2j)
    aods = (20.0, -40.0, 65.0, 5.0)
    chan = ChannelConfig(timing_offset=0.31e-6, gains=gains, aods_deg=aods)
    frame, sched = _probe_frame(cfg, chan, rng)
    est = estimate_rho(frame, sched, cfg)
    want = _composites(cfg, gains, aods)
    # DC probe tones are delay invariant: exact recovery despite the offset
    assert np.abs(est.rho_hat - want).max() < 1e-9 * cfg.samples_per_hop
    assert est.valid.all()
    assert est.source_hops.tolist() == [0] + list(range(3, 12))


def test_estimate_rho_offset_too_large(cfg, rng):
    chan = ChannelConfig(timing_offset=0.5e-6)  # 100 samples > L/2
    frame, sched = _probe_frame(cfg, chan, rng)
    with pytest.raises(ProbeMissing):
        estimate_rho(frame, sched, cfg)


def test_estimate_rho_requires_probe_rows(cfg, rng):
    seq = design_suboptimal(cfg.antennas, cfg.subbands)
    sched = frame_schedule(random_schedule(cfg, rng), seq)  # no probe rows
    frame = synth_rx(sched, cfg, ChannelConfig(timing_offset=0.1e-6))
    with pytest.raises(ProbeMissing):
        estimate_rho(frame, sched, cfg)


def test_estimate_rho_rejects_visible_probe_companions(cfg, rng):
    chan = ChannelConfig(timing_offset=0.1e-6)
    frame, sched = _probe_frame(cfg, chan, rng)
    bad = sched.copy()
    bad.subband[5, 0] = 0  # sub-band 0 is visible to the half-hop sum
    with pytest.raises(NullingViolated):
        estimate_rho(frame, bad, cfg)


def test_guard_masks_faded_antenna(cfg, rng):
    # two opposite unit paths at the same angle null every composite while
    # the noise keeps the guard floor positive: all antennas must be flagged
    gains = (1.0, -1.0)
    aods = (20.0, 20.0)
    chan = ChannelConfig(
        timing_offset=0.1e-6, gains=gains, aods_deg=aods, noise_var=1e-4
    )
    frame, sched = _probe_frame(cfg, chan, rng)
    est = estimate_rho(frame, sched, cfg)
    assert not est.valid.any()
    off = estimate_rho(frame, sched, cfg, guard=False)
    assert off.valid.all()


def test_normalize_and_restrict(cfg, rng):
    gains = (1.0, 0.35 * np.exp(0.4j))
    aods = (20.0, -50.0)
    chan = ChannelConfig(timing_offset=0.22e-6, gains=gains, aods_deg=aods)
    frame, sched = _probe_frame(cfg, chan, rng)
    est = estimate_rho(frame, sched, cfg)
    seq = sched.subband[0]
    amps = hop_dft(frame, 0)[cfg.subband_bin(seq)]
    normed, ok = normalize(amps, est)
    assert ok.all()
    # the normalized pilot is the pure timing rotator omega^k
    omega = np.exp(-2j * np.pi * cfg.bandwidth * chan.timing_offset / cfg.subbands)
    assert np.abs(normed - omega**seq).max() < 1e-9


def test_normalize_masks_and_escalates():
    rho = np.array([1.0, 0.0, 2.0], dtype=complex)
    est_valid = np.array([True, False, True])

    class Fake:
        rho_hat = rho
        valid = est_valid

    normed, ok = normalize(np.ones(3, dtype=complex), Fake())
    assert ok.tolist() == [True, False, True]
    assert normed[1] == 0
    with pytest.raises(CompositeTooSmall):
        normalize(np.ones(3, dtype=complex), Fake(), require_all=True)


def test_restricted_profile_after_fade():
    prof = kappa_profile(design_suboptimal(10, 20))
    valid = np.ones(10, dtype=bool)
    valid[4] = False
    r = prof.restrict(valid)
    # terms 2, 3, 4 touch antenna 4; folds drop from 6 to 3
    assert r.m_bar == 3
    assert r.m_breve == 2


def test_bin_noise_scale(cfg):
    rng = np.random.default_rng(11)
    sigma2 = 0.3
    L = cfg.samples_per_hop
    noise = rng.normal(scale=np.sqrt(sigma2 / 2), size=L) + 1j * rng.normal(
        scale=np.sqrt(sigma2 / 2), size=L
    )
    est = bin_noise_scale(np.fft.fft(noise), cfg)
    assert est == pytest.approx(np.sqrt(L * sigma2), rel=0.35)
    assert bin_noise_scale(np.zeros(L), cfg) == 0.0
