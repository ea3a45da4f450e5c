"""Frame capture files: byte layout, roundtrip, replay demodulation."""

import struct

import numpy as np
import pytest

from fhmimo.channel import ChannelConfig, synth_rx
from fhmimo.comms import bits_per_hop, demod_frame, modulate_frame
from fhmimo.config import RadarConfig
from fhmimo.errors import ConfigError
from fhmimo.frameio import FRAME_MAGIC, dump_frame, load_frame
from fhmimo.pipeline import estimate_frame
from fhmimo.seqdesign import design_suboptimal


def _frame(cfg, seed=0, eta=0.17e-6):
    rng = np.random.default_rng(seed)
    pilot = design_suboptimal(cfg.antennas, cfg.subbands)
    bits = rng.integers(0, 2, size=bits_per_hop(cfg, "pfhcs") * (cfg.hops - 2))
    sched, _ = modulate_frame(bits, cfg, pilot, scheme="pfhcs")
    gain = np.exp(2j * np.pi * rng.uniform())
    chan = ChannelConfig(timing_offset=eta, gains=(gain,), aods_deg=(20.0,))
    return synth_rx(sched, cfg, chan), bits


def test_header_byte_layout(cfg, tmp_path):
    frame, _ = _frame(cfg)
    path = tmp_path / "cap.bin"
    dump_frame(frame, path)
    blob = path.read_bytes()
    want = struct.pack("<4sIId", b"FHDF", 160, 15, 2e8)
    assert blob[:20] == want
    assert len(blob) == 20 + 15 * 160 * 8
    # first sample is interleaved float32 re, im
    re, im = struct.unpack("<ff", blob[20:28])
    assert re + 1j * im == pytest.approx(frame.samples[0], rel=1e-6)


def test_roundtrip_precision(cfg, tmp_path):
    frame, _ = _frame(cfg, seed=3)
    path = tmp_path / "cap.bin"
    dump_frame(frame, path)
    back = load_frame(path, cfg)
    assert back.samples.dtype == np.complex128
    assert back.l_eta == -1
    assert back.truth is None
    assert back.hops == cfg.hops
    scale = np.abs(frame.samples).max()
    assert np.abs(back.samples - frame.samples).max() < 1e-6 * scale


def test_load_rejects_mismatches(cfg, tmp_path):
    frame, _ = _frame(cfg)
    path = tmp_path / "cap.bin"
    dump_frame(frame, path)
    other = RadarConfig(hop_duration=0.2e-6)
    with pytest.raises(ConfigError, match="geometry"):
        load_frame(path, other)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"WAVE"
    bad = tmp_path / "bad.bin"
    bad.write_bytes(blob)
    with pytest.raises(ConfigError, match="magic"):
        load_frame(bad, cfg)
    trunc = tmp_path / "trunc.bin"
    trunc.write_bytes(path.read_bytes()[:-7])
    with pytest.raises(ConfigError, match="truncated"):
        load_frame(trunc, cfg)
    short = tmp_path / "short.bin"
    short.write_bytes(path.read_bytes()[:10])
    with pytest.raises(ConfigError, match="header"):
        load_frame(short, cfg)
    wrong_fs = struct.pack("<4sIId", FRAME_MAGIC, 160, 15, 1e8) + path.read_bytes()[20:]
    fsf = tmp_path / "fs.bin"
    fsf.write_bytes(wrong_fs)
    with pytest.raises(ConfigError, match="sample rate"):
        load_frame(fsf, cfg)


def test_dump_rejects_wrong_size(cfg, tmp_path):
    frame, _ = _frame(cfg)
    clipped = type(frame)(
        samples=frame.samples[:-1], l_eta=frame.l_eta, truth=frame.truth, cfg=cfg
    )
    with pytest.raises(ConfigError):
        dump_frame(clipped, tmp_path / "x.bin")


def test_replay_demodulates(cfg, tmp_path):
    frame, bits = _frame(cfg, seed=9, eta=0.23e-6)
    path = tmp_path / "cap.bin"
    dump_frame(frame, path)
    back = load_frame(path, cfg)
    rep = estimate_frame(back, cfg, estimator="cre")
    res = demod_frame(back, rep.demod_reference(cfg), cfg, scheme="pfhcs")
    assert not res.erasures.any()
    assert np.array_equal(res.bits, bits)
