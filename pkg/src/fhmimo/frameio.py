"""Binary frame capture files for replay.

A capture holds one received frame as interleaved complex64 samples behind a
small fixed header, all little-endian:

    bytes 0..3    magic ``FHDF``
    bytes 4..7    uint32  samples per hop (L)
    bytes 8..11   uint32  hop count (H)
    bytes 12..19  float64 sample rate in Hz
    bytes 20..    H*L complex64 samples (re, im pairs of float32)

The header carries frame geometry only.  Channel truth (timing offset, path
gains) is synthesis-side knowledge, so a loaded frame comes back with the
offset marked unknown and no truth attached; estimators that merely read
samples work as usual, while helpers that need the true offset cannot verify
their preconditions on a replayed capture.

complex64 storage costs about 7 significant digits, plenty for demodulation
but below the accuracy of noise-free estimator tests, which should stay on
in-memory frames.
"""

from __future__ import annotations

import struct

import numpy as np

from .channel import SampledFrame
from .config import RadarConfig
from .errors import ConfigError

__all__ = ["dump_frame", "load_frame", "FRAME_MAGIC"]

FRAME_MAGIC = b"FHDF"
_HEADER = struct.Struct("<4sIId")


def dump_frame(frame: SampledFrame, path) -> None:
    """Write a received frame to ``path`` in the capture format above."""
    cfg = frame.cfg
    samples = np.ascontiguousarray(frame.samples, dtype="<c8")
    if samples.size != cfg.hops * cfg.samples_per_hop:
        raise ConfigError(
            f"frame has {samples.size} samples, config expects "
            f"{cfg.hops * cfg.samples_per_hop}"
        )
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FRAME_MAGIC, cfg.samples_per_hop, cfg.hops, cfg.sample_rate))
        fh.write(samples.tobytes())


def load_frame(path, cfg: RadarConfig) -> SampledFrame:
    """Read a capture and bind it to ``cfg``.

    The header must agree with the config on samples per hop, hop count and
    sample rate; anything else means the capture was taken under a different
    setup and replaying it here would be meaningless.
    """
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ConfigError(f"capture too short for header: {path}")
        magic, l_hop, hops, fs = _HEADER.unpack(head)
        if magic != FRAME_MAGIC:
            raise ConfigError(f"not a frame capture (bad magic): {path}")
        if l_hop != cfg.samples_per_hop or hops != cfg.hops:
            raise ConfigError(
                f"capture geometry {hops} hops x {l_hop} samples does not match "
                f"config {cfg.hops} x {cfg.samples_per_hop}"
            )
        if abs(fs - cfg.sample_rate) > 1e-6 * cfg.sample_rate:
            raise ConfigError(
                f"capture sample rate {fs} Hz does not match config {cfg.sample_rate} Hz"
            )
        raw = fh.read(hops * l_hop * 8)
    if len(raw) != hops * l_hop * 8:
        raise ConfigError(f"capture truncated: {path}")
    samples = np.frombuffer(raw, dtype="<c8").astype(np.complex128)
    # Offset truth is not stored; -1 marks it unknown.
    return SampledFrame(samples=samples, l_eta=-1, truth=None, cfg=cfg)
