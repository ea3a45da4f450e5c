"""Shared fixtures: reference and miniature configurations."""

import numpy as np
import pytest

from fhmimo.config import RadarConfig


@pytest.fixture
def cfg():
    """Reference setup: M=10, K=20, B=100 MHz, T=0.8 us, fs=200 MHz, H=15."""
    return RadarConfig().validate()


@pytest.fixture
def tiny_cfg():
    """Smallest convenient geometry: 2 antennas, 4 sub-bands, 8-sample hops."""
    return RadarConfig(
        antennas=2,
        subbands=4,
        bandwidth=100e6,
        rf_lower=8e9,
        hop_duration=0.04e-6,
        hops=3,
        sample_rate=200e6,
        rx_antennas=2,
    ).validate()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pilot_bin_model(cfg, seq, eta, gains, aods_deg):
    """Closed-form pilot tone amplitudes for the multi-path channel.

    Antenna m's pilot bin holds L * (sum_p beta_p e^{-j pi m sin(phi_p)})
    * omega^{k_m} with omega = exp(-j 2 pi B eta / K).
    """
    seq = np.asarray(seq)
    m = np.arange(cfg.antennas)
    steer = np.exp(
        -1j * np.pi * np.outer(np.sin(np.deg2rad(aods_deg)), m)
    )  # (P, M)
    comp = np.asarray(gains) @ steer
    omega = np.exp(-2j * np.pi * cfg.bandwidth * eta / cfg.subbands)
    return cfg.samples_per_hop * comp * omega**seq
