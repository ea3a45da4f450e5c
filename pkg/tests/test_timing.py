"""Ratio chain, both phase estimators, selection rule and offset candidates."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhmimo.config import RadarConfig
from fhmimo.errors import EstimationError
from fhmimo.seqdesign import design_cae, design_cre, design_suboptimal, kappa_profile
from fhmimo.timing import (
    cae,
    cre,
    default_gate,
    eta_candidates,
    ratio_chain,
    select_estimator,
    wrap_angle,
)

SUBOPT = design_suboptimal(10, 20)
PROF = kappa_profile(SUBOPT)


def _clean_amps(seq, angle, gain=1.0 + 0.0j, u=1.2):
    m = np.arange(len(seq))
    return gain * np.exp(-1j * m * u) * np.exp(1j * angle * np.asarray(seq))


@settings(deadline=None, max_examples=80)
@given(x=st.floats(min_value=-50.0, max_value=50.0))
def test_wrap_angle_range_and_congruence(x):
    w = wrap_angle(x)
    assert -np.pi <= w < np.pi
    assert np.cos(w) == pytest.approx(np.cos(x), abs=1e-9)
    assert np.sin(w) == pytest.approx(np.sin(x), abs=1e-9)


def test_ratio_chain_exposes_curvature():
    angle = -0.8 * np.pi
    ybar = ratio_chain(_clean_amps(SUBOPT, angle))
    want = np.exp(1j * np.asarray(PROF.kappa) * angle)
    assert np.abs(ybar - want).max() < 1e-10


@settings(deadline=None, max_examples=40)
@given(
    scale_db=st.floats(min_value=-40.0, max_value=40.0),
    phase=st.floats(min_value=0.0, max_value=2 * np.pi),
)
def test_ratio_chain_scale_invariance(scale_db, phase):
    amps = _clean_amps(SUBOPT, 0.37)
    scaled = amps * 10 ** (scale_db / 20.0) * np.exp(1j * phase)
    assert np.abs(ratio_chain(amps) - ratio_chain(scaled)).max() < 1e-9


def test_ratio_chain_independent_of_steering():
    # the double ratio cancels any linear-in-antenna phase, whatever u is
    a = ratio_chain(_clean_amps(SUBOPT, 0.9, u=0.0))
    b = ratio_chain(_clean_amps(SUBOPT, 0.9, u=2.7))
    assert np.abs(a - b).max() < 1e-9


@pytest.mark.parametrize("angle", np.linspace(-np.pi, np.pi, 17, endpoint=False))
def test_cae_exact_noise_free(angle):
    seq = design_cae(10, 20)
    prof = kappa_profile(seq)
    ybar = ratio_chain(_clean_amps(seq, angle))
    assert wrap_angle(cae(ybar, prof) - angle) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("angle", np.linspace(-np.pi, np.pi, 17, endpoint=False))
def test_cre_exact_noise_free(angle):
    seq = design_cre(10, 20)
    prof = kappa_profile(seq)
    ybar = ratio_chain(_clean_amps(seq, angle))
    assert wrap_angle(cre(ybar, prof) - angle) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("angle", np.linspace(-np.pi, np.pi, 17, endpoint=False))
def test_cre_exact_on_suboptimal_tail(angle):
    ybar = ratio_chain(_clean_amps(SUBOPT, angle))
    assert wrap_angle(cre(ybar, PROF) - angle) == pytest.approx(0.0, abs=1e-9)


def test_cae_formula_is_weighted_mean():
    # the estimate is the angle of sum(Re + j*kappa*Im) over folding terms
    rng = np.random.default_rng(8)
    ybar = np.exp(1j * rng.uniform(-0.3, 0.3, size=len(PROF.kappa)))
    acc = 0.0 + 0.0j
    for i in PROF.fold_idx:
        acc += ybar[i].real + 1j * PROF.kappa[i] * ybar[i].imag
    assert cae(ybar, PROF) == pytest.approx(np.angle(acc), abs=1e-12)


def test_cre_gate_fires_on_inconsistent_terms():
    # noise-free terms are consistent: the gate must stay quiet
    ybar = ratio_chain(_clean_amps(SUBOPT, 1.1))
    gate = default_gate(PROF)
    assert wrap_angle(cre(ybar, PROF, gate=gate) - 1.1) == pytest.approx(0.0, abs=1e-9)
    # scrambled phases have no consistent de-wrap: the gate must fire
    bad = np.exp(1j * np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.8, -2.8]))
    with pytest.raises(EstimationError):
        cre(bad, PROF, gate=1e-3)


def test_default_gate_value():
    # a third of the candidate line spacing of the least curved term
    assert default_gate(PROF) == pytest.approx(2 * np.pi / (3 * 5))
    prof_cre = kappa_profile(design_cre(10, 20))
    assert default_gate(prof_cre) == pytest.approx(2 * np.pi / (3 * 8))


def test_cre_needs_two_terms():
    prof = kappa_profile(design_cae(10, 20))
    with pytest.raises(EstimationError):
        cre(np.ones(8, dtype=complex), prof)


def test_select_estimator_threshold():
    assert select_estimator(10.0, 18.0, PROF) == "cae"
    assert select_estimator(18.0, 18.0, PROF) == "cae"  # strictly above switches
    assert select_estimator(18.1, 18.0, PROF) == "cre"
    assert select_estimator(30.0, 18.0, PROF) == "cre"


def test_select_estimator_falls_back_on_empty_sets():
    cae_only = kappa_profile(design_cae(10, 20))
    assert select_estimator(40.0, 18.0, cae_only) == "cae"
    cre_only = kappa_profile(design_cre(10, 20))
    assert select_estimator(0.0, 18.0, cre_only) == "cre"


def test_eta_candidates_default_geometry():
    cfg = RadarConfig().validate()
    # angle -0.8*pi corresponds to offsets {0.08, 0.28, 0.48, 0.68} us
    etas, l_etas = eta_candidates(-0.8 * np.pi, cfg)
    assert np.allclose(etas, np.array([0.08, 0.28, 0.48, 0.68]) * 1e-6)
    assert l_etas.tolist() == [16, 56, 96, 136]


@settings(deadline=None, max_examples=60)
@given(eta_frac=st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_eta_candidates_contain_truth(eta_frac):
    cfg = RadarConfig().validate()
    eta = eta_frac * cfg.hop_duration
    angle = wrap_angle(-2 * np.pi * cfg.bandwidth * eta / cfg.subbands)
    etas, _ = eta_candidates(angle, cfg)
    # spacing K/B, all inside (0, T), truth among them
    assert np.allclose(np.diff(etas), cfg.subbands / cfg.bandwidth)
    assert etas.min() > 0 and etas.max() < cfg.hop_duration
    assert np.min(np.abs(etas - eta)) < 1e-12
