"""End-to-end estimation: one sampled frame in, one report out.

Order of operations: DFT the first (pilot) hop, detect and pair the M
tones, optionally normalise by probed per-antenna composites (scatter-rich
channels), run the selected phase estimator on the double-ratio terms,
enumerate the timing-offset candidates, estimate direction and gain from
the timing-compensated amplitudes, and finally resolve the offset ambiguity
against the data hops.  Each stage is an importable function elsewhere;
this module only sequences them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import chanest, comms, multipath, rx_frontend, timing
from .config import RadarConfig
from .seqdesign import KappaProfile, kappa_profile

__all__ = ["EstimationReport", "estimate_pilot", "estimate_frame"]


@dataclass
class EstimationReport:
    """Everything recovered from one frame, plus scoring hooks."""

    k_hat: np.ndarray
    amplitudes: np.ndarray  # pilot tone amplitudes, antenna order
    angle_omega: float
    estimator: str
    channel: chanest.ChannelEstimate | None = None
    eta_candidates: np.ndarray = field(default_factory=lambda: np.zeros(0))
    l_eta_candidates: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    chosen: int | None = None  # index into the candidate lists
    composite: multipath.CompositeEstimate | None = None
    valid_antennas: np.ndarray | None = None

    @property
    def eta_hat(self) -> float:
        return float(self.eta_candidates[self.chosen])

    @property
    def l_eta_hat(self) -> int:
        return int(self.l_eta_candidates[self.chosen])

    def demod_reference(self, cfg: RadarConfig) -> comms.DemodReference:
        return comms.DemodReference.from_eta(
            self.eta_hat, self.channel.u_hat, self.channel.beta_comp, cfg
        )


def _pick_angle(ybar, profile, estimator, gamma_db, gamma_t_db, gate):
    if estimator == "auto":
        if gamma_db is None:
            raise ValueError("auto estimator selection needs gamma_db")
        estimator = timing.select_estimator(gamma_db, gamma_t_db, profile)
    if estimator == timing.CAE:
        return timing.cae(ybar, profile), timing.CAE
    if estimator == timing.CRE:
        return timing.cre(ybar, profile, gate=gate), timing.CRE
    raise ValueError(f"unknown estimator: {estimator!r}")


def estimate_pilot(
    frame,
    cfg: RadarConfig,
    profile: KappaProfile | None = None,
    estimator: str = "auto",
    gamma_db: float | None = None,
    gamma_t_db: float = 18.0,
    gate: float | None = None,
    rician: bool = False,
    sched=None,
    guard: bool = True,
    valid_antennas=None,
) -> EstimationReport:
    """Pilot-only stages: tones, phase angle, offset candidates, channel.

    ``rician`` switches on composite probing (needs the transmit ``sched``
    with probe rows).  ``valid_antennas`` pre-masks antennas known to be
    unusable (e.g. interference-hit sub-bands); it combines with the fade
    guard's own mask.
    """
    spec = rx_frontend.hop_dft(frame, 0)
    k_hat, amps = rx_frontend.detect_and_pair(spec, cfg)
    if profile is None:
        profile = kappa_profile(k_hat)
    valid = np.ones(cfg.antennas, dtype=bool) if valid_antennas is None else np.asarray(
        valid_antennas, dtype=bool
    ).copy()
    composite = None
    ratio_src = amps
    if rician:
        if sched is None:
            raise ValueError("rician estimation needs the transmit schedule")
        composite = multipath.estimate_rho(frame, sched, cfg, guard=guard)
        ratio_src, ok = multipath.normalize(amps, composite)
        valid &= ok
    eff_profile = profile.restrict(valid) if not valid.all() else profile
    # zero placeholders on dropped antennas never enter the kept ratio terms,
    # but the chain itself needs nonzero denominators: patch them to 1
    src = ratio_src.copy()
    src[~valid] = 1.0
    ybar = timing.ratio_chain(src)
    angle, used = _pick_angle(ybar, eff_profile, estimator, gamma_db, gamma_t_db, gate)
    etas, l_etas = timing.eta_candidates(angle, cfg)
    chan = chanest.estimate_channel(amps, k_hat, angle, cfg)
    return EstimationReport(
        k_hat=k_hat,
        amplitudes=amps,
        angle_omega=angle,
        estimator=used,
        channel=chan,
        eta_candidates=etas,
        l_eta_candidates=l_etas,
        composite=composite,
        valid_antennas=valid,
    )


def estimate_frame(
    frame,
    cfg: RadarConfig,
    data_hops=None,
    single_offbin: bool = False,
    **pilot_kw,
) -> EstimationReport:
    """Pilot stages plus offset-ambiguity resolution over the data hops."""
    report = estimate_pilot(frame, cfg, **pilot_kw)
    report.chosen = comms.resolve_ambiguity(
        frame,
        report.l_eta_candidates,
        cfg,
        data_hops=data_hops,
        single_offbin=single_offbin,
    )
    return report
