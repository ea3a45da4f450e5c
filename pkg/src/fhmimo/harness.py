"""Seeded Monte Carlo sweeps: timing/channel MSE, symbol errors, rates.

Every trial owns a bit generator derived from (master seed, point index,
trial index) through SeedSequence, so neither execution order nor work
splitting changes a single drawn sample; a sweep cut into halves pools to
the same numbers as one big run.  Per-point aggregation goes through
math.fsum, which is exact, so the pooled result is order-independent too.

The pilot estimation here skips tone detection: the two leading hops carry
the designed handshake sequence, which the receiver knows, so the sweeps
read the tone bins directly.  The frame-level runners (symbol error, rate)
exercise the full detection path instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import chanest, multipath, rx_frontend, timing
from .channel import (
    draw_interferer,
    draw_los_channel,
    draw_rician_channel,
    snr_to_noise,
    synth_rx,
)
from .comms import DemodReference, bits_per_hop, demod_frame, modulate_frame
from .config import RadarConfig
from .errors import ConfigError
from .pipeline import estimate_frame
from .seqdesign import design_sequence, kappa_profile, mselb_cae, mselb_cre
from .waveform import HopSchedule, frame_schedule

__all__ = [
    "SweepSpec",
    "trial_rng",
    "ebn0_offset_db",
    "run_mse_omega",
    "run_mse_u",
    "run_mse_beta",
    "run_ser",
    "run_rate",
    "write_csv",
]

CHANNEL_MODES = ("los", "rician", "los+interference")
SEQUENCE_MODES = ("cae", "cre", "suboptimal", "custom")
SCHEMES = ("psk", "fhcs", "pfhcs")


@dataclass
class SweepSpec:
    """One sweep: the grid, the scenario, and the reproducibility keys."""

    grid_db: np.ndarray = field(default_factory=lambda: np.arange(0.0, 41.0, 5.0))
    trials: int = 1000
    channel: str = "los"
    sequence: str = "suboptimal"
    custom_seq: tuple | None = None
    scheme: str = "pfhcs"
    j_bits: int = 1
    master_seed: int = 0
    trial_offset: int = 0
    ebn0: bool = False  # grid is Eb/N0 rather than per-sample SNR
    gamma_t_db: float = 18.0
    aod_deg: float = 20.0
    pilot_gamma_db: float = 15.0  # estimation SNR frozen for frame sweeps
    guard: bool = True  # fade guard on probed composites
    abnormal_filter: bool = False
    abnormal_factor: float = 100.0
    valid_antennas: tuple | None = None  # pre-masked antennas, None = all
    interferer_min_subband: int = 4
    interferer_power_db: float = -5.0
    nlos_paths: int = 4
    nlos_power_db: float = -5.0

    def validate(self) -> "SweepSpec":
        grid = np.asarray(self.grid_db, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ConfigError("sweep grid must be a non-empty 1-d array")
        if np.any(np.diff(grid) < 0):
            raise ConfigError("sweep grid must be monotone non-decreasing")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.trial_offset < 0:
            raise ConfigError("trial_offset must be >= 0")
        if self.channel not in CHANNEL_MODES:
            raise ConfigError(f"channel must be one of {CHANNEL_MODES}")
        if self.sequence not in SEQUENCE_MODES:
            raise ConfigError(f"sequence must be one of {SEQUENCE_MODES}")
        if self.sequence == "custom" and self.custom_seq is None:
            raise ConfigError("custom sequence mode needs custom_seq")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.j_bits < 1:
            raise ConfigError("j_bits must be >= 1")
        return self


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (point, trial) cell of a sweep."""
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), *(int(k) for k in key)])
    )


def _sequence(spec: SweepSpec, cfg: RadarConfig) -> np.ndarray:
    if spec.sequence == "custom":
        return np.asarray(spec.custom_seq, dtype=int)
    return design_sequence(cfg.antennas, cfg.subbands, spec.sequence)


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs) if xs else float("nan")


def _median(xs) -> float:
    return float(np.median(np.asarray(xs, dtype=float))) if xs else float("nan")


def ebn0_offset_db(cfg: RadarConfig, scheme: str, j_bits: int = 1) -> float:
    """Eb/N0 minus per-sample SNR, in dB.

    The M unit-gain tones deliver M*L units of energy per hop against a
    per-sample noise variance of 10^(-gamma/10), so energy per payload bit
    over noise density is gamma * M * L / bits_per_hop.
    """
    return 10.0 * np.log10(
        cfg.antennas * cfg.samples_per_hop / bits_per_hop(cfg, scheme, j_bits)
    )


# -- pilot-only machinery ---------------------------------------------------


def _pilot_setup(spec: SweepSpec, cfg: RadarConfig):
    """Sequence, ratio profile, short pilot config/schedule, antenna mask."""
    seq = _sequence(spec, cfg)
    profile = kappa_profile(seq)
    rician = spec.channel == "rician"
    hops = cfg.antennas + 2 if rician else 2
    pcfg = replace(cfg, hops=hops)
    sched = HopSchedule(np.tile(seq, (hops, 1)))
    if rician:
        sched = frame_schedule(sched, seq, probe=True, cfg=pcfg)
    valid0 = np.ones(cfg.antennas, dtype=bool)
    if spec.valid_antennas is not None:
        valid0 &= np.asarray(spec.valid_antennas, dtype=bool)
    if spec.channel == "los+interference":
        valid0 &= seq < spec.interferer_min_subband
    return seq, profile, pcfg, sched, valid0


def _draw_channel(spec: SweepSpec, rng, gamma_db: float):
    if spec.channel == "rician":
        return draw_rician_channel(
            rng,
            gamma_db,
            aod_deg=spec.aod_deg,
            nlos_paths=spec.nlos_paths,
            nlos_power_db=spec.nlos_power_db,
        )
    return draw_los_channel(rng, gamma_db, aod_deg=spec.aod_deg)


def _angle_estimates(ybar, eff_profile, gamma_db, gamma_t_db):
    """(cae, cre, selected) wrapped-angle estimates; NaN where undefined."""
    a_cae = timing.cae(ybar, eff_profile) if eff_profile.m_bar >= 1 else float("nan")
    a_cre = (
        timing.cre(ybar, eff_profile) if eff_profile.m_breve >= 2 else float("nan")
    )
    name = timing.select_estimator(gamma_db, gamma_t_db, eff_profile)
    a_sel = a_cae if name == timing.CAE else a_cre
    return a_cae, a_cre, a_sel


def _pilot_trial(spec, cfg, seq, profile, pcfg, sched, valid0, gamma_db, rng):
    """One pilot estimation: returns (chan, amps, estimates dict)."""
    chan = _draw_channel(spec, rng, gamma_db)
    if spec.channel == "los+interference":
        chan = replace(
            chan,
            interferer=draw_interferer(
                pcfg,
                rng,
                min_subband=spec.interferer_min_subband,
                power_db=spec.interferer_power_db,
            ),
        )
    frame = synth_rx(sched, pcfg, chan, rng)
    spec0 = rx_frontend.hop_dft(frame, 0)
    amps = spec0[pcfg.subband_bin(seq)]
    valid = valid0.copy()
    src = amps
    if spec.channel == "rician":
        comp = multipath.estimate_rho(frame, sched, pcfg, guard=spec.guard)
        src, ok = multipath.normalize(amps, comp)
        valid &= ok
    eff = profile.restrict(valid) if not valid.all() else profile
    src = src.copy()
    src[~valid] = 1.0
    ybar = timing.ratio_chain(src)
    a_cae, a_cre, a_sel = _angle_estimates(ybar, eff, gamma_db, spec.gamma_t_db)
    return chan, amps, {"cae": a_cae, "cre": a_cre, "sel": a_sel}


def _true_angle(chan, cfg: RadarConfig) -> float:
    return float(
        timing.wrap_angle(
            -2.0 * np.pi * cfg.bandwidth * chan.timing_offset / cfg.subbands
        )
    )


def _sq_angle_err(est: float, true: float) -> float:
    if math.isnan(est):
        return float("nan")
    return float(timing.wrap_angle(est - true)) ** 2


def omega_trial_errors(spec: SweepSpec, cfg: RadarConfig, point: int) -> dict:
    """Per-trial squared rotator-angle errors for one grid point.

    Keys: cae, cre, sel (arrays of length trials; NaN where the estimator
    does not apply), plus sel_los for the scatter channel's line-of-sight
    twin (same offset and gain, scatter paths removed, fresh noise).
    """
    gamma_db = float(np.asarray(spec.grid_db, dtype=float)[point])
    seq, profile, pcfg, sched, valid0 = _pilot_setup(spec, cfg)
    out = {"cae": [], "cre": [], "sel": []}
    twin = spec.channel == "rician"
    if twin:
        out["sel_los"] = []
    for t in range(spec.trial_offset, spec.trial_offset + spec.trials):
        rng = trial_rng(spec.master_seed, point, t)
        chan, _, est = _pilot_trial(
            spec, cfg, seq, profile, pcfg, sched, valid0, gamma_db, rng
        )
        true = _true_angle(chan, pcfg)
        out["cae"].append(_sq_angle_err(est["cae"], true))
        out["cre"].append(_sq_angle_err(est["cre"], true))
        out["sel"].append(_sq_angle_err(est["sel"], true))
        if twin:
            frame = synth_rx(sched, pcfg, chan.los_only(), rng)
            spec0 = rx_frontend.hop_dft(frame, 0)
            amps = spec0[pcfg.subband_bin(seq)]
            ybar = timing.ratio_chain(amps)
            _, _, a_sel = _angle_estimates(ybar, profile, gamma_db, spec.gamma_t_db)
            out["sel_los"].append(_sq_angle_err(a_sel, true))
    return {k: np.asarray(v, dtype=float) for k, v in out.items()}


def _finite(xs: np.ndarray) -> list:
    return xs[np.isfinite(xs)].tolist()


def run_mse_omega(spec: SweepSpec, cfg: RadarConfig | None = None) -> list[dict]:
    """Rotator-angle MSE sweep; one row per grid point.

    Columns: gamma_db, mse_cae, mse_cre, mse_selected, med_selected,
    mselb_cae, mselb_cre; scatter channels add mse_selected_los and
    med_selected_los; the abnormal-trial filter adds mse_selected_filtered
    (trials whose scatter error exceeds abnormal_factor times the worst
    line-of-sight twin error are dropped from that column only).
    """
    cfg = (cfg or RadarConfig()).validate()
    spec.validate()
    if spec.abnormal_filter and spec.channel != "rician":
        raise ConfigError("the abnormal-trial filter needs the rician channel")
    seq = _sequence(spec, cfg)
    profile = kappa_profile(seq)
    L = cfg.samples_per_hop
    rows = []
    for p, gamma_db in enumerate(np.asarray(spec.grid_db, dtype=float)):
        errs = omega_trial_errors(spec, cfg, p)
        gamma = 10.0 ** (gamma_db / 10.0)
        row = {
            "gamma_db": float(gamma_db),
            "mse_cae": _mean(_finite(errs["cae"])),
            "mse_cre": _mean(_finite(errs["cre"])),
            "mse_selected": _mean(_finite(errs["sel"])),
            "med_selected": _median(_finite(errs["sel"])),
            "mselb_cae": mselb_cae(profile.m_bar, L, gamma)
            if profile.m_bar
            else float("nan"),
            "mselb_cre": mselb_cre(profile.crt_kappas(), L, gamma)
            if profile.m_breve >= 2
            else float("nan"),
        }
        if spec.channel == "rician":
            row["mse_selected_los"] = _mean(_finite(errs["sel_los"]))
            row["med_selected_los"] = _median(_finite(errs["sel_los"]))
            if spec.abnormal_filter:
                cut = spec.abnormal_factor * np.nanmax(errs["sel_los"])
                keep = errs["sel"][np.isfinite(errs["sel"]) & (errs["sel"] <= cut)]
                row["mse_selected_filtered"] = _mean(keep.tolist())
        rows.append(row)
    return rows


def chan_trial_errors(spec: SweepSpec, cfg: RadarConfig, point: int) -> dict:
    """Per-trial direction/gain errors for one grid point (line of sight).

    Keys: u (squared direction-surrogate error through the full chain),
    u_ideal (same with the true rotator angle injected), prod_re/prod_im
    (the normalized gain product whose target is 1+0j).
    """
    if spec.channel != "los":
        raise ConfigError("direction/gain sweeps are defined on the los channel")
    gamma_db = float(np.asarray(spec.grid_db, dtype=float)[point])
    seq, profile, pcfg, sched, valid0 = _pilot_setup(spec, cfg)
    M = cfg.antennas
    u_true = M * np.sin(np.deg2rad(spec.aod_deg)) / 2.0
    out = {"u": [], "u_ideal": [], "prod_re": [], "prod_im": []}
    for t in range(spec.trial_offset, spec.trial_offset + spec.trials):
        rng = trial_rng(spec.master_seed, point, t)
        chan, amps, est = _pilot_trial(
            spec, cfg, seq, profile, pcfg, sched, valid0, gamma_db, rng
        )
        true = _true_angle(chan, pcfg)
        ch_est = chanest.estimate_channel(amps, seq, est["sel"], pcfg)
        ch_ideal = chanest.estimate_channel(amps, seq, true, pcfg)
        for key, ce in (("u", ch_est), ("u_ideal", ch_ideal)):
            d = ((ce.u_hat - u_true + M / 2.0) % M) - M / 2.0
            out[key].append(float(d) ** 2)
        beta_comp_true = pcfg.samples_per_hop * chan.gains[0]
        q = ch_est.beta_comp * np.conj(beta_comp_true) / abs(beta_comp_true) ** 2
        out["prod_re"].append(float(q.real))
        out["prod_im"].append(float(q.imag))
    return {k: np.asarray(v, dtype=float) for k, v in out.items()}


def run_mse_u(spec: SweepSpec, cfg: RadarConfig | None = None) -> list[dict]:
    """Direction-surrogate MSE sweep: full chain vs true-rotator baseline."""
    cfg = (cfg or RadarConfig()).validate()
    spec.validate()
    rows = []
    for p, gamma_db in enumerate(np.asarray(spec.grid_db, dtype=float)):
        errs = chan_trial_errors(spec, cfg, p)
        rows.append(
            {
                "gamma_db": float(gamma_db),
                "mse_u": _mean(errs["u"].tolist()),
                "mse_u_ideal_omega": _mean(errs["u_ideal"].tolist()),
            }
        )
    return rows


def run_mse_beta(spec: SweepSpec, cfg: RadarConfig | None = None) -> list[dict]:
    """Normalized-gain sweep: squared error and bias of the product.

    The product multiplies the estimated composite gain by the conjugate
    truth over its squared magnitude, so a perfect estimate gives exactly
    1; mse_beta averages |product - 1|^2 and bias_beta is |mean - 1|.
    """
    cfg = (cfg or RadarConfig()).validate()
    spec.validate()
    rows = []
    for p, gamma_db in enumerate(np.asarray(spec.grid_db, dtype=float)):
        errs = chan_trial_errors(spec, cfg, p)
        dev = (errs["prod_re"] - 1.0) ** 2 + errs["prod_im"] ** 2
        mean_re = _mean(errs["prod_re"].tolist())
        mean_im = _mean(errs["prod_im"].tolist())
        rows.append(
            {
                "gamma_db": float(gamma_db),
                "mse_beta": _mean(dev.tolist()),
                "bias_beta": math.hypot(mean_re - 1.0, mean_im),
            }
        )
    return rows


# -- frame-level sweeps -----------------------------------------------------


def _truth_words(bits: np.ndarray, cfg: RadarConfig, scheme: str, j_bits: int):
    """Split the payload back into per-hop combination and phase words."""
    from .comms import FhcsCodebook, _words_from_bits

    book = FhcsCodebook(cfg.antennas, cfg.subbands)
    data_hops = cfg.hops - 2
    comb = np.full(data_hops, -1, dtype=int)
    psk = np.zeros((data_hops, cfg.antennas), dtype=int)
    pos = 0
    for i in range(data_hops):
        if scheme in ("fhcs", "pfhcs"):
            comb[i] = _words_from_bits(bits[pos : pos + book.bits], book.bits)[0]
            pos += book.bits
        if scheme in ("psk", "pfhcs"):
            psk[i] = _words_from_bits(
                bits[pos : pos + cfg.antennas * j_bits], j_bits
            )
            pos += cfg.antennas * j_bits
    return comb, psk


def _symbol_errors(res, comb_true, psk_true, scheme: str) -> int:
    if scheme == "psk":
        return int(np.sum(res.psk_word_rows != psk_true))
    if scheme == "fhcs":
        return int(np.sum(res.comb_words != comb_true))
    bad = (res.comb_words != comb_true) | np.any(res.psk_word_rows != psk_true, axis=1)
    return int(np.sum(bad))


def _symbols_per_frame(cfg: RadarConfig, scheme: str) -> int:
    data = cfg.hops - 2
    return data * cfg.antennas if scheme == "psk" else data


def comm_trial_counts(spec: SweepSpec, cfg: RadarConfig, trial: int) -> dict:
    """One frozen-pilot communication trial across the whole grid.

    The channel, payload, and pilot noise come from the trial's base
    generator; estimates are frozen from the pilot-SNR frame, then the same
    channel is re-noised at every grid point and demodulated twice (frozen
    estimates and true-channel reference).  Returns per-point arrays of
    symbol- and bit-error counts.
    """
    if spec.channel != "los":
        raise ConfigError("frame sweeps are defined on the los channel")
    seq = _sequence(spec, cfg)
    profile = kappa_profile(seq)
    grid = np.asarray(spec.grid_db, dtype=float)
    off = ebn0_offset_db(cfg, spec.scheme, spec.j_bits) if spec.ebn0 else 0.0
    rng = trial_rng(spec.master_seed, trial, 0)
    chan = _draw_channel(spec, rng, spec.pilot_gamma_db)
    need = bits_per_hop(cfg, spec.scheme, spec.j_bits) * (cfg.hops - 2)
    bits = rng.integers(0, 2, size=need)
    sched, _ = modulate_frame(bits, cfg, seq, scheme=spec.scheme, j_bits=spec.j_bits)
    frame = synth_rx(sched, cfg, chan, rng)
    report = estimate_frame(
        frame,
        cfg,
        profile=profile,
        estimator="auto",
        gamma_db=spec.pilot_gamma_db,
        gamma_t_db=spec.gamma_t_db,
    )
    ref = report.demod_reference(cfg)
    u_true = cfg.antennas * np.sin(np.deg2rad(spec.aod_deg)) / 2.0
    ref_ideal = DemodReference.from_eta(
        chan.timing_offset, u_true, cfg.samples_per_hop * chan.gains[0], cfg
    )
    comb_true, psk_true = _truth_words(bits, cfg, spec.scheme, spec.j_bits)
    out = {
        "sym": np.zeros(grid.size, dtype=int),
        "sym_ideal": np.zeros(grid.size, dtype=int),
        "bit": np.zeros(grid.size, dtype=int),
        "bit_ideal": np.zeros(grid.size, dtype=int),
    }
    for p in range(grid.size):
        gamma_db = grid[p] - off
        chan_p = replace(chan, noise_var=snr_to_noise(gamma_db))
        rng_p = trial_rng(spec.master_seed, trial, 1 + p)
        frame_p = synth_rx(sched, cfg, chan_p, rng_p)
        for tag, r in (("", ref), ("_ideal", ref_ideal)):
            res = demod_frame(
                frame_p, r, cfg, scheme=spec.scheme, j_bits=spec.j_bits
            )
            out["sym" + tag][p] = _symbol_errors(res, comb_true, psk_true, spec.scheme)
            out["bit" + tag][p] = int(np.sum(res.bits != bits))
    return out


def _comm_sweep(spec: SweepSpec, cfg: RadarConfig):
    cfg = (cfg or RadarConfig()).validate()
    spec.validate()
    grid = np.asarray(spec.grid_db, dtype=float)
    totals = None
    for t in range(spec.trial_offset, spec.trial_offset + spec.trials):
        counts = comm_trial_counts(spec, cfg, t)
        if totals is None:
            totals = counts
        else:
            for k in totals:
                totals[k] += counts[k]
    return grid, totals


def run_ser(spec: SweepSpec, cfg: RadarConfig | None = None) -> list[dict]:
    """Symbol-error-rate sweep with frozen pilot estimates.

    A symbol is one hop's combination word (fhcs), one antenna's phase word
    (psk), or the whole per-hop pair (pfhcs); combination erasures count as
    errors.  The ideal column demodulates with the true channel instead of
    the estimates.
    """
    cfg = cfg or RadarConfig()
    grid, totals = _comm_sweep(spec, cfg)
    off = ebn0_offset_db(cfg, spec.scheme, spec.j_bits)
    denom = spec.trials * _symbols_per_frame(cfg, spec.scheme)
    rows = []
    for p in range(grid.size):
        gamma_db = grid[p] - off if spec.ebn0 else grid[p]
        rows.append(
            {
                "gamma_db": float(gamma_db),
                "ebn0_db": float(gamma_db + off),
                "ser": totals["sym"][p] / denom,
                "ser_ideal": totals["sym_ideal"][p] / denom,
            }
        )
    return rows


def run_rate(spec: SweepSpec, cfg: RadarConfig | None = None) -> list[dict]:
    """Goodput sweep: correctly recovered payload bits over data time."""
    cfg = cfg or RadarConfig()
    grid, totals = _comm_sweep(spec, cfg)
    off = ebn0_offset_db(cfg, spec.scheme, spec.j_bits)
    need = bits_per_hop(cfg, spec.scheme, spec.j_bits) * (cfg.hops - 2)
    data_time = (cfg.hops - 2) * cfg.hop_duration
    gross = bits_per_hop(cfg, spec.scheme, spec.j_bits) / cfg.hop_duration
    rows = []
    for p in range(grid.size):
        gamma_db = grid[p] - off if spec.ebn0 else grid[p]
        rows.append(
            {
                "gamma_db": float(gamma_db),
                "rate_bps": (need - totals["bit"][p] / spec.trials) / data_time,
                "rate_ideal_bps": (need - totals["bit_ideal"][p] / spec.trials)
                / data_time,
                "gross_bps": gross,
            }
        )
    return rows


# -- CSV --------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10e}"
    return str(v)


def write_csv(path, rows: list[dict]) -> None:
    """Stable delimited dump: header row, 10-digit scientific floats."""
    if not rows:
        raise ConfigError("no rows to write")
    keys = list(rows[0].keys())
    for r in rows:
        if list(r.keys()) != keys:
            raise ConfigError("rows disagree on columns")
    lines = [",".join(keys)]
    lines += [",".join(_cell(r[k]) for k in keys) for r in rows]
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")
