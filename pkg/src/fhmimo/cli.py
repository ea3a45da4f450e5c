"""Command line front end.

Every command accepts ``--config`` (INI file with [radar], [channel] and
[sweep] sections), ``--seed``, ``--trials`` and ``--out``; flags given on the
command line override the file.  Sweep commands write a CSV plus a PNG figure
next to it.  Exit codes: 0 on success, 2 for configuration or usage problems,
3 for estimation failures.
"""

from __future__ import annotations

import os
import sys

import click
import numpy as np

from . import plots
from .channel import draw_los_channel, synth_rx
from .comms import bits_per_hop, demod_frame, modulate_frame, pack_bits, psk_phases, unpack_bits
from .config import RadarConfig, load_ini
from .errors import ConfigError, EstimationError
from .frameio import dump_frame, load_frame
from .harness import (
    SweepSpec,
    run_mse_beta,
    run_mse_omega,
    run_mse_u,
    run_rate,
    run_ser,
    write_csv,
)
from .pipeline import estimate_frame
from .radar import detect_targets, parse_scene
from .seqdesign import design_sequence, kappa_profile, mselb_cae, mselb_cre
from .waveform import HopSchedule, order_schedule, random_schedule

__all__ = ["cli", "main"]


# -- option plumbing -------------------------------------------------------


def parse_grid(text: str) -> np.ndarray:
    """Grid syntax: ``start:stop:step`` (stop inclusive) or ``a,b,c``."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ConfigError(f"grid step must be positive: {text!r}")
            return np.arange(start, stop + step / 2.0, step)
        return np.asarray([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}") from exc


def _parse_int_tuple(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"expected integers: {text!r}") from exc


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean: {text!r}")


_SWEEP_PARSERS = {
    "grid_db": parse_grid,
    "trials": int,
    "channel": str,
    "sequence": str,
    "custom_seq": _parse_int_tuple,
    "scheme": str,
    "j_bits": int,
    "master_seed": int,
    "trial_offset": int,
    "ebn0": _parse_bool,
    "gamma_t_db": float,
    "aod_deg": float,
    "pilot_gamma_db": float,
    "guard": _parse_bool,
    "abnormal_filter": _parse_bool,
    "abnormal_factor": float,
    "valid_antennas": _parse_int_tuple,
    "interferer_min_subband": int,
    "interferer_power_db": float,
    "nlos_paths": int,
    "nlos_power_db": float,
}


def _load_cfg(config_path):
    if config_path is None:
        return RadarConfig().validate(), {}, {}
    return load_ini(config_path)


def build_sweep(sweep_section: dict, overrides: dict) -> SweepSpec:
    """SweepSpec from an INI [sweep] section plus command line overrides."""
    kwargs = {}
    for key, raw in sweep_section.items():
        name = "grid_db" if key == "grid" else key
        if name not in _SWEEP_PARSERS:
            raise ConfigError(f"unknown [sweep] key: {key}")
        kwargs[name] = _SWEEP_PARSERS[name](raw)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec(**kwargs).validate()


def _stem(path) -> str:
    return os.path.splitext(os.fspath(path))[0]


def global_options(fn):
    fn = click.option(
        "--out",
        "out_path",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Output path; figures and extra CSVs land next to it.",
    )(fn)
    fn = click.option("--trials", type=int, default=None, help="Monte Carlo trials per grid point.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")(fn)
    fn = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="INI file with [radar], [channel], [sweep] sections.",
    )(fn)
    return fn


def plot_option(fn):
    return click.option(
        "--plot/--no-plot",
        "plot",
        default=True,
        show_default=True,
        help="Render the companion PNG figure next to the CSV.",
    )(fn)


def sweep_options(fn):
    opts = [
        click.option("--grid", default=None, help="SNR grid: start:stop:step or a,b,c (dB)."),
        click.option("--channel", type=click.Choice(["los", "rician", "los+interference"]), default=None),
        click.option("--sequence", type=click.Choice(["cae", "cre", "suboptimal", "custom"]), default=None),
        click.option("--custom-seq", default=None, help="Comma-separated sub-bands for --sequence custom."),
        click.option("--scheme", type=click.Choice(["psk", "fhcs", "pfhcs"]), default=None),
        click.option("--j-bits", type=int, default=None, help="PSK bits per tone."),
        click.option("--ebn0/--per-sample", "ebn0", default=None, help="Interpret the grid as Eb/N0."),
        click.option("--gamma-t-db", type=float, default=None, help="Estimator switchover SNR."),
        click.option("--aod-deg", type=float, default=None, help="Line-of-sight departure angle."),
        click.option("--pilot-gamma-db", type=float, default=None, help="Frozen estimation SNR for frame sweeps."),
        click.option("--guard/--no-guard", "guard", default=None, help="Fade guard on probed composites."),
        click.option("--abnormal-filter/--no-abnormal-filter", "abnormal_filter", default=None),
        click.option("--abnormal-factor", type=float, default=None),
        click.option("--valid-antennas", default=None, help="Comma-separated antenna subset."),
        click.option("--interferer-min-subband", type=int, default=None),
        click.option("--interferer-power-db", type=float, default=None),
        click.option("--nlos-paths", type=int, default=None),
        click.option("--nlos-power-db", type=float, default=None),
        click.option("--trial-offset", type=int, default=None, help="First trial index (for splitting runs)."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _run_sweep(runner, plotter, default_out, config_path, seed, trials, out_path, plot, **flags):
    cfg, _, sweep_section = _load_cfg(config_path)
    overrides = dict(flags)
    if flags.get("grid") is not None:
        overrides["grid_db"] = parse_grid(flags["grid"])
    overrides.pop("grid", None)
    for key in ("custom_seq", "valid_antennas"):
        if overrides.get(key) is not None:
            overrides[key] = _parse_int_tuple(overrides[key])
    if seed is not None:
        overrides["master_seed"] = seed
    if trials is not None:
        overrides["trials"] = trials
    spec = build_sweep(sweep_section, overrides)
    rows = runner(spec, cfg)
    out = out_path or default_out
    write_csv(out, rows)
    dest = out
    if plot:
        fig = _stem(out) + ".png"
        plotter(rows, fig)
        dest = f"{out}, {fig}"
    click.echo(f"{len(rows)} grid points, {spec.trials} trials each -> {dest}")


@click.group()
def cli():
    """Frequency-hopping MIMO radar with embedded communication: waveform
    design, timing/channel estimation sweeps, demodulation loopback and
    radar detection."""


# -- sequence design -------------------------------------------------------


@cli.command("design-seq")
@global_options
@click.option("--M", "antennas", type=int, default=None, help="Transmit antennas (default from config).")
@click.option("--K", "subbands", type=int, default=None, help="Sub-bands (default from config).")
@click.option(
    "--mode",
    type=click.Choice(["cae", "cre", "suboptimal"]),
    default="suboptimal",
    show_default=True,
)
@click.option("--ref-gamma-db", type=float, default=30.0, show_default=True, help="SNR for the printed MSE floors.")
def design_seq_cmd(config_path, seed, trials, out_path, antennas, subbands, mode, ref_gamma_db):
    """Pilot sub-band sequence, curvature profile and both MSE floors."""
    cfg, _, _ = _load_cfg(config_path)
    m = antennas if antennas is not None else cfg.antennas
    k = subbands if subbands is not None else cfg.subbands
    seq = design_sequence(m, k, mode)
    prof = kappa_profile(seq)
    gamma = 10.0 ** (ref_gamma_db / 10.0)
    n_samples = cfg.samples_per_hop
    fold_floor = mselb_cae(prof.m_bar, n_samples, gamma) if prof.m_bar else float("nan")
    rem_floor = mselb_cre(prof.crt_kappas(), n_samples, gamma) if prof.m_breve >= 2 else float("nan")
    click.echo(f"sequence: {[int(s) for s in seq]}")
    click.echo(f"kappa:    {[int(v) for v in prof.kappa]}")
    click.echo(f"folding terms ({prof.m_bar}): {[int(v) for v in prof.fold_kappas()]}")
    click.echo(f"remainder terms ({prof.m_breve}): {[int(v) for v in prof.crt_kappas()]}")
    click.echo(f"reference: L = {n_samples} samples per hop, SNR = {ref_gamma_db:g} dB")
    click.echo(f"folding MSE floor:   {fold_floor:.6e} rad^2")
    click.echo(f"remainder MSE floor: {rem_floor:.6e} rad^2")
    if out_path:
        classes = {i: "fold" for i in prof.fold_idx}
        classes.update({i: "remainder" for i in prof.crt_idx})
        rows = []
        for i, s in enumerate(seq):
            term = i < len(prof.kappa)
            rows.append(
                {
                    "antenna": i,
                    "subband": int(s),
                    "kappa": int(prof.kappa[i]) if term else "",
                    "term_class": classes.get(i, "unused") if term else "",
                    "fold_mse_floor": fold_floor,
                    "remainder_mse_floor": rem_floor,
                    "ref_samples_per_hop": n_samples,
                    "ref_gamma_db": ref_gamma_db,
                }
            )
        write_csv(out_path, rows)
        click.echo(f"table -> {out_path}")


# -- waveform autocorrelation ----------------------------------------------


@cli.command()
@global_options
@click.option("--ordered/--unordered", "ordered", default=True, show_default=True, help="Sort each hop's sub-bands across antennas.")
@click.option("--psk-seed", type=int, default=None, help="Embed random PSK symbols drawn with this seed.")
@click.option("--j-bits", type=int, default=1, show_default=True)
@click.option("--points", type=int, default=4096, show_default=True)
@click.option("--tau-max-us", type=float, default=None, help="Half-width of the delay grid (default: one frame).")
@plot_option
def ambiguity(config_path, seed, trials, out_path, ordered, psk_seed, j_bits, points, tau_max_us, plot):
    """Zero-Doppler autocorrelation magnitude of one random frame."""
    cfg, _, _ = _load_cfg(config_path)
    from .waveform import ambiguity_function

    rng = np.random.default_rng(seed)
    sched = random_schedule(cfg, rng)
    if ordered:
        sched = order_schedule(sched)
    if psk_seed is not None:
        prng = np.random.default_rng(psk_seed)
        words = prng.integers(0, 2**j_bits, size=sched.subband.shape)
        sched = HopSchedule(sched.subband, np.exp(1j * psk_phases(words, j_bits)))
    tau_max = cfg.hops * cfg.hop_duration if tau_max_us is None else tau_max_us * 1e-6
    tau = np.linspace(-tau_max, tau_max, points)
    corr = ambiguity_function(sched, cfg, tau)
    out = out_path or "ambiguity.csv"
    write_csv(out, [{"tau_s": float(t), "R": float(r)} for t, r in zip(tau, corr)])
    dest = out
    if plot:
        fig = _stem(out) + ".png"
        plots.plot_ambiguity(tau, corr, fig)
        dest = f"{out}, {fig}"
    click.echo(f"{points} delays over +/-{tau_max * 1e6:g} us -> {dest}")


# -- Monte Carlo sweeps ----------------------------------------------------


@cli.command("simulate-mse-omega")
@global_options
@plot_option
@sweep_options
def simulate_mse_omega(config_path, seed, trials, out_path, plot, **flags):
    """Hop rotation angle MSE versus SNR, with both estimator floors."""
    _run_sweep(run_mse_omega, plots.plot_mse_omega, "mse-omega.csv", config_path, seed, trials, out_path, plot, **flags)


@cli.command("simulate-mse-u")
@global_options
@plot_option
@sweep_options
def simulate_mse_u(config_path, seed, trials, out_path, plot, **flags):
    """Spatial frequency MSE versus SNR (line of sight only)."""
    _run_sweep(run_mse_u, plots.plot_mse_u, "mse-u.csv", config_path, seed, trials, out_path, plot, **flags)


@cli.command("simulate-mse-beta")
@global_options
@plot_option
@sweep_options
def simulate_mse_beta(config_path, seed, trials, out_path, plot, **flags):
    """Normalized path gain error versus SNR (line of sight only)."""
    _run_sweep(run_mse_beta, plots.plot_mse_beta, "mse-beta.csv", config_path, seed, trials, out_path, plot, **flags)


@cli.command("simulate-ser")
@global_options
@plot_option
@sweep_options
def simulate_ser(config_path, seed, trials, out_path, plot, **flags):
    """Symbol error rate versus SNR or Eb/N0."""
    _run_sweep(run_ser, plots.plot_ser, "ser.csv", config_path, seed, trials, out_path, plot, **flags)


@cli.command("simulate-rate")
@global_options
@plot_option
@sweep_options
def simulate_rate(config_path, seed, trials, out_path, plot, **flags):
    """Net data rate versus SNR or Eb/N0."""
    _run_sweep(run_rate, plots.plot_rate, "rate.csv", config_path, seed, trials, out_path, plot, **flags)


# -- radar detection -------------------------------------------------------


@cli.command("radar-detect")
@global_options
@click.option("--scene", "scene_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Scene file: one 'range_m angle_deg [re [im]]' line per target.")
@click.option("--ordered/--unordered", "ordered", default=True, show_default=True)
@click.option("--pfa", type=float, default=1e-4, show_default=True)
@click.option("--noise-var", type=float, default=0.0, show_default=True)
@click.option("--grid-points", type=int, default=512, show_default=True)
@click.option("--group-cells", type=int, default=None, help="Delay grouping distance in samples (default one hop, 0 disables).")
@plot_option
def radar_detect(config_path, seed, trials, out_path, scene_path, ordered, pfa, noise_var, grid_points, group_cells, plot):
    """Echo synthesis, matched filtering, angle transform and CFAR."""
    cfg, _, _ = _load_cfg(config_path)
    scene = parse_scene(scene_path)
    rng = np.random.default_rng(seed)
    sched = random_schedule(cfg, rng)
    if ordered:
        sched = order_schedule(sched)
    dets, u_grid, surface = detect_targets(
        sched,
        cfg,
        scene,
        grid_points=grid_points,
        pfa=pfa,
        group_cells=group_cells,
        noise_var=noise_var,
        rng=rng,
    )
    power = np.abs(surface) ** 2
    out = out_path or "radar.csv"
    stem = _stem(out)

    det_rows = [
        {
            "delay_idx": d.delay_idx,
            "u_idx": d.u_idx,
            "range_m": d.range_m,
            "angle_deg": d.angle_deg,
            "power": d.power,
        }
        for d in dets
    ]
    if det_rows:
        write_csv(out, det_rows)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write("delay_idx,u_idx,range_m,angle_deg,power\n")

    from .radar import SPEED_OF_LIGHT

    delay = np.arange(power.shape[1])
    range_rows = []
    for i in range(power.shape[1]):
        row = {
            "delay_idx": int(delay[i]),
            "range_m": float(delay[i] / cfg.sample_rate * SPEED_OF_LIGHT / 2.0),
            "power_max": float(power[:, i].max()),
        }
        for j, d in enumerate(dets):
            row[f"power_det{j}"] = float(power[d.u_idx, i])
        range_rows.append(row)
    write_csv(stem + "-range-cut.csv", range_rows)

    angles = np.degrees(np.arcsin(np.clip(u_grid / np.pi, -1.0, 1.0)))
    angle_rows = []
    for i in range(power.shape[0]):
        row = {
            "u_idx": i,
            "u_rad": float(u_grid[i]),
            "angle_deg": float(angles[i]),
            "power_max": float(power[i, :].max()),
        }
        for j, d in enumerate(dets):
            row[f"power_det{j}"] = float(power[i, d.delay_idx])
        angle_rows.append(row)
    write_csv(stem + "-angle-cut.csv", angle_rows)

    dest = f"{out}, {stem}-range-cut.csv, {stem}-angle-cut.csv"
    if plot:
        fig = stem + ".png"
        plots.plot_radar_map(u_grid, surface, dets, cfg, fig)
        dest += f", {fig}"
    click.echo(f"{len(dets)} detections -> {dest}")
    for d in dets:
        click.echo(
            f"  range {d.range_m:10.1f} m  angle {d.angle_deg:7.2f} deg  power {d.power:.3e}"
        )


# -- file based loopback ---------------------------------------------------


@cli.command()
@global_options
@click.option("--bits-file", type=click.Path(exists=True, dir_okay=False), required=True, help="Payload bytes, MSB first.")
@click.option("--dump-frame", "frame_path", type=click.Path(dir_okay=False), default=None, help="Capture output path (defaults to --out).")
@click.option("--scheme", type=click.Choice(["psk", "fhcs", "pfhcs"]), default="pfhcs", show_default=True)
@click.option("--j-bits", type=int, default=1, show_default=True)
@click.option("--sequence", type=click.Choice(["cae", "cre", "suboptimal"]), default="suboptimal", show_default=True)
@click.option("--eta-us", type=float, default=None, help="Timing offset in microseconds (default: random draw).")
@click.option("--gamma-db", type=float, default=None, help="Per-sample SNR; omit for a noise-free capture.")
@click.option("--aod-deg", type=float, default=20.0, show_default=True)
def tx(config_path, seed, trials, out_path, bits_file, frame_path, scheme, j_bits, sequence, eta_us, gamma_db, aod_deg):
    """Modulate a payload file onto one frame and write the capture."""
    cfg, _, _ = _load_cfg(config_path)
    path = frame_path or out_path
    if path is None:
        raise ConfigError("tx needs --dump-frame (or --out) for the capture file")
    with open(bits_file, "rb") as fh:
        raw = fh.read()
    need = bits_per_hop(cfg, scheme, j_bits) * (cfg.hops - 2)
    avail = len(raw) * 8
    bits = unpack_bits(raw, min(need, avail))
    pilot = design_sequence(cfg.antennas, cfg.subbands, sequence)
    sched, _ = modulate_frame(bits, cfg, pilot, scheme=scheme, j_bits=j_bits)
    rng = np.random.default_rng(seed)
    chan = draw_los_channel(
        rng, gamma_db, aod_deg=aod_deg, eta=None if eta_us is None else eta_us * 1e-6
    )
    frame = synth_rx(sched, cfg, chan, rng=rng)
    dump_frame(frame, path)
    note = ""
    if avail < need:
        note = f" (payload short by {need - avail} bits, zero padded)"
    elif avail > need:
        note = f" (payload truncated to {need} bits)"
    click.echo(
        f"{min(need, avail)} payload bits{note}, offset {chan.timing_offset * 1e6:.4f} us, capture -> {path}"
    )


@cli.command()
@global_options
@click.option("--frame-file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--scheme", type=click.Choice(["psk", "fhcs", "pfhcs"]), default="pfhcs", show_default=True)
@click.option("--j-bits", type=int, default=1, show_default=True)
@click.option("--sequence", type=click.Choice(["cae", "cre", "suboptimal"]), default="suboptimal", show_default=True)
@click.option("--estimator", type=click.Choice(["auto", "cae", "cre"]), default="cre", show_default=True, help="auto needs --gamma-db.")
@click.option("--gamma-db", type=float, default=None, help="Assumed SNR for auto estimator selection.")
def rx(config_path, seed, trials, out_path, frame_file, scheme, j_bits, sequence, estimator, gamma_db):
    """Demodulate a capture back into a payload byte file."""
    cfg, _, _ = _load_cfg(config_path)
    if out_path is None:
        raise ConfigError("rx needs --out for the recovered payload")
    frame = load_frame(frame_file, cfg)
    pilot = design_sequence(cfg.antennas, cfg.subbands, sequence)
    report = estimate_frame(
        frame, cfg, profile=kappa_profile(pilot), estimator=estimator, gamma_db=gamma_db
    )
    res = demod_frame(frame, report.demod_reference(cfg), cfg, scheme=scheme, j_bits=j_bits)
    with open(out_path, "wb") as fh:
        fh.write(pack_bits(res.bits))
    click.echo(
        f"offset {report.l_eta_hat} samples ({report.eta_hat * 1e6:.4f} us), "
        f"{int(res.erasures.sum())} erasures, {res.bits.size} bits -> {out_path}"
    )


def main(argv=None):
    """Entry point with the exit code contract (0 ok, 2 config, 3 estimation)."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except EstimationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
