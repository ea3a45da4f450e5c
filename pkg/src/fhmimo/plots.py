"""Figure rendering for simulation outputs.

Every CLI sweep writes a CSV; these helpers draw the matching PNG next to it.
All figures use the Agg backend so the CLI works headless.  Row dicts are the
ones produced by the harness sweeps, so column names match the CSV files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_mse_omega",
    "plot_mse_u",
    "plot_mse_beta",
    "plot_ser",
    "plot_rate",
    "plot_ambiguity",
    "plot_radar_map",
]


def _col(rows, name):
    return np.array([row[name] for row in rows], dtype=float)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _finite_semilogy(ax, x, y, *args, **kwargs):
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y) & (y > 0)
    if keep.any():
        ax.semilogy(np.asarray(x)[keep], y[keep], *args, **kwargs)


def _legend(ax):
    # every curve can vanish (all-zero error rates on a log axis); a bare
    # legend() call would then warn
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)


def plot_mse_omega(rows, path):
    x = _col(rows, "gamma_db")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    _finite_semilogy(ax, x, _col(rows, "mse_cae"), "o-", label="accumulation")
    _finite_semilogy(ax, x, _col(rows, "mse_cre"), "s-", label="remainder")
    _finite_semilogy(ax, x, _col(rows, "mse_selected"), "^-", label="selected")
    if rows and "mse_selected_filtered" in rows[0]:
        _finite_semilogy(ax, x, _col(rows, "mse_selected_filtered"), "v-", label="selected, filtered")
    _finite_semilogy(ax, x, _col(rows, "mselb_cae"), "k--", label="accumulation bound")
    _finite_semilogy(ax, x, _col(rows, "mselb_cre"), "k:", label="remainder bound")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("MSE of hop rotation angle (rad$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    _legend(ax)
    _save(fig, path)


def plot_mse_u(rows, path):
    x = _col(rows, "gamma_db")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    _finite_semilogy(ax, x, _col(rows, "mse_u"), "o-", label="estimated rotation")
    _finite_semilogy(ax, x, _col(rows, "mse_u_ideal_omega"), "s--", label="true rotation")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("MSE of spatial frequency (rad$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    _legend(ax)
    _save(fig, path)


def plot_mse_beta(rows, path):
    x = _col(rows, "gamma_db")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    _finite_semilogy(ax, x, _col(rows, "mse_beta"), "o-", label="normalized gain MSE")
    _finite_semilogy(ax, x, _col(rows, "bias_beta"), "s--", label="normalized gain bias")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("error of normalized path gain")
    ax.grid(True, which="both", alpha=0.3)
    _legend(ax)
    _save(fig, path)


def plot_ser(rows, path):
    use_ebn0 = rows and np.isfinite(rows[0].get("ebn0_db", np.nan))
    x = _col(rows, "ebn0_db" if use_ebn0 else "gamma_db")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    _finite_semilogy(ax, x, _col(rows, "ser"), "o-", label="estimated reference")
    _finite_semilogy(ax, x, _col(rows, "ser_ideal"), "s--", label="true reference")
    ax.set_xlabel("Eb/N0 (dB)" if use_ebn0 else "SNR (dB)")
    ax.set_ylabel("symbol error rate")
    ax.grid(True, which="both", alpha=0.3)
    _legend(ax)
    _save(fig, path)


def plot_rate(rows, path):
    use_ebn0 = rows and np.isfinite(rows[0].get("ebn0_db", np.nan))
    x = _col(rows, "ebn0_db" if use_ebn0 else "gamma_db")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(x, _col(rows, "rate_bps") / 1e6, "o-", label="estimated reference")
    ax.plot(x, _col(rows, "rate_ideal_bps") / 1e6, "s--", label="true reference")
    ax.plot(x, _col(rows, "gross_bps") / 1e6, "k:", label="error-free")
    ax.set_xlabel("Eb/N0 (dB)" if use_ebn0 else "SNR (dB)")
    ax.set_ylabel("data rate (Mbit/s)")
    ax.grid(True, alpha=0.3)
    _legend(ax)
    _save(fig, path)


def plot_ambiguity(tau_s, corr, path):
    corr = np.asarray(corr, dtype=float)
    peak = corr.max() if corr.size else 1.0
    level_db = 10.0 * np.log10(np.maximum(corr / peak, 1e-12))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(np.asarray(tau_s) * 1e6, level_db)
    ax.set_xlabel("delay (us)")
    ax.set_ylabel("autocorrelation (dB)")
    ax.set_ylim(bottom=max(-80.0, level_db.min() - 3.0))
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_radar_map(u_grid, surface, detections, cfg, path, speed_of_light=299792458.0):
    power = np.abs(np.asarray(surface)) ** 2
    peak = power.max() if power.size else 1.0
    level_db = 10.0 * np.log10(np.maximum(power / peak, 1e-12))
    n_delay = power.shape[1]
    range_max = (n_delay - 1) / cfg.sample_rate * speed_of_light / 2.0
    angles = np.degrees(np.arcsin(np.clip(np.asarray(u_grid) / np.pi, -1.0, 1.0)))
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    mesh = ax.imshow(
        level_db,
        aspect="auto",
        origin="lower",
        extent=(0.0, range_max, angles[0], angles[-1]),
        vmin=-50.0,
        vmax=0.0,
        cmap="viridis",
    )
    for det in detections:
        ax.plot(det.range_m, det.angle_deg, "rx", markersize=10, markeredgewidth=2)
    ax.set_xlabel("range (m)")
    ax.set_ylabel("angle (deg)")
    fig.colorbar(mesh, ax=ax, label="power (dB)")
    _save(fig, path)
