"""Matplotlib rendering for the CLI report paths.

Every report command writes its delimited output first; the functions
here turn those tables into PNG figures saved next to the CSV.  All
rendering uses the Agg backend so the CLI works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np

__all__ = [
    "figure_path",
    "plot_two_level",
    "plot_rlm_occupancy",
    "plot_critical_scan",
    "plot_convergence",
]


def figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def plot_two_level(rows, out_png, params):
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 6.0))
    ts = [r["t"] for r in rows]
    ax1.plot(ts, [r["norm"] for r in rows], lw=1.2)
    ax1.set_ylabel(r"$\langle\psi(t)|\psi(t)\rangle$")
    ax1.set_title(f"two-level model, z={params['z']:.4g}")
    ax2.plot(ts, [r["occupancy_closed"] for r in rows], lw=1.8,
             label="closed form")
    ax2.plot(ts, [r["occupancy_numeric"] for r in rows], "--", lw=1.0,
             label="numeric")
    ax2.set_xlabel("t s")
    ax2.set_ylabel("up-site occupancy")
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_rlm_occupancy(rows_by_policy, out_png, params):
    fig, axes = plt.subplots(1, len(rows_by_policy), figsize=(5.0 * len(rows_by_policy), 4.0),
                             sharey=False, squeeze=False)
    for ax, (policy, rows) in zip(axes[0], rows_by_policy.items()):
        phis = [r["phi"] for r in rows]
        ax.plot(phis, [r["occ_hermitian"] for r in rows], "o-", ms=3,
                label="Hermitian")
        ax.plot(phis, [r["occ_bio_re"] for r in rows], "s-", ms=3,
                label="biorthogonal")
        ax.axvline(np.pi / 4, color="k", ls=":", lw=0.8)
        ax.axhline(0.5, color="gray", ls=":", lw=0.8)
        ax.set_xlabel(r"$\phi$")
        ax.set_title(f"pair policy: {policy}")
        ax.legend(frameon=False)
    axes[0][0].set_ylabel("dot occupancy")
    fig.suptitle(f"resonant level, N={params['N']}, |gamma|={params['gamma_abs']}")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_critical_scan(rows_by_delta, out_png, params):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    for delta, rows in rows_by_delta.items():
        ms = np.array([r["m"] for r in rows])
        ax1.loglog(ms, [r["S"] for r in rows], lw=1.2,
                   label=f"S, delta={delta:g}")
        ax1.loglog(ms, [r["F"] for r in rows], lw=1.2, ls="--",
                   label=f"F, delta={delta:g}")
        ax2.loglog(ms, [r["S_pt"] for r in rows], lw=1.2,
                   label=f"S_pt, delta={delta:g}")
        ax2.loglog(ms, [r["F_pt"] for r in rows], lw=1.2, ls="--",
                   label=f"F_pt, delta={delta:g}")
    for ax, title in ((ax1, "Hermitian convention"), (ax2, "metric convention")):
        ax.set_xlabel("m")
        ax.set_ylabel("|G|")
        ax.set_title(title)
        ax.legend(frameon=False, fontsize=8)
    fig.suptitle(f"critical chain, N={params['N']}, delta_s={params['delta_s']:g}")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_convergence(rows, out_png):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    x = [r["minus_log_delta_s"] for r in rows]
    y = [r["N_converged"] for r in rows]
    ax.semilogy(x, y, "o-")
    ax.set_xlabel(r"$-\ln \delta_s$")
    ax.set_ylabel("converged N")
    ax.set_title("metric-convention correlator convergence")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
