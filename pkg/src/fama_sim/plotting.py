"""Figures written next to the CSV outputs (``--plot``)."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "dynamic-max-sinr": "-",
    "static-random-port": "--",
}


def _figure(width=6.4):
    fig, ax = plt.subplots(figsize=(width, width * 0.62))
    ax.grid(True, alpha=0.3)
    return fig, ax


def plot_sweep(rows, outage_path, mux_path):
    """Outage and multiplexing gain against SNR, one line per (antenna, strategy, M).

    ``rows`` are dicts with the results-CSV columns.
    """
    series = defaultdict(list)
    for r in rows:
        series[(r["antenna"], r["strategy"], r["m_users"])].append(r)

    for path, col, ylabel, log in ((outage_path, "outage", "Outage probability", True),
                                   (mux_path, "mux_gain", "Multiplexing gain", False)):
        fig, ax = _figure()
        for (ant, strat, m), pts in sorted(series.items()):
            pts = sorted(pts, key=lambda r: r["snr_db"])
            x = [p["snr_db"] for p in pts]
            y = [p[col] for p in pts]
            if log:
                # zero outage cannot sit on a log axis
                y = [v if v > 0 else float("nan") for v in y]
            ax.plot(x, y, _STYLE.get(strat, ":"), marker="o", ms=3,
                    label=f"{ant}, {strat}, M={m}")
        if log:
            ax.set_yscale("log")
        ax.set_xlabel("Transmit SNR (dB)")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=6, ncol=2)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)


def plot_rpdr(envelope, path):
    fig, ax = _figure()
    ax.plot(envelope.angles_deg, envelope.upper_dbi, color="tab:red", label="upper envelope")
    ax.plot(envelope.angles_deg, envelope.lower_dbi, color="black", label="lower envelope")
    ax.fill_between(envelope.angles_deg, envelope.lower_dbi, envelope.upper_dbi,
                    color="tab:red", alpha=0.15)
    ax.set_xlabel("Angle (deg)")
    ax.set_ylabel("Gain (dBi)")
    ax.set_xlim(0, 360)
    ax.set_title(f"average dynamic range {envelope.avg_range_db:.2f} dB", fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
