"""Optional figures rendered next to the CSV output.

Figures are derived from the same rows that go into the CSV, so the CSV
stays the primary artefact and a figure can always be redrawn from it.
"""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "figure.figsize": (9.0, 3.6),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 4,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

_XLABEL = {
    "packet_bytes": "packet size (bytes)",
    "alpha": "duty cycle",
    "n_w": "Wi-Fi stations",
}


def _series(rows: list[dict], sweep_var: str) -> dict:
    """Group rows into curves keyed by whatever varies besides the swept value."""
    out = defaultdict(list)
    for r in rows:
        if sweep_var == "alpha":
            key = f"n_w={r['n_w']}"
        else:
            key = f"alpha={float(r['alpha']):g}"
        out[key].append(r)
    return out


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps PNGs stable across runs
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_sweep(rows: list[dict], sweep_var: str, path, sim_rows: list[dict] | None = None) -> Path:
    """Collision probability and Wi-Fi throughput against the swept variable.

    ``rows`` are analytical rows, ``sim_rows`` simulated ones (either may be
    empty).  Simulated points carry their 95% interval as error bars.
    """
    with plt.rc_context(_STYLE):
        fig, (ax_p, ax_t) = plt.subplots(1, 2)
        colors = {}
        for i, (label, curve) in enumerate(sorted(_series(rows, sweep_var).items())):
            colors[label] = f"C{i}"
            xs = [float(r["sweep_value"]) for r in curve]
            ax_p.plot(xs, [float(r["p_c_total"]) for r in curve], "-", color=f"C{i}", label=label)
            ax_t.plot(xs, [float(r["tput_wifi_mbps"]) for r in curve], "-", color=f"C{i}", label=label)
            ax_t.plot(
                xs,
                [float(r["tput_wifi_only_scaled_mbps"]) for r in curve],
                ":",
                color=f"C{i}",
                linewidth=1,
            )
        for j, (label, curve) in enumerate(sorted(_series(sim_rows or [], sweep_var).items())):
            c = colors.get(label, f"C{len(colors) + j}")
            xs = [float(r["sweep_value"]) for r in curve]
            ax_p.errorbar(
                xs,
                [float(r["p_coll_total"]) for r in curve],
                yerr=[float(r["ci95_p_coll_total"]) for r in curve],
                fmt="o",
                color=c,
                mfc="none",
                label=f"{label} (sim)",
            )
            ax_t.errorbar(
                xs,
                [float(r["tput_wifi_mbps"]) for r in curve],
                yerr=[float(r["ci95_tput_wifi_mbps"]) for r in curve],
                fmt="o",
                color=c,
                mfc="none",
            )
        ax_p.set_xlabel(_XLABEL[sweep_var])
        ax_p.set_ylabel("Wi-Fi collision probability")
        ax_p.set_ylim(0, 1)
        ax_t.set_xlabel(_XLABEL[sweep_var])
        ax_t.set_ylabel("Wi-Fi throughput (Mbps)")
        ax_t.set_ylim(bottom=0)
        if ax_p.get_legend_handles_labels()[0]:
            ax_p.legend(loc="best")
        fig.tight_layout()
        return _save(fig, path)


def plot_fairness(rows: list[dict], path) -> Path:
    """Fair duty cycle against station count, one curve per fairness mode."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.8, 3.6))
        by_mode = defaultdict(list)
        for r in rows:
            by_mode[r["mode"]].append(r)
        for mode, curve in sorted(by_mode.items()):
            ax.plot(
                [float(r["sweep_value"]) for r in curve],
                [float(r["alpha_star"]) for r in curve],
                "o-",
                label=mode,
            )
        ax.axhline(0.5, color="0.5", linewidth=0.8, linestyle="--")
        ax.set_xlabel("swept value")
        ax.set_ylabel("fair duty cycle")
        ax.set_ylim(0, 1)
        ax.legend(loc="best")
        fig.tight_layout()
        return _save(fig, path)


def plot_comparison(joined: list[dict], path) -> Path:
    """Analytical against simulated values; points on the diagonal agree."""
    pairs = [
        ("p_cwl", "sim_p_coll_lte", "LTE collision"),
        ("p_c_total", "sim_p_coll_total", "total collision"),
        ("tput_wifi_mbps", "sim_tput_wifi_mbps", "throughput (Mbps)"),
    ]
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.4))
        for ax, (a, s, title) in zip(axes, pairs):
            xs = [float(r[a]) for r in joined]
            ys = [float(r[s]) for r in joined]
            ax.plot(xs, ys, "o", mfc="none")
            top = max(xs + ys + [1e-9])
            ax.plot([0, top], [0, top], "-", color="0.6", linewidth=0.8)
            ax.set_xlabel("model")
            ax.set_ylabel("simulation")
            ax.set_title(title, fontsize=9)
        fig.tight_layout()
        return _save(fig, path)
