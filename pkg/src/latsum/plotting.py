"""Figure rendering for the scan outputs.

Each function takes the records produced by the corresponding sweep driver
and writes a PNG next to the delimited data file.  Rendering is optional;
the CSV/JSON files remain the primary output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_PHASE_COLORS = {"FCC": "tab:blue", "BCC": "tab:orange", "SC": "tab:green",
                 "SH": "tab:red", "HCP": "tab:purple", "OTHER": "gray"}


def plot_riesz_scan(records, path: str):
    """Difference curves zeta_FCC - zeta_BCC and zeta_HCP - min over s."""
    s = [r.coords["s"] for r in records]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(s, [r.values["fcc_minus_bcc"] for r in records],
            label="FCC - BCC", lw=1.2)
    ax.plot(s, [r.values["hcp_minus_min"] for r in records],
            label="HCP - min(FCC, BCC)", lw=1.2)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("s")
    ax.set_ylabel("energy difference per point")
    ax.legend(frameon=False)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)


def plot_phase_cells(cells, path: str):
    """Winner map over the scanned (n, V) cells (or V line at fixed n)."""
    ns = sorted({c.n for c in cells})
    fig, ax = plt.subplots(figsize=(7, 4.2))
    seen = set()
    for c in cells:
        color = _PHASE_COLORS.get(c.winner.kind, "gray")
        label = c.winner.kind if c.winner.kind not in seen else None
        seen.add(c.winner.kind)
        if len(ns) == 1:
            ax.scatter(c.V, c.margin, color=color, s=12, label=label)
        else:
            ax.scatter(c.V, c.n, color=color, s=14, marker="s", label=label)
    ax.set_xlabel("V")
    ax.set_ylabel("energy margin to runner-up" if len(ns) == 1 else "n")
    ax.legend(frameon=False)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)


def plot_delta_curve(records, path: str):
    """Optimal SH layer-spacing ratio against volume."""
    v = [r.coords["V"] for r in records]
    d = [r.values["delta"] for r in records]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(v, d, lw=1.2)
    jumps = [r for r in records if "jump" in r.flags]
    if jumps:
        ax.scatter([r.coords["V"] for r in jumps],
                   [r.values["delta"] for r in jumps],
                   color="tab:red", s=16, label="jump")
        ax.legend(frameon=False)
    ax.set_xlabel("V")
    ax.set_ylabel("argmin delta")
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)
