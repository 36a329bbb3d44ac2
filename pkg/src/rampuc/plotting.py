"""Expected-cost figure for a formulation comparison, rendered headless."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .system import FORMULATIONS  # noqa: E402

COLORS = {"conventional": "#9a9a9a", "proposed": "#2c6fbb"}


def expected_cost_figure(rows: list[dict], path, fmt: str = "svg") -> Path:
    """Grouped bars of expected cost per multiplier, split into generation and shedding.

    ``rows`` are ``Comparison.summary_rows()``.  SVG output is written with a
    fixed hash salt and no date so repeated runs give identical bytes.
    """
    path = Path(path)
    mults = sorted({r["multiplier"] for r in rows})
    width = 0.38
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for j, f in enumerate(FORMULATIONS):
        xs, gen, shed = [], [], []
        for i, k in enumerate(mults):
            r = next((r for r in rows if r["multiplier"] == k and r["formulation"] == f), None)
            if r is None or r["status"] != "ok":
                continue
            xs.append(i + (j - 0.5) * width)
            gen.append(r["average_generation_cost"] / 1e3)
            shed.append(r["average_shed_cost"] / 1e3)
        ax.bar(xs, gen, width, color=COLORS[f], label=f"{f} generation")
        ax.bar(xs, shed, width, bottom=gen, color=COLORS[f], alpha=0.45, hatch="//",
               label=f"{f} shedding")
    ax.set_xticks(range(len(mults)))
    ax.set_xticklabels([f"{k:g}" for k in mults])
    ax.set_xlabel("FRC adder multiplier k (x sigma)")
    ax.set_ylabel("expected operating cost [k$]")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    if fmt == "svg":
        with matplotlib.rc_context({"svg.hashsalt": "rampuc", "svg.fonttype": "none"}):
            fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    else:
        fig.savefig(path, format="png", metadata={"Software": None}, dpi=120)
    plt.close(fig)
    return path
