"""Figure rendering for sweep results.

Three report figures mirror the three quantifier families: composition
deficits, robustness measures, and fidelities, each plotted against the
phase shift in units of pi. Rendering is headless (Agg backend) and
writes PNG files next to the delimited output.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import ResultRow

FIGURES = ("composition", "robustness", "fidelity")

_SERIES = {
    "composition": (
        ("alpha_steer", "steering test", "tab:blue"),
        ("alpha_bell", "Bell test", "tab:red"),
    ),
    "robustness": (
        ("beta_steer", "steering test", "tab:blue"),
        ("beta_bell", "Bell test", "tab:red"),
    ),
    "fidelity": (
        ("f_expt", "reconstructed vs ideal", "tab:green"),
        ("f_incapable", "best steering-incapable", "tab:blue"),
        ("f_unable", "best Bell-unable", "tab:red"),
    ),
}

_YLABELS = {
    "composition": "composition deficit",
    "robustness": "robustness",
    "fidelity": "process fidelity",
}


def render_figures(rows: list[ResultRow], out_dir: str | Path) -> list[Path]:
    """Render the three sweep figures as PNG files; returns their paths.

    Rows with NaN entries (failed or absent tests) leave gaps in the
    affected series rather than aborting the figure.
    """
    if not rows:
        raise ValueError("refusing to render zero rows")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    phases = [row.lam / math.pi for row in rows]
    paths = []
    for name in FIGURES:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for field_name, label, color in _SERIES[name]:
            values = [getattr(row, field_name) for row in rows]
            ax.plot(phases, values, marker="o", label=label, color=color)
        ax.set_xlabel("phase shift (units of pi)")
        ax.set_ylabel(_YLABELS[name])
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out / f"{name}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
