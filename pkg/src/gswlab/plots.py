"""Figure emission for run reports (SVG files next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["save_min_amp_plot"]


def save_min_amp_plot(path, eps_values, min_amps):
    """Plot min |Psi| against eps = tan(alpha) for a continuation run."""
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    if all(e > 0 for e in eps_values):
        ax.semilogx(eps_values, min_amps, marker="o")
    else:
        ax.plot(eps_values, min_amps, marker="o")
    ax.set_xlabel(r"$\varepsilon = \tan\alpha$")
    ax.set_ylabel(r"$\min_x |\Psi(x)|$")
    ax.set_title("Amplitude floor along the continuation ladder")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
