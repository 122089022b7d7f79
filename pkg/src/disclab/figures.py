"""PNG figures for suite outputs (matplotlib, non-interactive backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class FigureWriter:
    """Writes simple line plots next to the CSV data they were drawn from."""

    def __init__(self, out: Path | str):
        self.out = Path(out)

    def line(self, name: str, title: str, xlabel: str, ylabel: str, series: dict,
             logx: bool = False, logy: bool = False, marker: str = "o") -> Path:
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, (x, y) in series.items():
            ax.plot(list(x), list(y), marker=marker, ms=3, label=str(label))
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = self.out / name
        # no software/date metadata so repeated runs give identical files
        fig.savefig(path, dpi=100, metadata={"Software": None})
        plt.close(fig)
        return path
