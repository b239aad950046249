from pathlib import Path
from typing import Iterable, NamedTuple, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from holifd.hooks.base import BaseHook  # noqa: E402

plt.rcParams["svg.hashsalt"] = "holifd"
plt.rcParams["font.size"] = 9

FIG_SIZE = (6.0, 3.7)


class Curve(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    label: str
    style: str = "-"


class SvgHook(BaseHook):
    """Line plots saved as SVG without timestamps so reruns produce identical files"""

    def plot(
        self,
        curves: Iterable[Curve],
        name: str,
        xlabel: str,
        ylabel: str,
        title: Optional[str] = None,
        loglog: bool = False,
    ) -> Path:
        fig = plt.figure(figsize=FIG_SIZE)
        ax = fig.add_subplot(1, 1, 1)
        for curve in curves:
            ax.plot(curve.x, curve.y, curve.style, label=curve.label)
        if loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.spines["right"].set_visible(False)
        ax.spines["top"].set_visible(False)
        ax.legend(frameon=False)
        path = self.path(name)
        fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
        plt.close(fig)
        self.log.info(f"Wrote plot {path}")
        return path
