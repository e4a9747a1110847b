"""Static SVG overlays of loess calibration curves."""
import logging
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from heterosim.models import CalibrationCurve  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids and no timestamp keep the SVG byte-stable
plt.rcParams["svg.hashsalt"] = "heterosim"


def overlay_curves(curves: Sequence[CalibrationCurve], title: str, path: Path) -> Path:
    """Draw every curve thinly over the diagonal and save as SVG."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    try:
        ax.plot([0, 1], [0, 1], color="black", linewidth=0.8, linestyle="--")
        for curve in curves:
            ax.plot(curve.predicted, curve.observed, color="tab:blue", alpha=0.25, linewidth=0.6)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel("Predicted probability")
        ax.set_ylabel("Observed proportion")
        ax.set_title(title, fontsize=8)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.debug(f"Calibration overlay written: {path}")
    return path
