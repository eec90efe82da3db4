import io
from pathlib import Path
from typing import Optional, Union

import matplotlib
import pandas as pd
from matplotlib.figure import Figure

from ..errors import UsageError
from ._runner import median_trajectories

# fixed ids and no timestamp: the SVG depends only on the plotted data
SVG_RC = {"svg.hashsalt": "monotone-nash", "svg.fonttype": "path"}


def plot_runs(runs: pd.DataFrame, out: Optional[Union[str, Path]] = None) -> str:
    """SVG of the median of every mean coordinate over replications with its quartile band."""
    if runs.empty:
        raise UsageError("nothing to plot: no data rows")
    quartiles = median_trajectories(runs)
    multi_dim = quartiles["dim"].nunique() > 1
    with matplotlib.rc_context(SVG_RC):
        fig = Figure(figsize=(8, 4.5))
        ax = fig.add_subplot()
        for (player, dim), group in quartiles.groupby(["player", "dim"], sort=True):
            label = f"mu{player + 1}" + (f"[{dim}]" if multi_dim else "")
            (line,) = ax.plot(group["t"], group["median"], linewidth=1.5, label=label)
            ax.fill_between(
                group["t"], group["q25"], group["q75"], color=line.get_color(), alpha=0.25
            )
        ax.axhline(0.0, color="grey", linewidth=0.5)
        ax.set_xlabel("iteration t")
        ax.set_ylabel("mean action")
        ax.legend(loc="upper right")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    svg = buffer.getvalue()
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(svg, encoding="utf-8", newline="\n")
    return svg
