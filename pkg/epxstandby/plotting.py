"""
step-curve figures of estimated unit and system distributions
"""

from pathlib import Path
from typing import Optional, Union
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

__all__ = ["curve_figure", "write_figure"]


def curve_figure(curves: pd.DataFrame, title: Optional[str] = None) -> go.Figure:
    """
    Plot every non-time column of `curves` as a right-continuous step curve.

    Parameters
    ----------
    curves : pandas.DataFrame
        a ``time`` column and one column per curve, e.g. F1, K2, K3, K4

    title : str, optional

    Returns
    -------
    fig : plotly.graph_objects.Figure
        one trace per curve
    """
    names = [col for col in curves.columns if col != "time"]
    if len(names) == 0 or len(curves) == 0:
        msg = "there are no curves to plot"
        raise ValueError(msg)
    long = curves.melt(id_vars="time", value_vars=names, var_name="curve", value_name="cdf")
    fig = px.line(long, x="time", y="cdf", color="curve", line_shape="hv", title=title)
    fig.update_layout(
        xaxis_title="t",
        yaxis_title="estimated c.d.f.",
        yaxis_range=[0, 1.02],
        template="plotly_white",
    )
    return fig


def write_figure(fig: go.Figure, fname: Union[str, Path]) -> Path:
    """
    Save `fig` as a standalone ``.svg`` (requires kaleido) or ``.html`` file.
    """
    fname = Path(fname)
    suffix = fname.suffix.lower()
    if suffix == ".svg":
        fig.write_image(str(fname), format="svg")
    elif suffix == ".html":
        fig.write_html(str(fname), include_plotlyjs=True, full_html=True)
    else:
        msg = f"figure files must end in .svg or .html, got {fname.name}"
        raise ValueError(msg)
    return fname
