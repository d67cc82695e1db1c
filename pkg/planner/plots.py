"""
Plotly charts of a planned motion: joint torques against their limits and the base x trajectory
"""

from pathlib import Path
from typing import Union

import plotly.graph_objects as go
from plotly.subplots import make_subplots

from planner.model import Trajectory
from planner.schema import TorqueReport
from planner.validate.torques import JOINTS


def create_torque_figure(report: TorqueReport) -> go.Figure:
    """
    One row per joint type, one trace per leg, dashed lines at +-limit

    Returns:
        plotly Figure
    """
    legs = sorted({j.leg for j in report.joints})
    fig = make_subplots(rows=len(JOINTS), cols=1, shared_xaxes=True, subplot_titles=JOINTS)

    for row, joint in enumerate(JOINTS, start=1):
        for leg in legs:
            key = f"{leg}_{joint}"
            if key not in report.series:
                continue
            fig.add_trace(
                go.Scatter(x=report.times, y=report.series[key], mode="lines", name=key),
                row=row, col=1,
            )
        limit = max(j.limit for j in report.joints if j.joint == joint)
        for sign in (1, -1):
            fig.add_hline(y=sign * limit, line_dash="dash", line_color="red", row=row, col=1)
        fig.update_yaxes(title_text="N m", row=row, col=1)

    fig.update_layout(
        height=250 * len(JOINTS),
        margin=dict(t=40, b=20, l=20, r=20),
        xaxis3_title="t (s)",
    )
    return fig


def create_base_figure(trajectory: Trajectory) -> go.Figure:
    fig = go.Figure()
    fig.add_trace(go.Scatter(x=trajectory.times, y=trajectory.r[:, 0], mode="lines+markers", name="r_x (m)"))
    fig.add_trace(go.Scatter(x=trajectory.times, y=trajectory.rd[:, 0], mode="lines", name="rd_x (m/s)"))
    fig.update_layout(
        height=350,
        margin=dict(t=20, b=20, l=20, r=20),
        xaxis_title="t (s)",
    )
    return fig


def write_figure(fig: go.Figure, path: Union[str, Path]) -> Path:
    path = Path(path)
    fig.write_html(path, include_plotlyjs="cdn")
    return path
