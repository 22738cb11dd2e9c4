# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Plot data and SVG charts of an experiment: average test MSE and rollout deviations per learned task for
every method, baseline reference lines and the final rollout traces.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import matplotlib
matplotlib.use("Agg")
from matplotlib.figure import Figure

import numpy as np

from src.harness.metrics import load_eval_matrix, load_rollout_reports
from src.harness.rollout import TRACE_COLUMNS
from src.tools.csv_io import read_csv, write_csv

logger = logging.getLogger(__name__)

CURVE_METRICS = ("B", "max_dev", "mean_dev")
LEARNING_CURVE_COLUMNS = ("method", "task_index", "metric", "value")
BASELINE_COLUMNS = ("controller", "metric", "value")
BASELINE_METRICS = ("mean_dev", "max_dev")

# Fixed salt and no date keep the SVG output byte-identical between runs
_SVG_RC = {"svg.hashsalt": "lifetrack", "svg.fonttype": "none"}
_SVG_METADATA = {"Date": None}


@dataclass
class PlotData:
    """
    curves: method -> one (B, max_dev, mean_dev) triple per learned task.
    baselines: controller -> (mean_dev, max_dev).
    traces: name -> array with the columns t, s, e_lat, psi, psi_ref, delta.
    """

    curves: Dict[str, List[Tuple[float, float, float]]] = field(default_factory=dict)
    baselines: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    traces: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_tasks(self) -> int:
        return max([len(points) for points in self.curves.values()], default=0)


def _save_figure(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    return path


def _curve_figure(data: PlotData, metric_index: int, ylabel: str, title: str, with_baselines: bool) -> Figure:

    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot(1, 1, 1)

    for method, points in data.curves.items():
        if len(points) == 0:
            continue
        values = [point[metric_index] for point in points]
        ax.plot(np.arange(1, len(values) + 1), values, marker="o", label=method)

    if with_baselines:
        for name, (_, max_dev) in data.baselines.items():
            ax.axhline(max_dev, linestyle="--", linewidth=1.0, label=f"{name} baseline")

    ax.set_xlabel("learned tasks")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)

    if len(ax.get_legend_handles_labels()[0]) > 0:
        ax.legend()

    fig.tight_layout()

    return fig


def _trace_figure(data: PlotData) -> Figure:

    fig = Figure(figsize=(6.4, 7.2))
    axes = [fig.add_subplot(3, 1, index) for index in (1, 2, 3)]

    for name, trace in data.traces.items():
        axes[0].plot(trace[:, 0], trace[:, 2], label=name)
        axes[1].plot(trace[:, 0], trace[:, 3] - trace[:, 4], label=name)
        axes[2].plot(trace[:, 0], trace[:, 5], label=name)

    for ax, ylabel in zip(axes, ("lateral error [m]", "heading error [rad]", "steering [rad]")):
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)

    axes[-1].set_xlabel("t [s]")

    if len(data.traces) > 0:
        axes[0].legend()

    fig.tight_layout()

    return fig


def emit_plots(data: PlotData, plots_dir: Path) -> List[Path]:
    """
    Write learning_curves.csv (long format: method, task index, metric, value), baselines.csv and the SVG
    charts. Missing data gives header-only tables and empty axes.

    :return: Written files.
    """

    plots_dir = Path(plots_dir)

    rows = [(method, task_index, metric, value)
            for method, points in data.curves.items()
            for task_index, point in enumerate(points, start=1)
            for metric, value in zip(CURVE_METRICS, point)]

    written = [write_csv(plots_dir / "learning_curves.csv", LEARNING_CURVE_COLUMNS, rows),
               write_csv(plots_dir / "baselines.csv", BASELINE_COLUMNS,
                         [(name, metric, value)
                          for name, values in data.baselines.items()
                          for metric, value in zip(BASELINE_METRICS, values)])]

    written.append(_save_figure(_curve_figure(data, 0, "average test MSE", "Learning performance", False),
                                plots_dir / "learning_curves.svg"))
    written.append(_save_figure(_curve_figure(data, 1, "max lateral deviation [m]", "Max lateral deviation", True),
                                plots_dir / "max_deviation.svg"))

    if len(data.traces) > 0:
        written.append(_save_figure(_trace_figure(data), plots_dir / "traces.svg"))

    logger.info(f"-> {len(written)} plot files written to {plots_dir}")

    return written


def plot_data_from_metrics(metrics_dir: Path) -> PlotData:
    """Rebuild the plot data from the metric files of a finished run."""

    metrics_dir = Path(metrics_dir)
    data = PlotData()

    for matrix_path in sorted(metrics_dir.glob("eval_matrix_*.csv")):

        method = matrix_path.stem[len("eval_matrix_"):]
        matrix = load_eval_matrix(matrix_path)
        rollouts_path = metrics_dir / f"rollouts_{method}.csv"
        reports = load_rollout_reports(rollouts_path) if rollouts_path.is_file() else []

        data.curves[method] = [(float(matrix.B[k]),
                                reports[k]["max_dev"] if k < len(reports) else float("nan"),
                                reports[k]["mean_dev"] if k < len(reports) else float("nan"))
                               for k in range(matrix.rows_filled)]

    baselines_path = metrics_dir / "baselines.csv"
    if baselines_path.is_file():
        data.baselines = {row["controller"]: (row["mean_dev"], row["max_dev"])
                          for row in load_rollout_reports(baselines_path)}

    traces_path = metrics_dir / "traces.csv"
    if traces_path.is_file():
        grouped: Dict[str, list] = {}
        for row in read_csv(traces_path):
            grouped.setdefault(row["controller"], []).append(
                [float(row[column]) for column in TRACE_COLUMNS[1:]])
        data.traces = {name: np.array(values) for name, values in grouped.items()}

    return data
