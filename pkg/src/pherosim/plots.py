"""Matplotlib figures rendered to files next to the delimited logs."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .engine import RunLog
from .metrics import TIMEOUT_BUCKET, aggregation_series, arrival_histogram
from .outputs import trajectory_overlay


def plot_histogram(log_or_logs, path) -> None:
    hist = arrival_histogram(log_or_logs)
    keys = sorted((k for k in hist if k != TIMEOUT_BUCKET), key=int) + [TIMEOUT_BUCKET]
    counts = [hist[k] for k in keys]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(keys)), counts, color="tab:blue")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys)
    ax.set_xlabel("arrival endpoint")
    ax.set_ylabel("trials")
    ax.set_title("Trial arrivals per endpoint")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_aggregation(log: RunLog, path) -> None:
    series = aggregation_series(log)
    times = [t for t, _ in series]
    values = [s for _, s in series]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(times, values, color="tab:green", linewidth=1.0)
    alarm_times = [ev.time_s for ev in log.events if ev.kind == "alarm"]
    if alarm_times:
        ax.axvline(alarm_times[0], color="tab:red", linestyle="--", label="first alarm")
        ax.legend()
    ax.set_xlabel("time [s]")
    ax.set_ylabel("sum of follower-leader distances [cm]")
    ax.set_title("Aggregation over time")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_trajectories(log: RunLog, path) -> None:
    overlay = trajectory_overlay(log)
    extent = (
        0.0,
        overlay.width_cells * overlay.cell_size,
        0.0,
        overlay.height_cells * overlay.cell_size,
    )
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.imshow(np.clip(overlay.pixels, 0.0, 1.0), origin="lower", extent=extent)
    ax.set_xlabel("x [cm]")
    ax.set_ylabel("y [cm]")
    ax.set_title("Robot paths over final pheromone image")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_figures(log: RunLog, out_dir) -> list[str]:
    """All figures that apply to this run. Returns the file names written."""
    written = []
    if log.scenario_kind == "case1" and log.trials:
        plot_histogram(log, os.path.join(out_dir, "histogram.png"))
        written.append("histogram.png")
    if log.scenario_kind == "case2":
        plot_aggregation(log, os.path.join(out_dir, "aggregation.png"))
        written.append("aggregation.png")
    if log.final_image is not None:
        plot_trajectories(log, os.path.join(out_dir, "trajectories.png"))
        written.append("trajectories.png")
    return written
