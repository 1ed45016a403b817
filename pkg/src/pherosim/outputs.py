"""Run artifacts on disk: delimited logs, pixmap frames, rendered figures.

Floats are written with ``repr`` (shortest round-trip form), so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .engine import RunLog
from .errors import ScenarioMismatchError
from .fields import ColourImage, image_to_ppm
from .metrics import TIMEOUT_BUCKET, aggregation_series, arrival_histogram

FRAME_NAME = "frame_%06d.ppm"


def _fmt(value: float) -> str:
    return repr(float(value))


def write_poses_csv(log: RunLog, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "time_s", "robot_id", "x_cm", "y_cm", "heading_rad"])
        for tick, t, rid, x, y, heading in log.pose_rows:
            writer.writerow([tick, _fmt(t), rid, _fmt(x), _fmt(y), _fmt(heading)])


def write_events_csv(log: RunLog, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "robot_id", "event_type", "detail"])
        for ev in log.events:
            writer.writerow([_fmt(ev.time_s), ev.robot_id, ev.kind, ev.detail])


def write_aggregation_csv(log: RunLog, path) -> None:
    series = aggregation_series(log)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "s_cm"])
        for t, s in series:
            writer.writerow([_fmt(t), _fmt(s)])


def write_histogram_csv(log_or_logs, path) -> None:
    hist = arrival_histogram(log_or_logs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bucket", "count"])
        numbered = sorted((k for k in hist if k != TIMEOUT_BUCKET), key=int)
        for key in numbered:
            writer.writerow([key, hist[key]])
        writer.writerow([TIMEOUT_BUCKET, hist[TIMEOUT_BUCKET]])


def burn_robots(image: ColourImage, centers: list[tuple[float, float]], diameter: float) -> ColourImage:
    """Copy of the image with a white disc stamped at each robot position."""
    pixels = image.pixels.copy()
    radius = diameter / 2.0
    cs = image.cell_size
    for cx, cy in centers:
        x_lo = max(0, int((cx - radius) / cs - 1))
        x_hi = min(image.width_cells - 1, int((cx + radius) / cs + 1))
        y_lo = max(0, int((cy - radius) / cs - 1))
        y_hi = min(image.height_cells - 1, int((cy + radius) / cs + 1))
        if x_lo > x_hi or y_lo > y_hi:
            continue
        xs = (np.arange(x_lo, x_hi + 1) + 0.5) * cs
        ys = (np.arange(y_lo, y_hi + 1) + 0.5) * cs
        inside = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2 <= radius**2
        region = pixels[y_lo : y_hi + 1, x_lo : x_hi + 1]
        region[inside] = 1.0
    return ColourImage(image.width_cells, image.height_cells, image.cell_size, pixels)


def _poses_at_tick(log: RunLog, tick: int) -> list[tuple[float, float]]:
    return [(x, y) for tk, _t, _rid, x, y, _h in log.pose_rows if tk == tick]


def write_frames(log: RunLog, out_dir, diameter: float = 4.0) -> list[str]:
    """One P6 pixmap per stored snapshot, robots burned in as white discs."""
    written = []
    for tick, image in log.snapshots:
        stamped = burn_robots(image, _poses_at_tick(log, tick), diameter)
        name = FRAME_NAME % tick
        with open(os.path.join(out_dir, name), "wb") as fh:
            fh.write(image_to_ppm(stamped))
        written.append(name)
    return written


def trajectory_overlay(log: RunLog, diameter: float = 4.0) -> ColourImage:
    """Final composed image with every robot's path drawn in white."""
    if log.final_image is None:
        raise ScenarioMismatchError("log carries no final image to draw on")
    image = log.final_image
    pixels = image.pixels.copy()
    cs = image.cell_size
    paths: dict[int, list[tuple[float, float]]] = {}
    for _tick, _t, rid, x, y, _h in log.pose_rows:
        paths.setdefault(rid, []).append((x, y))
    for pts in paths.values():
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            steps = max(1, int(math.hypot(x1 - x0, y1 - y0) / cs) + 1)
            for i in range(steps + 1):
                f = i / steps
                px = int((x0 + (x1 - x0) * f) / cs)
                py = int((y0 + (y1 - y0) * f) / cs)
                if 0 <= px < image.width_cells and 0 <= py < image.height_cells:
                    pixels[py, px] = 1.0
    overlay = ColourImage(image.width_cells, image.height_cells, cs, pixels)
    ends = [pts[-1] for pts in paths.values() if pts]
    return burn_robots(overlay, ends, diameter)


def export_outputs(log: RunLog, out_dir, figures: bool = True) -> None:
    """Write the full artifact set for one run into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    if log.config_text:
        with open(os.path.join(out_dir, "config_echo.txt"), "w") as fh:
            fh.write(log.config_text)
    write_poses_csv(log, os.path.join(out_dir, "poses.csv"))
    write_events_csv(log, os.path.join(out_dir, "events.csv"))
    if log.scenario_kind == "case2":
        write_aggregation_csv(log, os.path.join(out_dir, "aggregation.csv"))
    if log.scenario_kind == "case1" and log.trials:
        write_histogram_csv(log, os.path.join(out_dir, "histogram.csv"))
    diameter = 4.0
    write_frames(log, out_dir, diameter)
    if log.final_image is not None:
        with open(os.path.join(out_dir, "trajectory.ppm"), "wb") as fh:
            fh.write(image_to_ppm(trajectory_overlay(log, diameter)))
    if figures:
        from . import plots

        plots.render_figures(log, out_dir)
