"""Run-log reducers: the aggregation distance series and arrival tallies."""

from __future__ import annotations

import math

from .engine import RunLog
from .errors import ScenarioMismatchError, UnknownIdError

TIMEOUT_BUCKET = "timeout"


def aggregation_series(log: RunLog) -> list[tuple[float, float]]:
    """Per-tick (time, S) where S is the summed follower-to-leader distance."""
    if log.scenario_kind != "case2":
        raise ScenarioMismatchError("aggregation_series needs an aggregation-study log")
    leader_ids = [rid for rid, role in log.roles.items() if role == "leader"]
    follower_ids = sorted(rid for rid, role in log.roles.items() if role == "follower")
    if len(leader_ids) != 1 or not follower_ids:
        raise ScenarioMismatchError("log lacks a unique leader with followers")
    leader = leader_ids[0]
    by_tick: dict[int, dict[int, tuple[float, float]]] = {}
    times: dict[int, float] = {}
    for tick, t, rid, x, y, _heading in log.pose_rows:
        by_tick.setdefault(tick, {})[rid] = (x, y)
        times[tick] = t
    series: list[tuple[float, float]] = []
    for tick in sorted(by_tick):
        poses = by_tick[tick]
        if leader not in poses:
            raise UnknownIdError("leader %d missing from tick %d" % (leader, tick))
        lx, ly = poses[leader]
        s = 0.0
        for rid in follower_ids:
            if rid not in poses:
                raise UnknownIdError("follower %d missing from tick %d" % (rid, tick))
            fx, fy = poses[rid]
            s += math.hypot(fx - lx, fy - ly)
        series.append((times[tick], s))
    return series


def windowed_mean(series: list[tuple[float, float]], window_s: float) -> list[tuple[float, float]]:
    """Trailing-window mean of a (time, value) series (window in seconds)."""
    out: list[tuple[float, float]] = []
    values = [v for _, v in series]
    times = [t for t, _ in series]
    start = 0
    acc = 0.0
    for i, (t, v) in enumerate(series):
        acc += v
        while times[start] < t - window_s:
            acc -= values[start]
            start += 1
        out.append((t, acc / (i - start + 1)))
    return out


def arrival_histogram(logs: list[RunLog] | RunLog) -> dict[str, int]:
    """Tally of first-arrival endpoints over all trials, plus timeouts.

    Accepts one or several foraging logs; every trial record lands either in
    its endpoint's bucket or in the timeout bucket, so the bucket counts sum
    to the total number of trials.
    """
    if isinstance(logs, RunLog):
        logs = [logs]
    counts: dict[str, int] = {TIMEOUT_BUCKET: 0}
    for log in logs:
        if log.scenario_kind != "case1":
            raise ScenarioMismatchError("arrival_histogram needs foraging-study logs")
        if not log.trials:
            raise ScenarioMismatchError("log has no trial records")
        for trial in log.trials:
            if trial.endpoint is None:
                counts[TIMEOUT_BUCKET] += 1
            else:
                key = str(trial.endpoint)
                counts[key] = counts.get(key, 0) + 1
    return counts


def food_fraction(hist: dict[str, int], food_endpoints: tuple[int, ...]) -> float:
    """Fraction of non-timeout arrivals that landed on a food endpoint."""
    arrivals = sum(n for k, n in hist.items() if k != TIMEOUT_BUCKET)
    if arrivals == 0:
        return 0.0
    at_food = sum(hist.get(str(e), 0) for e in food_endpoints)
    return at_food / arrivals
