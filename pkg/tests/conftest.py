"""Shared fixtures: small, cheap simulation logs reused across test modules."""

from __future__ import annotations

import pytest

from pherosim.config import (
    Config,
    case1_from_config,
    case2_from_config,
    override,
    world_from_config,
)
from pherosim.engine import run_simulation
from pherosim.scenarios import Case1Scenario, Case2Scenario


def run_case1(seed: int = 1, trials: int = 2, group: str = "g3", stride: int = 0, **case1_extra):
    cfg = override(Config(), case1=dict({"trials": trials, "group": group}, **case1_extra))
    world = world_from_config(cfg, "case1")
    scenario = Case1Scenario(case1_from_config(cfg), world)
    return run_simulation(scenario, world, seed, snapshot_stride=stride, config_text="")


def run_case2(seed: int = 1, duration: float = 12.0, stride: int = 0, **case2_extra):
    cfg = override(Config(), case2=dict({"duration": duration}, **case2_extra))
    world = world_from_config(cfg, "case2")
    scenario = Case2Scenario(case2_from_config(cfg), world)
    return run_simulation(scenario, world, seed, snapshot_stride=stride, config_text="")


@pytest.fixture(scope="session")
def g3_short_log():
    """Two foraging trials in the full-pheromone group, with snapshots."""
    return run_case1(seed=1, trials=2, group="g3", stride=300)


@pytest.fixture(scope="session")
def case2_log():
    """Twelve seconds of the aggregation study with an early predator strike."""
    return run_case2(seed=1, duration=12.0, stride=200, approach_start=2.0)
