"""Scenario wiring: group masks, warm-up levels, trials, sources, predator.

The scripted-predator unit tests compare against the steering laws called
with hand-computed bearings; the source bookkeeping tests drive a real
simulation a few ticks and inspect the live source lists.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from pherosim.control import Mode
from pherosim.engine import GaussianFieldSpec, PdeFieldSpec, Simulation, run_simulation
from pherosim.errors import ConfigurationError
from pherosim.robots import Pose
from pherosim.scenarios import (
    AGGREGATION_SCENT,
    ALARM_SCENT,
    EVADE_DISTANCE,
    FOLLOWER_IDS,
    LEADER_ID,
    PLAIN_TRAIL,
    PREDATOR_ID,
    REPELLENT_MARK,
    SCENTED_TRAIL,
    AgentRole,
    Case1Config,
    Case1Scenario,
    Case2Config,
    Case2Scenario,
    WorldSettings,
)
from pherosim.control import heading_follow_speeds
from pherosim.robots import WheelSpeeds, wrap_angle

COARSE = WorldSettings(cell_size=1.0)  # fast grids for wiring tests


# ---------------------------------------------------------------- configs


def test_case1_config_validation():
    with pytest.raises(ConfigurationError, match="group"):
        Case1Config(group="g9")
    with pytest.raises(ConfigurationError, match="trials"):
        Case1Config(trials=0)
    with pytest.raises(ConfigurationError, match="trial_timeout"):
        Case1Config(trial_timeout=0.0)
    with pytest.raises(ConfigurationError, match="arrival_radius"):
        Case1Config(arrival_radius=-1.0)


def test_case2_config_validation():
    with pytest.raises(ConfigurationError, match="duration"):
        Case2Config(duration=0.0)
    with pytest.raises(ConfigurationError, match="predator_policy"):
        Case2Config(predator_policy="ambush")
    with pytest.raises(ConfigurationError, match="peak"):
        Case2Config(agp_peak=1.5)


# ---------------------------------------------------------------- case 1 setup


def specs_by_id(scenario):
    return {spec.pheromone_id: spec for spec in scenario.field_specs()}


def test_group_one_gets_plain_field_only():
    sc = Case1Scenario(Case1Config(group="g1"), COARSE)
    specs = specs_by_id(sc)
    assert set(specs) == {PLAIN_TRAIL, SCENTED_TRAIL, REPELLENT_MARK}
    assert specs[PLAIN_TRAIL].mask is not None
    assert specs[SCENTED_TRAIL].mask is None
    assert specs[REPELLENT_MARK].mask is None


def test_group_two_adds_scented_overlay():
    sc = Case1Scenario(Case1Config(group="g2"), COARSE)
    specs = specs_by_id(sc)
    assert specs[SCENTED_TRAIL].mask is not None
    assert specs[REPELLENT_MARK].mask is None


def test_group_three_adds_repellent_stubs():
    sc = Case1Scenario(Case1Config(group="g3"), COARSE)
    specs = specs_by_id(sc)
    assert specs[SCENTED_TRAIL].mask is not None
    assert specs[REPELLENT_MARK].mask is not None
    for spec in specs.values():
        assert spec.evaporation_e == 50.0
        assert spec.diffusion_d == 0.0
        assert spec.mode == "faithful"


def test_case1_compose_binds_blue_green_red():
    sc = Case1Scenario(Case1Config(), COARSE)
    bindings = {b.pheromone_id: b.channel for b in sc.compose_spec().bindings}
    assert bindings == {PLAIN_TRAIL: "b", SCENTED_TRAIL: "g", REPELLENT_MARK: "r"}


def test_case1_roster_single_forager_at_nest():
    sc = Case1Scenario(Case1Config(), COARSE)
    (spec,) = sc.robot_specs()
    assert spec.robot_id == 1 and spec.role is AgentRole.FORAGER
    assert (spec.start.x, spec.start.y) == sc.trail_map.nest
    assert spec.params.wheelbase == COARSE.body.wheelbase
    assert spec.params.dt == COARSE.dt


def test_start_pose_jitter_spans_cone():
    sc = Case1Scenario(Case1Config(), COARSE)
    rng = np.random.default_rng(11)
    jitters = []
    for _ in range(200):
        pose = sc.start_pose(rng)
        assert (pose.x, pose.y) == sc.trail_map.nest
        jitters.append(pose.heading)  # trunk heading is 0
    assert all(abs(j) <= math.radians(30.0) + 1e-12 for j in jitters)
    assert min(jitters) < -math.radians(5.0) < math.radians(5.0) < max(jitters)


def test_warm_up_saturates_masked_cells():
    # Injection 0.04 against evaporation 50 saturates at min(1, 2) = 1, so a
    # warmed field is the exact mask indicator and stepping it is a no-op.
    sc = Case1Scenario(Case1Config(group="g3"), COARSE)
    sim = Simulation(sc, COARSE, seed=1)  # prepare() warms up
    for state in sim.fields:
        mask = state.mask
        vals = state.grid.values
        if mask is None:
            assert not vals.any()
        else:
            for (ix, iy) in mask.rates:
                assert vals[iy, ix] == 1.0
            assert float(vals.sum()) == float(len(mask.rates))
        assert state.stationary
    assert sim.warm_up() == 0  # already steady


def test_case1_trials_are_contiguous(g3_short_log):
    log = g3_short_log
    assert len(log.trials) == 2
    assert log.trials[0].start_tick == 0
    assert log.trials[0].end_tick == log.trials[1].start_tick
    assert log.trials[1].end_tick == log.tick_count
    closures = [e for e in log.events if e.kind in ("arrival", "timeout")]
    assert len(closures) == 2
    for trial, event in zip(log.trials, closures):
        if trial.endpoint is None:
            assert event.kind == "timeout"
        else:
            assert event.kind == "arrival"
            assert event.detail == "endpoint=%d" % trial.endpoint


# ---------------------------------------------------------------- case 2 setup


def test_case2_roster_and_speeds():
    sc = Case2Scenario(Case2Config(), COARSE)
    specs = {s.robot_id: s for s in sc.robot_specs()}
    assert sorted(specs) == [1, 2, 3, 4, 5]
    assert specs[LEADER_ID].role is AgentRole.LEADER
    for rid in FOLLOWER_IDS:
        assert specs[rid].role is AgentRole.FOLLOWER
    assert specs[PREDATOR_ID].role is AgentRole.PREDATOR
    assert specs[PREDATOR_ID].params.base_speed_vb == 8.0
    assert specs[LEADER_ID].params.base_speed_vb == COARSE.params.base_speed_vb
    bindings = {b.pheromone_id: b.channel for b in sc.compose_spec().bindings}
    assert bindings == {AGGREGATION_SCENT: "g", ALARM_SCENT: "r"}
    kinds = {spec.pheromone_id: type(spec) for spec in sc.field_specs()}
    assert kinds == {AGGREGATION_SCENT: GaussianFieldSpec, ALARM_SCENT: GaussianFieldSpec}


def test_leader_scent_rides_with_the_leader():
    sc = Case2Scenario(Case2Config(), COARSE)
    sim = Simulation(sc, COARSE, seed=3)
    sim.tick()
    assert len(sc.agp_sources) == 1
    src = sc.agp_sources[0]
    assert (src.center_x, src.center_y) == (72.0, 40.0)  # pose when tick began
    leader_after = sim.robot_by_id(LEADER_ID).pose
    sim.tick()
    src = sc.agp_sources[0]
    assert len(sc.agp_sources) == 1  # replaced, not accumulated
    assert (src.center_x, src.center_y) == (leader_after.x, leader_after.y)
    assert src.birth_time == pytest.approx(0.02)  # refreshed every tick


def test_alarms_fire_once_then_merge():
    cfg = Case2Config(alarm_trigger_distance=300.0)  # everyone is "close"
    sc = Case2Scenario(cfg, COARSE)
    sim = Simulation(sc, COARSE, seed=3)
    sim.tick()
    alarms = [e for e in sim.log.events if e.kind == "alarm"]
    assert len(alarms) == 4  # leader + three followers
    assert sorted(e.robot_id for e in alarms) == [1, 2, 3, 4]
    assert all(e.detail.startswith("predator_distance=") for e in alarms)
    assert len(sc.alp_sources) == 4
    centres = [(s.center_x, s.center_y) for s in sc.alp_sources]
    sim.tick()
    # Robots moved a fraction of a cm: each re-trigger merges into its old
    # source (birth refreshed, centre kept) instead of appending a new one.
    assert len(sc.alp_sources) == 4
    assert [(s.center_x, s.center_y) for s in sc.alp_sources] == centres
    assert all(s.birth_time == pytest.approx(0.02) for s in sc.alp_sources)
    assert len([e for e in sim.log.events if e.kind == "alarm"]) == 4


def test_predator_parks_when_nobody_is_near():
    sc = Case2Scenario(Case2Config(), COARSE)
    sim = Simulation(sc, COARSE, seed=3)
    predator = sim.robot_by_id(PREDATOR_ID)
    # Every robot starts farther than the stand-off distance.
    for other in sim.robots:
        if other.robot_id != PREDATOR_ID:
            d = math.hypot(other.pose.x - predator.pose.x, other.pose.y - predator.pose.y)
            assert d > EVADE_DISTANCE
    wheels, state = sc.act(sim, predator, None, None, now=0.0)
    assert wheels == WheelSpeeds(0.0, 0.0)
    assert state.mode is Mode.WANDER
    for _ in range(10):
        sim.tick()
    after = sim.robot_by_id(PREDATOR_ID).pose
    assert (after.x, after.y, after.heading) == (134.0, 72.0, math.pi)


def test_predator_evades_close_robots_before_strike_time():
    sc = Case2Scenario(Case2Config(), COARSE)
    sim = Simulation(sc, COARSE, seed=3)
    intruder = sim.robot_by_id(2)
    intruder.pose = Pose(130.0, 70.0, 0.0)
    predator = sim.robot_by_id(PREDATOR_ID)
    wheels, state = sc.act(sim, predator, None, None, now=0.0)
    assert state.mode is Mode.FOLLOW_HEADING
    away = math.atan2(72.0 - 70.0, 134.0 - 130.0)
    expect = heading_follow_speeds(wrap_angle(away - math.pi), predator.params)
    assert wheels == expect


def test_predator_pursues_leader_after_strike_time():
    cfg = Case2Config(approach_start=0.5, duration=2.0)
    sc = Case2Scenario(cfg, COARSE)
    sim = Simulation(sc, COARSE, seed=3)
    predator = sim.robot_by_id(PREDATOR_ID)
    leader = sim.robot_by_id(LEADER_ID)
    wheels, state = sc.act(sim, predator, None, None, now=0.5)
    bearing = math.atan2(leader.pose.y - predator.pose.y, leader.pose.x - predator.pose.x)
    assert wheels == heading_follow_speeds(
        wrap_angle(bearing - predator.pose.heading), predator.params
    )
    assert state.mode is Mode.FOLLOW_HEADING
    # Closing the gap: run the scripted policy to the end of the window.
    def gap():
        p, l = predator.pose, leader.pose
        return math.hypot(p.x - l.x, p.y - l.y)

    start_gap = gap()
    log = None
    while not sc.finished(sim):
        sim.tick()
    assert gap() < start_gap - 6.0  # 1.5 s of pursuit at 8 cm/s minus turning


def test_case2_run_length_matches_duration():
    cfg = Case2Config(duration=1.0)
    log = run_simulation(Case2Scenario(cfg, COARSE), COARSE, seed=2)
    assert log.tick_count == 50
    assert log.pose_rows[0][0] == 1 and log.pose_rows[0][1] == pytest.approx(0.02)
    assert log.pose_rows[-1][0] == 50 and log.pose_rows[-1][1] == pytest.approx(1.0)
