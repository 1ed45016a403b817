"""The two built-in studies: trail foraging and aggregation-vs-alarm.

A scenario owns the fields, the robot roster, the per-tick injection policy
and the per-robot behaviour dispatch; the engine drives it.  Case one runs
one forager over a warmed-up branching trail map in one of three pheromone
groups; case two runs a leader, three followers and a predator with moving
Gaussian scent and alarm sources.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import control
from .control import BehaviorState, ControlParams, Mode, heading_follow_speeds
from .errors import ConfigurationError
from .fields import (
    ChannelBinding,
    ComposeSpec,
    GaussianSource,
    peak_scale_for,
)
from .maps import TrailMap, build_case1_masks, default_map, detect_arrival
from .robots import Arena, Pose, RobotBody, WheelSpeeds, wrap_angle

# Pheromone ids used by the built-in scenarios.
PLAIN_TRAIL = "trail_plain"  # blue
SCENTED_TRAIL = "trail_scented"  # green
REPELLENT_MARK = "trail_repellent"  # red
AGGREGATION_SCENT = "aggregation"  # green
ALARM_SCENT = "alarm"  # red

GROUPS = ("g1", "g2", "g3")

# Scripted predator: stand-off distance kept while waiting to strike.
EVADE_DISTANCE = 40.0


class AgentRole(enum.Enum):
    FORAGER = "forager"
    LEADER = "leader"
    FOLLOWER = "follower"
    PREDATOR = "predator"


@dataclass(frozen=True)
class RobotSpec:
    robot_id: int
    role: AgentRole
    body: RobotBody
    params: ControlParams
    start: Pose


@dataclass(frozen=True)
class Case1Config:
    """Foraging study settings; the defaults run the standard experiment."""

    group: str = "g3"
    trials: int = 20
    trial_timeout: float = 180.0
    evaporation_e: float = 50.0
    diffusion_d: float = 0.0
    injection_rate: float = 0.04
    stencil_mode: str = "faithful"
    trail_width: float = 2.0
    stub_length: float = 4.0
    arrival_radius: float = 3.0
    start_jitter: float = math.radians(30.0)
    food_endpoints: tuple[int, ...] = (3, 10)
    trail_map: TrailMap | None = None  # None = built-in default map

    def __post_init__(self) -> None:
        if self.group not in GROUPS:
            raise ConfigurationError("group must be one of %r" % (GROUPS,))
        if self.trials < 1:
            raise ConfigurationError("trials >= 1 violated")
        if self.trial_timeout <= 0:
            raise ConfigurationError("trial_timeout > 0 violated")
        if self.injection_rate < 0:
            raise ConfigurationError("injection_rate >= 0 violated")
        if self.trail_width <= 0:
            raise ConfigurationError("trail_width > 0 violated")
        if self.arrival_radius <= 0:
            raise ConfigurationError("arrival_radius > 0 violated")


@dataclass(frozen=True)
class Case2Config:
    """Aggregation/alarm study settings; the defaults run the standard experiment."""

    duration: float = 120.0
    agp_evaporation_e: float = 10.0
    agp_sigma: float = 40.0
    agp_peak: float = 0.6
    alp_evaporation_e: float = 5.0
    alp_sigma: float = 60.0
    alp_peak: float = 0.8
    alarm_trigger_distance: float = 15.0
    source_merge_radius: float = 5.0
    predator_policy: str = "approach"  # "wander" or "approach"
    approach_start: float = 60.0
    predator_speed: float = 8.0

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ConfigurationError("duration > 0 violated")
        if self.alarm_trigger_distance <= 0:
            raise ConfigurationError("alarm_trigger_distance > 0 violated")
        if self.source_merge_radius < 0:
            raise ConfigurationError("source_merge_radius >= 0 violated")
        if self.predator_policy not in ("wander", "approach"):
            raise ConfigurationError("predator_policy must be 'wander' or 'approach'")
        if not 0 < self.agp_peak <= 1 or not 0 < self.alp_peak <= 1:
            raise ConfigurationError("0 < peak <= 1 violated")


@dataclass(frozen=True)
class WorldSettings:
    """Shared world geometry and stepping settings."""

    arena: Arena = Arena(143.9, 80.9)
    cell_size: float = 0.25
    dt: float = 0.02
    sensor_noise: float = 0.0
    body: RobotBody = RobotBody()
    params: ControlParams = ControlParams()

    def grid_cells(self) -> tuple[int, int]:
        w = int(math.ceil(self.arena.width / self.cell_size))
        h = int(math.ceil(self.arena.height / self.cell_size))
        return w, h


class Case1Scenario:
    """One forager released from the nest onto a warmed-up trail system."""

    kind = "case1"

    def __init__(self, config: Case1Config, world: WorldSettings):
        self.config = config
        self.world = world
        self.trail_map = config.trail_map if config.trail_map is not None else default_map()
        w, h = world.grid_cells()
        masks = build_case1_masks(
            self.trail_map,
            config.food_endpoints,
            w,
            h,
            world.cell_size,
            trail_width=config.trail_width,
            stub_length=config.stub_length,
            rate=config.injection_rate,
        )
        empty = None
        self.masks = {
            PLAIN_TRAIL: masks.plain,
            SCENTED_TRAIL: masks.scented if config.group in ("g2", "g3") else empty,
            REPELLENT_MARK: masks.repellent if config.group == "g3" else empty,
        }
        self._trial_index = 0
        self._trial_start_tick = 0

    def field_specs(self):
        from .engine import PdeFieldSpec

        cfg = self.config
        return [
            PdeFieldSpec(pid, cfg.evaporation_e, cfg.diffusion_d, cfg.stencil_mode, mask)
            for pid, mask in self.masks.items()
        ]

    def compose_spec(self) -> ComposeSpec:
        return ComposeSpec(
            (
                ChannelBinding(PLAIN_TRAIL, "b", 1.0),
                ChannelBinding(SCENTED_TRAIL, "g", 1.0),
                ChannelBinding(REPELLENT_MARK, "r", 1.0),
            )
        )

    def robot_specs(self) -> list[RobotSpec]:
        nest = self.trail_map.nest
        params = replace(
            self.world.params, wheelbase=self.world.body.wheelbase, dt=self.world.dt
        )
        return [
            RobotSpec(1, AgentRole.FORAGER, self.world.body, params, Pose(nest[0], nest[1], 0.0))
        ]

    def _trunk_heading(self) -> float:
        root = next(s for s in self.trail_map.segments if s.parent_id == 0)
        return math.atan2(root.y2 - root.y1, root.x2 - root.x1)

    def start_pose(self, rng: np.random.Generator) -> Pose:
        jitter = rng.uniform(-self.config.start_jitter, self.config.start_jitter)
        nest = self.trail_map.nest
        return Pose(nest[0], nest[1], wrap_angle(self._trunk_heading() + jitter))

    def prepare(self, sim) -> None:
        sim.warm_up(max_sim_seconds=300.0)
        robot = sim.robots[0]
        robot.pose = self.start_pose(robot.rng)

    def injection_update(self, sim, now: float) -> list[tuple[str, int, str]]:
        return []

    def act(self, sim, robot, reading, collision, now):
        return control.forage_step(robot.state, reading, collision, robot.rng, robot.params)

    def after_tick(self, sim, now: float) -> list[tuple[str, int, str]]:
        robot = sim.robots[0]
        endpoint = detect_arrival(
            (robot.pose.x, robot.pose.y), self.trail_map.endpoints, self.config.arrival_radius
        )
        elapsed = (sim.tick_index - self._trial_start_tick) * self.world.dt
        events: list[tuple[str, int, str]] = []
        if endpoint is not None:
            sim.close_trial(self._trial_index, self._trial_start_tick, endpoint)
            events.append(("arrival", robot.robot_id, "endpoint=%d" % endpoint))
        elif elapsed >= self.config.trial_timeout:
            sim.close_trial(self._trial_index, self._trial_start_tick, None)
            events.append(("timeout", robot.robot_id, ""))
        else:
            return events
        self._trial_index += 1
        self._trial_start_tick = sim.tick_index
        if self._trial_index < self.config.trials:
            robot.pose = self.start_pose(robot.rng)
            robot.state = BehaviorState()
        return events

    def finished(self, sim) -> bool:
        return self._trial_index >= self.config.trials


# Fixed case-two roster: leader 1, followers 2..4, predator 5.
LEADER_ID = 1
FOLLOWER_IDS = (2, 3, 4)
PREDATOR_ID = 5

_CASE2_STARTS = {
    LEADER_ID: Pose(72.0, 40.0, 0.0),
    2: Pose(25.0, 18.0, 1.0),
    3: Pose(120.0, 22.0, 2.5),
    4: Pose(30.0, 64.0, -1.0),
    PREDATOR_ID: Pose(134.0, 72.0, math.pi),
}


class Case2Scenario:
    """Leader scent draws followers together; a predator triggers alarms."""

    kind = "case2"

    def __init__(self, config: Case2Config, world: WorldSettings):
        self.config = config
        self.world = world
        self.agp_sources: list[GaussianSource] = []
        self.alp_sources: list[GaussianSource] = []

    def field_specs(self):
        from .engine import GaussianFieldSpec

        return [
            GaussianFieldSpec(AGGREGATION_SCENT, self.agp_sources),
            GaussianFieldSpec(ALARM_SCENT, self.alp_sources),
        ]

    def compose_spec(self) -> ComposeSpec:
        return ComposeSpec(
            (
                ChannelBinding(AGGREGATION_SCENT, "g", 1.0),
                ChannelBinding(ALARM_SCENT, "r", 1.0),
            )
        )

    def robot_specs(self) -> list[RobotSpec]:
        params = replace(
            self.world.params, wheelbase=self.world.body.wheelbase, dt=self.world.dt
        )
        predator_params = replace(params, base_speed_vb=self.config.predator_speed)
        specs = [
            RobotSpec(LEADER_ID, AgentRole.LEADER, self.world.body, params, _CASE2_STARTS[1])
        ]
        for rid in FOLLOWER_IDS:
            specs.append(
                RobotSpec(rid, AgentRole.FOLLOWER, self.world.body, params, _CASE2_STARTS[rid])
            )
        specs.append(
            RobotSpec(
                PREDATOR_ID,
                AgentRole.PREDATOR,
                self.world.body,
                predator_params,
                _CASE2_STARTS[PREDATOR_ID],
            )
        )
        return specs

    def prepare(self, sim) -> None:
        pass

    def injection_update(self, sim, now: float) -> list[tuple[str, int, str]]:
        cfg = self.config
        leader = sim.robot_by_id(LEADER_ID)
        # The leader's scent is one source that rides along with it.
        self.agp_sources.clear()
        self.agp_sources.append(
            GaussianSource(
                leader.pose.x,
                leader.pose.y,
                cfg.agp_sigma,
                cfg.agp_sigma,
                scale_k=peak_scale_for(cfg.agp_sigma, cfg.agp_sigma, cfg.agp_peak),
                evaporation_e=cfg.agp_evaporation_e,
                birth_time=now,
            )
        )
        events: list[tuple[str, int, str]] = []
        predator = sim.robot_by_id(PREDATOR_ID)
        for robot in sim.robots:
            if robot.role is AgentRole.PREDATOR:
                continue
            dist = math.hypot(
                robot.pose.x - predator.pose.x, robot.pose.y - predator.pose.y
            )
            if dist > cfg.alarm_trigger_distance:
                continue
            merged = False
            for i, src in enumerate(self.alp_sources):
                if (
                    math.hypot(src.center_x - robot.pose.x, src.center_y - robot.pose.y)
                    <= cfg.source_merge_radius
                ):
                    self.alp_sources[i] = replace(src, birth_time=now)
                    merged = True
                    break
            if not merged:
                self.alp_sources.append(
                    GaussianSource(
                        robot.pose.x,
                        robot.pose.y,
                        cfg.alp_sigma,
                        cfg.alp_sigma,
                        scale_k=peak_scale_for(cfg.alp_sigma, cfg.alp_sigma, cfg.alp_peak),
                        evaporation_e=cfg.alp_evaporation_e,
                        birth_time=now,
                    )
                )
                events.append(("alarm", robot.robot_id, "predator_distance=%.1f" % dist))
        return events

    def act(self, sim, robot, reading, collision, now):
        if robot.role is AgentRole.LEADER:
            return control.leader_step(robot.state, reading, collision, robot.rng, robot.params)
        if robot.role is AgentRole.FOLLOWER:
            return control.follower_step(robot.state, reading, collision, robot.rng, robot.params)
        if self.config.predator_policy == "wander":
            return control.wander_step(robot.state, collision, robot.rng, robot.params)
        return self._scripted_predator(sim, robot, collision, now)

    def _scripted_predator(self, sim, robot, collision, now):
        """Hold off until the strike time, then bear down on the leader."""
        preempt = control.collision_preempt(robot.state, collision, robot.rng, robot.params)
        if preempt is not None:
            return preempt
        pose = robot.pose
        if now < self.config.approach_start:
            nearest = None
            for other in sim.robots:
                if other.robot_id == robot.robot_id:
                    continue
                d = math.hypot(other.pose.x - pose.x, other.pose.y - pose.y)
                if nearest is None or d < nearest[0]:
                    nearest = (d, other)
            if nearest is not None and nearest[0] < EVADE_DISTANCE:
                away = math.atan2(
                    pose.y - nearest[1].pose.y, pose.x - nearest[1].pose.x
                )
                state = replace(robot.state, mode=Mode.FOLLOW_HEADING)
                return heading_follow_speeds(wrap_angle(away - pose.heading), robot.params), state
            return WheelSpeeds(0.0, 0.0), replace(robot.state, mode=Mode.WANDER)
        leader = sim.robot_by_id(LEADER_ID)
        bearing = math.atan2(leader.pose.y - pose.y, leader.pose.x - pose.x)
        state = replace(robot.state, mode=Mode.FOLLOW_HEADING)
        return heading_follow_speeds(wrap_angle(bearing - pose.heading), robot.params), state

    def after_tick(self, sim, now: float) -> list[tuple[str, int, str]]:
        return []

    def finished(self, sim) -> bool:
        return sim.tick_index * self.world.dt >= self.config.duration - 1e-9
