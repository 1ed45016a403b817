"""Line-oriented run configuration files.

Format: ``[section]`` headers, ``key = value`` pairs, ``#`` comments, blank
lines ignored.  Every key has a typed default, so an empty file is a full
valid configuration; unknown sections or keys are errors (with the line
number), as are values that break a range invariant.  ``serialize_config``
emits the canonical form, and parse(serialize(parse(text))) == parse(text).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .control import ControlParams
from .errors import ConfigurationError
from .maps import load_map
from .robots import Arena, RobotBody
from .scenarios import Case1Config, Case2Config, WorldSettings


@dataclass(frozen=True)
class SimSection:
    seed: int = 1
    dt: float = 0.02
    arena_width: float = 143.9
    arena_height: float = 80.9
    cell_size: float = 0.25
    snapshot_stride: int = 0
    sensor_noise: float = 0.0


@dataclass(frozen=True)
class RobotSection:
    diameter: float = 4.0
    wheelbase: float = 3.0
    sensor_diagonal: float = 3.0
    bumper_range: float = 2.0
    sensor_aperture: float = 0.5
    sensor_forward: float = 1.0


@dataclass(frozen=True)
class ControlSection:
    trail_gain: float = 20.0
    heading_gain: float = 4.0
    base_speed: float = 6.0
    max_speed: float = 20.0
    presence_tau: float = 0.15
    grad_epsilon: float = 0.001
    wander_jitter: float = 1.5
    flee_alarm: bool = True
    fork_turn_rate: float = 1.2
    fork_cooldown_s: float = 1.0


@dataclass(frozen=True)
class Case1Section:
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
    start_jitter_deg: float = 30.0
    sensor_noise: float = 0.02
    food_endpoints: tuple[int, ...] = (3, 10)
    map: str = "default"


@dataclass(frozen=True)
class Case2Section:
    duration: float = 120.0
    cell_size: float = 1.0
    agp_evaporation_e: float = 10.0
    agp_sigma: float = 40.0
    agp_peak: float = 0.6
    alp_evaporation_e: float = 5.0
    alp_sigma: float = 60.0
    alp_peak: float = 0.8
    alarm_trigger_distance: float = 15.0
    source_merge_radius: float = 5.0
    predator_policy: str = "approach"
    approach_start: float = 60.0
    predator_speed: float = 8.0


@dataclass(frozen=True)
class Config:
    sim: SimSection = field(default_factory=SimSection)
    robot: RobotSection = field(default_factory=RobotSection)
    control: ControlSection = field(default_factory=ControlSection)
    case1: Case1Section = field(default_factory=Case1Section)
    case2: Case2Section = field(default_factory=Case2Section)


_SECTIONS = {
    "sim": SimSection,
    "robot": RobotSection,
    "control": ControlSection,
    "case1": Case1Section,
    "case2": Case2Section,
}


def _parse_value(text: str, like, section: str, key: str, lineno: int):
    try:
        if isinstance(like, bool):
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError("expected true/false")
        if isinstance(like, int):
            return int(text)
        if isinstance(like, float):
            return float(text)
        if isinstance(like, tuple):
            return tuple(int(part) for part in text.split(",") if part.strip() != "")
        return text
    except ValueError as exc:
        raise ConfigurationError(
            "line %d: bad value for %s.%s: %s" % (lineno, section, key, exc)
        ) from None


def parse_config(text: str) -> Config:
    values: dict[str, dict] = {name: {} for name in _SECTIONS}
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigurationError("line %d: unknown section [%s]" % (lineno, section))
            continue
        if "=" not in line:
            raise ConfigurationError("line %d: expected key = value" % lineno)
        if section is None:
            raise ConfigurationError("line %d: key outside any [section]" % lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        cls = _SECTIONS[section]
        defaults = {f.name: f.default for f in fields(cls)}
        if key not in defaults:
            raise ConfigurationError("line %d: unknown key %s.%s" % (lineno, section, key))
        values[section][key] = _parse_value(val, defaults[key], section, key, lineno)
    cfg = Config(
        sim=SimSection(**values["sim"]),
        robot=RobotSection(**values["robot"]),
        control=ControlSection(**values["control"]),
        case1=Case1Section(**values["case1"]),
        case2=Case2Section(**values["case2"]),
    )
    validate_config(cfg)
    return cfg


def _require(ok: bool, invariant: str) -> None:
    if not ok:
        raise ConfigurationError("%s violated" % invariant)


def validate_config(cfg: Config) -> None:
    _require(cfg.sim.dt > 0, "sim.dt > 0")
    _require(cfg.sim.cell_size > 0, "sim.cell_size > 0")
    _require(cfg.sim.arena_width > 0 and cfg.sim.arena_height > 0, "arena dimensions > 0")
    _require(cfg.sim.snapshot_stride >= 0, "sim.snapshot_stride >= 0")
    _require(cfg.sim.sensor_noise >= 0, "sim.sensor_noise >= 0")
    _require(cfg.robot.diameter > 0, "robot.diameter > 0")
    _require(0 < cfg.robot.wheelbase < cfg.robot.diameter, "0 < robot.wheelbase < robot.diameter")
    _require(cfg.control.base_speed > 0, "control.base_speed > 0")
    _require(cfg.control.max_speed >= cfg.control.base_speed, "control.max_speed >= base_speed")
    _require(0 < cfg.control.presence_tau < 1, "0 < control.presence_tau < 1")
    _require(cfg.case1.evaporation_e > 0, "case1.evaporation_e > 0")
    _require(cfg.sim.dt <= cfg.case1.evaporation_e, "sim.dt <= case1.evaporation_e")
    _require(0 <= cfg.case1.diffusion_d <= 1, "0 <= case1.diffusion_d <= 1")
    _require(cfg.case1.trials >= 1, "case1.trials >= 1")
    _require(cfg.case1.group in ("g1", "g2", "g3"), "case1.group in {g1, g2, g3}")
    _require(cfg.case1.stencil_mode in ("faithful", "symmetric"),
             "case1.stencil_mode in {faithful, symmetric}")
    _require(len(cfg.case1.food_endpoints) >= 1, "case1.food_endpoints non-empty")
    _require(cfg.case2.duration > 0, "case2.duration > 0")
    _require(cfg.case2.cell_size > 0, "case2.cell_size > 0")
    _require(cfg.case2.agp_evaporation_e > 0, "case2.agp_evaporation_e > 0")
    _require(cfg.case2.alp_evaporation_e > 0, "case2.alp_evaporation_e > 0")
    _require(cfg.case2.agp_sigma > 0 and cfg.case2.alp_sigma > 0, "case2 sigma > 0")
    _require(0 < cfg.case2.agp_peak <= 1, "0 < case2.agp_peak <= 1")
    _require(0 < cfg.case2.alp_peak <= 1, "0 < case2.alp_peak <= 1")
    _require(cfg.case2.alarm_trigger_distance > 0, "case2.alarm_trigger_distance > 0")
    _require(cfg.case2.source_merge_radius >= 0, "case2.source_merge_radius >= 0")
    _require(cfg.case2.predator_policy in ("wander", "approach"),
             "case2.predator_policy in {wander, approach}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def serialize_config(cfg: Config) -> str:
    lines: list[str] = []
    for name, cls in _SECTIONS.items():
        lines.append("[%s]" % name)
        section = getattr(cfg, name)
        for f in fields(cls):
            lines.append("%s = %s" % (f.name, _format_value(getattr(section, f.name))))
        lines.append("")
    return "\n".join(lines)


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def world_from_config(cfg: Config, case: str) -> WorldSettings:
    cell = cfg.sim.cell_size if case == "case1" else cfg.case2.cell_size
    # The foraging study runs with sensor noise (trial-to-trial spread comes
    # from sensing stochasticity); the sensor model itself defaults to none.
    noise = cfg.case1.sensor_noise if case == "case1" else cfg.sim.sensor_noise
    return WorldSettings(
        arena=Arena(cfg.sim.arena_width, cfg.sim.arena_height),
        cell_size=cell,
        dt=cfg.sim.dt,
        sensor_noise=noise,
        body=RobotBody(
            diameter=cfg.robot.diameter,
            wheelbase=cfg.robot.wheelbase,
            sensor_diagonal=cfg.robot.sensor_diagonal,
            bumper_range=cfg.robot.bumper_range,
            sensor_aperture=cfg.robot.sensor_aperture,
            sensor_forward=cfg.robot.sensor_forward,
        ),
        params=ControlParams(
            trail_gain_p=cfg.control.trail_gain,
            heading_gain_p=cfg.control.heading_gain,
            base_speed_vb=cfg.control.base_speed,
            max_speed=cfg.control.max_speed,
            presence_tau=cfg.control.presence_tau,
            grad_epsilon=cfg.control.grad_epsilon,
            wander_jitter=cfg.control.wander_jitter,
            wheelbase=cfg.robot.wheelbase,
            dt=cfg.sim.dt,
            flee_alarm=cfg.control.flee_alarm,
            fork_turn_rate=cfg.control.fork_turn_rate,
            fork_cooldown_s=cfg.control.fork_cooldown_s,
        ),
    )


def case1_from_config(cfg: Config) -> Case1Config:
    c = cfg.case1
    trail_map = None if c.map == "default" else load_map(c.map)
    return Case1Config(
        group=c.group,
        trials=c.trials,
        trial_timeout=c.trial_timeout,
        evaporation_e=c.evaporation_e,
        diffusion_d=c.diffusion_d,
        injection_rate=c.injection_rate,
        stencil_mode=c.stencil_mode,
        trail_width=c.trail_width,
        stub_length=c.stub_length,
        arrival_radius=c.arrival_radius,
        start_jitter=math.radians(c.start_jitter_deg),
        food_endpoints=c.food_endpoints,
        trail_map=trail_map,
    )


def case2_from_config(cfg: Config) -> Case2Config:
    c = cfg.case2
    return Case2Config(
        duration=c.duration,
        agp_evaporation_e=c.agp_evaporation_e,
        agp_sigma=c.agp_sigma,
        agp_peak=c.agp_peak,
        alp_evaporation_e=c.alp_evaporation_e,
        alp_sigma=c.alp_sigma,
        alp_peak=c.alp_peak,
        alarm_trigger_distance=c.alarm_trigger_distance,
        source_merge_radius=c.source_merge_radius,
        predator_policy=c.predator_policy,
        approach_start=c.approach_start,
        predator_speed=c.predator_speed,
    )


def override(cfg: Config, **section_updates) -> Config:
    """Functional update helper: override(cfg, case1={"group": "g1"})."""
    changes = {}
    for name, upd in section_updates.items():
        if name not in _SECTIONS:
            raise ConfigurationError("unknown section %r" % name)
        changes[name] = replace(getattr(cfg, name), **upd)
    new = replace(cfg, **changes)
    validate_config(new)
    return new
