"""Robot control laws and the per-role behaviour state machines.

Wheel-speed laws: trail keeping steers by the left/right sensor-pair
difference scaled by a sensitivity gain on top of a base speed; heading
keeping is a proportional controller on the egocentric bearing error.  The
state machines compose those with wandering and a turn-away collision
reflex.  All step functions are pure: state in, (wheels, state) out.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .fields import CHANNEL_INDEX
from .robots import SensorReading, WheelSpeeds, gradient_direction, wrap_angle

# Trail channel sets: a plain trail is blue, a scented one adds green.
BLUE_CHANNELS = ("b",)
CYAN_CHANNELS = ("b", "g")

# Probability of keeping the scented branch at a scented/plain trail fork.
BRANCH_KEEP_SCENTED = 0.7

# Probability of turning left at a fork whose branches carry the same
# colours.  Such a fork is a tie the steering law cannot break on its own
# (the junction mouth is an unstable equilibrium), so the choice is drawn.
FORK_SIDE_LEFT = 0.5


class TrailClass(enum.Enum):
    OFF_TRAIL = "off_trail"
    BLUE = "blue"
    CYAN = "cyan"
    MAGENTA = "magenta"
    WHITE_MIX = "white_mix"


class Mode(enum.Enum):
    WANDER = "wander"
    FOLLOW_TRAIL = "follow_trail"
    FOLLOW_HEADING = "follow_heading"
    AVOID = "avoid"


@dataclass(frozen=True)
class ControlParams:
    """Gains, speeds and thresholds shared by the behaviour laws.

    Speeds are cm/s, angles radians.  ``wander_jitter`` is the half-width of
    the uniform turn-rate perturbation (rad/s) resampled every tick.
    ``flee_alarm`` selects descent of the alarm gradient (flee); clearing it
    makes robots climb the alarm gradient instead.
    """

    trail_gain_p: float = 20.0
    heading_gain_p: float = 4.0
    base_speed_vb: float = 6.0
    max_speed: float = 20.0
    presence_tau: float = 0.15
    grad_epsilon: float = 1e-3
    wander_jitter: float = 1.5
    wheelbase: float = 3.0
    dt: float = 0.02
    flee_alarm: bool = True
    fork_turn_rate: float = 1.2
    fork_cooldown_s: float = 1.0

    def __post_init__(self) -> None:
        if self.base_speed_vb <= 0:
            raise ConfigurationError("base_speed_vb > 0 violated")
        if self.max_speed < self.base_speed_vb:
            raise ConfigurationError("max_speed >= base_speed_vb violated")
        if not 0 < self.presence_tau < 1:
            raise ConfigurationError("0 < presence_tau < 1 violated")
        if self.wheelbase <= 0:
            raise ConfigurationError("wheelbase > 0 violated")
        if self.dt <= 0:
            raise ConfigurationError("dt > 0 violated")
        if self.fork_turn_rate < 0:
            raise ConfigurationError("fork_turn_rate >= 0 violated")
        if self.fork_cooldown_s < 0:
            raise ConfigurationError("fork_cooldown_s >= 0 violated")


@dataclass(frozen=True)
class BehaviorState:
    """Carried across ticks: current mode, avoidance pivot, branch latches.

    ``fork_side`` is +1 (left) or -1 (right) while committed through a
    same-coloured fork, else 0.  ``fork_cooldown`` counts down the ticks
    during which no new side may be drawn, so that flicker at a junction
    exit cannot redraw immediately.
    """

    mode: Mode = Mode.WANDER
    avoid_remaining: float = 0.0
    avoid_turn_rate: float = 0.0
    latched_branch: TrailClass | None = None
    wander_heading_bias: float = 0.0
    fork_side: float = 0.0
    fork_cooldown: int = 0


def _clamp(value: float, limit: float) -> float:
    return min(max(value, -limit), limit)


def _wheels_for(v: float, omega: float, params: ControlParams) -> WheelSpeeds:
    half = omega * params.wheelbase / 2.0
    return WheelSpeeds(_clamp(v - half, params.max_speed), _clamp(v + half, params.max_speed))


def classify_channels(rgb: tuple[float, float, float], tau: float) -> TrailClass:
    """Class of one RGB triple by per-channel presence at threshold tau."""
    red, green, blue = (rgb[0] >= tau, rgb[1] >= tau, rgb[2] >= tau)
    if not blue:
        return TrailClass.OFF_TRAIL
    if red and green:
        return TrailClass.WHITE_MIX
    if green:
        return TrailClass.CYAN
    if red:
        return TrailClass.MAGENTA
    return TrailClass.BLUE


@dataclass(frozen=True)
class TrailView:
    per_sensor: tuple[TrailClass, TrailClass, TrailClass, TrailClass]
    overall: TrailClass
    bifurcation: bool


def classify_trail(reading: SensorReading, tau: float) -> TrailView:
    """Per-sensor and mean trail classes; bifurcation = sensors disagree."""
    per = tuple(classify_channels(rgb, tau) for rgb in reading.per_sensor)
    overall = classify_channels(reading.mean, tau)
    return TrailView(per, overall, len(set(per)) > 1)


def trail_follow_speeds(
    reading: SensorReading, channels: tuple[str, ...], params: ControlParams
) -> WheelSpeeds:
    """Differential steering toward the stronger side of the trail.

    Sensor strength is the minimum over the required channels, so a
    multi-channel trail only counts where all its channels are present.
    Left pair is sensors {3, 0}, right pair {1, 2}.
    """
    idx = [CHANNEL_INDEX[c] for c in channels]
    strength = [min(rgb[i] for i in idx) for rgb in reading.per_sensor]
    left = (strength[3] + strength[0]) / 2.0
    right = (strength[1] + strength[2]) / 2.0
    diff = (left - right) * params.trail_gain_p
    return WheelSpeeds(
        _clamp(diff + params.base_speed_vb, params.max_speed),
        _clamp(-diff + params.base_speed_vb, params.max_speed),
    )


def heading_follow_speeds(target_egocentric: float, params: ControlParams) -> WheelSpeeds:
    """Proportional steering toward an egocentric target bearing."""
    error = wrap_angle(target_egocentric)
    return WheelSpeeds(
        _clamp(params.base_speed_vb - params.heading_gain_p * error, params.max_speed),
        _clamp(params.base_speed_vb + params.heading_gain_p * error, params.max_speed),
    )


def reactive_motion(
    state: BehaviorState, rng: np.random.Generator, params: ControlParams
) -> WheelSpeeds:
    """Wheel speeds for the reactive modes (WANDER or AVOID).

    WANDER drives forward at base speed with a fresh uniform turn-rate
    perturbation each tick; AVOID pivots in place at the rate fixed when the
    avoidance began.
    """
    if state.mode is Mode.AVOID:
        return _wheels_for(0.0, state.avoid_turn_rate, params)
    if state.mode is not Mode.WANDER:
        raise ConfigurationError("reactive_motion requires WANDER or AVOID mode")
    jitter = rng.uniform(-params.wander_jitter, params.wander_jitter)
    return _wheels_for(params.base_speed_vb, state.wander_heading_bias + jitter, params)


def _begin_avoid(
    state: BehaviorState, bearing: float, rng: np.random.Generator, params: ControlParams
) -> BehaviorState:
    # Pivot away from the obstacle through an angle drawn once per avoidance.
    angle = rng.uniform(math.pi / 2.0, math.pi)
    if bearing > 0:
        direction = -1.0
    elif bearing < 0:
        direction = 1.0
    else:
        direction = 1.0 if rng.random() < 0.5 else -1.0
    turn_rate = direction * 2.0 * params.base_speed_vb / params.wheelbase
    return replace(
        state,
        mode=Mode.AVOID,
        avoid_turn_rate=turn_rate,
        avoid_remaining=angle / abs(turn_rate),
    )


def collision_preempt(
    state: BehaviorState,
    collision: float | None,
    rng: np.random.Generator,
    params: ControlParams,
) -> tuple[WheelSpeeds, BehaviorState] | None:
    """Shared collision reflex: returns a result when it preempts behaviour.

    An avoidance pivot in progress runs to completion and ignores new bumper
    hits (the obstacle stays in range while pivoting next to it); a fresh
    collision starts a pivot.
    """
    if state.mode is Mode.AVOID and state.avoid_remaining > 0.0:
        wheels = reactive_motion(state, rng, params)
        remaining = state.avoid_remaining - params.dt
        if remaining <= 0.0:
            new_state = replace(state, mode=Mode.WANDER, avoid_remaining=0.0, avoid_turn_rate=0.0)
        else:
            new_state = replace(state, avoid_remaining=remaining)
        return wheels, new_state
    if collision is not None:
        new_state = _begin_avoid(state, collision, rng, params)
        wheels = reactive_motion(new_state, rng, params)
        return wheels, replace(new_state, avoid_remaining=new_state.avoid_remaining - params.dt)
    return None


def _wander(
    state: BehaviorState, rng: np.random.Generator, params: ControlParams
) -> tuple[WheelSpeeds, BehaviorState]:
    new_state = replace(
        state, mode=Mode.WANDER, latched_branch=None, fork_side=0.0, fork_cooldown=0
    )
    return reactive_motion(new_state, rng, params), new_state


def _lateral_widening(view: TrailView) -> bool:
    """True when both lateral sensors (0 right, 2 left) stand on paint.

    The laterals sit one sensor diagonal apart, wider than the trail, so a
    straight or gently bent trail never lights both at once; a junction
    mouth, where branch paints overlap, does.
    """
    return (
        view.per_sensor[0] is not TrailClass.OFF_TRAIL
        and view.per_sensor[2] is not TrailClass.OFF_TRAIL
    )


def forage_step(
    state: BehaviorState,
    reading: SensorReading,
    collision: float | None,
    rng: np.random.Generator,
    params: ControlParams,
) -> tuple[WheelSpeeds, BehaviorState]:
    """Foraging: follow trails outward, resolving forks by their colours.

    Collision reflex first.  Off the trail the robot wanders.  A fork marked
    by repellent (magenta under some sensor) keeps the robot on the scented
    trail.  A scented/plain fork draws a latched branch choice (scented with
    probability 0.7) held until the fork signature clears.  A widening with
    no colour contrast is a tie the steering law cannot break on its own, so
    the robot commits to a uniformly drawn side and arcs that way while the
    widening lasts; a short cooldown after release stops flicker at the
    junction exit from redrawing.  Otherwise it follows the channels of the
    trail it stands on.
    """
    preempt = collision_preempt(state, collision, rng, params)
    if preempt is not None:
        return preempt
    view = classify_trail(reading, params.presence_tau)
    if view.overall is TrailClass.OFF_TRAIL:
        return _wander(state, rng, params)
    cooldown = max(state.fork_cooldown - 1, 0)
    scented = view.overall in (TrailClass.CYAN, TrailClass.WHITE_MIX)
    if scented:
        red_marked = any(
            c in (TrailClass.MAGENTA, TrailClass.WHITE_MIX) for c in view.per_sensor
        )
        plain_fork = (
            view.bifurcation
            and TrailClass.BLUE in view.per_sensor
            and any(c in (TrailClass.CYAN, TrailClass.WHITE_MIX) for c in view.per_sensor)
        )
        if red_marked:
            new_state = replace(
                state,
                mode=Mode.FOLLOW_TRAIL,
                latched_branch=None,
                fork_side=0.0,
                fork_cooldown=cooldown,
            )
            return trail_follow_speeds(reading, CYAN_CHANNELS, params), new_state
        if plain_fork:
            choice = state.latched_branch
            if choice is None:
                choice = (
                    TrailClass.CYAN if rng.random() < BRANCH_KEEP_SCENTED else TrailClass.BLUE
                )
            new_state = replace(
                state,
                mode=Mode.FOLLOW_TRAIL,
                latched_branch=choice,
                fork_side=0.0,
                fork_cooldown=cooldown,
            )
            channels = CYAN_CHANNELS if choice is TrailClass.CYAN else BLUE_CHANNELS
            return trail_follow_speeds(reading, channels, params), new_state
    # Same-coloured trail underfoot (plain blue, plain cyan, or a repellent
    # mark without green, which still reads as a trail).
    channels = CYAN_CHANNELS if scented else BLUE_CHANNELS
    wide = _lateral_widening(view)
    if state.fork_side != 0.0:
        if wide:
            new_state = replace(
                state, mode=Mode.FOLLOW_TRAIL, latched_branch=None, fork_cooldown=cooldown
            )
            wheels = _wheels_for(
                params.base_speed_vb, state.fork_side * params.fork_turn_rate, params
            )
            return wheels, new_state
        # Branches have separated: release and let the servo recapture.
        cooldown = round(params.fork_cooldown_s / params.dt)
    elif wide and cooldown == 0:
        side = 1.0 if rng.random() < FORK_SIDE_LEFT else -1.0
        new_state = replace(
            state, mode=Mode.FOLLOW_TRAIL, latched_branch=None, fork_side=side, fork_cooldown=0
        )
        return _wheels_for(params.base_speed_vb, side * params.fork_turn_rate, params), new_state
    new_state = replace(
        state, mode=Mode.FOLLOW_TRAIL, latched_branch=None, fork_side=0.0, fork_cooldown=cooldown
    )
    return trail_follow_speeds(reading, channels, params), new_state


def _flee_alarm(
    state: BehaviorState,
    reading: SensorReading,
    rng: np.random.Generator,
    params: ControlParams,
) -> tuple[WheelSpeeds, BehaviorState]:
    grad = gradient_direction(reading, CHANNEL_INDEX["r"], params.grad_epsilon)
    if grad is None:
        return _wander(state, rng, params)
    target = wrap_angle(grad + math.pi) if params.flee_alarm else grad
    new_state = replace(state, mode=Mode.FOLLOW_HEADING)
    return heading_follow_speeds(target, params), new_state


def leader_step(
    state: BehaviorState,
    reading: SensorReading,
    collision: float | None,
    rng: np.random.Generator,
    params: ControlParams,
) -> tuple[WheelSpeeds, BehaviorState]:
    """Leader: wander, but move off the alarm gradient when alarm is present."""
    preempt = collision_preempt(state, collision, rng, params)
    if preempt is not None:
        return preempt
    if reading.mean[CHANNEL_INDEX["r"]] >= params.presence_tau:
        return _flee_alarm(state, reading, rng, params)
    return _wander(state, rng, params)


def follower_step(
    state: BehaviorState,
    reading: SensorReading,
    collision: float | None,
    rng: np.random.Generator,
    params: ControlParams,
) -> tuple[WheelSpeeds, BehaviorState]:
    """Follower: alarm beats aggregation beats wandering.

    Alarm present: move off the alarm gradient.  Otherwise aggregation scent
    present: climb its gradient toward the leader.  Otherwise wander.
    """
    preempt = collision_preempt(state, collision, rng, params)
    if preempt is not None:
        return preempt
    if reading.mean[CHANNEL_INDEX["r"]] >= params.presence_tau:
        return _flee_alarm(state, reading, rng, params)
    if reading.mean[CHANNEL_INDEX["g"]] >= params.presence_tau:
        grad = gradient_direction(reading, CHANNEL_INDEX["g"], params.grad_epsilon)
        if grad is None:
            return _wander(state, rng, params)
        new_state = replace(state, mode=Mode.FOLLOW_HEADING)
        return heading_follow_speeds(grad, params), new_state
    return _wander(state, rng, params)


def wander_step(
    state: BehaviorState,
    collision: float | None,
    rng: np.random.Generator,
    params: ControlParams,
) -> tuple[WheelSpeeds, BehaviorState]:
    """Plain wandering with the collision reflex (the predator's behaviour)."""
    preempt = collision_preempt(state, collision, rng, params)
    if preempt is not None:
        return preempt
    return _wander(state, rng, params)
