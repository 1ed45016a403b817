"""Differential-drive robots: pose integration, colour sensing, collisions.

The robot is a disc with two wheels and four downward colour sensors at the
corners of a small square (labelled 0..3 for the body directions Y-, X+, Y+,
X-).  Headings are radians, counter-clockwise from the arena +X axis, wrapped
to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .fields import ColourImage, sample_points

TWO_PI = 2.0 * math.pi

# Below this |omega| (rad/s) a step integrates as straight-line motion.
STRAIGHT_OMEGA = 1e-12


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.pi - (math.pi - a) % TWO_PI


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float


@dataclass(frozen=True)
class WheelSpeeds:
    left: float
    right: float


@dataclass(frozen=True)
class Arena:
    """Rectangular usable area [0, width] x [0, height] in cm, walled."""

    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("arena width, height > 0 violated")


@dataclass(frozen=True)
class RobotBody:
    """Chassis geometry in cm.

    ``sensor_aperture`` is the side of the square footprint each colour
    sensor averages over (a physical sensor pad is not a point); zero reads
    a single sample.  The footprint turns hard trail edges into a graded
    response, which the differential trail controller needs to not chatter.

    ``sensor_forward`` mounts the centre of the sensor array ahead of the
    wheel axle (the sensor board sits on the nose of the chassis).  The
    look-ahead is what damps proportional-only trail steering: the lateral
    error of a forward point already contains the heading error.
    """

    diameter: float = 4.0
    wheelbase: float = 3.0
    sensor_diagonal: float = 3.0
    bumper_range: float = 2.0
    sensor_aperture: float = 0.5
    sensor_forward: float = 1.0

    def __post_init__(self) -> None:
        if self.diameter <= 0:
            raise ConfigurationError("diameter > 0 violated")
        if not 0 < self.wheelbase < self.diameter:
            raise ConfigurationError("0 < wheelbase < diameter violated")
        if not 0 < self.sensor_diagonal <= self.diameter:
            raise ConfigurationError("0 < sensor_diagonal <= diameter violated")
        if self.bumper_range <= 0:
            raise ConfigurationError("bumper_range > 0 violated")
        if self.sensor_aperture < 0:
            raise ConfigurationError("sensor_aperture >= 0 violated")
        if not 0 <= self.sensor_forward <= self.diameter / 2.0:
            raise ConfigurationError("0 <= sensor_forward <= diameter/2 violated")

    @property
    def radius(self) -> float:
        return self.diameter / 2.0

    def sensor_offsets(self) -> tuple[tuple[float, float], ...]:
        """Body-frame sensor positions, order 0..3 = Y-, X+, Y+, X-."""
        r = self.sensor_diagonal / 2.0
        return ((0.0, -r), (r, 0.0), (0.0, r), (-r, 0.0))


def step_kinematics(pose: Pose, wheels: WheelSpeeds, body: RobotBody, dt: float) -> Pose:
    """Advance one timestep along the exact unicycle arc.

    v = (l + r) / 2, omega = (r - l) / wheelbase.  With constant wheel speeds
    the motion is a circular arc (or a line when omega ~ 0), so integrating
    arc-exactly makes closed circles close to machine precision.
    """
    if dt <= 0:
        raise ConfigurationError("dt > 0 violated")
    v = (wheels.left + wheels.right) / 2.0
    omega = (wheels.right - wheels.left) / body.wheelbase
    if abs(omega) < STRAIGHT_OMEGA:
        return Pose(
            pose.x + v * math.cos(pose.heading) * dt,
            pose.y + v * math.sin(pose.heading) * dt,
            pose.heading,
        )
    radius = v / omega
    new_heading = pose.heading + omega * dt
    x = pose.x + radius * (math.sin(new_heading) - math.sin(pose.heading))
    y = pose.y - radius * (math.cos(new_heading) - math.cos(pose.heading))
    return Pose(x, y, wrap_angle(new_heading))


@dataclass(frozen=True)
class SensorReading:
    """Four RGB triples (order 0..3) and their per-channel mean."""

    per_sensor: tuple[tuple[float, float, float], ...]
    mean: tuple[float, float, float]

    def sensor_channel(self, channel_index: int) -> tuple[float, float, float, float]:
        s = self.per_sensor
        return (s[0][channel_index], s[1][channel_index], s[2][channel_index], s[3][channel_index])


def sensor_positions(pose: Pose, body: RobotBody) -> np.ndarray:
    """World (x, y) of the four sensors for a pose, as a (4, 2) array."""
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    out = np.empty((4, 2))
    for i, (bx, by) in enumerate(body.sensor_offsets()):
        fx = bx + body.sensor_forward
        out[i, 0] = pose.x + c * fx - s * by
        out[i, 1] = pose.y + s * fx + c * by
    return out


def read_sensors(
    image: ColourImage,
    pose: Pose,
    body: RobotBody,
    noise_amplitude: float = 0.0,
    rng: np.random.Generator | None = None,
) -> SensorReading:
    """Sample the composed image under the four sensors (bilinear).

    Each sensor averages a 3x3 sub-grid spanning its square aperture,
    rotated with the body.  On a locally linear field the symmetric average
    equals the centre sample exactly.  Sensor positions poking past the
    arena edge clamp onto it.  Optional additive uniform noise of the given
    amplitude; readings stay in [0, 1].
    """
    pts = sensor_positions(pose, body)
    if body.sensor_aperture > 0.0:
        half = body.sensor_aperture / 2.0
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        steps = (-half, 0.0, half)
        sub = np.array([(c * dx - s * dy, s * dx + c * dy) for dx in steps for dy in steps])
        pts = (pts[:, None, :] + sub[None, :, :]).reshape(-1, 2)
    np.clip(pts[:, 0], 0.0, image.width_cm, out=pts[:, 0])
    np.clip(pts[:, 1], 0.0, image.height_cm, out=pts[:, 1])
    rgb = sample_points(image, pts)
    if body.sensor_aperture > 0.0:
        rgb = rgb.reshape(4, 9, 3).mean(axis=1)
    if noise_amplitude > 0.0:
        if rng is None:
            raise ConfigurationError("sensor noise requires an rng")
        rgb = rgb + rng.uniform(-noise_amplitude, noise_amplitude, size=rgb.shape)
        np.clip(rgb, 0.0, 1.0, out=rgb)
    per = tuple(tuple(float(v) for v in row) for row in rgb)
    mean = tuple(float(v) for v in rgb.mean(axis=0))
    return SensorReading(per, mean)


def gradient_direction(
    reading: SensorReading, channel_index: int, epsilon: float = 1e-3
) -> float | None:
    """Egocentric direction of increasing intensity for one channel.

    Front/back and left/right sensor differences feed a two-argument
    arctangent; when both differences are below ``epsilon`` the field is
    locally flat and there is no direction (None).
    """
    s0, s1, s2, s3 = reading.sensor_channel(channel_index)
    dy = s2 - s0
    dx = s1 - s3
    if abs(dx) < epsilon and abs(dy) < epsilon:
        return None
    return math.atan2(dy, dx)


def detect_collision(
    pose: Pose,
    body: RobotBody,
    others: list[Pose],
    arena: Arena,
) -> float | None:
    """Egocentric bearing of the nearest obstacle inside bumper range.

    Obstacles are other robot discs and the four walls; only surface gaps
    within ``body.bumper_range`` and bearings within +-90 degrees of the
    robot's forward direction count.  None when the way is clear.
    """
    half_fov = math.pi / 2.0
    best_gap = None
    best_bearing = None

    def consider(gap: float, world_dir: float) -> None:
        nonlocal best_gap, best_bearing
        if gap > body.bumper_range:
            return
        bearing = wrap_angle(world_dir - pose.heading)
        if abs(bearing) > half_fov:
            return
        if best_gap is None or gap < best_gap:
            best_gap = gap
            best_bearing = bearing

    for other in others:
        dx = other.x - pose.x
        dy = other.y - pose.y
        dist = math.hypot(dx, dy)
        consider(dist - body.diameter, math.atan2(dy, dx))

    r = body.radius
    consider(pose.x - r, math.pi)  # wall at x = 0
    consider(arena.width - pose.x - r, 0.0)  # wall at x = width
    consider(pose.y - r, -math.pi / 2.0)  # wall at y = 0
    consider(arena.height - pose.y - r, math.pi / 2.0)  # wall at y = height

    return best_bearing


def clamp_to_arena(pose: Pose, body: RobotBody, arena: Arena) -> Pose:
    """Keep the whole disc inside the walls (the foam wall is rigid)."""
    r = body.radius
    x = min(max(pose.x, r), arena.width - r)
    y = min(max(pose.y, r), arena.height - r)
    if x == pose.x and y == pose.y:
        return pose
    return Pose(x, y, pose.heading)
