"""Kinematics, sensor geometry and readings, gradients, collisions, walls.

The kinematics oracle is the closed-form arc displacement; sensor readings
are checked against direct evaluation of linear ramp fields at the sensor
world positions.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pherosim.errors import ConfigurationError
from pherosim.fields import ColourImage
from pherosim.robots import (
    Arena,
    Pose,
    RobotBody,
    SensorReading,
    WheelSpeeds,
    clamp_to_arena,
    detect_collision,
    gradient_direction,
    read_sensors,
    sensor_positions,
    step_kinematics,
    wrap_angle,
)

BODY = RobotBody()
POINT_BODY = RobotBody(sensor_aperture=0.0, sensor_forward=0.0)


def arc_oracle(pose, left, right, wheelbase, dt):
    """Closed-form constant-twist displacement for one step."""
    v = (left + right) / 2.0
    omega = (right - left) / wheelbase
    if omega == 0.0:
        return (pose[0] + v * dt * math.cos(pose[2]), pose[1] + v * dt * math.sin(pose[2]), pose[2])
    r = v / omega
    h = pose[2] + omega * dt
    return (
        pose[0] + r * (math.sin(h) - math.sin(pose[2])),
        pose[1] - r * (math.cos(h) - math.cos(pose[2])),
        h,
    )


def ramp_image(a, bx, by, channel, w=200, h=160, cell=0.5):
    """Image whose ``channel`` is the plane a + bx*x + by*y over the arena."""
    xs = (np.arange(w) + 0.5) * cell
    ys = (np.arange(h) + 0.5) * cell
    pixels = np.zeros((h, w, 3))
    pixels[:, :, channel] = a + bx * xs[None, :] + by * ys[:, None]
    return ColourImage(w, h, cell, pixels)


# ---------------------------------------------------------------- angles


@given(st.floats(min_value=-50.0, max_value=50.0, allow_nan=False))
def test_wrap_angle_range_and_congruence(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_wrap_angle_boundary_lands_on_pi():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == math.pi


# ---------------------------------------------------------------- kinematics


def test_straight_and_arc_steps_match_oracle():
    cases = [
        (Pose(1.0, 2.0, 0.3), WheelSpeeds(6.0, 6.0)),
        (Pose(10.0, 5.0, -1.2), WheelSpeeds(2.0, 8.0)),
        (Pose(0.0, 0.0, 2.9), WheelSpeeds(9.0, -3.0)),
    ]
    for pose, wheels in cases:
        got = step_kinematics(pose, wheels, BODY, 0.02)
        ex, ey, eh = arc_oracle((pose.x, pose.y, pose.heading), wheels.left, wheels.right, 3.0, 0.02)
        assert got.x == pytest.approx(ex, abs=1e-12)
        assert got.y == pytest.approx(ey, abs=1e-12)
        assert got.heading == pytest.approx(wrap_angle(eh), abs=1e-12)


def test_pivot_in_place_keeps_position():
    pose = Pose(4.0, 4.0, 0.5)
    out = step_kinematics(pose, WheelSpeeds(-6.0, 6.0), BODY, 0.1)
    assert out.x == pytest.approx(4.0, abs=1e-12)
    assert out.y == pytest.approx(4.0, abs=1e-12)
    assert out.heading == pytest.approx(0.5 + 0.4, abs=1e-12)


def test_circle_closes_to_machine_precision():
    # Wheels (5, 10) on a 3 cm wheelbase: omega = 5/3, one full turn takes
    # T = 2*pi/omega.  Splitting T into 200 exact-arc steps must come home.
    wheels = WheelSpeeds(5.0, 10.0)
    omega = (wheels.right - wheels.left) / BODY.wheelbase
    period = 2.0 * math.pi / omega
    steps = 200
    dt = period / steps
    pose = Pose(7.0, 3.0, 1.1)
    out = pose
    for _ in range(steps):
        out = step_kinematics(out, wheels, BODY, dt)
    assert abs(out.x - pose.x) <= 1e-6
    assert abs(out.y - pose.y) <= 1e-6
    assert abs(wrap_angle(out.heading - pose.heading)) <= 1e-9


def test_zero_dt_rejected():
    with pytest.raises(ConfigurationError):
        step_kinematics(Pose(0, 0, 0), WheelSpeeds(1, 1), BODY, 0.0)


def test_body_invariants():
    with pytest.raises(ConfigurationError):
        RobotBody(wheelbase=5.0)  # wheelbase >= diameter
    with pytest.raises(ConfigurationError):
        RobotBody(sensor_diagonal=9.0)
    with pytest.raises(ConfigurationError):
        RobotBody(sensor_aperture=-0.1)
    with pytest.raises(ConfigurationError):
        RobotBody(sensor_forward=3.0)  # beyond the disc edge


# ---------------------------------------------------------------- sensors


def test_sensor_positions_identity_pose():
    # Heading 0 at the origin: offsets are body frame plus the forward mount.
    pts = sensor_positions(Pose(0.0, 0.0, 0.0), BODY)
    f = BODY.sensor_forward
    expected = np.array([[f, -1.5], [f + 1.5, 0.0], [f, 1.5], [f - 1.5, 0.0]])
    np.testing.assert_allclose(pts, expected, atol=1e-12)


def test_sensor_positions_rotate_with_heading():
    pose = Pose(5.0, 6.0, math.pi / 3.0)
    pts = sensor_positions(pose, BODY)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    for i, (bx, by) in enumerate(BODY.sensor_offsets()):
        fx = bx + BODY.sensor_forward
        assert pts[i, 0] == pytest.approx(5.0 + c * fx - s * by, abs=1e-12)
        assert pts[i, 1] == pytest.approx(6.0 + s * fx + c * by, abs=1e-12)


def test_readings_equal_plane_at_sensor_positions():
    # Bilinear sampling and the symmetric aperture average are both exact on
    # a plane, so each sensor reads the plane at its own world position.
    image = ramp_image(0.1, 0.004, 0.002, channel=1)
    for heading in (0.0, 0.7, -2.1):
        pose = Pose(40.0, 30.0, heading)
        reading = read_sensors(image, pose, BODY)
        pts = sensor_positions(pose, BODY)
        for i in range(4):
            want = 0.1 + 0.004 * pts[i, 0] + 0.002 * pts[i, 1]
            assert reading.per_sensor[i][1] == pytest.approx(want, abs=1e-9)
            assert reading.per_sensor[i][0] == 0.0
        assert reading.mean[1] == pytest.approx(
            sum(reading.per_sensor[i][1] for i in range(4)) / 4.0, abs=1e-12
        )


def test_aperture_zero_matches_point_sampling():
    image = ramp_image(0.2, 0.003, -0.001, channel=2)
    pose = Pose(30.0, 40.0, 0.4)
    fat = read_sensors(image, pose, RobotBody(sensor_aperture=0.8))
    point = read_sensors(image, pose, RobotBody(sensor_aperture=0.0))
    for i in range(4):
        assert fat.per_sensor[i][2] == pytest.approx(point.per_sensor[i][2], abs=1e-9)


def test_sensor_noise_requires_rng_and_stays_in_range():
    image = ramp_image(0.5, 0.0, 0.0, channel=0)
    pose = Pose(30.0, 30.0, 0.0)
    with pytest.raises(ConfigurationError):
        read_sensors(image, pose, BODY, noise_amplitude=0.1)
    rng = np.random.default_rng(0)
    lo, hi = 1.0, 0.0
    for _ in range(50):
        r = read_sensors(image, pose, BODY, noise_amplitude=0.6, rng=rng)
        for quad in r.per_sensor:
            lo = min(lo, min(quad))
            hi = max(hi, max(quad))
    assert 0.0 <= lo and hi <= 1.0
    assert hi > 0.5 > lo  # noise actually moved the readings both ways


def test_noise_free_reading_consumes_no_randomness():
    image = ramp_image(0.5, 0.0, 0.0, channel=0)
    rng = np.random.default_rng(123)
    before = rng.bit_generator.state
    read_sensors(image, Pose(30.0, 30.0, 0.0), BODY, noise_amplitude=0.0, rng=rng)
    assert rng.bit_generator.state == before


# ---------------------------------------------------------------- gradients


def test_gradient_direction_from_sensor_quad():
    # dy = s2 - s0, dx = s1 - s3 in the body frame.
    reading = SensorReading(
        per_sensor=((0.1, 0, 0), (0.4, 0, 0), (0.3, 0, 0), (0.2, 0, 0)),
        mean=(0.25, 0, 0),
    )
    assert gradient_direction(reading, 0) == pytest.approx(math.atan2(0.2, 0.2))


def test_gradient_none_when_flat():
    reading = SensorReading(
        per_sensor=(((0.3, 0, 0),) * 4), mean=(0.3, 0, 0)
    )
    assert gradient_direction(reading, 0, epsilon=1e-3) is None


def test_gradient_recovers_plane_direction_within_one_degree():
    # 100 random planes and poses; the egocentric estimate plus the heading
    # must point along the true world gradient to within a degree.
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        theta = rng.uniform(-math.pi, math.pi)
        slope = rng.uniform(0.002, 0.006)
        bx, by = slope * math.cos(theta), slope * math.sin(theta)
        image = ramp_image(0.3, bx, by, channel=0)
        pose = Pose(rng.uniform(20, 70), rng.uniform(20, 60), rng.uniform(-math.pi, math.pi))
        reading = read_sensors(image, pose, BODY)
        ego = gradient_direction(reading, 0, epsilon=1e-6)
        assert ego is not None
        err = abs(wrap_angle(ego + pose.heading - theta))
        worst = max(worst, err)
    assert worst <= math.radians(1.0)


# ---------------------------------------------------------------- collisions


def test_collision_reports_nearest_in_front():
    arena = Arena(100.0, 100.0)
    pose = Pose(50.0, 50.0, 0.0)
    # Two robots ahead: surface gaps 1.5 and 0.5; the nearer one wins.
    others = [Pose(55.5, 50.0, 0.0), Pose(54.5, 50.0, 0.0)]
    bearing = detect_collision(pose, BODY, others, arena)
    assert bearing == pytest.approx(0.0, abs=1e-12)


def test_collision_ignores_behind_and_far():
    arena = Arena(100.0, 100.0)
    pose = Pose(50.0, 50.0, 0.0)
    assert detect_collision(pose, BODY, [Pose(44.0, 50.0, 0.0)], arena) is None  # behind
    assert detect_collision(pose, BODY, [Pose(60.0, 50.0, 0.0)], arena) is None  # far
    side = detect_collision(pose, BODY, [Pose(50.0, 55.0, 0.0)], arena)
    assert side == pytest.approx(math.pi / 2.0)  # exactly on the field-of-view edge


def test_wall_collision_bearing():
    arena = Arena(100.0, 80.0)
    # Facing the x=100 wall with a 3 cm gap (within the 2+radius... bumper 2).
    pose = Pose(96.5, 40.0, 0.0)
    bearing = detect_collision(pose, BODY, [], arena)
    assert bearing == pytest.approx(0.0)
    # Same distance but facing away: the wall is outside the forward cone.
    pose = Pose(96.5, 40.0, math.pi)
    assert detect_collision(pose, BODY, [], arena) is None


def test_clamp_keeps_disc_inside():
    arena = Arena(100.0, 80.0)
    out = clamp_to_arena(Pose(0.5, 79.9, 1.0), BODY, arena)
    assert out.x == BODY.radius
    assert out.y == 80.0 - BODY.radius
    assert out.heading == 1.0
    inside = Pose(50.0, 40.0, 1.0)
    assert clamp_to_arena(inside, BODY, arena) is inside
