"""pherosim: deterministic differential-drive robots on pheromone colour fields.

Grid pheromone fields (evaporation, diffusion, injection) and moving
Gaussian scent sources are composited into an RGB image that robots read
through four downward colour sensors. Controllers steer by trail contrast
or by image gradients. Two built-in studies: branching-trail foraging and
aggregation versus alarm dispersal.
"""

from .config import (
    Config,
    case1_from_config,
    case2_from_config,
    load_config,
    override,
    parse_config,
    serialize_config,
    world_from_config,
)
from .control import (
    BehaviorState,
    ControlParams,
    Mode,
    TrailClass,
    collision_preempt,
    forage_step,
    follower_step,
    heading_follow_speeds,
    leader_step,
    trail_follow_speeds,
    wander_step,
)
from .engine import (
    Event,
    RunLog,
    Simulation,
    TrialRecord,
    robot_rng,
    run_simulation,
)
from .errors import (
    ConfigurationError,
    NumericError,
    OutOfBoundsError,
    ScenarioMismatchError,
    SimulatorError,
    TemporalOrderError,
    UnknownIdError,
)
from .fields import (
    ChannelBinding,
    ColourImage,
    ComposeSpec,
    FieldGrid,
    GaussianSource,
    InjectionMask,
    PdeParams,
    accumulate_sources,
    compose_image,
    eval_gaussian,
    image_to_ppm,
    peak_scale_for,
    sample_bilinear,
    sample_points,
    step_pde,
    write_ppm,
)
from .maps import (
    Segment,
    TrailMap,
    build_case1_masks,
    default_map,
    load_map,
    parse_map_text,
    serialize_map,
)
from .metrics import aggregation_series, arrival_histogram, food_fraction, windowed_mean
from .outputs import export_outputs
from .robots import (
    Arena,
    Pose,
    RobotBody,
    SensorReading,
    WheelSpeeds,
    detect_collision,
    gradient_direction,
    read_sensors,
    step_kinematics,
    wrap_angle,
)
from .scenarios import (
    Case1Config,
    Case1Scenario,
    Case2Config,
    Case2Scenario,
    WorldSettings,
)

__version__ = "0.1.0"

__all__ = [
    "Arena",
    "BehaviorState",
    "Case1Config",
    "Case1Scenario",
    "Case2Config",
    "Case2Scenario",
    "ChannelBinding",
    "ColourImage",
    "ComposeSpec",
    "Config",
    "ConfigurationError",
    "ControlParams",
    "Event",
    "FieldGrid",
    "GaussianSource",
    "InjectionMask",
    "Mode",
    "NumericError",
    "OutOfBoundsError",
    "PdeParams",
    "Pose",
    "RobotBody",
    "RunLog",
    "ScenarioMismatchError",
    "Segment",
    "SensorReading",
    "Simulation",
    "SimulatorError",
    "TemporalOrderError",
    "TrailClass",
    "TrailMap",
    "TrialRecord",
    "UnknownIdError",
    "WheelSpeeds",
    "WorldSettings",
    "accumulate_sources",
    "aggregation_series",
    "arrival_histogram",
    "build_case1_masks",
    "case1_from_config",
    "case2_from_config",
    "collision_preempt",
    "compose_image",
    "default_map",
    "detect_collision",
    "eval_gaussian",
    "export_outputs",
    "follower_step",
    "food_fraction",
    "forage_step",
    "gradient_direction",
    "heading_follow_speeds",
    "image_to_ppm",
    "leader_step",
    "load_config",
    "load_map",
    "override",
    "parse_config",
    "parse_map_text",
    "peak_scale_for",
    "read_sensors",
    "robot_rng",
    "run_simulation",
    "sample_bilinear",
    "sample_points",
    "serialize_config",
    "serialize_map",
    "step_kinematics",
    "step_pde",
    "trail_follow_speeds",
    "wander_step",
    "windowed_mean",
    "world_from_config",
    "wrap_angle",
    "write_ppm",
]
