from .engine import (
    BAUMGARTE,
    GROUND_ID,
    JOINT_TOLERANCE,
    PENETRATION_TOLERANCE,
    VELOCITY_ITERATIONS,
    RigidBody,
    RevoluteJoint,
    WorldState,
    instantiate,
    set_joint_torques,
    step,
)
from .skeleton import (
    BodySpec,
    FeatureBounds,
    JointSpec,
    SkeletonSpec,
    default_walker,
    load_skeleton,
    save_skeleton,
)
from .trace import AnimationTrace, load_trace, record_frame, save_trace

__all__ = [
    "BAUMGARTE",
    "GROUND_ID",
    "JOINT_TOLERANCE",
    "PENETRATION_TOLERANCE",
    "VELOCITY_ITERATIONS",
    "AnimationTrace",
    "BodySpec",
    "FeatureBounds",
    "JointSpec",
    "RevoluteJoint",
    "RigidBody",
    "SkeletonSpec",
    "WorldState",
    "default_walker",
    "instantiate",
    "load_skeleton",
    "load_trace",
    "record_frame",
    "save_skeleton",
    "save_trace",
    "set_joint_torques",
    "step",
]
