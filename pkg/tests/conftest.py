import math

import pytest

from crowdwalk.sim import BodySpec, JointSpec, SkeletonSpec, GROUND_ID, default_walker

DT = 1.0 / 60.0


def free_box_spec(y0: float = 100.0) -> SkeletonSpec:
    return SkeletonSpec(
        name="box",
        bodies=(BodySpec(id=0, half_extents=(0.1, 0.1), mass=1.0, position=(0.0, y0)),),
        joints=(),
        pelvis_body=0,
        initial_pelvis_height=y0,
    )


def resting_box_spec() -> SkeletonSpec:
    return SkeletonSpec(
        name="rest",
        bodies=(BodySpec(id=0, half_extents=(0.2, 0.1), mass=1.0, position=(0.0, 0.1)),),
        joints=(),
        pelvis_body=0,
        initial_pelvis_height=0.1,
    )


def pendulum_spec(length: float = 2.0, swing: float = 0.5, pivot_y: float = 5.0) -> SkeletonSpec:
    """Rod of half-length `length` hinged to a world point, displaced by
    `swing` radians from hanging straight down."""
    angle = -math.pi / 2.0 + swing
    cx = length * math.cos(angle)
    cy = pivot_y + length * math.sin(angle)
    return SkeletonSpec(
        name="pendulum",
        bodies=(BodySpec(id=0, half_extents=(length, 0.05), mass=1.0,
                         position=(cx, cy), angle=angle),),
        joints=(JointSpec(id=0, body_a=GROUND_ID, body_b=0, anchor_a=(0.0, pivot_y),
                          anchor_b=(-length, 0.0), torque_limit=1.0),),
        pelvis_body=0,
        initial_pelvis_height=cy,
    )


@pytest.fixture
def walker() -> SkeletonSpec:
    return default_walker()
