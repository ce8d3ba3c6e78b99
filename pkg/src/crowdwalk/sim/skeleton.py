"""Skeleton descriptions: bodies, joints, torque limits, and file I/O.

A skeleton is a declarative recipe for an articulated figure. The joint graph
must form a tree; joints may anchor a body to the static ground by using
``GROUND_ID`` (-1) as ``body_a``, in which case ``anchor_a`` is a world-space
point. All quantities are SI (meters, kilograms, radians, newton-meters).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ValidationError

GROUND_ID = -1

SKELETON_SCHEMA_VERSION = 1

# Unit-range normalization defaults; see FeatureBounds.
DEFAULT_HEIGHT_BOUNDS = (-2.0, 2.0)
DEFAULT_LINVEL_BOUNDS = (-10.0, 10.0)
DEFAULT_ANGVEL_BOUNDS = (-20.0, 20.0)


@dataclass(frozen=True)
class BodySpec:
    id: int
    half_extents: tuple[float, float]
    mass: float
    position: tuple[float, float]
    angle: float = 0.0

    @property
    def inertia(self) -> float:
        # solid box about its center: m * (w^2 + h^2) / 12 with full extents
        hx, hy = self.half_extents
        return self.mass * (hx * hx + hy * hy) / 3.0


@dataclass(frozen=True)
class JointSpec:
    id: int
    body_a: int
    body_b: int
    anchor_a: tuple[float, float]
    anchor_b: tuple[float, float]
    torque_limit: float
    angle_limits: tuple[float, float] | None = None


@dataclass(frozen=True)
class FeatureBounds:
    """Per-feature (min, max) ranges used for unit-range input normalization."""

    height: tuple[float, float] = DEFAULT_HEIGHT_BOUNDS
    linear_velocity: tuple[float, float] = DEFAULT_LINVEL_BOUNDS
    angular_velocity: tuple[float, float] = DEFAULT_ANGVEL_BOUNDS

    def validate(self) -> None:
        for name, (lo, hi) in (
            ("height", self.height),
            ("linear_velocity", self.linear_velocity),
            ("angular_velocity", self.angular_velocity),
        ):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"feature bounds {name!r}: need min < max, got {lo}, {hi}")


@dataclass(frozen=True)
class SkeletonSpec:
    name: str
    bodies: tuple[BodySpec, ...]
    joints: tuple[JointSpec, ...]
    pelvis_body: int
    initial_pelvis_height: float
    feature_bounds: FeatureBounds = field(default_factory=FeatureBounds)

    def body_index(self, body_id: int) -> int:
        """Index of a body in ascending-id order (the engine's array order)."""
        for i, b in enumerate(self.sorted_bodies):
            if b.id == body_id:
                return i
        raise ValidationError(f"unknown body id {body_id}")

    @property
    def sorted_bodies(self) -> tuple[BodySpec, ...]:
        return tuple(sorted(self.bodies, key=lambda b: b.id))

    @property
    def sorted_joints(self) -> tuple[JointSpec, ...]:
        return tuple(sorted(self.joints, key=lambda j: j.id))

    @property
    def pelvis_index(self) -> int:
        return self.body_index(self.pelvis_body)

    def validate(self) -> None:
        if not self.bodies:
            raise ValidationError("skeleton has no bodies")
        ids = [b.id for b in self.bodies]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate body ids")
        if GROUND_ID in ids:
            raise ValidationError(f"body id {GROUND_ID} is reserved for the ground")
        for b in self.bodies:
            if b.mass <= 0 or not math.isfinite(b.mass):
                raise ValidationError(f"body {b.id}: mass must be positive and finite")
            if b.half_extents[0] <= 0 or b.half_extents[1] <= 0:
                raise ValidationError(f"body {b.id}: half extents must be positive")
        jids = [j.id for j in self.joints]
        if len(set(jids)) != len(jids):
            raise ValidationError("duplicate joint ids")
        known = set(ids)
        for j in self.joints:
            if j.body_a != GROUND_ID and j.body_a not in known:
                raise ValidationError(f"joint {j.id}: unknown body id {j.body_a}")
            if j.body_b not in known:
                raise ValidationError(f"joint {j.id}: unknown body id {j.body_b}")
            if j.body_a == j.body_b:
                raise ValidationError(f"joint {j.id}: body_a and body_b must differ")
            if j.torque_limit <= 0:
                raise ValidationError(f"joint {j.id}: torque limit must be positive")
            if j.angle_limits is not None and not j.angle_limits[0] < j.angle_limits[1]:
                raise ValidationError(f"joint {j.id}: angle limits must satisfy lower < upper")
        self._validate_tree()
        if self.pelvis_body not in known:
            raise ValidationError(f"pelvis body {self.pelvis_body} does not exist")
        pelvis = next(b for b in self.bodies if b.id == self.pelvis_body)
        if abs(pelvis.position[1] - self.initial_pelvis_height) > 1e-9:
            raise ValidationError(
                "initial_pelvis_height does not match the pelvis body's initial y "
                f"({self.initial_pelvis_height} vs {pelvis.position[1]})"
            )
        self.feature_bounds.validate()

    def _validate_tree(self) -> None:
        # Union-find over dynamic bodies plus the ground node; a joint that
        # closes a cycle or leaves bodies disconnected is rejected.
        parent: dict[int, int] = {b.id: b.id for b in self.bodies}
        parent[GROUND_ID] = GROUND_ID

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for j in self.joints:
            ra, rb = find(j.body_a), find(j.body_b)
            if ra == rb:
                raise ValidationError(f"joint {j.id} creates a cycle in the joint graph")
            parent[ra] = rb
        if len(self.bodies) > 1:
            roots = {find(b.id) for b in self.bodies}
            if len(roots) > 1:
                raise ValidationError("joint graph is not connected")


def default_walker() -> SkeletonSpec:
    """Five-body biped: pelvis, two thighs, two shins, hips and knees.

    Legs start vertically with shin bottoms on the ground; the pelvis center
    is offset slightly forward (+x) of the hip anchor so the passive figure
    tips over deterministically instead of balancing forever.
    """
    leg_half = (0.04, 0.225)
    leg_mass = 2.5
    hip_anchor_y = 0.90
    knee_anchor_y = 0.45
    pelvis_lean = 0.02

    bodies = (
        BodySpec(id=0, half_extents=(0.25, 0.125), mass=10.0, position=(pelvis_lean, 1.025)),
        BodySpec(id=1, half_extents=leg_half, mass=leg_mass, position=(0.0, 0.675)),  # left thigh
        BodySpec(id=2, half_extents=leg_half, mass=leg_mass, position=(0.0, 0.225)),  # left shin
        BodySpec(id=3, half_extents=leg_half, mass=leg_mass, position=(0.0, 0.675)),  # right thigh
        BodySpec(id=4, half_extents=leg_half, mass=leg_mass, position=(0.0, 0.225)),  # right shin
    )
    hip_limits = (-1.2, 1.2)
    knee_limits = (0.0, 2.5)
    torque = 150.0
    joints = (
        # hips: pelvis -> thigh
        JointSpec(id=0, body_a=0, body_b=1, anchor_a=(-pelvis_lean, hip_anchor_y - 1.025),
                  anchor_b=(0.0, hip_anchor_y - 0.675), torque_limit=torque,
                  angle_limits=hip_limits),
        JointSpec(id=1, body_a=0, body_b=3, anchor_a=(-pelvis_lean, hip_anchor_y - 1.025),
                  anchor_b=(0.0, hip_anchor_y - 0.675), torque_limit=torque,
                  angle_limits=hip_limits),
        # knees: thigh -> shin
        JointSpec(id=2, body_a=1, body_b=2, anchor_a=(0.0, knee_anchor_y - 0.675),
                  anchor_b=(0.0, knee_anchor_y - 0.225), torque_limit=torque,
                  angle_limits=knee_limits),
        JointSpec(id=3, body_a=3, body_b=4, anchor_a=(0.0, knee_anchor_y - 0.675),
                  anchor_b=(0.0, knee_anchor_y - 0.225), torque_limit=torque,
                  angle_limits=knee_limits),
    )
    return SkeletonSpec(
        name="walker",
        bodies=bodies,
        joints=joints,
        pelvis_body=0,
        initial_pelvis_height=1.025,
    )


def _anchor_to_json(pair: tuple[float, float]) -> list[float]:
    return [float(pair[0]), float(pair[1])]


def skeleton_to_dict(spec: SkeletonSpec) -> dict:
    return {
        "schema_version": SKELETON_SCHEMA_VERSION,
        "name": spec.name,
        "bodies": [
            {
                "id": b.id,
                "half_extents": _anchor_to_json(b.half_extents),
                "mass": b.mass,
                "position": _anchor_to_json(b.position),
                "angle": b.angle,
            }
            for b in spec.sorted_bodies
        ],
        "joints": [
            {
                "id": j.id,
                "body_a": j.body_a,
                "body_b": j.body_b,
                "anchor_a": _anchor_to_json(j.anchor_a),
                "anchor_b": _anchor_to_json(j.anchor_b),
                "torque_limit": j.torque_limit,
                "angle_limits": None if j.angle_limits is None else list(j.angle_limits),
            }
            for j in spec.sorted_joints
        ],
        "pelvis_body": spec.pelvis_body,
        "initial_pelvis_height": spec.initial_pelvis_height,
        "feature_bounds": {
            "height": list(spec.feature_bounds.height),
            "linear_velocity": list(spec.feature_bounds.linear_velocity),
            "angular_velocity": list(spec.feature_bounds.angular_velocity),
        },
    }


def _pair(value, context: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"{context}: expected a pair of numbers")
    return (float(value[0]), float(value[1]))


def _reject_unknown(doc: dict, allowed: set[str], context: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ValidationError(f"{context}: unknown fields {sorted(extra)}")


def skeleton_from_dict(doc: dict) -> SkeletonSpec:
    if not isinstance(doc, dict):
        raise ValidationError("skeleton document must be an object")
    _reject_unknown(doc, {"schema_version", "name", "bodies", "joints", "pelvis_body",
                          "initial_pelvis_height", "feature_bounds"}, "skeleton")
    if doc.get("schema_version") != SKELETON_SCHEMA_VERSION:
        raise ValidationError(f"unsupported skeleton schema version {doc.get('schema_version')!r}")
    bodies = []
    for b in doc.get("bodies", []):
        _reject_unknown(b, {"id", "half_extents", "mass", "position", "angle"}, "body")
        bodies.append(BodySpec(
            id=int(b["id"]),
            half_extents=_pair(b["half_extents"], f"body {b.get('id')}: half_extents"),
            mass=float(b["mass"]),
            position=_pair(b["position"], f"body {b.get('id')}: position"),
            angle=float(b.get("angle", 0.0)),
        ))
    joints = []
    for j in doc.get("joints", []):
        _reject_unknown(j, {"id", "body_a", "body_b", "anchor_a", "anchor_b",
                            "torque_limit", "angle_limits"}, "joint")
        limits = j.get("angle_limits")
        joints.append(JointSpec(
            id=int(j["id"]),
            body_a=int(j["body_a"]),
            body_b=int(j["body_b"]),
            anchor_a=_pair(j["anchor_a"], f"joint {j.get('id')}: anchor_a"),
            anchor_b=_pair(j["anchor_b"], f"joint {j.get('id')}: anchor_b"),
            torque_limit=float(j["torque_limit"]),
            angle_limits=None if limits is None else _pair(limits, "angle_limits"),
        ))
    fb = doc.get("feature_bounds", {})
    _reject_unknown(fb, {"height", "linear_velocity", "angular_velocity"}, "feature_bounds")
    bounds = FeatureBounds(
        height=_pair(fb["height"], "feature_bounds.height") if "height" in fb else DEFAULT_HEIGHT_BOUNDS,
        linear_velocity=_pair(fb["linear_velocity"], "feature_bounds.linear_velocity")
        if "linear_velocity" in fb else DEFAULT_LINVEL_BOUNDS,
        angular_velocity=_pair(fb["angular_velocity"], "feature_bounds.angular_velocity")
        if "angular_velocity" in fb else DEFAULT_ANGVEL_BOUNDS,
    )
    try:
        spec = SkeletonSpec(
            name=str(doc["name"]),
            bodies=tuple(bodies),
            joints=tuple(joints),
            pelvis_body=int(doc["pelvis_body"]),
            initial_pelvis_height=float(doc["initial_pelvis_height"]),
            feature_bounds=bounds,
        )
    except KeyError as exc:
        raise ValidationError(f"skeleton document missing field {exc}") from exc
    spec.validate()
    return spec


def save_skeleton(spec: SkeletonSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(skeleton_to_dict(spec), indent=2, sort_keys=True) + "\n")


def load_skeleton(path: str | Path) -> SkeletonSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return skeleton_from_dict(doc)
