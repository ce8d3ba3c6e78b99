"""Animation traces: per-frame body poses recorded for replay and rating.

A trace is the source of truth for viewers: it carries the static geometry
(body half extents, ground height) needed to render each frame as oriented
boxes, so no re-simulation is required. Frame 0 is the initial pose; each
simulation step appends one frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ContractError, ValidationError
from .engine import GROUND_TOP, WorldState

TRACE_SCHEMA_VERSION = 1


@dataclass
class AnimationTrace:
    skeleton_name: str
    dt: float
    body_half_extents: list[tuple[float, float]]
    ground_y: float = GROUND_TOP
    frames: list[np.ndarray] = field(default_factory=list)  # each (n_bodies, 3)
    terminated_early: bool = False
    termination_frame: int | None = None

    @property
    def body_count(self) -> int:
        return len(self.body_half_extents)

    def frame_array(self) -> np.ndarray:
        """All frames stacked as (n_frames, n_bodies, 3)."""
        return np.stack(self.frames) if self.frames else np.empty((0, self.body_count, 3))

    def duration(self) -> float:
        return (len(self.frames) - 1) * self.dt if self.frames else 0.0


def new_trace(world: WorldState) -> AnimationTrace:
    return AnimationTrace(
        skeleton_name=world.spec.name,
        dt=0.0,
        body_half_extents=[(float(world.props[i, 2]), float(world.props[i, 3]))
                           for i in range(world.q.shape[0])],
    )


def record_frame(trace: AnimationTrace, world: WorldState) -> AnimationTrace:
    """Append one frame of (x, y, angle) per body, in body-id order."""
    if world.q.shape[0] != trace.body_count:
        raise ContractError(
            f"world has {world.q.shape[0]} bodies, trace expects {trace.body_count}"
        )
    trace.frames.append(world.q.copy())
    if world.dt is not None:
        trace.dt = world.dt
    return trace


def trace_to_dict(trace: AnimationTrace) -> dict:
    return {
        "schema_version": TRACE_SCHEMA_VERSION,
        "skeleton_name": trace.skeleton_name,
        "dt": trace.dt,
        "body_half_extents": [[float(x), float(y)] for x, y in trace.body_half_extents],
        "ground_y": trace.ground_y,
        "frames": [[[float(val) for val in row] for row in frame] for frame in trace.frames],
        "terminated_early": trace.terminated_early,
        "termination_frame": trace.termination_frame,
    }


def trace_from_dict(doc: dict) -> AnimationTrace:
    if not isinstance(doc, dict):
        raise ValidationError("trace document must be an object")
    if doc.get("schema_version") != TRACE_SCHEMA_VERSION:
        raise ValidationError(f"unsupported trace schema version {doc.get('schema_version')!r}")
    extra = set(doc) - {"schema_version", "skeleton_name", "dt", "body_half_extents",
                        "ground_y", "frames", "terminated_early", "termination_frame"}
    if extra:
        raise ValidationError(f"trace: unknown fields {sorted(extra)}")
    half_extents = [(float(x), float(y)) for x, y in doc["body_half_extents"]]
    frames = [np.asarray(frame, dtype=np.float64) for frame in doc["frames"]]
    n = len(half_extents)
    for k, frame in enumerate(frames):
        if frame.shape != (n, 3):
            raise ValidationError(f"trace frame {k}: expected shape ({n}, 3), got {frame.shape}")
    if not frames:
        raise ValidationError("trace has no frames")
    tf = doc.get("termination_frame")
    return AnimationTrace(
        skeleton_name=str(doc["skeleton_name"]),
        dt=float(doc["dt"]),
        body_half_extents=half_extents,
        ground_y=float(doc.get("ground_y", GROUND_TOP)),
        frames=frames,
        terminated_early=bool(doc["terminated_early"]),
        termination_frame=None if tf is None else int(tf),
    )


def trace_to_json(trace: AnimationTrace) -> str:
    # repr-based float serialization round-trips exactly
    return json.dumps(trace_to_dict(trace), sort_keys=True, separators=(",", ":"))


def save_trace(trace: AnimationTrace, path: str | Path) -> None:
    Path(path).write_text(trace_to_json(trace) + "\n")


def load_trace(path: str | Path) -> AnimationTrace:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return trace_from_dict(doc)
