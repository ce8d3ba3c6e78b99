"""Mechanistic fitness functions computed from recorded traces.

Each function takes (trace, skeleton, **params) and returns a float to be
maximized. Early termination has already truncated the trace, so falling
caps the reward without any explicit penalty term.
"""

from __future__ import annotations

from ..errors import ValidationError
from ..sim.skeleton import SkeletonSpec
from ..sim.trace import AnimationTrace


def fitness_walk_right(trace: AnimationTrace, skeleton: SkeletonSpec) -> float:
    """Pelvis x displacement from the first to the last recorded frame."""
    pelvis = skeleton.pelvis_index
    return float(trace.frames[-1][pelvis, 0] - trace.frames[0][pelvis, 0])


FITNESS_FUNCTIONS = {
    "walk_right": fitness_walk_right,
}


def get_fitness_function(tag: str):
    try:
        return FITNESS_FUNCTIONS[tag]
    except KeyError:
        raise ValidationError(
            f"unknown fitness function {tag!r}; choose from {sorted(FITNESS_FUNCTIONS)}"
        ) from None
