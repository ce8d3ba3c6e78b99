"""Episode rollouts: one genome controlling one skeleton for one episode.

The rollout loop (extract inputs -> forward -> torques -> step -> record)
runs inside a single jitted kernel that calls the exact same step, feature
and forward kernels the public APIs use, so evaluating a genome is fast and
bit-identical to driving the simulation through the public functions.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..controller import FeatureSpec, Genome, _features_kernel, _forward_kernel, topology_for
from ..errors import ContractError, ValidationError
from ..sim.engine import (
    BAUMGARTE,
    DEFAULT_FRICTION,
    DEFAULT_GRAVITY,
    GROUND_TOP,
    PENETRATION_SLOP,
    POSITION_ITERATIONS,
    POSITION_RESOLUTION,
    VELOCITY_ITERATIONS,
    _step_kernel,
    instantiate,
)
from ..sim.skeleton import SkeletonSpec
from ..sim.trace import AnimationTrace
from .fitness import get_fitness_function

NEGATIVE_INFINITY = float("-inf")


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything needed to roll out and score one episode."""

    skeleton: SkeletonSpec
    dt: float = 1.0 / 60.0
    max_steps: int = 600
    fitness: str = "walk_right"
    fitness_params: dict = field(default_factory=dict)
    pelvis_min_height: float | None = None  # default: half the initial height
    gravity: tuple[float, float] = DEFAULT_GRAVITY
    friction: float = DEFAULT_FRICTION
    rating_bonus_weight: float = 0.0

    def validate(self) -> None:
        self.skeleton.validate()
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.max_steps <= 0:
            raise ValidationError("max_steps must be positive")
        if self.resolved_min_height() >= self.skeleton.initial_pelvis_height:
            raise ValidationError("pelvis_min_height must be below the initial height")
        get_fitness_function(self.fitness)

    def resolved_min_height(self) -> float:
        if self.pelvis_min_height is not None:
            return self.pelvis_min_height
        return 0.5 * self.skeleton.initial_pelvis_height


@njit(cache=True)
def _episode_kernel(q, v, props, joint_bodies, joint_anchors, joint_limits,
                    torque_limits, weights, sizes, bounds, pelvis_index,
                    min_height, max_steps, dt, gx, gy, friction, frames):
    """Returns (last_frame_index, status): 0 completed, 1 fell, 2 diverged."""
    n = q.shape[0]
    m = joint_bodies.shape[0]
    feats = np.empty(4 * n + 1)
    torques = np.empty(m)
    frames[0] = q
    for t in range(max_steps):
        _features_kernel(q, v, pelvis_index, bounds, t / max_steps, feats)
        acts = _forward_kernel(weights, sizes, feats)
        for j in range(m):
            torques[j] = (2.0 * acts[j] - 1.0) * torque_limits[j]
        ok = _step_kernel(q, v, props, joint_bodies, joint_anchors, joint_limits,
                          torques, gx, gy, dt, GROUND_TOP, friction,
                          VELOCITY_ITERATIONS, POSITION_ITERATIONS, BAUMGARTE,
                          PENETRATION_SLOP, POSITION_RESOLUTION)
        if ok == 0:
            return t, 2
        frames[t + 1] = q
        if q[pelvis_index, 1] < min_height:
            return t + 1, 1
    return max_steps, 0


def check_compatible(genome: Genome, cfg: EpisodeConfig) -> None:
    expected = topology_for(cfg.skeleton, genome.topology[1:-1])
    if genome.topology != expected:
        raise ContractError(
            f"genome topology {genome.topology} does not fit skeleton "
            f"{cfg.skeleton.name!r} (needs {expected[0]} inputs, {expected[-1]} outputs)"
        )


def evaluate(genome: Genome, cfg: EpisodeConfig) -> tuple[float, AnimationTrace]:
    """Roll out one episode; pure in (genome, cfg).

    The episode ends at max_steps or at the first step whose pelvis height
    falls below the threshold. A diverged simulation yields -inf fitness and
    a trace truncated at the last finite frame.
    """
    check_compatible(genome, cfg)
    world = instantiate(cfg.skeleton, cfg.gravity, cfg.friction)
    spec = FeatureSpec.for_skeleton(cfg.skeleton)

    frames = np.empty((cfg.max_steps + 1, world.q.shape[0], 3))
    last, status = _episode_kernel(
        world.q, world.v, world.props, world.joint_bodies, world.joint_anchors,
        world.joint_limits, world.torque_limits, genome.weights,
        np.asarray(genome.topology, dtype=np.int64), spec.bounds_array(),
        spec.pelvis_index, cfg.resolved_min_height(), cfg.max_steps, cfg.dt,
        cfg.gravity[0], cfg.gravity[1], cfg.friction, frames,
    )

    trace = AnimationTrace(
        skeleton_name=cfg.skeleton.name,
        dt=cfg.dt,
        body_half_extents=[(float(world.props[i, 2]), float(world.props[i, 3]))
                           for i in range(world.q.shape[0])],
        ground_y=GROUND_TOP,
        frames=[frames[i].copy() for i in range(last + 1)],
        terminated_early=status == 1,
        termination_frame=last if status == 1 else None,
    )
    if status == 2:
        return NEGATIVE_INFINITY, trace
    fn = get_fitness_function(cfg.fitness)
    return float(fn(trace, cfg.skeleton, **cfg.fitness_params)), trace


def _fitness_task(args) -> float:
    genome, cfg = args
    return evaluate(genome, cfg)[0]


def evaluate_population(genomes, cfg: EpisodeConfig,
                        executor: ProcessPoolExecutor | None = None) -> list[float]:
    """Fitness for each genome, committed in input order.

    Evaluations are pure, so running them through a worker pool or serially
    yields identical values.
    """
    if executor is None:
        return [_fitness_task((g, cfg)) for g in genomes]
    jobs = [(g, cfg) for g in genomes]
    chunk = max(1, len(jobs) // (4 * getattr(executor, "_max_workers", 1) or 1))
    return list(executor.map(_fitness_task, jobs, chunksize=chunk))
