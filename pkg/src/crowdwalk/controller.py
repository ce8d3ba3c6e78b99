"""Fixed-topology feedforward controller evolved as a flat weight vector.

The genome stores, layer by layer, one row per output neuron: the incoming
weights followed by that neuron's bias. Every non-input layer applies the
logistic sigmoid, so activations live in (0, 1); outputs map affinely onto
[-torque_limit, +torque_limit] per joint.

Sensory inputs are normalized to the unit range: per body (ascending id)
the pelvis-relative height, both linear velocity components and the angular
velocity, each clamped through its configured (min, max) window, plus the
episode-time fraction as the final element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ContractError, ValidationError
from .sim.skeleton import FeatureBounds, SkeletonSpec

DEFAULT_HIDDEN_LAYERS = (30, 30, 30)


def validate_topology(layer_sizes) -> tuple[int, ...]:
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise ValidationError("topology needs at least input and output layers")
    if any(s <= 0 for s in sizes):
        raise ValidationError(f"topology layers must be positive: {sizes}")
    return sizes


def genome_length(layer_sizes) -> int:
    """Total weight count: sum of (fan_in + 1) * fan_out over layer pairs."""
    sizes = validate_topology(layer_sizes)
    return sum((n_in + 1) * n_out for n_in, n_out in zip(sizes, sizes[1:]))


def topology_for(skeleton: SkeletonSpec, hidden=DEFAULT_HIDDEN_LAYERS) -> tuple[int, ...]:
    """Input layer sized to the skeleton's feature vector, output to its joints."""
    n_inputs = 4 * len(skeleton.bodies) + 1
    return validate_topology((n_inputs, *hidden, len(skeleton.joints)))


@dataclass
class Genome:
    weights: np.ndarray
    topology: tuple[int, ...]
    id: int
    fitness: float | None = None

    def __post_init__(self):
        self.topology = validate_topology(self.topology)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        expected = genome_length(self.topology)
        if self.weights.shape != (expected,):
            raise ValidationError(
                f"genome for topology {self.topology} needs {expected} weights, "
                f"got shape {self.weights.shape}"
            )

    def copy(self, new_id: int | None = None) -> "Genome":
        return Genome(self.weights.copy(), self.topology,
                      self.id if new_id is None else new_id, self.fitness)


def genome_to_dict(genome: Genome) -> dict:
    return {
        "topology": list(genome.topology),
        "weights": [float(w) for w in genome.weights],
        "id": genome.id,
        "fitness": genome.fitness,
    }


def genome_from_dict(doc: dict) -> Genome:
    try:
        return Genome(
            weights=np.asarray(doc["weights"], dtype=np.float64),
            topology=tuple(doc["topology"]),
            id=int(doc["id"]),
            fitness=None if doc.get("fitness") is None else float(doc["fitness"]),
        )
    except KeyError as exc:
        raise ValidationError(f"genome document missing field {exc}") from exc


@dataclass(frozen=True)
class FeatureSpec:
    """Input layout and normalization windows for one skeleton."""

    body_count: int
    pelvis_index: int
    bounds: FeatureBounds

    @property
    def feature_count(self) -> int:
        return 4 * self.body_count + 1

    @classmethod
    def for_skeleton(cls, skeleton: SkeletonSpec) -> "FeatureSpec":
        return cls(
            body_count=len(skeleton.bodies),
            pelvis_index=skeleton.pelvis_index,
            bounds=skeleton.feature_bounds,
        )

    def bounds_array(self) -> np.ndarray:
        return np.array([self.bounds.height, self.bounds.linear_velocity,
                         self.bounds.angular_velocity], dtype=np.float64)


@njit(cache=True)
def _features_kernel(q, v, pelvis_index, bounds, t_norm, out):
    """bounds: (3,2) rows height / linear velocity / angular velocity."""
    n = q.shape[0]
    pelvis_y = q[pelvis_index, 1]
    h_lo = bounds[0, 0]
    h_span = bounds[0, 1] - bounds[0, 0]
    v_lo = bounds[1, 0]
    v_span = bounds[1, 1] - bounds[1, 0]
    w_lo = bounds[2, 0]
    w_span = bounds[2, 1] - bounds[2, 0]
    idx = 0
    for i in range(n):
        f = (q[i, 1] - pelvis_y - h_lo) / h_span
        out[idx] = 0.0 if f < 0.0 else (1.0 if f > 1.0 else f)
        idx += 1
        f = (v[i, 0] - v_lo) / v_span
        out[idx] = 0.0 if f < 0.0 else (1.0 if f > 1.0 else f)
        idx += 1
        f = (v[i, 1] - v_lo) / v_span
        out[idx] = 0.0 if f < 0.0 else (1.0 if f > 1.0 else f)
        idx += 1
        f = (v[i, 2] - w_lo) / w_span
        out[idx] = 0.0 if f < 0.0 else (1.0 if f > 1.0 else f)
        idx += 1
    out[idx] = t_norm


def extract_inputs(world, spec: FeatureSpec, episode_len: int) -> np.ndarray:
    """Unit-range feature vector for the current world state."""
    if world.q.shape[0] != spec.body_count:
        raise ContractError(
            f"world has {world.q.shape[0]} bodies, feature spec expects {spec.body_count}"
        )
    out = np.empty(spec.feature_count)
    _features_kernel(world.q, world.v, spec.pelvis_index, spec.bounds_array(),
                     world.step_index / episode_len, out)
    return out


@njit(cache=True)
def _forward_kernel(weights, sizes, x):
    max_width = 0
    for s in sizes:
        if s > max_width:
            max_width = s
    cur = np.empty(max_width)
    nxt = np.empty(max_width)
    for i in range(sizes[0]):
        cur[i] = x[i]
    n_in = sizes[0]
    offset = 0
    for layer in range(1, len(sizes)):
        n_out = sizes[layer]
        for j in range(n_out):
            base = offset + j * (n_in + 1)
            z = weights[base + n_in]  # bias
            for k in range(n_in):
                z += weights[base + k] * cur[k]
            nxt[j] = 1.0 / (1.0 + math.exp(-z))
        offset += n_out * (n_in + 1)
        cur, nxt = nxt, cur
        n_in = n_out
    return cur[:n_in].copy()


def forward(genome: Genome, inputs) -> np.ndarray:
    """Activations in (0,1)^n_out; pure in (genome, inputs)."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (genome.topology[0],):
        raise ContractError(
            f"expected {genome.topology[0]} inputs, got shape {x.shape}"
        )
    return _forward_kernel(genome.weights, np.asarray(genome.topology, dtype=np.int64), x)


def outputs_to_torques(activations, torque_limits) -> np.ndarray:
    """Map unit activations onto [-limit, +limit]: a=0.5 is zero torque."""
    a = np.asarray(activations, dtype=np.float64)
    limits = np.asarray(torque_limits, dtype=np.float64)
    if a.shape != limits.shape:
        raise ContractError(
            f"{a.shape[0] if a.ndim else 0} activations for {limits.shape[0]} joints"
        )
    return (2.0 * a - 1.0) * limits
