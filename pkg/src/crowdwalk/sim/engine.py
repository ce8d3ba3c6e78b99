"""2D rigid-body dynamics: boxes, motorized revolute joints, flat ground.

Integration is semi-implicit (symplectic) Euler: velocities first (gravity,
motor torques, then constraint impulses), positions last. Constraints are
solved by sequential impulses with a fixed iteration count and Baumgarte
positional bias; there is no warm starting, so a step is a pure function of
the previous state. Bodies and joints are processed in ascending id order.

State lives in flat float64 arrays so the same jitted kernel drives both
single public steps and fused episode rollouts (see evolve.rollout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ContractError, SimulationDiverged, ValidationError
from .skeleton import GROUND_ID, SkeletonSpec

VELOCITY_ITERATIONS = 8
POSITION_ITERATIONS = 128  # upper bound; the pass exits once joints converge
POSITION_FULL_PASSES = 3   # passes that also correct contacts and limits
POSITION_RESOLUTION = 2.5e-4  # target anchor error for the positional pass
ANGULAR_SLOP = 0.01        # tolerated angle-limit overshoot, radians
MAX_ANGULAR_VELOCITY = 40.0  # rad/s stability clamp; spin above ~0.7 rad/step
                             # is untrackable by a one-step impulse solver
BAUMGARTE = 0.2           # positional correction factor for contacts
PENETRATION_SLOP = 0.002  # allowed resting penetration before correction kicks in
MAX_CORRECTION = 0.2      # positional correction clamp per iteration, meters
MAX_ANGULAR_CORRECTION = 0.14  # radians per iteration
JOINT_TOLERANCE = 1e-3    # max world-space anchor separation after a step
PENETRATION_TOLERANCE = 5e-3
DEFAULT_GRAVITY = (0.0, -9.81)
DEFAULT_FRICTION = 0.8
GROUND_TOP = 0.0
GROUND_HALF_EXTENTS = (1000.0, 0.5)


@njit(cache=True)
def _step_kernel(q, v, props, joint_bodies, joint_anchors, joint_limits,
                 joint_torques, gx, gy, dt, ground_top, friction,
                 vel_iters, pos_iters, beta, slop, resolution):
    """Advance one fixed timestep in place. Returns 1 if the state is finite.

    q: (n,3) x, y, angle.  v: (n,3) vx, vy, omega.
    props: (n,4) inv_mass, inv_inertia, hx, hy.
    joint_bodies: (m,2) body indices, -1 = static ground (anchor_a in world frame).
    joint_anchors: (m,4) ax, ay, bx, by (local frames).
    joint_limits: (m,3) lower, upper, enabled flag.

    Velocity iterations solve contacts (normal + Coulomb friction), joint
    point constraints and active angle limits with accumulated impulses.
    After integrating positions, a positional correction pass projects joint
    anchors together, pushes penetrating corners out and pulls violated angle
    limits back; velocities are untouched so the correction does no work.
    """
    n = q.shape[0]
    m = joint_bodies.shape[0]

    # gravity, then motor torques as equal-and-opposite angular impulses
    for i in range(n):
        v[i, 0] += dt * gx
        v[i, 1] += dt * gy
    for j in range(m):
        a = joint_bodies[j, 0]
        b = joint_bodies[j, 1]
        tau = joint_torques[j]
        if a >= 0:
            v[a, 2] -= tau * dt * props[a, 1]
        v[b, 2] += tau * dt * props[b, 1]
    for i in range(n):
        if v[i, 2] > MAX_ANGULAR_VELOCITY:
            v[i, 2] = MAX_ANGULAR_VELOCITY
        elif v[i, 2] < -MAX_ANGULAR_VELOCITY:
            v[i, 2] = -MAX_ANGULAR_VELOCITY

    # point-constraint setup: r1, r2, inverse 2x2 effective mass
    jr = np.empty((m, 4))
    jm = np.empty((m, 3))
    for j in range(m):
        a = joint_bodies[j, 0]
        b = joint_bodies[j, 1]
        if a >= 0:
            ca = math.cos(q[a, 2])
            sa = math.sin(q[a, 2])
            r1x = ca * joint_anchors[j, 0] - sa * joint_anchors[j, 1]
            r1y = sa * joint_anchors[j, 0] + ca * joint_anchors[j, 1]
            ima = props[a, 0]
            iia = props[a, 1]
        else:
            r1x = 0.0
            r1y = 0.0
            ima = 0.0
            iia = 0.0
        cb = math.cos(q[b, 2])
        sb = math.sin(q[b, 2])
        r2x = cb * joint_anchors[j, 2] - sb * joint_anchors[j, 3]
        r2y = sb * joint_anchors[j, 2] + cb * joint_anchors[j, 3]
        imb = props[b, 0]
        iib = props[b, 1]

        k00 = ima + imb + iia * r1y * r1y + iib * r2y * r2y
        k01 = -iia * r1x * r1y - iib * r2x * r2y
        k11 = ima + imb + iia * r1x * r1x + iib * r2x * r2x
        inv_det = 1.0 / (k00 * k11 - k01 * k01)
        jr[j, 0] = r1x
        jr[j, 1] = r1y
        jr[j, 2] = r2x
        jr[j, 3] = r2y
        jm[j, 0] = k11 * inv_det
        jm[j, 1] = -k01 * inv_det
        jm[j, 2] = k00 * inv_det

    # angle-limit activation, speculative: a limit engages when the predicted
    # end-of-step angle would cross it, and the velocity target lets the
    # joint land exactly on the bound instead of overshooting.
    # mode: -1 lower limit, +1 upper, 0 inactive
    lmode = np.zeros(m, np.int64)
    lmass = np.zeros(m)
    ltarget = np.zeros(m)
    lacc = np.zeros(m)
    for j in range(m):
        if joint_limits[j, 2] == 0.0:
            continue
        a = joint_bodies[j, 0]
        b = joint_bodies[j, 1]
        ang_a = q[a, 2] if a >= 0 else 0.0
        wa = v[a, 2] if a >= 0 else 0.0
        iia = props[a, 1] if a >= 0 else 0.0
        phi = q[b, 2] - ang_a
        wrel = v[b, 2] - wa
        k = iia + props[b, 1]
        if k <= 0.0:
            continue
        if phi + dt * wrel < joint_limits[j, 0]:
            lmode[j] = -1
            lmass[j] = 1.0 / k
            gap = joint_limits[j, 0] - phi
            ltarget[j] = gap / dt if gap < 0.0 else 0.0
        elif phi + dt * wrel > joint_limits[j, 1]:
            lmode[j] = 1
            lmass[j] = 1.0 / k
            gap = joint_limits[j, 1] - phi
            ltarget[j] = gap / dt if gap > 0.0 else 0.0

    # contact generation, speculative: a corner whose predicted end-of-step
    # position is below the ground gets a constraint that lets it approach
    # exactly to the surface and no further (restitution 0).
    cbody = np.empty(4 * n, np.int64)
    cdata = np.empty((4 * n, 7))  # rx, ry, inv_kn, inv_kt, vn_target, pn, pt
    nc = 0
    for i in range(n):
        c = math.cos(q[i, 2])
        s = math.sin(q[i, 2])
        hx = props[i, 2]
        hy = props[i, 3]
        for corner in range(4):
            lx = hx if (corner == 1 or corner == 2) else -hx
            ly = hy if (corner == 2 or corner == 3) else -hy
            rx = c * lx - s * ly
            ry = s * lx + c * ly
            sep = (q[i, 1] + ry) - ground_top
            vn = v[i, 1] + v[i, 2] * rx
            if sep + dt * vn > 0.0:
                continue
            ima = props[i, 0]
            iia = props[i, 1]
            cbody[nc] = i
            cdata[nc, 0] = rx
            cdata[nc, 1] = ry
            cdata[nc, 2] = 1.0 / (ima + iia * rx * rx)
            cdata[nc, 3] = 1.0 / (ima + iia * ry * ry)
            cdata[nc, 4] = -sep / dt if sep > 0.0 else 0.0
            cdata[nc, 5] = 0.0
            cdata[nc, 6] = 0.0
            nc += 1

    for _ in range(vel_iters):
        # ground contacts: non-penetration plus Coulomb friction
        for ci in range(nc):
            i = cbody[ci]
            rx = cdata[ci, 0]
            ry = cdata[ci, 1]
            ima = props[i, 0]
            iia = props[i, 1]

            vn = v[i, 1] + v[i, 2] * rx
            dpn = (cdata[ci, 4] - vn) * cdata[ci, 2]
            pn0 = cdata[ci, 5]
            pn = pn0 + dpn
            if pn < 0.0:
                pn = 0.0
            dpn = pn - pn0
            cdata[ci, 5] = pn
            v[i, 1] += ima * dpn
            v[i, 2] += iia * rx * dpn

            vt = v[i, 0] - v[i, 2] * ry
            dpt = -vt * cdata[ci, 3]
            max_pt = friction * pn
            pt0 = cdata[ci, 6]
            pt = pt0 + dpt
            if pt > max_pt:
                pt = max_pt
            elif pt < -max_pt:
                pt = -max_pt
            dpt = pt - pt0
            cdata[ci, 6] = pt
            v[i, 0] += ima * dpt
            v[i, 2] -= iia * ry * dpt

        # revolute point constraints
        for j in range(m):
            a = joint_bodies[j, 0]
            b = joint_bodies[j, 1]
            r1x = jr[j, 0]
            r1y = jr[j, 1]
            r2x = jr[j, 2]
            r2y = jr[j, 3]
            if a >= 0:
                v1x = v[a, 0] - v[a, 2] * r1y
                v1y = v[a, 1] + v[a, 2] * r1x
            else:
                v1x = 0.0
                v1y = 0.0
            v2x = v[b, 0] - v[b, 2] * r2y
            v2y = v[b, 1] + v[b, 2] * r2x
            dx = -(v2x - v1x)
            dy = -(v2y - v1y)
            px = jm[j, 0] * dx + jm[j, 1] * dy
            py = jm[j, 1] * dx + jm[j, 2] * dy
            if a >= 0:
                v[a, 0] -= props[a, 0] * px
                v[a, 1] -= props[a, 0] * py
                v[a, 2] -= props[a, 1] * (r1x * py - r1y * px)
            v[b, 0] += props[b, 0] * px
            v[b, 1] += props[b, 0] * py
            v[b, 2] += props[b, 1] * (r2x * py - r2y * px)

        # angle limits (one-sided, accumulated)
        for j in range(m):
            mode = lmode[j]
            if mode == 0:
                continue
            a = joint_bodies[j, 0]
            b = joint_bodies[j, 1]
            wa = v[a, 2] if a >= 0 else 0.0
            wrel = v[b, 2] - wa
            lam = (ltarget[j] - wrel) * lmass[j]
            acc0 = lacc[j]
            acc = acc0 + lam
            if mode == -1 and acc < 0.0:
                acc = 0.0
            elif mode == 1 and acc > 0.0:
                acc = 0.0
            lam = acc - acc0
            lacc[j] = acc
            if a >= 0:
                v[a, 2] -= lam * props[a, 1]
            v[b, 2] += lam * props[b, 1]

    ok = 1
    for i in range(n):
        q[i, 0] += dt * v[i, 0]
        q[i, 1] += dt * v[i, 1]
        q[i, 2] += dt * v[i, 2]
        for k in range(3):
            if not (np.isfinite(q[i, k]) and np.isfinite(v[i, k])):
                ok = 0
    if ok == 0:
        return 0

    # positional correction (nonlinear Gauss-Seidel on current geometry):
    # a few full passes over contacts, limits and joints, then joint-only
    # refinement until anchors converge, so contact/limit nudges cannot
    # keep re-exciting the joint error on resting piles
    for p in range(pos_iters):
        worst = 0.0
        if p < POSITION_FULL_PASSES:
            # push penetrating corners out along the ground normal
            for i in range(n):
                c = math.cos(q[i, 2])
                s = math.sin(q[i, 2])
                hx = props[i, 2]
                hy = props[i, 3]
                ima = props[i, 0]
                iia = props[i, 1]
                for corner in range(4):
                    lx = hx if (corner == 1 or corner == 2) else -hx
                    ly = hy if (corner == 2 or corner == 3) else -hy
                    rx = c * lx - s * ly
                    ry = s * lx + c * ly
                    pen = ground_top - (q[i, 1] + ry)
                    if pen <= slop:
                        continue
                    corr = beta * (pen - slop)
                    if corr > MAX_CORRECTION:
                        corr = MAX_CORRECTION
                    imp = corr / (ima + iia * rx * rx)
                    q[i, 1] += ima * imp
                    q[i, 2] += iia * rx * imp

            # nudge angle limits violated beyond the slop back inside
            for j in range(m):
                if joint_limits[j, 2] == 0.0:
                    continue
                a = joint_bodies[j, 0]
                b = joint_bodies[j, 1]
                ang_a = q[a, 2] if a >= 0 else 0.0
                iia = props[a, 1] if a >= 0 else 0.0
                iib = props[b, 1]
                k = iia + iib
                if k <= 0.0:
                    continue
                phi = q[b, 2] - ang_a
                err = 0.0
                if phi < joint_limits[j, 0] - ANGULAR_SLOP:
                    err = beta * (joint_limits[j, 0] - ANGULAR_SLOP - phi)
                    if err > MAX_ANGULAR_CORRECTION:
                        err = MAX_ANGULAR_CORRECTION
                elif phi > joint_limits[j, 1] + ANGULAR_SLOP:
                    err = beta * (joint_limits[j, 1] + ANGULAR_SLOP - phi)
                    if err < -MAX_ANGULAR_CORRECTION:
                        err = -MAX_ANGULAR_CORRECTION
                else:
                    continue
                lam = err / k
                if a >= 0:
                    q[a, 2] -= lam * iia
                q[b, 2] += lam * iib

        # project joint anchors together (full correction, solved last so
        # anchor error is what the pass leaves smallest)
        for j in range(m):
            a = joint_bodies[j, 0]
            b = joint_bodies[j, 1]
            if a >= 0:
                ca = math.cos(q[a, 2])
                sa = math.sin(q[a, 2])
                r1x = ca * joint_anchors[j, 0] - sa * joint_anchors[j, 1]
                r1y = sa * joint_anchors[j, 0] + ca * joint_anchors[j, 1]
                p1x = q[a, 0] + r1x
                p1y = q[a, 1] + r1y
                ima = props[a, 0]
                iia = props[a, 1]
            else:
                r1x = 0.0
                r1y = 0.0
                p1x = joint_anchors[j, 0]
                p1y = joint_anchors[j, 1]
                ima = 0.0
                iia = 0.0
            cb = math.cos(q[b, 2])
            sb = math.sin(q[b, 2])
            r2x = cb * joint_anchors[j, 2] - sb * joint_anchors[j, 3]
            r2y = sb * joint_anchors[j, 2] + cb * joint_anchors[j, 3]
            p2x = q[b, 0] + r2x
            p2y = q[b, 1] + r2y
            imb = props[b, 0]
            iib = props[b, 1]

            cx = p2x - p1x
            cy = p2y - p1y
            err = math.sqrt(cx * cx + cy * cy)
            if err > worst:
                worst = err
            k00 = ima + imb + iia * r1y * r1y + iib * r2y * r2y
            k01 = -iia * r1x * r1y - iib * r2x * r2y
            k11 = ima + imb + iia * r1x * r1x + iib * r2x * r2x
            inv_det = 1.0 / (k00 * k11 - k01 * k01)
            px = -(k11 * cx - k01 * cy) * inv_det
            py = -(k00 * cy - k01 * cx) * inv_det
            if a >= 0:
                q[a, 0] -= ima * px
                q[a, 1] -= ima * py
                q[a, 2] -= iia * (r1x * py - r1y * px)
            q[b, 0] += imb * px
            q[b, 1] += imb * py
            q[b, 2] += iib * (r2x * py - r2y * px)

        if p >= POSITION_FULL_PASSES - 1 and worst < resolution:
            break

    return 1


@dataclass(frozen=True)
class RigidBody:
    """Snapshot of one body's state; the arrays on WorldState are the truth."""

    id: int
    half_extents: tuple[float, float]
    mass: float
    inertia: float
    position: tuple[float, float]
    angle: float
    linear_velocity: tuple[float, float]
    angular_velocity: float

    @property
    def is_static(self) -> bool:
        return math.isinf(self.mass)


@dataclass(frozen=True)
class RevoluteJoint:
    id: int
    body_a: int
    body_b: int
    anchor_a: tuple[float, float]
    anchor_b: tuple[float, float]
    angle_limits: tuple[float, float] | None
    torque_limit: float
    applied_torque: float


class WorldState:
    """Dynamic state of an instantiated skeleton plus the static ground.

    Cheap to copy; confined to one thread at a time. ``step`` and
    ``set_joint_torques`` return new states rather than mutating.
    """

    def __init__(self, spec: SkeletonSpec, gravity, friction: float):
        bodies = spec.sorted_bodies
        joints = spec.sorted_joints
        n = len(bodies)
        m = len(joints)

        self.spec = spec
        self.body_ids = [b.id for b in bodies]
        self.joint_ids = [j.id for j in joints]
        index_of = {b.id: i for i, b in enumerate(bodies)}

        self.q = np.empty((n, 3))
        self.v = np.zeros((n, 3))
        self.props = np.empty((n, 4))
        self.mass = np.empty((n, 2))  # mass, inertia (for reporting/energy)
        for i, b in enumerate(bodies):
            self.q[i] = (b.position[0], b.position[1], b.angle)
            inertia = b.inertia
            self.props[i] = (1.0 / b.mass, 1.0 / inertia, b.half_extents[0], b.half_extents[1])
            self.mass[i] = (b.mass, inertia)

        self.joint_bodies = np.empty((m, 2), np.int64)
        self.joint_anchors = np.empty((m, 4))
        self.joint_limits = np.zeros((m, 3))
        self.joint_torques = np.zeros(m)
        self.torque_limits = np.empty(m)
        for j, js in enumerate(joints):
            a = GROUND_ID if js.body_a == GROUND_ID else index_of[js.body_a]
            self.joint_bodies[j] = (a, index_of[js.body_b])
            self.joint_anchors[j] = (*js.anchor_a, *js.anchor_b)
            if js.angle_limits is not None:
                self.joint_limits[j] = (*js.angle_limits, 1.0)
            self.torque_limits[j] = js.torque_limit

        self.gravity = (float(gravity[0]), float(gravity[1]))
        self.friction = float(friction)
        self.time = 0.0
        self.step_index = 0
        self.dt: float | None = None  # pinned by the first step

    def copy(self) -> "WorldState":
        new = object.__new__(WorldState)
        new.spec = self.spec
        new.body_ids = self.body_ids
        new.joint_ids = self.joint_ids
        new.q = self.q.copy()
        new.v = self.v.copy()
        new.props = self.props
        new.mass = self.mass
        new.joint_bodies = self.joint_bodies
        new.joint_anchors = self.joint_anchors
        new.joint_limits = self.joint_limits
        new.joint_torques = self.joint_torques.copy()
        new.torque_limits = self.torque_limits
        new.gravity = self.gravity
        new.friction = self.friction
        new.time = self.time
        new.step_index = self.step_index
        new.dt = self.dt
        return new

    @property
    def bodies(self) -> list[RigidBody]:
        out = []
        for i, bid in enumerate(self.body_ids):
            out.append(RigidBody(
                id=bid,
                half_extents=(self.props[i, 2], self.props[i, 3]),
                mass=self.mass[i, 0],
                inertia=self.mass[i, 1],
                position=(self.q[i, 0], self.q[i, 1]),
                angle=self.q[i, 2],
                linear_velocity=(self.v[i, 0], self.v[i, 1]),
                angular_velocity=self.v[i, 2],
            ))
        return out

    @property
    def ground(self) -> RigidBody:
        return RigidBody(
            id=GROUND_ID,
            half_extents=GROUND_HALF_EXTENTS,
            mass=math.inf,
            inertia=math.inf,
            position=(0.0, GROUND_TOP - GROUND_HALF_EXTENTS[1]),
            angle=0.0,
            linear_velocity=(0.0, 0.0),
            angular_velocity=0.0,
        )

    @property
    def joints(self) -> list[RevoluteJoint]:
        out = []
        for j, jid in enumerate(self.joint_ids):
            a = self.joint_bodies[j, 0]
            limits = None
            if self.joint_limits[j, 2] != 0.0:
                limits = (self.joint_limits[j, 0], self.joint_limits[j, 1])
            out.append(RevoluteJoint(
                id=jid,
                body_a=GROUND_ID if a < 0 else self.body_ids[a],
                body_b=self.body_ids[self.joint_bodies[j, 1]],
                anchor_a=(self.joint_anchors[j, 0], self.joint_anchors[j, 1]),
                anchor_b=(self.joint_anchors[j, 2], self.joint_anchors[j, 3]),
                angle_limits=limits,
                torque_limit=self.torque_limits[j],
                applied_torque=self.joint_torques[j],
            ))
        return out

    @property
    def pelvis_height(self) -> float:
        return float(self.q[self.spec.pelvis_index, 1])

    def joint_anchor_positions(self, joint_index: int) -> tuple[np.ndarray, np.ndarray]:
        """World-space anchor points (side a, side b) of one joint."""
        a = self.joint_bodies[joint_index, 0]
        b = self.joint_bodies[joint_index, 1]
        ax, ay, bx, by = self.joint_anchors[joint_index]
        if a >= 0:
            ca, sa = math.cos(self.q[a, 2]), math.sin(self.q[a, 2])
            p1 = np.array([self.q[a, 0] + ca * ax - sa * ay,
                           self.q[a, 1] + sa * ax + ca * ay])
        else:
            p1 = np.array([ax, ay])
        cb, sb = math.cos(self.q[b, 2]), math.sin(self.q[b, 2])
        p2 = np.array([self.q[b, 0] + cb * bx - sb * by,
                       self.q[b, 1] + sb * bx + cb * by])
        return p1, p2

    def ground_penetration(self) -> float:
        """Deepest corner penetration below the ground plane (0 if none)."""
        worst = 0.0
        for i in range(self.q.shape[0]):
            c, s = math.cos(self.q[i, 2]), math.sin(self.q[i, 2])
            hx, hy = self.props[i, 2], self.props[i, 3]
            for lx, ly in ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)):
                wy = self.q[i, 1] + s * lx + c * ly
                worst = max(worst, GROUND_TOP - wy)
        return worst

    def mechanical_energy(self, datum: float = 0.0) -> float:
        """Kinetic plus gravitational potential energy, PE measured from datum."""
        g = -self.gravity[1]
        total = 0.0
        for i in range(self.q.shape[0]):
            mass, inertia = self.mass[i]
            vx, vy, w = self.v[i]
            total += 0.5 * mass * (vx * vx + vy * vy) + 0.5 * inertia * w * w
            total += mass * g * (self.q[i, 1] - datum)
        return total


def instantiate(spec: SkeletonSpec, gravity=DEFAULT_GRAVITY,
                friction: float = DEFAULT_FRICTION) -> WorldState:
    """Build a world from a skeleton at its initial pose.

    Raises ValidationError for malformed specs or initially unsatisfied
    joints (world anchors must coincide within JOINT_TOLERANCE).
    """
    spec.validate()
    world = WorldState(spec, gravity, friction)
    for j in range(len(world.joint_ids)):
        p1, p2 = world.joint_anchor_positions(j)
        err = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
        if err > JOINT_TOLERANCE:
            raise ValidationError(
                f"joint {world.joint_ids[j]}: anchors do not coincide at the "
                f"initial pose (separation {err:.6g} m)"
            )
    return world


def set_joint_torques(world: WorldState, torques) -> WorldState:
    """Set motor torques for the next step, clamped to each joint's limit."""
    if len(torques) != len(world.joint_ids):
        raise ContractError(
            f"expected {len(world.joint_ids)} torques, got {len(torques)}"
        )
    new = world.copy()
    np.clip(torques, -world.torque_limits, world.torque_limits, out=new.joint_torques)
    return new


def step(world: WorldState, dt: float) -> WorldState:
    """Advance the world by one fixed timestep; pure in (world, dt).

    Raises SimulationDiverged if any body state becomes non-finite, and
    ContractError if dt changes mid-episode.
    """
    if dt <= 0.0:
        raise ContractError("dt must be positive")
    if world.dt is not None and dt != world.dt:
        raise ContractError(f"episode dt is fixed at {world.dt}, got {dt}")
    new = world.copy()
    ok = _step_kernel(
        new.q, new.v, new.props, new.joint_bodies, new.joint_anchors,
        new.joint_limits, new.joint_torques, new.gravity[0], new.gravity[1],
        dt, GROUND_TOP, new.friction, VELOCITY_ITERATIONS,
        POSITION_ITERATIONS, BAUMGARTE, PENETRATION_SLOP, POSITION_RESOLUTION,
    )
    new.dt = dt
    new.step_index = world.step_index + 1
    new.time = new.step_index * dt
    if not ok:
        raise SimulationDiverged(new.step_index)
    return new
