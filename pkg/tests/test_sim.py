import math

import numpy as np
import pytest

from crowdwalk.errors import ContractError, SimulationDiverged, ValidationError
from crowdwalk.sim import (
    JOINT_TOLERANCE,
    PENETRATION_TOLERANCE,
    BodySpec,
    JointSpec,
    SkeletonSpec,
    default_walker,
    instantiate,
    set_joint_torques,
    step,
)
from crowdwalk.sim.trace import new_trace, record_frame

from conftest import DT, free_box_spec, pendulum_spec, resting_box_spec


class TestInstantiate:
    def test_default_walker(self, walker):
        world = instantiate(walker)
        assert len(world.bodies) == 5
        assert len(world.joints) == 4
        assert world.ground.is_static
        assert world.pelvis_height == pytest.approx(walker.initial_pelvis_height)
        assert world.time == 0.0
        for j in range(4):
            p1, p2 = world.joint_anchor_positions(j)
            assert np.hypot(*(p2 - p1)) <= JOINT_TOLERANCE

    def test_missing_body_reference(self):
        spec = SkeletonSpec(
            name="bad",
            bodies=(BodySpec(id=0, half_extents=(0.1, 0.1), mass=1.0, position=(0.0, 1.0)),),
            joints=(JointSpec(id=0, body_a=0, body_b=99, anchor_a=(0, 0), anchor_b=(0, 0),
                              torque_limit=10.0),),
            pelvis_body=0,
            initial_pelvis_height=1.0,
        )
        with pytest.raises(ValidationError, match="99"):
            instantiate(spec)

    def test_single_free_box(self):
        world = instantiate(free_box_spec())
        assert len(world.bodies) == 1
        assert len(world.joints) == 0

    def test_cycle_rejected(self):
        bodies = tuple(BodySpec(id=i, half_extents=(0.1, 0.1), mass=1.0, position=(float(i), 1.0))
                       for i in range(3))
        mk = lambda jid, a, b: JointSpec(id=jid, body_a=a, body_b=b,
                                         anchor_a=(0.5, 0), anchor_b=(-0.5, 0), torque_limit=1.0)
        spec = SkeletonSpec(name="cyc", bodies=bodies,
                            joints=(mk(0, 0, 1), mk(1, 1, 2), mk(2, 2, 0)),
                            pelvis_body=0, initial_pelvis_height=1.0)
        with pytest.raises(ValidationError, match="cycle"):
            spec.validate()

    def test_nonpositive_mass_rejected(self):
        spec = SkeletonSpec(
            name="bad",
            bodies=(BodySpec(id=0, half_extents=(0.1, 0.1), mass=0.0, position=(0.0, 1.0)),),
            joints=(), pelvis_body=0, initial_pelvis_height=1.0)
        with pytest.raises(ValidationError, match="mass"):
            spec.validate()

    def test_disconnected_rejected(self):
        spec = SkeletonSpec(
            name="bad",
            bodies=(BodySpec(id=0, half_extents=(0.1, 0.1), mass=1.0, position=(0.0, 1.0)),
                    BodySpec(id=1, half_extents=(0.1, 0.1), mass=1.0, position=(5.0, 1.0))),
            joints=(), pelvis_body=0, initial_pelvis_height=1.0)
        with pytest.raises(ValidationError, match="connected"):
            spec.validate()


class TestFreeFall:
    @pytest.mark.parametrize("dt", [1 / 30, 1 / 60, 1 / 120])
    @pytest.mark.parametrize("n", [1, 60, 600])
    def test_symplectic_euler_closed_form(self, dt, n):
        g = 9.81
        world = instantiate(free_box_spec(y0=10_000.0))
        for _ in range(n):
            world = step(world, dt)
        v_expected = -g * n * dt
        dy_expected = -g * dt * dt * n * (n + 1) / 2
        assert world.v[0, 1] == pytest.approx(v_expected, rel=1e-9)
        assert world.q[0, 1] - 10_000.0 == pytest.approx(dy_expected, rel=1e-9)

    def test_acceptance_case(self):
        # 60 steps at 1/60 with g = 9.81: displacement -4.98675 m, v = -9.81 m/s
        world = instantiate(free_box_spec())
        for _ in range(60):
            world = step(world, DT)
        assert world.q[0, 1] - 100.0 == pytest.approx(-4.98675, rel=1e-9)
        assert world.v[0, 1] == pytest.approx(-9.81, rel=1e-9)


class TestTorques:
    def test_zero_torques_match_pure_gravity(self, walker):
        world = instantiate(walker)
        a = step(set_joint_torques(world, [0.0] * 4), DT)
        b = step(world, DT)
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.v, b.v)

    def test_clamped_to_limit(self, walker):
        world = set_joint_torques(instantiate(walker), [500.0, -500.0, 10.0, 0.0])
        applied = [j.applied_torque for j in world.joints]
        assert applied == [150.0, -150.0, 10.0, 0.0]

    def test_length_mismatch(self, walker):
        with pytest.raises(ContractError):
            set_joint_torques(instantiate(walker), [0.0, 0.0])

    def test_single_step_motor_impulse(self):
        # Two boxes sharing their center of mass, joined there with no
        # gravity: the joint transmits no angular impulse, so one step gives
        # exactly delta_omega = -tau*dt/I_a and +tau*dt/I_b.
        bodies = (BodySpec(id=0, half_extents=(0.3, 0.1), mass=2.0, position=(0.0, 5.0)),
                  BodySpec(id=1, half_extents=(0.1, 0.3), mass=1.0, position=(0.0, 5.0)))
        spec = SkeletonSpec(
            name="pair", bodies=bodies,
            joints=(JointSpec(id=0, body_a=0, body_b=1, anchor_a=(0.0, 0.0),
                              anchor_b=(0.0, 0.0), torque_limit=50.0),),
            pelvis_body=0, initial_pelvis_height=5.0)
        world = instantiate(spec, gravity=(0.0, 0.0))
        tau = 10.0
        world = set_joint_torques(world, [tau])
        after = step(world, DT)
        i_a = bodies[0].inertia
        i_b = bodies[1].inertia
        assert after.v[0, 2] == pytest.approx(-tau * DT / i_a, rel=1e-12)
        assert after.v[1, 2] == pytest.approx(tau * DT / i_b, rel=1e-12)


class TestStep:
    def test_determinism(self, walker):
        w0 = instantiate(walker)
        a = step(set_joint_torques(w0, [10.0, -5.0, 3.0, 0.0]), DT)
        b = step(set_joint_torques(w0, [10.0, -5.0, 3.0, 0.0]), DT)
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.v, b.v)

    def test_time_is_exact_product(self, walker):
        world = instantiate(walker)
        for _ in range(30):
            world = step(world, DT)
        assert world.time == 30 * DT
        assert world.step_index == 30

    def test_dt_must_stay_fixed(self, walker):
        world = step(instantiate(walker), DT)
        with pytest.raises(ContractError):
            step(world, 1 / 30)

    def test_dt_positive(self, walker):
        with pytest.raises(ContractError):
            step(instantiate(walker), 0.0)

    def test_divergence_detected(self):
        world = instantiate(free_box_spec())
        world.v[0, 1] = float("nan")
        with pytest.raises(SimulationDiverged) as exc:
            step(world, DT)
        assert exc.value.step_index == 1

    def test_resting_box_settles(self):
        world = instantiate(resting_box_spec())
        q0 = world.q[0].copy()
        for _ in range(120):
            world = step(world, DT)
        assert np.abs(world.q[0] - q0).max() <= 5e-3
        assert world.ground_penetration() <= PENETRATION_TOLERANCE


class TestPendulum:
    def test_joint_error_and_energy_drift(self):
        spec = pendulum_spec()
        world = instantiate(spec)
        datum = 5.0 - 2.0  # lowest reachable CoM point
        e0 = world.mechanical_energy(datum)
        assert e0 > 0
        for _ in range(600):
            world = step(world, DT)
            p1, p2 = world.joint_anchor_positions(0)
            assert math.hypot(*(p2 - p1)) <= JOINT_TOLERANCE
            drift = abs(world.mechanical_energy(datum) - e0)
            assert drift <= 0.05 * e0

    def test_tracks_small_dt_reference(self):
        # the same swing integrated at dt/10 serves as the reference
        coarse = instantiate(pendulum_spec())
        fine = instantiate(pendulum_spec())
        for _ in range(120):
            coarse = step(coarse, DT)
        for _ in range(1200):
            fine = step(fine, DT / 10)
        # after 2 s of swinging the rod angles should agree closely
        assert coarse.q[0, 2] == pytest.approx(fine.q[0, 2], abs=0.05)


class TestWalkerRollouts:
    def test_passive_collapse(self, walker):
        world = instantiate(walker)
        h0 = world.pelvis_height
        fell_at = None
        for i in range(600):
            world = set_joint_torques(world, [0.0] * 4)
            world = step(world, DT)
            if world.pelvis_height < 0.5 * h0:
                fell_at = i + 1
                break
        assert fell_at is not None and fell_at < 300
        # distance covered while merely falling over stays small
        assert abs(world.q[0, 0] - 0.02) < 0.75

    @pytest.mark.parametrize("amplitude", [60.0, 150.0])
    def test_joint_tolerance_under_drive(self, walker, amplitude):
        world = instantiate(walker)
        for i in range(600):
            taus = [amplitude * math.sin(0.3 * i + 1.7 * k) for k in range(4)]
            world = set_joint_torques(world, taus)
            world = step(world, DT)
            for j in range(4):
                p1, p2 = world.joint_anchor_positions(j)
                assert math.hypot(*(p2 - p1)) <= JOINT_TOLERANCE


class TestTraceRecording:
    def test_initial_frame(self, walker):
        world = instantiate(walker)
        trace = record_frame(new_trace(world), world)
        assert len(trace.frames) == 1
        assert np.array_equal(trace.frames[0], world.q)

    def test_fencepost_601_frames(self, walker):
        world = instantiate(walker)
        trace = record_frame(new_trace(world), world)
        for _ in range(600):
            world = step(world, DT)
            record_frame(trace, world)
        assert len(trace.frames) == 601
        assert all(f.shape == (5, 3) for f in trace.frames)

    def test_body_count_mismatch(self, walker):
        world = instantiate(walker)
        trace = new_trace(world)
        other = instantiate(free_box_spec())
        with pytest.raises(ContractError):
            record_frame(trace, other)

    def test_rollout_determinism_bit_identical(self, walker):
        def rollout():
            world = instantiate(walker)
            trace = record_frame(new_trace(world), world)
            for i in range(120):
                world = set_joint_torques(world, [30 * math.sin(0.2 * i), 0, -20, 10])
                world = step(world, DT)
                record_frame(trace, world)
            return trace

        t1, t2 = rollout(), rollout()
        for f1, f2 in zip(t1.frames, t2.frames):
            assert np.array_equal(f1, f2)
