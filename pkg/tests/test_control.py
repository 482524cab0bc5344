import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from trimanip.control import (
    GraspController,
    ObjectState,
    TipGains,
    TrajectorySample,
    WrenchGains,
    circle_trajectory,
    com_wrench,
    impedance_torques,
    lift_trajectory,
)
from trimanip.grasp import build_grasp_matrix
from trimanip.hand import NUM_JOINTS, HandObservation
from trimanip.kinematics import (
    FingerGeometry,
    HandGeometry,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
)
from trimanip.object_sim import CubeParams, side_grasp_contacts
from trimanip.rotations import quat_from_axis_angle, quat_multiply, rot_z


def object_state(position=(0, 0, 0.0325), mass=0.1, orientation=None, **kwargs):
    return ObjectState(
        position=np.asarray(position, float),
        velocity=kwargs.get("velocity", np.zeros(3)),
        orientation=np.array([1.0, 0, 0, 0]) if orientation is None else orientation,
        angular_velocity=kwargs.get("angular_velocity", np.zeros(3)),
        mass=mass,
    )


def hold_sample(position, orientation=None):
    return TrajectorySample(
        position=np.asarray(position, float),
        velocity=np.zeros(3),
        orientation=np.array([1.0, 0, 0, 0]) if orientation is None else orientation,
        angular_velocity=np.zeros(3),
    )


# -- center-of-mass wrench -------------------------------------------------------
def test_zero_error_wrench_is_gravity_compensation():
    state = object_state()
    force, moment = com_wrench(state, hold_sample(state.position), WrenchGains())
    assert np.allclose(force, [0, 0, 0.981])
    assert np.allclose(moment, 0.0)


def test_linear_force_law():
    gains = WrenchGains(p_lin=100.0, d_lin=0.0, p_ang=0.0, d_ang=0.0)
    state = object_state(mass=1e-9)
    desired = hold_sample(state.position + np.array([0, 0, 0.01]))
    force, _ = com_wrench(state, desired, gains)
    assert np.allclose(force, [0, 0, 1.0], atol=1e-7)


def test_yaw_error_moment_matches_quaternion_log():
    gains = WrenchGains(p_lin=0.0, d_lin=0.0, p_ang=1.0, d_ang=0.0)
    for theta in (1e-3, -2e-3, 5e-4):
        desired_q = quat_from_axis_angle([0, 0, 1], theta)
        state = object_state()
        desired = hold_sample(state.position, orientation=desired_q)
        _, moment = com_wrench(state, desired, gains)
        # oracle: rotation-vector (log map) of the error rotation, via scipy
        log = Rotation.from_quat(
            [desired_q[1], desired_q[2], desired_q[3], desired_q[0]]
        ).as_rotvec()
        assert np.abs(moment - log).max() < 1e-6
        assert moment[2] == pytest.approx(theta, abs=1e-6)


def test_large_error_moment_takes_short_way():
    gains = WrenchGains(p_lin=0.0, d_lin=0.0, p_ang=1.0, d_ang=0.0)
    # error of 350 degrees about z should correct backwards through -10
    desired_q = quat_from_axis_angle([0, 0, 1], np.deg2rad(350))
    _, moment = com_wrench(object_state(), hold_sample(np.zeros(3), desired_q), gains)
    assert moment[2] < 0


# -- impedance -----------------------------------------------------------------
GEOM = FingerGeometry()


def test_impedance_zero_at_rest_on_target():
    q = np.array([0.2, 0.5, -0.8])
    tip = forward_kinematics(GEOM, q)
    tau = impedance_torques(GEOM, q, np.zeros(3), np.zeros(3), tip, np.zeros(3), TipGains())
    assert np.allclose(tau, 0.0)


def test_impedance_zero_gains_is_pure_force_mapping():
    q = np.array([-0.4, 0.9, 0.3])
    force = np.array([1.0, -2.0, 0.5])
    gains = TipGains(p_tip=0.0, d_tip=0.0)
    tau = impedance_torques(GEOM, q, np.ones(3), force, np.zeros(3), np.zeros(3), gains)
    assert np.allclose(tau, jacobian(GEOM, q).T @ force)


def test_impedance_virtual_work_identity():
    rng = np.random.default_rng(12)
    gains = TipGains(p_tip=37.0, d_tip=2.5)
    for _ in range(200):
        q = rng.uniform(-1.5, 1.5, 3)
        qdot = rng.uniform(-3, 3, 3)
        force = rng.uniform(-5, 5, 3)
        target = rng.uniform(-0.3, 0.3, 3)
        target_vel = rng.uniform(-1, 1, 3)
        jac = jacobian(GEOM, q)
        total = (
            force
            + gains.p_tip * (target - forward_kinematics(GEOM, q))
            + gains.d_tip * (target_vel - jac @ qdot)
        )
        tau = impedance_torques(GEOM, q, qdot, force, target, target_vel, gains)
        assert abs(tau @ qdot - total @ (jac @ qdot)) < 1e-10


# -- trajectories -----------------------------------------------------------------
def test_lift_trajectory_endpoints():
    start = np.array([0.0, 0.0, 0.0325])
    traj = lift_trajectory(start, height=0.2, duration=5.0)
    assert np.allclose(traj(0.0).position, start)
    assert np.allclose(traj(5.0).position, start + [0, 0, 0.2])
    assert np.allclose(traj(7.0).position, start + [0, 0, 0.2])  # holds the end


def test_lift_boundary_velocities_zero():
    traj = lift_trajectory(np.zeros(3), height=0.2, duration=5.0)
    assert np.allclose(traj(0.0).velocity, 0.0)
    assert np.allclose(traj(5.0).velocity, 0.0)
    assert traj(2.5).velocity[2] > 0


def test_circle_positions_differentiate_to_velocities():
    traj = circle_trajectory(np.array([0.0, 0.0, 0.0325]), radius=0.04, period=8.0)
    h = 1e-6
    for t in np.linspace(0.0, 8.0, 33):
        numeric = (traj(t + h).position - traj(t - h).position) / (2 * h)
        assert np.abs(numeric - traj(t).velocity).max() < 1e-6


def test_circle_starts_at_start_position():
    start = np.array([0.01, -0.02, 0.0325])
    traj = circle_trajectory(start, radius=0.05, period=4.0)
    assert np.allclose(traj(0.0).position, start)


def test_degenerate_circle_is_hold():
    start = np.array([0.0, 0.0, 0.0325])
    traj = circle_trajectory(start, radius=0.0, period=4.0)
    for t in (0.0, 1.0, 3.7):
        assert np.allclose(traj(t).position, start)
        assert np.allclose(traj(t).velocity, 0.0)


# -- full control step ---------------------------------------------------------------
def grasp_setup(mass=0.1):
    geometry = HandGeometry.symmetric()
    params = CubeParams(mass=mass)
    contacts = side_grasp_contacts(params.edge)
    state = params.resting_state() if mass == 0.1 else object_state(mass=mass)
    # fingers exactly at the contact points of the resting pose
    q = np.zeros(NUM_JOINTS)
    for i, finger in enumerate(geometry.fingers):
        target = state.position + contacts.contacts[i].location
        result = inverse_kinematics(
            finger, target, np.array([0.0, 0.6, -1.2]), tolerance=1e-10
        )
        assert result.reached
        q[3 * i : 3 * i + 3] = result.q
    obs = HandObservation(position=q, velocity=np.zeros(NUM_JOINTS), torque=np.zeros(NUM_JOINTS))
    return geometry, contacts, state, obs


def test_control_step_zero_mass_zero_error_is_zero_action():
    geometry, contacts, state, obs = grasp_setup(mass=1e-9)
    traj = lift_trajectory(state.position, height=0.2, duration=5.0)
    controller = GraspController(geometry, contacts, traj)
    action, info = controller.control_step(0.0, state, obs)
    assert np.abs(action.torque).max() < 1e-7
    assert info.fallback == ""


def test_control_step_on_trajectory_is_gravity_split_through_jacobian():
    geometry, contacts, state, obs = grasp_setup()
    traj = lift_trajectory(state.position, height=0.2, duration=5.0)
    controller = GraspController(geometry, contacts, traj)
    action, info = controller.control_step(0.0, state, obs)

    # compose the two oracles: QP force split, then J^T mapping
    from trimanip.grasp import distribute_forces

    forces = distribute_forces(contacts, [0, 0, 0.981], [0, 0, 0])
    for i in range(3):
        sl = slice(3 * i, 3 * i + 3)
        jac = jacobian(geometry.fingers[i], obs.position[sl])
        # fingertips sit exactly on their targets, so impedance terms vanish
        expected = jac.T @ forces[i]
        assert np.abs(action.torque[sl] - expected).max() < 1e-8
    assert np.allclose(info.wrench_world[:3], [0, 0, 0.981])


def test_control_step_wrench_identity_holds():
    geometry, contacts, state, obs = grasp_setup()
    traj = lift_trajectory(state.position, height=0.2, duration=5.0)
    controller = GraspController(geometry, contacts, traj)
    a_mat = build_grasp_matrix(contacts)
    for t in (0.0, 0.4, 1.3):
        _, info = controller.control_step(t, state, obs)
        assert np.abs(a_mat @ info.forces_object.ravel() - info.wrench_object).max() < 1e-9


def test_control_step_infeasible_falls_back_to_held_forces():
    # a grasp without force closure: all three contacts on the top face can
    # only push downward, so any net upward wrench is infeasible
    from trimanip.grasp import Contact, ContactSet

    edge = 0.065
    top = 0.5 * edge
    locations = [np.array([0.02, 0.0, top]), np.array([-0.01, 0.015, top]), np.array([-0.01, -0.015, top])]
    contacts = ContactSet(
        contacts=tuple(Contact.from_normal(loc, [0.0, 0.0, -1.0]) for loc in locations),
        friction_coefficient=1.0,
    )
    geometry, _, state, obs = grasp_setup()
    traj = lift_trajectory(state.position, height=0.2, duration=5.0)
    controller = GraspController(geometry, contacts, traj, stale_limit=3)

    # pressing the cube down is feasible for this grasp: hold those forces
    pressed = ObjectState(
        position=state.position + np.array([0.0, 0.0, 0.2]),  # desired far below
        velocity=np.zeros(3),
        orientation=state.orientation,
        angular_velocity=np.zeros(3),
        mass=state.mass,
    )
    _, ok_info = controller.control_step(0.0, pressed, obs)
    assert ok_info.fallback == ""
    held = ok_info.forces_object

    # lifting needs a net upward force: infeasible here
    for _ in range(3):
        _, info = controller.control_step(0.0, state, obs)
        assert info.qp.status.value == "infeasible"
        assert info.fallback == "held"
        assert np.array_equal(info.forces_object, held)
    _, info = controller.control_step(0.0, state, obs)
    assert info.fallback == "zero"
    assert np.allclose(info.forces_object, 0.0)


def test_frame_consistency_under_world_rotation():
    angle = 0.83
    rot = rot_z(angle)
    rot_quat = quat_from_axis_angle([0, 0, 1], angle)

    geometry, contacts, state, obs = grasp_setup()
    traj = lift_trajectory(state.position, height=0.2, duration=5.0)
    action, _ = GraspController(geometry, contacts, traj).control_step(0.7, state, obs)

    rotated_fingers = tuple(
        FingerGeometry(
            link_lengths=f.link_lengths,
            base_rotation=rot @ f.base_rotation,
            base_translation=rot @ f.base_translation,
        )
        for f in geometry.fingers
    )
    rotated_geometry = HandGeometry(fingers=rotated_fingers)
    rotated_state = ObjectState(
        position=rot @ state.position,
        velocity=rot @ state.velocity,
        orientation=quat_multiply(rot_quat, state.orientation),
        angular_velocity=rot @ state.angular_velocity,
        mass=state.mass,
    )
    base_traj = traj

    def rotated_traj(t):
        s = base_traj(t)
        return TrajectorySample(
            position=rot @ s.position,
            velocity=rot @ s.velocity,
            orientation=quat_multiply(rot_quat, s.orientation),
            angular_velocity=rot @ s.angular_velocity,
        )

    rotated_gains = WrenchGains(gravity=rot @ WrenchGains().gravity)
    rotated_action, _ = GraspController(
        rotated_geometry, contacts, rotated_traj, wrench_gains=rotated_gains
    ).control_step(0.7, rotated_state, obs)
    assert np.abs(rotated_action.torque - action.torque).max() < 1e-9


def test_gain_validation():
    with pytest.raises(ValueError):
        WrenchGains(p_lin=-1.0)
    with pytest.raises(ValueError):
        TipGains(d_tip=-0.1)
    with pytest.raises(ValueError):
        lift_trajectory(np.zeros(3), height=-0.1, duration=1.0)
