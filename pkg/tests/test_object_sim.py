import numpy as np
import pytest

from trimanip.control import ObjectState
from trimanip.object_sim import CubeParams, object_step, side_grasp_contacts
from trimanip.rotations import quat_from_axis_angle

PARAMS = CubeParams()
DT = 0.001


def floating_state(position=(0, 0, 1.0), velocity=(0, 0, 0), omega=(0, 0, 0)):
    return ObjectState(
        position=np.asarray(position, float),
        velocity=np.asarray(velocity, float),
        orientation=np.array([1.0, 0, 0, 0]),
        angular_velocity=np.asarray(omega, float),
        mass=PARAMS.mass,
    )


def gravity_compensating_forces():
    # equal vertical shares at the symmetric ring: zero net moment
    share = PARAMS.mass * 9.81 / 3.0
    return np.tile([0.0, 0.0, share], (3, 1))


def test_inertia_matches_solid_cube_formula():
    solid = PARAMS.mass * PARAMS.edge**2 / 6.0
    assert np.abs(PARAMS.inertia - solid).max() < 1e-15
    with pytest.raises(ValueError):
        CubeParams(inertia=np.array([1.0, 1.0, 1.0]))


def test_equilibrium_is_stationary():
    # exactly compensating forces: position and velocity unchanged bit for
    # bit; the rotational state accumulates only float cancellation noise
    # from the 120-degree ring (cos terms), far below any physical scale
    state = PARAMS.resting_state()
    forces = gravity_compensating_forces()
    for _ in range(1000):
        state = object_step(state, forces, PARAMS, DT)
    reference = PARAMS.resting_state()
    assert np.array_equal(state.position, reference.position)
    assert np.array_equal(state.velocity, reference.velocity)
    assert np.abs(state.orientation - reference.orientation).max() < 1e-12
    assert np.abs(state.angular_velocity).max() < 1e-12


def test_ballistic_rise_matches_closed_form():
    # one contact pushes with twice the weight: net +g upward from rest
    state = floating_state()
    forces = np.zeros((3, 3))
    forces[0, 2] = PARAMS.mass * 9.81 * 2.0
    total_time = 0.5
    steps = int(total_time / DT)
    for _ in range(steps):
        state = object_step(state, forces, PARAMS, DT)
    expected = 1.0 + 0.5 * 9.81 * total_time**2
    assert abs(state.position[2] - expected) < 9.81 * total_time * DT


def test_resting_cube_stays_on_table():
    state = PARAMS.resting_state()
    for _ in range(500):
        state = object_step(state, np.zeros((3, 3)), PARAMS, DT)
    assert state.position[2] == 0.5 * PARAMS.edge
    assert state.velocity[2] == 0.0


def test_linear_momentum_exact_under_constant_force():
    state = floating_state()
    for n in range(1, 200):
        state = object_step(state, np.zeros((3, 3)), PARAMS, DT)
        assert state.velocity[2] == pytest.approx(-9.81 * n * DT, abs=1e-12)


def test_quaternion_norm_stays_unit():
    rng = np.random.default_rng(4)
    state = ObjectState(
        position=np.array([0, 0, 2.0]),
        velocity=np.zeros(3),
        orientation=quat_from_axis_angle(rng.standard_normal(3), 0.3),
        angular_velocity=np.array([3.0, -2.0, 5.0]),
        mass=PARAMS.mass,
    )
    worst = 0.0
    for i in range(20_000):
        forces = 0.01 * np.sin(0.01 * i) * np.ones((3, 3))
        state = object_step(state, forces, PARAMS, DT)
        worst = max(worst, abs(np.linalg.norm(state.orientation) - 1.0))
    assert worst < 1e-12


def test_angular_momentum_conserved_in_free_rotation():
    # isotropic cube inertia: free rotation keeps omega (and so L) constant
    state = floating_state(position=(0, 0, 5.0), omega=(4.0, -1.0, 2.0))
    inertia = PARAMS.inertia[0]
    l0 = inertia * state.angular_velocity
    for _ in range(1000):
        state = object_step(state, np.zeros((3, 3)), PARAMS, DT)
    drift = np.abs(inertia * state.angular_velocity - l0).max()
    assert drift < 1e-9


def test_moment_from_offset_force_spins_cube():
    state = floating_state()
    forces = np.zeros((3, 3))
    forces[0] = [0.0, 0.0, PARAMS.mass * 9.81]  # offset single contact
    state = object_step(state, forces, PARAMS, DT)
    assert np.linalg.norm(state.angular_velocity) > 0


def test_contact_layout_matches_params():
    contacts = side_grasp_contacts(PARAMS.edge)
    assert np.allclose(
        np.stack([c.location for c in contacts.contacts]), PARAMS.contact_locations
    )
    # normals point into the cube (toward the axis)
    for contact in contacts.contacts:
        assert contact.location @ contact.normal < 0


def test_step_validation():
    state = PARAMS.resting_state()
    with pytest.raises(ValueError):
        object_step(state, np.zeros((2, 3)), PARAMS, DT)
    with pytest.raises(ValueError):
        object_step(state, np.zeros((3, 3)), PARAMS, 0.0)
