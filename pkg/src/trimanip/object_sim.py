"""Minimal rigid-cube simulator closing the loop for the manipulation tasks.

The fingertips are assumed attached to fixed object-frame contact points
(no slipping, no making/breaking contact): the forces acting on the cube are
exactly the optimizer's contact forces, while slip avoidance is guaranteed
on the optimization side by the friction-cone constraints.  The table is a
unilateral clamp at ``z = edge/2`` with zero restitution.

Integration is semi-implicit Euler on the twist, then the pose, with the
quaternion renormalized every step.  For a uniform cube the body inertia is
isotropic (``m e^2 / 6`` on each axis), so free rotation conserves angular
momentum exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import ObjectState
from .grasp import Contact, ContactSet
from .rotations import quat_integrate, quat_to_matrix

DEFAULT_CUBE_MASS = 0.1  # kg
DEFAULT_CUBE_EDGE = 0.065  # m
DEFAULT_FRICTION = 1.0
GRAVITY = np.array([0.0, 0.0, -9.81])


def side_grasp_contacts(
    edge: float = DEFAULT_CUBE_EDGE,
    friction_coefficient: float = DEFAULT_FRICTION,
    count: int = 3,
) -> ContactSet:
    """Symmetric side grasp: contacts spaced evenly around the cube at
    mid-height, normals pointing inward, first tangent vertical."""
    contacts = []
    for i in range(count):
        angle = 2.0 * np.pi * i / count
        radial = np.array([np.cos(angle), np.sin(angle), 0.0])
        contacts.append(
            Contact(
                location=0.5 * edge * radial,
                normal=-radial,
                tangent1=np.array([0.0, 0.0, 1.0]),
                tangent2=np.cross(-radial, [0.0, 0.0, 1.0]),
            )
        )
    return ContactSet(contacts=tuple(contacts), friction_coefficient=friction_coefficient)


@dataclass(frozen=True)
class CubeParams:
    mass: float = DEFAULT_CUBE_MASS
    edge: float = DEFAULT_CUBE_EDGE
    inertia: np.ndarray = None  # diagonal body inertia; solid-cube value if omitted
    contact_locations: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.mass <= 0 or self.edge <= 0:
            raise ValueError("mass and edge must be positive")
        solid = self.mass * self.edge**2 / 6.0
        if self.inertia is None:
            inertia = np.full(3, solid)
        else:
            inertia = np.asarray(self.inertia, dtype=float).copy()
            if inertia.shape != (3,):
                raise ValueError("inertia must be a 3-vector (diagonal)")
            if np.abs(inertia - solid).max() > 1e-12:
                raise ValueError("inertia must match the solid-cube value m*e^2/6")
        if self.contact_locations is None:
            locations = np.stack(
                [c.location for c in side_grasp_contacts(self.edge).contacts]
            )
        else:
            locations = np.asarray(self.contact_locations, dtype=float).copy()
            if locations.ndim != 2 or locations.shape[1] != 3:
                raise ValueError("contact_locations must be (k, 3)")
        inertia.setflags(write=False)
        locations.setflags(write=False)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "contact_locations", locations)

    def resting_state(self) -> ObjectState:
        """Cube at rest on the table, centered on the origin."""
        return ObjectState(
            position=np.array([0.0, 0.0, 0.5 * self.edge]),
            velocity=np.zeros(3),
            orientation=np.array([1.0, 0.0, 0.0, 0.0]),
            angular_velocity=np.zeros(3),
            mass=self.mass,
        )


def object_step(
    state: ObjectState,
    tip_forces,
    params: CubeParams,
    dt: float,
    gravity=GRAVITY,
) -> ObjectState:
    """Advance the cube one step under world-frame contact forces.

    ``tip_forces`` is (k, 3), one world-frame force per contact point.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    forces = np.asarray(tip_forces, dtype=float)
    if forces.shape != params.contact_locations.shape:
        raise ValueError(
            f"expected tip forces of shape {params.contact_locations.shape}"
        )
    gravity = np.asarray(gravity, dtype=float)
    rot = quat_to_matrix(state.orientation)

    net_force = forces.sum(axis=0) + params.mass * gravity
    arms = params.contact_locations @ rot.T  # world-frame lever arms
    net_moment = np.cross(arms, forces).sum(axis=0)

    # twist first (semi-implicit), with the gyroscopic term about the COM
    inertia_world = rot @ np.diag(params.inertia) @ rot.T
    omega = state.angular_velocity
    angular_acc = np.linalg.solve(
        inertia_world, net_moment - np.cross(omega, inertia_world @ omega)
    )
    velocity = state.velocity + dt * net_force / params.mass
    omega = omega + dt * angular_acc

    position = state.position + dt * velocity
    orientation = quat_integrate(state.orientation, omega, dt)

    # unilateral table contact, zero restitution
    floor = 0.5 * params.edge
    if position[2] < floor:
        position = position.copy()
        position[2] = floor
        if velocity[2] < 0.0:
            velocity = velocity.copy()
            velocity[2] = 0.0

    return ObjectState(
        position=position,
        velocity=velocity,
        orientation=orientation,
        angular_velocity=omega,
        mass=state.mass,
    )
