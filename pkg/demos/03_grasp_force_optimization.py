"""Distributing an object wrench over fingertip contacts.

The wrench -> forces step is a strictly convex QP: minimize the squared
force magnitudes subject to producing the wrench exactly and keeping every
force inside its (linearized) friction cone.  The demo solves a few wrenches
on the default symmetric grasp and prints the cone margins, then shows an
infeasible request being reported rather than silently mangled.
"""

import numpy as np

from trimanip import (
    Contact,
    ContactSet,
    InfeasibleWrenchError,
    build_grasp_matrix,
    distribute_forces,
    side_grasp_contacts,
)

contacts = side_grasp_contacts()  # three contacts at 120 degrees, mu = 1.0
mu = contacts.friction_coefficient
a_mat = build_grasp_matrix(contacts)


def show(label, force_com, moment_com):
    forces = distribute_forces(contacts, force_com, moment_com)
    wrench = a_mat @ forces.ravel()
    print(f"\n{label}")
    print(f"  requested wrench: F={force_com} M={moment_com}")
    print(f"  achieved wrench:  F={np.round(wrench[:3], 12)} M={np.round(wrench[3:], 12)}")
    for i, (contact, f) in enumerate(zip(contacts.contacts, forces)):
        f_n = f @ contact.normal
        f_p = np.linalg.norm(f - f_n * contact.normal)
        print(
            f"  contact {i}: |f| = {np.linalg.norm(f):.3f} N, "
            f"normal {f_n:.3f} N, tangential {f_p:.3f} N "
            f"(cone allows {mu * f_n:.3f})"
        )


show("hold a 0.1 kg cube against gravity", [0, 0, 0.981], [0, 0, 0])
show("accelerate it sideways", [0.5, 0, 0.981], [0, 0, 0])
show("twist it about the vertical axis", [0, 0, 0.981], [0, 0, 0.01])

print("\nan infeasible request is reported, not fudged:")
single = ContactSet(
    contacts=(Contact.from_normal([0, 0, 0.03], [0, 0, -1.0]),),
    friction_coefficient=mu,
)
try:
    distribute_forces(single, [0, 0, 0.981], [0, 0, 0])  # pulling up via a top contact
except InfeasibleWrenchError as exc:
    print(f"  InfeasibleWrenchError: {exc}")
