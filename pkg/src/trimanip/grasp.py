"""Grasp-force distribution: wrench map, friction pyramid, and a tiny QP.

Given contact points on an object and a desired net wrench, the contact
forces are chosen by the strictly convex program

    minimize    1/2 * ||y||^2
    subject to  A y = b        (forces produce the desired wrench)
                G y <= h       (push-only, linearized friction cone)

where ``y`` stacks the per-contact forces expressed in the object's local
frame.  ``A`` has an identity force block and a cross-product moment block
per contact; ``G`` holds five rows per contact: one push-only row and a
four-sided pyramid with per-axis bound ``mu / sqrt(2)``, which inscribes the
pyramid inside the true cone ``||f_parallel|| <= mu * f_normal``.

The solver is a dual active-set method specialized to the identity Hessian:
equalities are eliminated through the nullspace of ``A`` (so iterates are
exactly wrench-consistent), then constraints are activated one at a time,
keeping multipliers nonnegative, until the most violated row is satisfied.
Constraint selection is deterministic (lowest index on ties) and a
previously optimal active set is retried first as a warm start, which is
the common hit in a control loop.  The hot path is numba-compiled; at three
contacts (9 variables, 15 rows) a solve is a few microseconds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .rotations import skew

try:  # pragma: no cover - exercised implicitly by every test run
    from numba import njit
except ImportError:  # pragma: no cover - plain-Python fallback, much slower

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


ROWS_PER_CONTACT = 5
_EPS = 2.220446049250313e-16


class InfeasibleWrenchError(Exception):
    """The requested wrench cannot be produced by in-cone pushing forces."""


@dataclass(frozen=True)
class Contact:
    """One contact: location plus an orthonormal frame, all in object coords.

    The normal points *into* the object (the direction a fingertip pushes).
    """

    location: np.ndarray
    normal: np.ndarray
    tangent1: np.ndarray
    tangent2: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.location, dtype=float).copy()
        n = np.asarray(self.normal, dtype=float).copy()
        t1 = np.asarray(self.tangent1, dtype=float).copy()
        t2 = np.asarray(self.tangent2, dtype=float).copy()
        for name, v in (("location", loc), ("normal", n), ("tangent1", t1), ("tangent2", t2)):
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
        for name, v in (("normal", n), ("tangent1", t1), ("tangent2", t2)):
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a unit vector")
        gram = np.array([n @ t1, n @ t2, t1 @ t2])
        if np.abs(gram).max() > 1e-9:
            raise ValueError("normal and tangents must be orthonormal")
        for v in (loc, n, t1, t2):
            v.setflags(write=False)
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "tangent1", t1)
        object.__setattr__(self, "tangent2", t2)

    @classmethod
    def from_normal(cls, location, normal) -> "Contact":
        """Build the tangent frame from a normal (deterministic choice)."""
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        # pick the world axis least aligned with n as the reference
        ref = np.zeros(3)
        ref[int(np.argmin(np.abs(n)))] = 1.0
        t1 = np.cross(n, ref)
        t1 = t1 / np.linalg.norm(t1)
        t2 = np.cross(n, t1)
        return cls(location=location, normal=n, tangent1=t1, tangent2=t2)


@dataclass(frozen=True)
class ContactSet:
    contacts: tuple[Contact, ...]
    friction_coefficient: float

    def __post_init__(self):
        contacts = tuple(self.contacts)
        if len(contacts) < 1:
            raise ValueError("need at least one contact")
        if self.friction_coefficient <= 0:
            raise ValueError("friction coefficient must be positive")
        object.__setattr__(self, "contacts", contacts)

    def __len__(self) -> int:
        return len(self.contacts)


def _contact_list(contacts):
    return contacts.contacts if isinstance(contacts, ContactSet) else tuple(contacts)


def build_grasp_matrix(contacts) -> np.ndarray:
    """6 x 3k map from stacked contact forces to the net object wrench.

    Top three rows sum the forces; bottom three sum the moments
    ``r_i x f_i`` about the center of mass.
    """
    clist = _contact_list(contacts)
    k = len(clist)
    a_mat = np.zeros((6, 3 * k))
    for i, contact in enumerate(clist):
        a_mat[:3, 3 * i : 3 * i + 3] = np.eye(3)
        a_mat[3:, 3 * i : 3 * i + 3] = skew(contact.location)
    return a_mat


def build_friction_pyramid(contacts, friction_coefficient=None):
    """(G, h) with five rows per contact: push-only plus a 4-facet pyramid.

    Per-axis tangential bound ``mu / sqrt(2)`` makes every pyramid-feasible
    force satisfy the exact cone ``||f_parallel|| <= mu * f_normal``.
    ``h`` is identically zero: the constraint set is a cone.
    """
    clist = _contact_list(contacts)
    if friction_coefficient is None:
        if not isinstance(contacts, ContactSet):
            raise ValueError("friction_coefficient required when not passing a ContactSet")
        friction_coefficient = contacts.friction_coefficient
    if friction_coefficient <= 0:
        raise ValueError("friction coefficient must be positive")
    c = friction_coefficient / np.sqrt(2.0)
    k = len(clist)
    g_mat = np.zeros((ROWS_PER_CONTACT * k, 3 * k))
    for i, contact in enumerate(clist):
        cols = slice(3 * i, 3 * i + 3)
        rows = ROWS_PER_CONTACT * i
        g_mat[rows + 0, cols] = -contact.normal
        g_mat[rows + 1, cols] = contact.tangent1 - c * contact.normal
        g_mat[rows + 2, cols] = -contact.tangent1 - c * contact.normal
        g_mat[rows + 3, cols] = contact.tangent2 - c * contact.normal
        g_mat[rows + 4, cols] = -contact.tangent2 - c * contact.normal
    return g_mat, np.zeros(ROWS_PER_CONTACT * k)


class QPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class GraspQP:
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        a_mat = np.ascontiguousarray(self.A, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        g_mat = np.ascontiguousarray(self.G, dtype=float)
        h = np.ascontiguousarray(self.h, dtype=float)
        if a_mat.ndim != 2 or b.shape != (a_mat.shape[0],):
            raise ValueError("A must be (m_eq, n) with matching b")
        if g_mat.ndim != 2 or g_mat.shape[1] != a_mat.shape[1] or h.shape != (g_mat.shape[0],):
            raise ValueError("G must be (m, n) with matching h")
        object.__setattr__(self, "A", a_mat)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "G", g_mat)
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class QPSolution:
    y: np.ndarray
    active_set: tuple[int, ...]
    kkt_residual: float
    status: QPStatus
    equality_multipliers: np.ndarray | None = None
    inequality_multipliers: np.ndarray | None = None
    iterations: int = 0


_STATUS_OPTIMAL = 0
_STATUS_INFEASIBLE = 1
_STATUS_STALLED = 2


@njit(cache=True)
def _solve_core(a_mat, b, g_mat, h, warm_mask):  # pragma: no cover - jitted
    m_eq, n = a_mat.shape
    m = g_mat.shape[0]

    # ---- eliminate the equalities through the SVD of A --------------------
    u_mat, sigma, vt = np.linalg.svd(a_mat)
    smax = sigma[0] if sigma.size > 0 else 0.0
    rank_tol = max(m_eq, n) * _EPS * smax
    rank = 0
    for i in range(sigma.size):
        if sigma[i] > rank_tol:
            rank += 1

    # least-norm particular solution of A y = b
    y_p = np.zeros(n)
    for i in range(rank):
        coeff = 0.0
        for j in range(m_eq):
            coeff += u_mat[j, i] * b[j]
        coeff /= sigma[i]
        for j in range(n):
            y_p[j] += vt[i, j] * coeff

    b_scale = 1.0
    for j in range(m_eq):
        if abs(b[j]) > b_scale:
            b_scale = abs(b[j])
    eq_residual = 0.0
    for i in range(m_eq):
        acc = 0.0
        for j in range(n):
            acc += a_mat[i, j] * y_p[j]
        if abs(acc - b[i]) > eq_residual:
            eq_residual = abs(acc - b[i])
    lam = np.zeros(m)
    nu0 = np.zeros(m_eq)
    empty_mask = np.zeros(m, dtype=np.bool_)
    if eq_residual > 1e-9 * b_scale:
        # wrench not in the range of the grasp map
        return y_p, lam, nu0, _STATUS_INFEASIBLE, empty_mask, 0, eq_residual

    d = n - rank

    # reduced inequality data over y = y_p + Z z
    gt = np.zeros((m, d))
    base_violation = np.zeros(m)  # G y_p - h
    h_scale = 1.0
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += g_mat[i, j] * y_p[j]
        base_violation[i] = acc - h[i]
        if abs(base_violation[i]) > h_scale:
            h_scale = abs(base_violation[i])
        for c in range(d):
            dot = 0.0
            for j in range(n):
                dot += g_mat[i, j] * vt[rank + c, j]
            gt[i, c] = dot
    tol_feas = 1e-10 * h_scale
    tol_dep = 1e-12

    z = np.zeros(d)
    active_idx = np.full(m, -1, dtype=np.int64)
    lam_active = np.zeros(m)
    k_active = 0
    iterations = 0
    status = _STATUS_OPTIMAL
    certificate = 0.0

    if d == 0 or m == 0:
        if m > 0:
            worst = 0.0
            for i in range(m):
                if base_violation[i] > worst:
                    worst = base_violation[i]
            if worst > tol_feas:
                status = _STATUS_INFEASIBLE
                certificate = worst
    else:
        # ---- warm start: retry the previous active set as an equality face
        n_warm = 0
        for i in range(m):
            if warm_mask[i]:
                n_warm += 1
        if 0 < n_warm <= d:
            w_rows = np.zeros((n_warm, d))
            w_rhs = np.zeros(n_warm)
            w_list = np.zeros(n_warm, dtype=np.int64)
            pos = 0
            for i in range(m):
                if warm_mask[i]:
                    for c in range(d):
                        w_rows[pos, c] = gt[i, c]
                    w_rhs[pos] = -base_violation[i]  # reduced rhs: h - G y_p
                    w_list[pos] = i
                    pos += 1
            gram = w_rows @ w_rows.T
            sv = np.linalg.svd(gram)[1]
            # reject a degenerate face instead of risking a singular solve
            if sv[sv.size - 1] > 1e-10 * max(1.0, sv[0]):
                mu = -np.linalg.solve(gram, w_rhs)
                ok = True
                for j in range(n_warm):
                    if mu[j] < -1e-11:
                        ok = False
                        break
                if ok:
                    z_try = -(w_rows.T @ mu)
                    worst = -1.0
                    for i in range(m):
                        acc = base_violation[i]
                        for c in range(d):
                            acc += gt[i, c] * z_try[c]
                        if acc > worst:
                            worst = acc
                    if worst <= tol_feas:
                        for c in range(d):
                            z[c] = z_try[c]
                        for j in range(n_warm):
                            active_idx[j] = w_list[j]
                            lam_active[j] = mu[j] if mu[j] > 0.0 else 0.0
                        k_active = n_warm

        # ---- dual active-set main loop ------------------------------------
        max_outer = 100 + 10 * m
        while True:
            iterations += 1
            if iterations > max_outer:
                status = _STATUS_STALLED
                break
            # most violated constraint; strict > keeps the lowest index on ties
            p = -1
            v_p = tol_feas
            for i in range(m):
                acc = base_violation[i]
                for c in range(d):
                    acc += gt[i, c] * z[c]
                if acc > v_p:
                    v_p = acc
                    p = i
            if p < 0:
                break  # feasible and dual-feasible: optimal

            # activate p, dropping blocking rows as needed
            lam_p = 0.0
            stalled = True
            for _inner in range(4 * m + 8):
                # projection of g_p onto the nullspace of the active rows
                w = np.zeros(d)
                for c in range(d):
                    w[c] = gt[p, c]
                r = np.zeros(k_active)
                if k_active > 0:
                    n_rows = np.zeros((k_active, d))
                    for jj in range(k_active):
                        row = active_idx[jj]
                        for c in range(d):
                            n_rows[jj, c] = gt[row, c]
                    gram = n_rows @ n_rows.T
                    r = np.linalg.solve(gram, n_rows @ w)
                    w = w - n_rows.T @ r
                denom = 0.0
                for c in range(d):
                    denom += gt[p, c] * w[c]

                t_full = np.inf
                if denom > tol_dep:
                    t_full = v_p / denom
                t_block = np.inf
                j_block = -1
                for jj in range(k_active):
                    if r[jj] > tol_dep:
                        tj = lam_active[jj] / r[jj]
                        if tj < t_block - 1e-15 or (
                            tj < t_block + 1e-15
                            and j_block >= 0
                            and active_idx[jj] < active_idx[j_block]
                        ):
                            t_block = tj
                            j_block = jj

                if not np.isfinite(t_full) and not np.isfinite(t_block):
                    status = _STATUS_INFEASIBLE
                    certificate = v_p
                    stalled = False
                    break

                t_step = t_full if t_full <= t_block else t_block
                for c in range(d):
                    z[c] -= t_step * w[c]
                for jj in range(k_active):
                    lam_active[jj] -= t_step * r[jj]
                    if lam_active[jj] < 0.0:
                        lam_active[jj] = 0.0
                lam_p += t_step
                if denom > tol_dep:
                    v_p -= t_step * denom

                if t_block < t_full:
                    # dual block: deactivate that row, keep working on p
                    for jj in range(j_block, k_active - 1):
                        active_idx[jj] = active_idx[jj + 1]
                        lam_active[jj] = lam_active[jj + 1]
                    k_active -= 1
                else:
                    active_idx[k_active] = p
                    lam_active[k_active] = lam_p
                    k_active += 1
                    stalled = False
                    break
            if stalled:
                status = _STATUS_STALLED
                break
            if status != _STATUS_OPTIMAL:
                break

    active_mask = np.zeros(m, dtype=np.bool_)
    for jj in range(k_active):
        lam[active_idx[jj]] = lam_active[jj]
        active_mask[active_idx[jj]] = True

    y = y_p.copy()
    for c in range(d):
        for j in range(n):
            y[j] += vt[rank + c, j] * z[c]

    # gradient of the Lagrangian without the equality term: y + G^T lam
    grad = y.copy()
    for i in range(m):
        if lam[i] != 0.0:
            for j in range(n):
                grad[j] += g_mat[i, j] * lam[i]

    # equality multipliers from stationarity: y + A^T nu + G^T lam = 0
    nu = np.zeros(m_eq)
    for i in range(rank):
        acc = 0.0
        for j in range(n):
            acc += vt[i, j] * grad[j]
        acc /= sigma[i]
        for j in range(m_eq):
            nu[j] -= u_mat[j, i] * acc

    if status != _STATUS_OPTIMAL:
        return y, lam, nu, status, active_mask, iterations, certificate

    # KKT residual: stationarity, primal feasibility, complementarity
    kkt = 0.0
    for j in range(n):
        acc = grad[j]
        for i in range(m_eq):
            acc += a_mat[i, j] * nu[i]
        if abs(acc) > kkt:
            kkt = abs(acc)
    for i in range(m_eq):
        acc = -b[i]
        for j in range(n):
            acc += a_mat[i, j] * y[j]
        if abs(acc) > kkt:
            kkt = abs(acc)
    for i in range(m):
        acc = -h[i]
        for j in range(n):
            acc += g_mat[i, j] * y[j]
        if acc > kkt:
            kkt = acc
        comp = abs(lam[i] * acc)
        if comp > kkt:
            kkt = comp
    return y, lam, nu, status, active_mask, iterations, kkt


def _finish_solution(raw) -> QPSolution:
    y, lam, nu, status, active_mask, iterations, residual = raw
    if status == _STATUS_STALLED:
        raise ArithmeticError("active-set solver failed to converge")
    return QPSolution(
        y=y,
        active_set=tuple(int(i) for i in np.flatnonzero(active_mask)),
        kkt_residual=float(residual),
        status=QPStatus.OPTIMAL if status == _STATUS_OPTIMAL else QPStatus.INFEASIBLE,
        equality_multipliers=nu,
        inequality_multipliers=lam,
        iterations=int(iterations),
    )


def solve_qp(qp: GraspQP, warm_start=None) -> QPSolution:
    """Solve ``min 1/2 y'y  s.t.  A y = b, G y <= h``.

    ``warm_start`` is a boolean mask over inequality rows (typically the
    previous solution's active set).  On infeasible problems the returned
    ``kkt_residual`` is the infeasibility certificate: the smallest
    constraint violation remaining at the final iterate.
    """
    m = qp.G.shape[0]
    if warm_start is None:
        warm = np.zeros(m, dtype=np.bool_)
    else:
        warm = np.asarray(warm_start, dtype=np.bool_)
        if warm.shape != (m,):
            raise ValueError(f"warm_start must be a boolean mask of length {m}")
    return _finish_solution(_solve_core(qp.A, qp.b, qp.G, qp.h, warm))


def unpack_forces(y: np.ndarray) -> np.ndarray:
    """Reshape a stacked force vector into one 3-vector row per contact."""
    y = np.asarray(y, dtype=float)
    if y.size % 3 != 0:
        raise ValueError("stacked force vector length must be a multiple of 3")
    return y.reshape(-1, 3)


class ForceDistributor:
    """Wrench-to-forces pipeline for a fixed contact set, with warm starts.

    One instance per control loop: the previous cycle's active set seeds the
    next solve, which in steady state resolves in a single face check.
    """

    def __init__(self, contacts: ContactSet):
        self.contacts = contacts
        self.A = build_grasp_matrix(contacts)
        self.G, self.h = build_friction_pyramid(contacts)
        self._warm = np.zeros(self.G.shape[0], dtype=np.bool_)
        self._b = np.zeros(6)

    def solve(self, force_com, moment_com) -> QPSolution:
        # calls the compiled core directly on prebuilt matrices; a solve is
        # a handful of microseconds, well inside a 1 kHz budget
        self._b[:3] = force_com
        self._b[3:] = moment_com
        raw = _solve_core(self.A, self._b, self.G, self.h, self._warm)
        solution = _finish_solution(raw)
        if solution.status is QPStatus.OPTIMAL:
            self._warm = raw[4]  # fresh mask owned by the core's output
        return solution


def dump_qp_csv(qp: GraspQP, path) -> None:
    """Write a QP instance to CSV (rows: name,row,col,value) for debugging."""
    import csv

    blocks = (("A", qp.A), ("b", qp.b.reshape(-1, 1)), ("G", qp.G), ("h", qp.h.reshape(-1, 1)))
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["name", "row", "col", "value"])
        for name, block in blocks:
            for i in range(block.shape[0]):
                for j in range(block.shape[1]):
                    writer.writerow([name, i, j, "{:.17g}".format(block[i, j])])


def load_qp_csv(path) -> GraspQP:
    """Inverse of :func:`dump_qp_csv`."""
    import csv
    from collections import defaultdict

    cells = defaultdict(dict)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        for name, i, j, value in reader:
            cells[name][(int(i), int(j))] = float(value)

    def block(name):
        keys = cells[name]
        rows = 1 + max(k[0] for k in keys)
        cols = 1 + max(k[1] for k in keys)
        out = np.zeros((rows, cols))
        for (i, j), v in keys.items():
            out[i, j] = v
        return out

    return GraspQP(
        A=block("A"), b=block("b").ravel(), G=block("G"), h=block("h").ravel()
    )


def distribute_forces(contacts: ContactSet, force_com, moment_com) -> np.ndarray:
    """Per-contact forces (object frame) realizing the requested wrench.

    Raises :class:`InfeasibleWrenchError` when no in-cone pushing forces can
    produce it.
    """
    solution = ForceDistributor(contacts).solve(force_com, moment_com)
    if solution.status is not QPStatus.OPTIMAL:
        raise InfeasibleWrenchError(
            f"wrench infeasible (certificate residual {solution.kkt_residual:.3e})"
        )
    return unpack_forces(solution.y)
