"""Constrained rigid mobility solve on the centerline.

The force density, linear velocity, and angular velocity are found
together from one dense saddle system: velocity rows demand that the
slender-body velocity of every node equals a rigid motion, and six
constraint rows pin the total force and torque.  A monolithic pivoted
factorization keeps the conditioning of the coupled problem visible.
"""

import numpy as np
from scipy.linalg import eigh, get_lapack_funcs, lu_factor, lu_solve

from .errors import ConditioningError
from .geometry import SlenderGeometry, transform_curve
from .sbt import LineForceDensity, assemble_sbt_matrix
from .util import skew

COND_LIMIT = 1e12


class RigidKinematics:
    """Rigid velocity pair (v, omega); condition estimate tags along."""

    def __init__(self, v, omega, condition=None):
        self.v = np.asarray(v, dtype=float).reshape(3)
        self.omega = np.asarray(omega, dtype=float).reshape(3)
        if not (np.isfinite(self.v).all() and np.isfinite(self.omega).all()):
            raise ValueError("non-finite rigid kinematics")
        self.condition = condition

    def __repr__(self):
        return "RigidKinematics(v=%s, omega=%s)" % (self.v, self.omega)


class GrandMobility:
    """6x6 map from stacked (F, T) to stacked (v, omega)."""

    def __init__(self, matrix, conditioning):
        self.matrix = np.asarray(matrix, dtype=float)
        self.conditioning = conditioning
        m = self.matrix
        self.symmetry_defect = np.linalg.norm(m - m.T) / np.linalg.norm(m)
        self.eigenvalues = np.linalg.eigvalsh(0.5 * (m + m.T))

    @property
    def is_spd(self):
        return bool(self.eigenvalues.min() > 0.0)


class RigidGram:
    """Gram matrix of rigid motions along the curve.

    (v, w)^T G (v, w) equals the squared L2 norm of v + w x X(s) over the
    period; the smallest eigenvalue certifies that rigid motions are
    detectable from centerline velocities with constant 1/sqrt(lambda_min).
    """

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        self.lambda_min = float(np.linalg.eigvalsh(self.matrix).min())

    def quadratic_form(self, v, omega):
        u = np.concatenate([np.asarray(v, float), np.asarray(omega, float)])
        return float(u @ self.matrix @ u)


def _condition_estimate(lu_piv, matrix_1norm):
    lu = lu_piv[0]
    (gecon,) = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, matrix_1norm, norm="1")
    if info != 0 or rcond == 0.0:
        return np.inf
    return 1.0 / rcond


def _saddle_factorization(geometry, sbt=None):
    """LU of the (3N+6) saddle matrix plus its condition estimate."""
    geometry.require_admissible()
    if sbt is None:
        sbt = assemble_sbt_matrix(geometry)
    n = sbt.n
    h = 1.0 / n
    x = geometry.curve.nodes

    dim = 3 * n + 6
    k = np.zeros((dim, dim))
    k[: 3 * n, : 3 * n] = sbt.matrix
    eye = np.eye(3)
    for i in range(n):
        r = slice(3 * i, 3 * i + 3)
        xsk = skew(x[i])
        # velocity rows: A f - v - w x X_i = 0
        k[r, 3 * n : 3 * n + 3] = -eye
        k[r, 3 * n + 3 :] = xsk
        # constraint rows: h sum f = F, h sum X x f = T
        k[3 * n : 3 * n + 3, r] = h * eye
        k[3 * n + 3 :, r] = h * xsk

    anorm = np.linalg.norm(k, 1)
    lu_piv = lu_factor(k)
    cond = _condition_estimate(lu_piv, anorm)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ConditioningError(
            "slender-body saddle system condition estimate %.3e exceeds %.1e; "
            "the line operator need not be invertible at this (epsilon, N)"
            % (cond, COND_LIMIT),
            cond,
        )
    return lu_piv, cond, n


def solve_mobility(geometry, force, torque, sbt=None, _factorization=None):
    """Force density and rigid velocities for prescribed (F, T)."""
    if _factorization is None:
        _factorization = _saddle_factorization(geometry, sbt)
    lu_piv, cond, n = _factorization
    rhs = np.zeros(3 * n + 6)
    rhs[3 * n : 3 * n + 3] = np.asarray(force, dtype=float)
    rhs[3 * n + 3 :] = np.asarray(torque, dtype=float)
    sol = lu_solve(lu_piv, rhs)
    f = LineForceDensity(sol[: 3 * n].reshape(n, 3))
    kin = RigidKinematics(sol[3 * n : 3 * n + 3], sol[3 * n + 3 :], condition=cond)
    return f, kin


def grand_mobility(geometry, sbt=None):
    """Six canonical solves sharing one factorization."""
    fact = _saddle_factorization(geometry, sbt)
    cols = []
    for k in range(6):
        load = np.zeros(6)
        load[k] = 1.0
        _, kin = solve_mobility(geometry, load[:3], load[3:], _factorization=fact)
        cols.append(np.concatenate([kin.v, kin.omega]))
    return GrandMobility(np.column_stack(cols), fact[1])


def rigid_motion_gram(curve):
    """Assemble the rigid-motion Gram matrix by periodic trapezoid rule."""
    x = curve.nodes
    n = x.shape[0]
    mean_x = x.mean(axis=0)
    xx = x.T @ x / n
    norm2 = np.trace(xx)
    g = np.zeros((6, 6))
    g[:3, :3] = np.eye(3)
    g[:3, 3:] = -skew(mean_x)
    g[3:, :3] = skew(mean_x)
    g[3:, 3:] = norm2 * np.eye(3) - xx
    return RigidGram(g)


def equivariance_check(geometry, force, torque, rotation=None, translation=None):
    """Max deviation of the solve from exact rigid-body transform identities.

    Rotation R: solving the rotated problem with (R F, R T) must return
    (R v, R w).  Translation a: solving the shifted problem with
    (F, T + a x F) must return (v - w x a, w).  Torques are about the
    coordinate origin throughout.
    """
    force = np.asarray(force, dtype=float)
    torque = np.asarray(torque, dtype=float)
    _, kin = solve_mobility(geometry, force, torque)

    curve2 = transform_curve(geometry.curve, rotation=rotation, translation=translation)
    geom2 = SlenderGeometry(curve2, geometry.epsilon)

    if rotation is not None and translation is not None:
        raise ValueError("pass either a rotation or a translation, not both")
    if rotation is not None:
        r = np.asarray(rotation, dtype=float)
        _, kin2 = solve_mobility(geom2, r @ force, r @ torque)
        dev = max(
            np.linalg.norm(kin2.v - r @ kin.v),
            np.linalg.norm(kin2.omega - r @ kin.omega),
        )
    elif translation is not None:
        a = np.asarray(translation, dtype=float)
        _, kin2 = solve_mobility(geom2, force, torque + np.cross(a, force))
        dev = max(
            np.linalg.norm(kin2.v - (kin.v - np.cross(kin.omega, a))),
            np.linalg.norm(kin2.omega - kin.omega),
        )
    else:
        _, kin2 = solve_mobility(geom2, force, torque)
        dev = max(
            np.linalg.norm(kin2.v - kin.v), np.linalg.norm(kin2.omega - kin.omega)
        )
    return float(dev)
