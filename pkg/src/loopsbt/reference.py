"""Rigid mobility on the true tube surface via regularized Stokeslets.

An independent check on the centerline solver: the classical exterior
mobility problem is discretized as a first-kind single-layer potential
collocated on the parametric (s, theta) product grid, with the six rigid
velocity components as extra unknowns and the total force/torque rows
closing the square system.  The Stokeslet is replaced by a blob-smoothed
kernel that stays finite at coincident points, so no singular quadrature
is needed; the blob width is tied to the local mesh spacing.
"""

import numpy as np
from scipy.linalg import get_lapack_funcs, lstsq, lu_factor, lu_solve

from .errors import ConditioningError
from .geometry import surface_jacobian
from .mobility import RigidKinematics
from .util import skew

COND_LIMIT = 1e12
LSTSQ_TRIGGER = 1e10
_CHUNK_BYTES = 2 * 10**8


class SurfaceMesh:
    """Quadrature mesh of the epsilon-tube: nodes, weights, outward normals."""

    def __init__(self, geometry, ns, ntheta, nodes, weights, normals):
        self.geometry = geometry
        self.ns = int(ns)
        self.ntheta = int(ntheta)
        self.nodes = nodes
        self.weights = weights
        self.normals = normals

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    def area(self):
        return float(self.weights.sum())


class SurfaceTraction:
    """Per-node surface force density (force/area) on the mesh."""

    def __init__(self, mesh, values):
        values = np.asarray(values, dtype=float)
        if not np.isfinite(values).all():
            raise ValueError("traction contains non-finite entries")
        self.mesh = mesh
        self.values = values

    def total_force(self):
        return self.mesh.weights @ self.values

    def total_torque(self):
        return self.mesh.weights @ np.cross(self.mesh.nodes, self.values)


def build_surface_mesh(geometry, ns, ntheta):
    """Product-grid mesh with Jacobian quadrature weights."""
    geometry.require_admissible()
    if ns < 8 or ntheta < 8:
        raise ValueError("surface mesh needs ns, ntheta >= 8, got (%d, %d)" % (ns, ntheta))
    s = np.arange(ns) / ns
    theta = 2.0 * np.pi * np.arange(ntheta) / ntheta

    curve = geometry.curve
    frame = geometry.frame
    eps = geometry.epsilon
    x = curve.point(s)
    _, en1, en2 = frame.frame_at(s)
    k1, k2 = frame.curvatures_at(s)

    ct = np.cos(theta)
    st = np.sin(theta)
    # node index m = i * ntheta + j (s-major)
    normals = en1[:, None, :] * ct[None, :, None] + en2[:, None, :] * st[None, :, None]
    nodes = x[:, None, :] + eps * normals
    jac = eps * (1.0 - eps * (k1[:, None] * ct[None, :] + k2[:, None] * st[None, :]))
    if jac.min() <= 0.0:
        raise ValueError("non-positive surface Jacobian; geometry too fat for its frame")
    weights = jac * (1.0 / ns) * (2.0 * np.pi / ntheta)

    return SurfaceMesh(
        geometry,
        ns,
        ntheta,
        nodes.reshape(-1, 3),
        weights.reshape(-1),
        normals.reshape(-1, 3),
    )


def blob_width(mesh, delta_factor):
    """Regularization length tied to the coarser of the two mesh spacings."""
    eps = mesh.geometry.epsilon
    return delta_factor * max(1.0 / mesh.ns, eps * 2.0 * np.pi / mesh.ntheta)


def _fill_stokeslet_columns(matrix, nodes, weights, delta):
    """Write weighted blob-Stokeslet blocks into matrix[:3M, :3M], chunked."""
    m = nodes.shape[0]
    d2 = delta * delta
    chunk = max(1, int(_CHUNK_BYTES / (nodes.size * 8 * 4)))
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        diff = nodes[:, None, :] - nodes[None, lo:hi, :]
        r2 = (diff * diff).sum(axis=2)
        denom = (r2 + d2) ** 1.5
        fdiag = (r2 + 2.0 * d2) / denom / (8.0 * np.pi)
        fouter = weights[None, lo:hi] / denom / (8.0 * np.pi)
        fdiag = fdiag * weights[None, lo:hi]
        for a in range(3):
            for b in range(3):
                block = fouter * diff[:, :, a] * diff[:, :, b]
                if a == b:
                    block = block + fdiag
                matrix[a : 3 * m : 3, 3 * lo + b : 3 * hi : 3] = block


def _assemble_reference_system(mesh, delta):
    m = mesh.n_nodes
    dim = 3 * m + 6
    # Fortran order lets the factorization run in place on the big rungs
    k = np.zeros((dim, dim), order="F")
    _fill_stokeslet_columns(k, mesh.nodes, mesh.weights, delta)
    eye = np.eye(3)
    for a in range(m):
        r = slice(3 * a, 3 * a + 3)
        xsk = skew(mesh.nodes[a])
        k[r, 3 * m : 3 * m + 3] = -eye
        k[r, 3 * m + 3 :] = xsk
        k[3 * m : 3 * m + 3, r] = mesh.weights[a] * eye
        k[3 * m + 3 :, r] = mesh.weights[a] * xsk
    return k


def solve_reference_mobility(mesh, force, torque, delta_factor=1.0):
    """Traction and rigid velocities from the surface collocation system.

    delta_factor scales the blob width relative to the mesh spacing;
    values in [0.5, 4] are supported.  The square system is factorized
    with partial pivoting; a least-squares fallback handles marginally
    conditioned systems, and anything past the hard condition limit is
    rejected with advice to change delta_factor or resolution.
    """
    if not 0.5 <= delta_factor <= 4.0:
        raise ValueError("delta_factor must lie in [0.5, 4], got %g" % delta_factor)
    mesh.geometry.require_admissible()
    delta = blob_width(mesh, delta_factor)
    k = _assemble_reference_system(mesh, delta)
    m = mesh.n_nodes

    rhs = np.zeros(3 * m + 6)
    rhs[3 * m : 3 * m + 3] = np.asarray(force, dtype=float)
    rhs[3 * m + 3 :] = np.asarray(torque, dtype=float)

    anorm = np.abs(k).sum(axis=0).max()
    lu_piv = lu_factor(k, overwrite_a=True, check_finite=False)
    (gecon,) = get_lapack_funcs(("gecon",), (lu_piv[0],))
    rcond, info = gecon(lu_piv[0], anorm, norm="1")
    cond = np.inf if (info != 0 or rcond == 0.0) else 1.0 / rcond
    if cond > COND_LIMIT:
        raise ConditioningError(
            "reference system condition estimate %.3e exceeds %.1e; try a "
            "different delta_factor or resolution" % (cond, COND_LIMIT),
            cond,
        )
    if cond > LSTSQ_TRIGGER:
        # marginal square system: re-solve in the least-squares sense
        k2 = _assemble_reference_system(mesh, delta)
        sol, _, _, _ = lstsq(k2, rhs, lapack_driver="gelsy")
    else:
        sol = lu_solve(lu_piv, rhs, check_finite=False)

    traction = SurfaceTraction(mesh, sol[: 3 * m].reshape(m, 3))
    kin = RigidKinematics(sol[3 * m : 3 * m + 3], sol[3 * m + 3 :], condition=cond)
    return traction, kin


class ConvergenceReport:
    """Ladder of reference solves with Richardson bookkeeping."""

    def __init__(self, resolutions, kinematics, diffs, order, extrapolated, err_est, monotone):
        self.resolutions = resolutions
        self.kinematics = kinematics
        self.diffs = diffs
        self.order = order
        self.extrapolated = extrapolated
        self.err_est = err_est
        self.monotone = monotone

    @property
    def finest(self):
        return self.kinematics[-1]


def reference_self_convergence(geometry, force, torque, resolutions, delta_factor=1.0):
    """Run a resolution ladder and estimate the finest-rung error.

    Needs at least three increasing resolutions; pairwise velocity
    differences feed a Richardson fit whose extrapolated limit gives the
    error estimate.  Non-monotone ladders are flagged, not fatal, and
    fall back to the last difference as a conservative estimate.
    """
    resolutions = [tuple(r) for r in resolutions]
    if len(resolutions) < 3:
        raise ValueError("need at least 3 ladder resolutions, got %d" % len(resolutions))
    ns_list = [r[0] for r in resolutions]
    if any(b <= a for a, b in zip(ns_list, ns_list[1:])):
        raise ValueError("ladder resolutions must increase in ns: %r" % (ns_list,))

    kins = []
    for ns, ntheta in resolutions:
        mesh = build_surface_mesh(geometry, ns, ntheta)
        _, kin = solve_reference_mobility(mesh, force, torque, delta_factor)
        kins.append(kin)

    diffs = [
        np.linalg.norm(b.v - a.v) + np.linalg.norm(b.omega - a.omega)
        for a, b in zip(kins, kins[1:])
    ]
    monotone = all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))

    ratio = ns_list[-1] / ns_list[-2]
    if diffs[-1] > 0 and diffs[-2] > 0 and monotone:
        order = np.log(diffs[-2] / diffs[-1]) / np.log(ratio)
    else:
        order = 0.0
    fin = kins[-1]
    if order > 0.1:
        gain = ratio**order - 1.0
        ext_v = fin.v + (fin.v - kins[-2].v) / gain
        ext_w = fin.omega + (fin.omega - kins[-2].omega) / gain
        err_est = diffs[-1] / gain
    else:
        ext_v, ext_w = fin.v, fin.omega
        err_est = diffs[-1]
    extrapolated = RigidKinematics(ext_v, ext_w)
    return ConvergenceReport(resolutions, kins, diffs, float(order), extrapolated, float(err_est), monotone)
