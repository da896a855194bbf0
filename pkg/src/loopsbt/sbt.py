"""Slender-body line operators and their dense grid discretization.

The centerline velocity ascribed to a line force density f is
``u(s) = local(s) f(s) + integral(s)``, with a logarithmic local part and
a nonlocal integral whose Stokeslet singularity is cancelled by a
straight-line subtraction.  On the uniform grid both parts collapse to a
single dense 3N x 3N matrix: periodic trapezoid weights off the diagonal
and the (zero) jump-symmetric limit at the diagonal node.
"""

import numpy as np

from .errors import CurveError
from .spectral import TrigSeries, periodic_gradient

_EIGHT_PI = 8.0 * np.pi


class LineForceDensity:
    """Per-node force-per-length vectors on the uniform centerline grid."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[1] != 3:
            raise ValueError("expected (n, 3) force values, got %r" % (values.shape,))
        if not np.isfinite(values).all():
            raise ValueError("force density contains non-finite entries")
        self.values = values
        self.n = values.shape[0]

    def resample(self, n_new):
        """Trigonometric resampling onto a grid of ``n_new`` nodes."""
        series = TrigSeries(self.values)
        s_new = np.arange(n_new) / n_new
        return LineForceDensity(series(s_new))

    def c1_norm(self):
        """sup |f| + sup |f'| with the derivative taken spectrally."""
        mags = np.linalg.norm(self.values, axis=1)
        dmags = np.linalg.norm(periodic_gradient(self.values), axis=1)
        return float(mags.max() + dmags.max())


class SbtMatrix:
    """Dense map from stacked node forces to stacked node velocities.

    Blocks are 3x3 in node-major order, so the kernel symmetry shows up
    as literal matrix symmetry.
    """

    def __init__(self, matrix, epsilon, n):
        self.matrix = matrix
        self.epsilon = float(epsilon)
        self.n = int(n)

    def apply(self, forces):
        """Velocities at the nodes for node forces of shape (n, 3)."""
        forces = np.asarray(forces, dtype=float)
        return (self.matrix @ forces.reshape(-1)).reshape(self.n, 3)

    def symmetry_defect(self):
        """Relative Frobenius asymmetry ||A - A^T|| / ||A||."""
        a = self.matrix
        return np.linalg.norm(a - a.T) / np.linalg.norm(a)


def _lambda_matrix(e_t, epsilon):
    ee = np.outer(e_t, e_t)
    eye = np.eye(3)
    logfac = np.log(np.pi * epsilon / 4.0)
    return ((eye - 3.0 * ee) - 2.0 * (eye + ee) * logfac) / _EIGHT_PI


def local_lambda(frame, epsilon, s, f):
    """Local operator applied to a force vector at parameter ``s``."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    e_t, _, _ = frame.frame_at(s)
    return _lambda_matrix(e_t[0], epsilon) @ np.asarray(f, dtype=float)


def nonlocal_kernel(curve, frame, s_i, s_j):
    """Stokeslet and subtraction blocks (S_ij, T_ij) for distinct nodes.

    S is the free-space Stokeslet of the chord X(s_i) - X(s_j); T is the
    straight-line term (I + e_t e_t^T) / |sin(pi (s_i - s_j)) / pi|
    whose integral cancels the 1/|s - s'| blow-up of S.
    """
    r0 = np.asarray(curve.point(s_i) - curve.point(s_j), dtype=float).reshape(3)
    dist = np.linalg.norm(r0)
    if dist == 0.0:
        raise CurveError(
            "coincident centerline points at s=%r, s'=%r: curve self-intersects"
            % (s_i, s_j)
        )
    eye = np.eye(3)
    stokeslet = eye / dist + np.outer(r0, r0) / dist**3
    e_t, _, _ = frame.frame_at(s_i)
    e_t = e_t[0]
    denom = abs(np.sin(np.pi * (s_i - s_j)) / np.pi)
    subtraction = (eye + np.outer(e_t, e_t)) / denom
    return stokeslet, subtraction


def assemble_sbt_matrix(geometry):
    """Dense Nystrom matrix of the slender-body velocity map.

    Periodic trapezoid weights h = 1/N off the diagonal; each diagonal
    block carries the local operator minus the accumulated subtraction
    column sums.  The coincident quadrature node contributes nothing:
    the subtracted integrand has equal-and-opposite one-sided limits, so
    its jump-symmetric value is zero.
    """
    geometry.require_admissible()
    curve = geometry.curve
    frame = geometry.frame
    n = curve.n_grid
    if n < 16:
        raise ValueError("SBT grid needs at least 16 nodes, got %d" % n)
    h = 1.0 / n
    eps = geometry.epsilon

    x = curve.nodes
    e_t = frame.e_t
    s = curve.s_nodes

    diff = x[:, None, :] - x[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    off = ~np.eye(n, dtype=bool)
    if np.any(dist[off] == 0.0):
        raise CurveError("coincident grid nodes: curve self-intersects")

    inv = np.zeros_like(dist)
    inv[off] = 1.0 / dist[off]
    inv3 = inv**3
    # straight-line subtraction magnitudes, pairwise
    sins = np.abs(np.sin(np.pi * (s[:, None] - s[None, :])) / np.pi)
    tfac = np.zeros_like(sins)
    tfac[off] = 1.0 / sins[off]

    a = np.zeros((3 * n, 3 * n))
    w = h / _EIGHT_PI
    for ai in range(3):
        for bi in range(3):
            blocks = diff[:, :, ai] * diff[:, :, bi] * inv3
            if ai == bi:
                blocks = blocks + inv
            a[ai::3, bi::3] = w * blocks

    tsum = tfac.sum(axis=1)
    eye = np.eye(3)
    for i in range(n):
        ee = np.outer(e_t[i], e_t[i])
        a[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = _lambda_matrix(e_t[i], eps) - w * tsum[
            i
        ] * (eye + ee)
    return SbtMatrix(a, eps, n)


def sbt_velocity(geometry, force_fn, s_eval, n_quad=4096):
    """Direct high-resolution evaluation of the velocity at one point.

    Brute-force periodic trapezoid oracle for testing the assembled
    matrix; ``force_fn`` maps parameter arrays to (m, 3) forces.
    """
    geometry.require_admissible()
    curve = geometry.curve
    frame = geometry.frame
    eps = geometry.epsilon
    sq = np.arange(n_quad) / n_quad
    fq = np.asarray(force_fn(sq), dtype=float)
    f0 = np.asarray(force_fn(np.atleast_1d(s_eval)), dtype=float)[0]
    x0 = curve.point(np.atleast_1d(s_eval))[0]
    e_t, _, _ = frame.frame_at(s_eval)
    e_t = e_t[0]

    diff = x0[None, :] - curve.point(sq)
    dist = np.linalg.norm(diff, axis=1)
    mask = dist > 0.0
    sins = np.abs(np.sin(np.pi * (s_eval - sq)) / np.pi)

    stokes = diff[mask] * (diff[mask] * fq[mask]).sum(axis=1)[:, None] / dist[mask, None] ** 3
    stokes = stokes + fq[mask] / dist[mask, None]
    sub = (f0 + e_t * (e_t @ f0))[None, :] / sins[mask, None]
    integral = (stokes - sub).sum(axis=0) / n_quad
    return _lambda_matrix(e_t, eps) @ f0 + integral / _EIGHT_PI
