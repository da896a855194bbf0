"""Closed centerline geometry: curves, frames, tube parameterization.

A centerline is a unit-length closed curve X(s) on the periodic interval
[0, 1), represented by a trigonometric series so that derivatives up to
third order are available anywhere.  Around it we carry an orthonormal
frame (e_t, e_n1, e_n2) with constant twist rate, the derived shape
constants (chord-arc constant, curvature bounds, safe tube radius), and
the epsilon-tube surface with its area Jacobian.
"""

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import CurveError, FrameError, GeometryError
from .spectral import TrigSeries, antiderivative_series

CURVE_FAMILIES = ("circle", "ellipse", "wavy_circle")

# Parameter sets used by validation and convergence suites.
CATALOG = (
    ("circle", {}),
    ("ellipse", {"a": 1.0, "b": 0.5}),
    ("wavy_circle", {"amplitude": 0.02, "mode": 3}),
)

_ARCLENGTH_TOL = 1e-8


class ClosedCurve:
    """Arclength-parameterized closed curve with spectral derivatives."""

    def __init__(self, series, n_grid):
        self.series = series
        self.n_grid = int(n_grid)
        self.s_nodes = np.arange(self.n_grid) / self.n_grid
        self.nodes = series(self.s_nodes)

    def point(self, s, deriv=0):
        """X(s) and derivatives d^m X / ds^m for m <= 3."""
        return self.series(s, deriv=deriv)

    def tangent(self, s):
        return self.series(s, deriv=1)

    def curvature(self, s):
        return np.linalg.norm(self.series(s, deriv=2), axis=-1)

    def arclength_residual(self, n_test=4096):
        """max | |X'(s)| - 1 | over a fine test grid."""
        s = np.arange(n_test) / n_test
        speed = np.linalg.norm(self.series(s, deriv=1), axis=1)
        return float(np.abs(speed - 1.0).max())


class MaterialFrame:
    """Orthonormal frame along the curve with constant twist rate.

    Node arrays hold the frame on the curve grid; the spectral normal
    series supports evaluation at arbitrary s (used by the tube surface,
    whose grid need not match the curve grid).
    """

    def __init__(self, curve, normal_series, kappa3):
        self.curve = curve
        self._normal = normal_series
        self.kappa3 = float(kappa3)
        et, en1, en2 = self.frame_at(curve.s_nodes)
        self.e_t = et
        self.e_n1 = en1
        self.e_n2 = en2
        k1, k2 = self.curvatures_at(curve.s_nodes)
        self.kappa1 = k1
        self.kappa2 = k2

    def frame_at(self, s):
        """Evaluate (e_t, e_n1, e_n2) at arbitrary parameters.

        The normal is re-orthonormalized against the tangent so the
        triad is orthonormal to rounding regardless of interpolation.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        et = self.curve.point(s, 1)
        et = et / np.linalg.norm(et, axis=1, keepdims=True)
        en1 = self._normal(s)
        en1 = en1 - (en1 * et).sum(axis=1, keepdims=True) * et
        en1 = en1 / np.linalg.norm(en1, axis=1, keepdims=True)
        en2 = np.cross(et, en1)
        return et, en1, en2

    def curvatures_at(self, s):
        """(kappa1, kappa2) = X'' resolved on the frame normals."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        ddx = self.curve.point(s, 2)
        _, en1, en2 = self.frame_at(s)
        return (ddx * en1).sum(axis=1), (ddx * en2).sum(axis=1)

    def ode_residual(self):
        """Max norm of the frame-ODE defect on the curve grid.

        Derivatives come from the spectral representations themselves
        (curve series for e_t, normal series for e_n1, product rule for
        e_n2) and are compared with the right-hand sides built from
        (kappa1, kappa2, kappa3).
        """
        s = self.curve.s_nodes
        k1 = self.kappa1[:, None]
        k2 = self.kappa2[:, None]
        k3 = self.kappa3
        ddx = self.curve.point(s, 2)
        den1 = self._normal(s, deriv=1)
        den2 = np.cross(ddx, self.e_n1) + np.cross(self.e_t, den1)
        res_t = ddx - (k1 * self.e_n1 + k2 * self.e_n2)
        res_1 = den1 - (-k1 * self.e_t + k3 * self.e_n2)
        res_2 = den2 - (-k2 * self.e_t - k3 * self.e_n1)
        return max(
            np.linalg.norm(res_t, axis=1).max(),
            np.linalg.norm(res_1, axis=1).max(),
            np.linalg.norm(res_2, axis=1).max(),
        )


class GeometryConstants:
    """Shape constants (c_gamma, kappa_max, xi_max, r_max) of a curve."""

    def __init__(self, c_gamma, kappa_max, xi_max, r_max):
        self.c_gamma = float(c_gamma)
        self.kappa_max = float(kappa_max)
        self.xi_max = float(xi_max)
        self.r_max = float(r_max)

    def astuple(self):
        return (self.c_gamma, self.kappa_max, self.xi_max, self.r_max)

    def __repr__(self):
        return (
            "GeometryConstants(c_gamma=%.6g, kappa_max=%.6g, xi_max=%.6g, "
            "r_max=%.6g)" % self.astuple()
        )


class SlenderGeometry:
    """Curve + frame + tube radius with admissibility bookkeeping."""

    def __init__(self, curve, epsilon, frame=None, constants=None):
        if epsilon <= 0.0:
            raise GeometryError("tube radius must be positive, got %g" % epsilon)
        self.curve = curve
        self.epsilon = float(epsilon)
        self.frame = frame if frame is not None else build_frame(curve)
        self.constants = (
            constants if constants is not None else geometry_constants(curve)
        )
        self.admissible = self.epsilon < self.constants.r_max / 4.0

    def require_admissible(self):
        if not self.admissible:
            raise GeometryError(
                "epsilon=%g is not admissible (requires epsilon < r_max/4 = %g)"
                % (self.epsilon, self.constants.r_max / 4.0)
            )


def _raw_family(kind, params):
    """Closed-form raw curve c(t) and speed |c'(t)| for each family."""
    p = dict(params or {})
    two_pi = 2.0 * np.pi

    if kind == "circle":
        if p:
            raise CurveError("circle takes no parameters, got %r" % sorted(p))
        r0 = 1.0 / two_pi

        def pos(t):
            a = two_pi * t
            return np.stack([r0 * np.cos(a), r0 * np.sin(a), np.zeros_like(a)], axis=-1)

        def speed(t):
            return np.ones_like(np.asarray(t, dtype=float))

        return pos, speed

    if kind == "ellipse":
        a = float(p.pop("a", 1.0))
        b = float(p.pop("b", 0.5))
        if p:
            raise CurveError("unknown ellipse parameters %r" % sorted(p))
        if a <= 0.0 or b <= 0.0:
            raise CurveError("ellipse semi-axes must be positive, got a=%g b=%g" % (a, b))

        def pos(t):
            ang = two_pi * t
            return np.stack(
                [a * np.cos(ang), b * np.sin(ang), np.zeros_like(ang)], axis=-1
            )

        def speed(t):
            ang = two_pi * np.asarray(t, dtype=float)
            return two_pi * np.sqrt((a * np.sin(ang)) ** 2 + (b * np.cos(ang)) ** 2)

        return pos, speed

    if kind == "wavy_circle":
        amp = float(p.pop("amplitude", 0.02))
        mode = p.pop("mode", 3)
        if p:
            raise CurveError("unknown wavy_circle parameters %r" % sorted(p))
        if mode != int(mode) or int(mode) < 2:
            raise CurveError("wavy_circle mode must be an integer >= 2, got %r" % mode)
        mode = int(mode)
        if amp < 0.0 or amp >= 0.5:
            raise CurveError(
                "wavy_circle amplitude must lie in [0, 0.5), got %g" % amp
            )

        def pos(t):
            ang = two_pi * t
            return np.stack(
                [np.cos(ang), np.sin(ang), amp * np.sin(mode * ang)], axis=-1
            )

        def speed(t):
            ang = two_pi * np.asarray(t, dtype=float)
            return two_pi * np.sqrt(1.0 + (amp * mode * np.cos(mode * ang)) ** 2)

        return pos, speed

    raise CurveError("unknown curve family %r (choose from %s)" % (kind, CURVE_FAMILIES))


def build_curve(kind, params=None, n_grid=256):
    """Construct a unit-length arclength-parameterized catalog curve.

    The raw parametric curve is reparameterized numerically: cumulative
    arclength from a spectral antiderivative of the speed, inverted per
    node by Newton iteration, rescaled to total length one, and refit as
    a trigonometric series.  Descriptors that fail the residual check are
    rejected.
    """
    if n_grid < 8:
        raise CurveError("n_grid must be at least 8, got %d" % n_grid)
    pos, speed = _raw_family(kind, params)

    n_fit = max(1024, 4 * int(n_grid))
    m_speed = 4096
    t_speed = np.arange(m_speed) / m_speed
    g = speed(t_speed)
    gmin = g.min()
    if not np.isfinite(g).all() or gmin <= 1e-12:
        raise CurveError("degenerate %s: vanishing speed along the raw curve" % kind)
    total, anti = antiderivative_series(g)
    anti0 = anti(0.0)

    def cumlen(t):
        return total * t + anti(t) - anti0

    # invert cumulative arclength at the fit nodes
    targets = np.arange(n_fit) / n_fit * total
    t = np.arange(n_fit) / n_fit
    for _ in range(60):
        resid = cumlen(t) - targets
        t = t - resid / speed(t)
        if np.abs(resid).max() <= 1e-14 * max(total, 1.0):
            break
    else:
        raise CurveError("arclength inversion stalled for %s" % kind)

    samples = pos(t) / total
    series = TrigSeries(samples)
    if series.tail_ratio() > 1e-10:
        raise CurveError(
            "%s is not resolved by the trigonometric fit (tail %.2e); "
            "parameters are too extreme" % (kind, series.tail_ratio())
        )
    curve = ClosedCurve(series, n_grid)
    resid = curve.arclength_residual()
    if resid > _ARCLENGTH_TOL:
        raise CurveError(
            "arclength reparameterization residual %.3e exceeds %.0e for %s"
            % (resid, _ARCLENGTH_TOL, kind)
        )
    return curve


def transform_curve(curve, rotation=None, translation=None):
    """New ClosedCurve with nodes R X(s) + a; exact on the series."""
    coef = curve.series.coef.copy()
    if rotation is not None:
        coef = coef @ np.asarray(rotation, dtype=float).T
    if translation is not None:
        coef = coef.copy()
        coef[0] += np.asarray(translation, dtype=float)
    series = TrigSeries.__new__(TrigSeries)
    series.m = curve.series.m
    series.coef = coef
    series._k = curve.series._k
    series._squeeze = False
    return ClosedCurve(series, curve.n_grid)


def build_frame(curve, n_steps=4096):
    """Constant-twist orthonormal frame from parallel transport.

    A zero-twist normal is transported around the loop with fixed-step
    RK4; the holonomy angle phi in [0, 2*pi) by which it fails to close
    is distributed uniformly as the constant twist rate
    kappa3 = -(phi - 2*pi*k) with k chosen so |kappa3| <= pi.
    """
    half = np.arange(2 * n_steps + 1) / (2.0 * n_steps)
    tang = curve.point(half, 1)
    tang = tang / np.linalg.norm(tang, axis=1, keepdims=True)
    dtang = curve.point(half, 2)

    def rhs(u, idx):
        return -(u @ dtang[idx]) * tang[idx]

    # seed with the curve normal when curvature allows, else the most
    # orthogonal coordinate axis
    t0 = tang[0]
    ddx0 = dtang[0]
    kap0 = np.linalg.norm(ddx0)
    if kap0 > 1e-8:
        u = ddx0 / kap0
    else:
        u = np.zeros(3)
        u[np.argmin(np.abs(t0))] = 1.0
    u = u - (u @ t0) * t0
    u = u / np.linalg.norm(u)

    h = 1.0 / n_steps
    transported = np.empty((n_steps + 1, 3))
    transported[0] = u
    for j in range(n_steps):
        i0, i1, i2 = 2 * j, 2 * j + 1, 2 * j + 2
        k1 = rhs(u, i0)
        k2 = rhs(u + 0.5 * h * k1, i1)
        k3 = rhs(u + 0.5 * h * k2, i1)
        k4 = rhs(u + h * k3, i2)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        transported[j + 1] = u

    t_nodes = tang[::2]
    v0 = np.cross(t_nodes[0], transported[0])
    u_end = transported[-1]
    phi = np.arctan2(u_end @ v0, u_end @ transported[0]) % (2.0 * np.pi)
    kappa3 = -phi if phi <= np.pi else 2.0 * np.pi - phi

    s_nodes = np.arange(n_steps) / n_steps
    ang = kappa3 * s_nodes
    binormal = np.cross(t_nodes[:-1], transported[:-1])
    twisted = (
        np.cos(ang)[:, None] * transported[:-1] + np.sin(ang)[:, None] * binormal
    )
    # re-orthonormalize before fitting; RK4 drift is ~1e-12 but free to remove
    twisted = twisted - (twisted * t_nodes[:-1]).sum(axis=1, keepdims=True) * t_nodes[:-1]
    twisted = twisted / np.linalg.norm(twisted, axis=1, keepdims=True)

    closure = np.cos(kappa3) * u_end + np.sin(kappa3) * np.cross(t_nodes[-1], u_end)
    defect = np.linalg.norm(closure - twisted[0])
    if defect > 1e-6:
        raise FrameError(
            "twist-corrected frame fails to close: defect %.3e" % defect
        )

    return MaterialFrame(curve, TrigSeries(twisted), kappa3)


def _polish_max(fun, s0, width):
    res = minimize_scalar(
        lambda s: -fun(s), bounds=(s0 - width, s0 + width), method="bounded",
        options={"xatol": 1e-12},
    )
    return -res.fun


def _pair_ratio(curve):
    def ratio(z):
        s, sp = z
        chord = np.linalg.norm(curve.point(s) - curve.point(sp))
        d = abs((s - sp) % 1.0)
        d = min(d, 1.0 - d)
        if d <= 0.0:
            return np.inf
        return chord / d

    return ratio


def geometry_constants(curve, oversample=4):
    """Derived shape constants evaluated on an oversampled grid.

    Grid candidates for each extremum are polished by local continuous
    optimization so the values are grid-independent well below the 1e-6
    stability target.
    """
    n = min(max(oversample * curve.n_grid, 512), 2048)
    s = np.arange(n) / n
    x = curve.point(s)
    ddx = curve.point(s, 2)
    dddx = curve.point(s, 3)

    # curvature and third-derivative maxima
    kap = np.linalg.norm(ddx, axis=1)
    xi = np.linalg.norm(dddx, axis=1)
    kappa_max = _polish_max(
        lambda t: np.linalg.norm(curve.point(t, 2)), s[int(np.argmax(kap))], 2.0 / n
    )
    xi_max = _polish_max(
        lambda t: np.linalg.norm(curve.point(t, 3)), s[int(np.argmax(xi))], 2.0 / n
    )

    # pairwise chord distances and periodic parameter separations
    diff = x[:, None, :] - x[None, :, :]
    chord = np.linalg.norm(diff, axis=2)
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :])
    sep = np.minimum(sep, n - sep) / n

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sep > 0, chord / sep, np.inf)
    i, j = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    guess = np.array([s[i], s[j]])
    res = minimize(
        _pair_ratio(curve), guess, method="Nelder-Mead",
        options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 400},
    )
    c_gamma = min(float(ratio[i, j]), float(res.fun))
    if not np.isfinite(c_gamma) or c_gamma <= 0.0:
        raise CurveError("degenerate chord-arc constant: curve self-intersects")

    # minimal non-local self-distance: doubly-critical pairs (chord
    # orthogonal to both tangents) further apart than 1/(4 kappa_max)
    tan = curve.point(s, 1)
    h1 = np.einsum("ijk,ik->ij", diff, tan)
    h2 = np.einsum("ijk,jk->ij", diff, tan)
    nonlocal_mask = sep > 1.0 / (4.0 * kappa_max)
    cell = (
        nonlocal_mask[:-1, :-1]
        & (np.minimum.reduce([h1[:-1, :-1], h1[1:, :-1], h1[:-1, 1:], h1[1:, 1:]]) <= 0)
        & (np.maximum.reduce([h1[:-1, :-1], h1[1:, :-1], h1[:-1, 1:], h1[1:, 1:]]) >= 0)
        & (np.minimum.reduce([h2[:-1, :-1], h2[1:, :-1], h2[:-1, 1:], h2[1:, 1:]]) <= 0)
        & (np.maximum.reduce([h2[:-1, :-1], h2[1:, :-1], h2[:-1, 1:], h2[1:, 1:]]) >= 0)
    )
    if cell.any():
        ci, cj = np.nonzero(cell)
        corners = np.minimum.reduce(
            [chord[ci, cj], chord[ci + 1, cj], chord[ci, cj + 1], chord[ci + 1, cj + 1]]
        )
        delta = float(corners.min())
    else:
        # no critical pair resolved; fall back to the smallest non-local chord
        delta = float(chord[nonlocal_mask].min())
    r_max = min(1.0 / (2.0 * kappa_max), delta / 2.0)

    return GeometryConstants(c_gamma, kappa_max, xi_max, r_max)


def surface_point(geometry, s, theta):
    """Tube surface point X(s) + eps * e_rho(s, theta)."""
    geometry.require_admissible()
    scalar = np.ndim(s) == 0 and np.ndim(theta) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    _, en1, en2 = geometry.frame.frame_at(s)
    erho = np.cos(theta)[:, None] * en1 + np.sin(theta)[:, None] * en2
    pts = geometry.curve.point(s) + geometry.epsilon * erho
    return pts[0] if scalar else pts


def surface_jacobian(geometry, s, theta):
    """Area element eps * (1 - eps * (kappa1 cos(theta) + kappa2 sin(theta)))."""
    geometry.require_admissible()
    scalar = np.ndim(s) == 0 and np.ndim(theta) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k1, k2 = geometry.frame.curvatures_at(s)
    eps = geometry.epsilon
    jac = eps * (1.0 - eps * (k1 * np.cos(theta) + k2 * np.sin(theta)))
    return jac[0] if scalar else jac
