"""Convex hypersurfaces, cyclic configurations and the perimeter functional.

Conventions
-----------
A body is the zero set of F: R^{m+1} -> R with F < 0 inside. The inward unit
normal is nu = -grad F / |grad F|. A configuration is an (n, m+1) array of
points on the surface, indexed cyclically, with x_i != x_{i+1}.

    L(x) = -sum_i |x_{i+1} - x_i|,      phi(x) = prod_i |x_{i+1} - x_i|^2.

Gradients returned here are the gradients of these functions restricted to
the product of tangent spaces, represented as ambient vectors orthogonal to
the normals. Most helpers with a leading underscore accept a batch axis,
i.e. arrays of shape (..., n, m+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class DegenerateConfigurationError(ValueError):
    """Two cyclically adjacent points coincide (the configuration lies on Sigma)."""


class ProjectionError(RuntimeError):
    """Projection to the surface failed to converge."""


class ChartError(ProjectionError):
    """The local chart used for finite differences broke down."""


class GrazingError(ValueError):
    """Incoming direction is tangent to the surface."""


# -- bodies --------------------------------------------------------------------

class ConvexHypersurface:
    """Implicitly defined closed hypersurface in R^{m+1}.

    ``func``, ``grad`` and ``hess`` must accept arrays of shape (..., m+1).
    Strict convexity of a general body is the caller's responsibility and is
    recorded in ``convex_asserted``.
    """

    exact_projection = False

    def __init__(self, dim: int, func: Callable, grad: Callable, hess: Callable | None = None,
                 scale: float = 1.0, convex_asserted: bool = False):
        if dim < 1:
            raise ValueError("surface dimension must be >= 1")
        self.dim = dim
        self._func = func
        self._grad = grad
        self._hess = hess
        self.scale = float(scale)
        self.convex_asserted = convex_asserted

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def is_round(self) -> bool:
        return False

    @property
    def surface_tolerance(self) -> float:
        return 1e-10 * self.scale

    def value(self, x):
        return self._func(np.asarray(x, dtype=float))

    def gradient(self, x):
        return self._grad(np.asarray(x, dtype=float))

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        if self._hess is not None:
            return self._hess(x)
        h = 1e-6 * self.scale
        eye = np.eye(self.ambient_dim)
        cols = [(self._grad(x + h * e) - self._grad(x - h * e)) / (2 * h) for e in eye]
        out = np.stack(cols, axis=-1)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def normal(self, x):
        g = self.gradient(x)
        return -g / np.linalg.norm(g, axis=-1, keepdims=True)

    def project(self, x, max_iter: int = 50):
        """Damped Newton along grad F onto {F = 0}."""
        y = np.array(x, dtype=float)
        tol = 1e-13 * self.scale
        for _ in range(max_iter):
            f = self.value(y)
            if np.all(np.abs(f) <= tol):
                return y
            g = self.gradient(y)
            step = (f / np.sum(g * g, axis=-1))[..., None] * g
            nrm = np.linalg.norm(step, axis=-1, keepdims=True)
            cap = 0.5 * self.scale
            step = np.where(nrm > cap, step * cap / np.maximum(nrm, 1e-300), step)
            y = y - step
        if np.all(np.abs(self.value(y)) <= 1e2 * tol):
            return y
        raise ProjectionError("Newton projection onto the surface did not converge")


class Ellipsoid(ConvexHypersurface):
    """sum_j x_j^2 / a_j^2 = 1 with semi-axes a_j > 0."""

    exact_projection = True

    def __init__(self, axes):
        axes = np.asarray(axes, dtype=float)
        if axes.ndim != 1 or len(axes) < 2:
            raise ValueError("an ellipsoid needs at least two semi-axes")
        if not np.all(axes > 0) or not np.all(np.isfinite(axes)):
            raise ValueError(f"semi-axes must be positive, got {axes}")
        self.axes = axes
        self._inv2 = 1.0 / axes**2
        super().__init__(len(axes) - 1, self._f, self._g, self._h,
                         scale=float(np.mean(axes)), convex_asserted=True)

    def _f(self, x):
        return np.sum(x * x * self._inv2, axis=-1) - 1.0

    def _g(self, x):
        return 2.0 * x * self._inv2

    def _h(self, x):
        return np.broadcast_to(np.diag(2.0 * self._inv2), x.shape + (x.shape[-1],)).copy()

    @property
    def is_round(self) -> bool:
        return bool(np.all(self.axes == self.axes[0]))

    def project(self, x, max_iter: int = 3):
        """Radial scaling onto the surface followed by Newton polishing along grad F."""
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x * self._inv2, axis=-1, keepdims=True)
        if np.any(q == 0):
            raise ValueError("cannot project the center of the ellipsoid")
        y = x / np.sqrt(q)
        for _ in range(max_iter):
            f = self._f(y)
            if np.all(np.abs(f) <= 1e-15):
                break
            g = self._g(y)
            y = y - (f / np.sum(g * g, axis=-1))[..., None] * g
        return y

    def curvature_radii(self) -> tuple[float, float]:
        """(r, R): radii of the inner rolling ball and of the enclosing tangent ball."""
        a = self.axes
        return float(a.min() ** 2 / a.max()), float(a.max() ** 2 / a.min())

    def ray_exit(self, point, direction):
        """Second intersection of the chord from ``point`` along ``direction``."""
        p = np.asarray(point, dtype=float)
        d = np.asarray(direction, dtype=float)
        A = np.sum(d * d * self._inv2)
        B = 2.0 * np.sum(p * d * self._inv2)
        C = np.sum(p * p * self._inv2) - 1.0
        disc = max(B * B - 4 * A * C, 0.0)
        roots = ((-B - np.sqrt(disc)) / (2 * A), (-B + np.sqrt(disc)) / (2 * A))
        t = max(roots)
        if t <= 0:
            raise GrazingError("ray does not re-enter the body")
        return self.project(p + t * d)

    def __repr__(self):
        return f"Ellipsoid(axes={self.axes.tolist()})"


def sphere(m: int, radius: float = 1.0) -> Ellipsoid:
    """Round sphere S^m of the given radius centered at the origin."""
    return Ellipsoid([radius] * (m + 1))


# -- configurations ------------------------------------------------------------

@dataclass(frozen=True)
class CyclicConfiguration:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValueError("a configuration needs an (n, m+1) array with n >= 2")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def validate(self, body: ConvexHypersurface) -> CyclicConfiguration:
        if self.points.shape[1] != body.ambient_dim:
            raise ValueError("configuration and body live in different dimensions")
        off = np.abs(body.value(self.points))
        if np.any(off > body.surface_tolerance):
            raise ValueError(f"points are off the surface by up to {off.max():.3e}")
        check_edges(self.points)
        return self

    def transformed(self, shift: int = 0, reverse: bool = False) -> CyclicConfiguration:
        return CyclicConfiguration(dihedral_transform(self.points, shift, reverse))


def _points(config) -> np.ndarray:
    if isinstance(config, CyclicConfiguration):
        return config.points
    return np.asarray(config, dtype=float)


def dihedral_transform(points, shift: int = 0, reverse: bool = False) -> np.ndarray:
    """Re-index by x_i -> x_{i+shift}, optionally followed by reversal."""
    pts = np.roll(np.asarray(points), -shift, axis=-2)
    if reverse:
        pts = pts[..., ::-1, :]
    return pts


def dihedral_images(points):
    """All 2n re-indexings of a configuration."""
    n = np.asarray(points).shape[-2]
    for rev in (False, True):
        for k in range(n):
            yield dihedral_transform(points, k, rev)


def _edges(x):
    """Forward edge vectors x_{i+1} - x_i and their lengths."""
    d = np.roll(x, -1, axis=-2) - x
    return d, np.linalg.norm(d, axis=-1)


def check_edges(x):
    _, l = _edges(np.asarray(x, dtype=float))
    if np.any(l == 0):
        raise DegenerateConfigurationError("cyclically adjacent points coincide")
    return l


def edge_lengths(config) -> np.ndarray:
    """Lengths |x_{i+1} - x_i|, i = 0..n-1."""
    return check_edges(_points(config))


def length(config) -> float:
    """L = minus the perimeter of the inscribed closed polygon.

    The sum is correctly rounded, hence independent of the order of the edges.
    """
    return -math.fsum(edge_lengths(config))


def phi(config) -> float:
    return float(np.prod(edge_lengths(config) ** 2))


def min_edge(config) -> float:
    return float(np.min(edge_lengths(config)))


def in_G_epsilon(config, eps: float) -> bool:
    return float(np.prod(edge_lengths(config))) >= eps


def _tangent_part(body, x, v):
    nu = body.normal(x)
    return v - np.sum(v * nu, axis=-1, keepdims=True) * nu


def _unit_edges(x):
    d, l = _edges(x)
    if np.any(l == 0):
        raise DegenerateConfigurationError("cyclically adjacent points coincide")
    e_fwd = d / l[..., None]                  # toward x_{i+1}
    e_bwd = -np.roll(e_fwd, 1, axis=-2)       # toward x_{i-1}
    l_bwd = np.roll(l, 1, axis=-1)            # |x_i - x_{i-1}|
    return e_fwd, e_bwd, l, l_bwd


def _ambient_length_gradient(x):
    e_fwd, e_bwd, _, _ = _unit_edges(x)
    return e_fwd + e_bwd


def tangential_gradient(body, config) -> np.ndarray:
    """Gradient of L on the product of tangent spaces.

    Component i is e_{i-1} + e_{i+1} - (cos a_i + cos b_i) nu_i, where e_{i+-1}
    are the unit vectors from x_i toward its neighbours and a_i, b_i their
    angles with the inward normal.
    """
    x = _points(config)
    return _tangent_part(body, x, _ambient_length_gradient(x))


def log_phi_gradient(body, config) -> np.ndarray:
    """Gradient of ln(phi) on the product of tangent spaces."""
    x = _points(config)
    e_fwd, e_bwd, l, l_bwd = _unit_edges(x)
    amb = -2.0 * (e_bwd / l_bwd[..., None] + e_fwd / l[..., None])
    return _tangent_part(body, x, amb)


def _angle(u, v):
    """Angle between vectors, accurate near 0 and pi."""
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return 2.0 * np.arctan2(np.linalg.norm(u - v, axis=-1), np.linalg.norm(u + v, axis=-1))


def vertex_angles(body, config):
    """(alpha, beta, theta) per vertex: angles of the backward/forward edges
    with the inward normal, and the angle between the two edges."""
    x = _points(config)
    e_fwd, e_bwd, _, _ = _unit_edges(x)
    nu = body.normal(x)
    return _angle(nu, e_bwd), _angle(nu, e_fwd), _angle(e_bwd, e_fwd)


def reflection_residual(body, config) -> float:
    """max_i |alpha_i - beta_i|; zero at billiard trajectories (with coplanarity
    of the edges and the normal measured separately by the tangential gradient)."""
    a, b, _ = vertex_angles(body, config)
    return float(np.max(np.abs(a - b)))


@dataclass(frozen=True)
class GradientPairing:
    s1: float
    s2: float

    @property
    def pairing(self) -> float:
        return 2.0 * (self.s1 + self.s2)


def gradient_pairing(body, config) -> GradientPairing:
    """<grad L, grad ln phi> = 2 (S1 + S2), via the angle sums.

    S1 = -sum (1/l_i + 1/l_{i+1}) (1 + cos theta_i)
    S2 =  sum (cos a_i + cos b_i) (cos a_i / l_i + cos b_i / l_{i+1})
    with l_i = |x_i - x_{i-1}|.
    """
    x = _points(config)
    e_fwd, e_bwd, l, l_bwd = _unit_edges(x)
    nu = body.normal(x)
    ca = np.sum(nu * e_bwd, axis=-1)
    cb = np.sum(nu * e_fwd, axis=-1)
    ct = np.sum(e_bwd * e_fwd, axis=-1)
    s1 = -np.sum((1.0 / l_bwd + 1.0 / l) * (1.0 + ct))
    s2 = np.sum((ca + cb) * (ca / l_bwd + cb / l))
    return GradientPairing(float(s1), float(s2))


def project_to_surface(body, point) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    if not np.any(point):
        raise ValueError("cannot project the zero point")
    return body.project(point)


def billiard_reflect(body, point, direction) -> np.ndarray:
    """Reflect a unit direction at a surface point: d - 2 <d, nu> nu."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    nu = body.normal(np.asarray(point, dtype=float))
    c = float(d @ nu)
    if abs(c) < 1e-12:
        raise GrazingError("incoming direction is tangent to the surface")
    return d - 2.0 * c * nu


def _sample_surface(body, rng, shape):
    axes = getattr(body, "axes", np.full(body.ambient_dim, body.scale))
    return body.project(rng.standard_normal(shape + (body.ambient_dim,)) * axes)


def sample_near_singular(body, n: int, eps: float, count: int, seed: int = 0) -> np.ndarray:
    """Configurations with sqrt(phi) < eps, made by collapsing one random edge.

    The collapsed point is placed along a random tangent direction at a
    log-uniformly chosen fraction of the distance allowed by ``eps``.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = _sample_surface(body, rng, (n,))
        i = int(rng.integers(n))
        j = (i + 1) % n
        nu = body.normal(x[i])
        t = rng.standard_normal(body.ambient_dim)
        t -= (t @ nu) * nu
        t /= np.linalg.norm(t)
        # moving x_j changes edges i and j only; size the collapse from the others
        _, l = _edges(x)
        others = float(np.prod(np.delete(l, [i, j]))) if n > 2 else 1.0
        delta = eps / max(others, 1e-300) * 10.0 ** (-rng.uniform(0.5, 4.0)) / (4 * body.scale)
        x[j] = body.project(x[i] + min(delta, body.scale) * t)
        _, l = _edges(x)
        if np.all(l > 0) and np.prod(l) < eps:
            out.append(x)
    return np.stack(out)


def calibrate_collapse_threshold(body, n: int, samples: int = 4000, seed: int = 0,
                                 cap: float = 1e-2) -> float:
    """Empirical eps_0 below which the pairing <grad L, grad ln phi> is negative.

    Random configurations are sampled; eps_0 is half the smallest sqrt(phi)
    seen with a nonnegative pairing, capped at ``cap`` (times scale^n).
    The result is evidence, not a proof.
    """
    rng = np.random.default_rng(seed)
    x = _sample_surface(body, rng, (samples, n))
    best = cap * body.scale**n
    for cfg in x:
        _, l = _edges(cfg)
        if np.any(l == 0):
            continue
        if gradient_pairing(body, cfg).pairing >= 0:
            best = min(best, 0.5 * float(np.prod(l)))
    return best


def edge_ratio_bounds(body: Ellipsoid, kind: str = "billiard") -> tuple[float, float]:
    """Bounds on consecutive edge ratios l_i / l_{i+1} at critical configurations.

    With r, R the inner and outer tangent-ball radii, every chord from x_i
    making angle a with the normal has 2r cos a < l < 2R cos a. On billiard
    trajectories (equal angles) this gives r/R <= l_i / l_{i+1} <= R/r.
    At critical points of phi the weaker bounds r / sqrt(r^2 + R^2) and its
    reciprocal hold (``kind="phi"``).
    """
    r, R = body.curvature_radii()
    if kind == "billiard":
        return r / R, R / r
    if kind == "phi":
        q = r / math.hypot(r, R)
        return q, 1.0 / q
    raise ValueError(f"unknown kind {kind!r}")


# -- tangent frames, charts, Hessians -----------------------------------------

def tangent_basis(nu):
    """Orthonormal bases of nu^perp, shape (..., d, d-1), via Householder."""
    nu = np.asarray(nu, dtype=float)
    d = nu.shape[-1]
    s = np.where(nu[..., :1] >= 0, -1.0, 1.0)
    w = nu.copy()
    w[..., :1] -= s
    w /= np.linalg.norm(w, axis=-1, keepdims=True)
    H = np.eye(d) - 2.0 * w[..., :, None] * w[..., None, :]
    return H[..., :, 1:]


def _tangent_frames(body, x):
    return tangent_basis(body.normal(x))


def reduced_gradient(body, x, frames=None):
    """Tangential gradient of L in frame coordinates, shape (..., n*m)."""
    if frames is None:
        frames = _tangent_frames(body, x)
    g = _ambient_length_gradient(x)
    red = np.einsum("...ij,...i->...j", frames, g)
    return red.reshape(red.shape[:-2] + (-1,))


def riemannian_hessian(body, x, frames=None):
    """Hessian of L restricted to the product of surfaces, in frame coordinates.

    T^T (Hess L + sum_i lambda_i Hess F(x_i)) T with lambda_i the Lagrange
    multipliers that cancel the normal part of the ambient gradient.
    """
    x = np.asarray(x, dtype=float)
    if frames is None:
        frames = _tangent_frames(body, x)
    n, d = x.shape[-2:]
    m = d - 1
    d_vec, l = _edges(x)
    u = d_vec / l[..., None]
    P = (np.eye(d) - u[..., :, None] * u[..., None, :]) / l[..., None, None]   # (..., n, d, d)
    T = frames
    T_next = np.roll(T, -1, axis=-3)
    # edge k couples x_k and x_{k+1}: -P on both diagonals, +P off-diagonal
    diag_edge = np.einsum("...kia,...kij,...kjb->...kab", T, P, T)
    diag_edge_next = np.einsum("...kia,...kij,...kjb->...kab", T_next, P, T_next)
    off = np.einsum("...kia,...kij,...kjb->...kab", T, P, T_next)

    g = _ambient_length_gradient(x)
    gF = body.gradient(x)
    lam = -np.sum(g * gF, axis=-1) / np.sum(gF * gF, axis=-1)
    hF = body.hessian(x)
    curv = lam[..., None, None] * np.einsum("...kia,...kij,...kjb->...kab", T, hF, T)

    batch = x.shape[:-2]
    H = np.zeros(batch + (n, m, n, m))
    idx = np.arange(n)
    nxt = (idx + 1) % n
    for k in range(n):
        j = nxt[k]
        H[..., k, :, k, :] += curv[..., k, :, :] - diag_edge[..., k, :, :]
        H[..., j, :, j, :] -= diag_edge_next[..., k, :, :]
        H[..., k, :, j, :] += off[..., k, :, :]
        H[..., j, :, k, :] += np.swapaxes(off[..., k, :, :], -1, -2)
    return H.reshape(batch + (n * m, n * m))


def normal_chart(body, base, frames, xi):
    """Chart x_i(xi) = base_i + T_i xi_i + t_i nu_i with t_i solving F = 0.

    Returns the chart points and the chart Jacobians dx_i/dxi_i (implicit
    function theorem), shapes (n, d) and (n, d, m).
    """
    nu0 = body.normal(base)
    y = base + np.einsum("nij,nj->ni", frames, xi)
    t = np.zeros(base.shape[0])
    for _ in range(60):
        p = y + t[:, None] * nu0
        f = body.value(p)
        if np.all(np.abs(f) <= 1e-15 * max(1.0, body.scale)):
            break
        df = np.sum(body.gradient(p) * nu0, axis=-1)
        if np.any(np.abs(df) < 1e-14):
            raise ChartError("normal line is tangent to the surface")
        t = t - f / df
    else:
        if np.any(np.abs(body.value(y + t[:, None] * nu0)) > 1e-12 * body.scale):
            raise ChartError("chart projection did not converge")
    p = y + t[:, None] * nu0
    gF = body.gradient(p)
    denom = np.sum(gF * nu0, axis=-1)
    dt = -np.einsum("ni,nij->nj", gF, frames) / denom[:, None]
    jac = frames + nu0[:, :, None] * dt[:, None, :]
    return p, jac


def chart_gradient(body, base, frames, xi):
    p, jac = normal_chart(body, base, frames, xi)
    g = _ambient_length_gradient(p)
    return np.einsum("nij,ni->nj", jac, g).reshape(-1)


def hessian_in_chart(body, config, step: float | None = None, symmetrize: bool = True,
                     method: str = "gradient") -> np.ndarray:
    """Finite-difference Hessian of L in a normal-line chart around ``config``.

    ``method="gradient"`` takes central differences of the analytic chart
    gradient; ``method="values"`` takes second differences of L itself.
    At a critical point both approximate the intrinsic Hessian.
    """
    x = _points(config)
    check_edges(x)
    n, d = x.shape
    m = d - 1
    h = 1e-4 * body.scale if step is None else float(step)
    frames = _tangent_frames(body, x)
    N = n * m
    H = np.empty((N, N))
    xi0 = np.zeros((n, m))
    if method == "gradient":
        for k in range(N):
            e = np.zeros(N)
            e[k] = h
            gp = chart_gradient(body, x, frames, (xi0.ravel() + e).reshape(n, m))
            gm = chart_gradient(body, x, frames, (xi0.ravel() - e).reshape(n, m))
            H[:, k] = (gp - gm) / (2 * h)
    elif method == "values":
        def f(v):
            p, _ = normal_chart(body, x, frames, v.reshape(n, m))
            return length(p)
        f0 = f(np.zeros(N))
        for a in range(N):
            ea = np.zeros(N)
            ea[a] = h
            H[a, a] = (f(ea) - 2 * f0 + f(-ea)) / h**2
            for b in range(a):
                eb = np.zeros(N)
                eb[b] = h
                H[a, b] = H[b, a] = (f(ea + eb) - f(ea - eb) - f(eb - ea) + f(-ea - eb)) / (4 * h * h)
    else:
        raise ValueError(f"unknown method {method!r}")
    if symmetrize:
        H = 0.5 * (H + H.T)
    return H


def chart_finite_difference_gradient(body, config, func, step: float = 1e-6) -> np.ndarray:
    """Central differences of ``func`` in the normal-line chart, mapped back
    to ambient tangent vectors; shape (n, m+1)."""
    x = _points(config)
    n, d = x.shape
    m = d - 1
    frames = _tangent_frames(body, x)
    h = step * body.scale
    coords = np.empty((n, m))
    for i in range(n):
        for a in range(m):
            xi = np.zeros((n, m))
            xi[i, a] = h
            fp = func(normal_chart(body, x, frames, xi)[0])
            fm = func(normal_chart(body, x, frames, -xi)[0])
            coords[i, a] = (fp - fm) / (2 * h)
    return np.einsum("nij,nj->ni", frames, coords)
