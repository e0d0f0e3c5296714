"""Reference-domain geometry for parametric transport.

A reference map carries the box [0,1] x [-1,1]^(d-1) onto the physical
domain; its parametric shear transports inflow data along straight or
bent characteristics.  This module provides the map itself, the induced
velocity fields, exact inflow/outflow transport maps, a Runge-Kutta
characteristic tracer, and the switch construction that toggles the flow
between two regimes through an auxiliary parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import DomainError, TraceError
from .mollifier import Mollifier

FACE_TOL = 1e-9
HALF = 0.5


def centered_grid(spacing, dim):
    """Cartesian grid centered at 0 with the given spacing per axis.

    Covers [-1/2, 1/2]^dim with floor(1/spacing) + 1 points per axis.
    dim == 0 yields the single empty point.
    """
    if dim == 0:
        return np.zeros((1, 0))
    k = int(np.floor(1.0 / spacing + 1e-12)) + 1
    axis = spacing * (np.arange(k) - (k - 1) / 2.0)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def _as_points(x, dim):
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got shape {np.shape(x)}")
    return pts, single


def _check_param(mu, pdim):
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape != (pdim,):
        raise DomainError(f"parameter must have dimension {pdim}, got {mu.shape}")
    if np.any(np.abs(mu) > HALF + FACE_TOL):
        raise DomainError("parameter outside the admissible box [-1/2, 1/2]^  (d-1)")
    return mu


@dataclass(frozen=True)
class ReferenceMap:
    """Injective smooth map from [0,1] x [-1,1]^(d-1) onto itself.

    kind "identity" is the flat product map.  kind "curved" bends the
    interior transversally by amplitude * t(1-t) * sin(pi w); both end
    faces stay flat, so the inflow/outflow transport maps keep their
    translation form while interior characteristics genuinely curve.
    Amplitudes up to 0.2 keep the map one-to-one with Jacobian bounded
    away from zero.
    """

    dim: int
    kind: str = "identity"
    curvature_amplitude: float = 0.0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("reference domain needs dim >= 2")
        if self.kind not in ("identity", "curved"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        amp = self.curvature_amplitude
        if self.kind == "identity" and amp != 0.0:
            raise ValueError("identity map takes no curvature amplitude")
        if self.kind == "curved" and not 0.0 < amp <= 0.2:
            raise ValueError("curved map needs amplitude in (0, 0.2]")

    # -- transverse part ------------------------------------------------

    def warp(self, t, u):
        """Transverse image of reference coordinates (t, u)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "identity":
            return u.copy()
        c = self.curvature_amplitude * np.asarray(t, dtype=float)
        c = c * (1.0 - np.asarray(t, dtype=float))
        if np.ndim(c) == 1 and u.ndim == 2:
            c = c[:, None]
        return u + c * np.sin(np.pi * u)

    def unwarp(self, t, v):
        """Invert the transverse part with a damped Newton iteration."""
        v = np.asarray(v, dtype=float)
        if self.kind == "identity":
            return v.copy()
        c = self.curvature_amplitude * np.asarray(t, dtype=float)
        c = c * (1.0 - np.asarray(t, dtype=float))
        if np.ndim(c) == 1 and v.ndim == 2:
            c = c[:, None]
        u = v.copy()
        for _ in range(50):
            r = u + c * np.sin(np.pi * u) - v
            if np.max(np.abs(r)) < 1e-12:
                return u
            jac = 1.0 + c * np.pi * np.cos(np.pi * u)
            u = u - np.clip(r / jac, -0.5, 0.5)
        raise DomainError("reference-map inversion did not converge in 50 steps")

    # -- full map --------------------------------------------------------

    def point(self, t, w):
        """Map reference coordinates to a physical point, vectorized."""
        w = np.asarray(w, dtype=float)
        single = w.ndim == 1
        w2 = np.atleast_2d(w)
        t_arr = np.broadcast_to(np.asarray(t, dtype=float), (w2.shape[0],))
        out = np.empty((w2.shape[0], self.dim))
        out[:, 0] = t_arr
        out[:, 1:] = self.warp(t_arr, w2)
        return out[0] if single else out

    def invert(self, x):
        """Reference coordinates (t, w) of physical points x."""
        pts, single = _as_points(x, self.dim)
        t = pts[:, 0]
        w = self.unwarp(t, pts[:, 1:])
        if single:
            return float(t[0]), w[0]
        return t, w

    def dt_point(self, t, u):
        """Time derivative of the map at reference coordinates (t, u)."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        t_arr = np.broadcast_to(np.asarray(t, dtype=float), (u.shape[0],))
        out = np.zeros((u.shape[0], self.dim))
        out[:, 0] = 1.0
        if self.kind == "curved":
            out[:, 1:] = (self.curvature_amplitude * (1.0 - 2.0 * t_arr))[:, None] \
                * np.sin(np.pi * u)
        return out

    def dw_matvec(self, t, u, vec):
        """Transverse Jacobian of the map applied to a fixed vector."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.kind == "identity":
            return np.broadcast_to(vec, u.shape).copy()
        t_arr = np.broadcast_to(np.asarray(t, dtype=float), (u.shape[0],))
        c = self.curvature_amplitude * t_arr * (1.0 - t_arr)
        return (1.0 + c[:, None] * np.pi * np.cos(np.pi * u)) * vec


def shear_point(ref, mu, t, w):
    """Parametric shear of the reference map: the reference transverse
    coordinate is shifted by (1 - t) * mu before mapping.

    At t = 0 this shifts by the full parameter; at t = 1 the point does
    not depend on the parameter at all.  For a one-dimensional transverse
    axis, scalar w means a single point and shape (N,) a batch.
    """
    mu = _check_param(mu, ref.dim - 1)
    t = float(t)
    if not -FACE_TOL <= t <= 1.0 + FACE_TOL:
        raise DomainError("time coordinate must lie in [0, 1]")
    w = np.asarray(w, dtype=float)
    pdim = ref.dim - 1
    if pdim == 1 and w.shape[-1:] != (1,):
        single = w.ndim == 0
        w2 = w.reshape(-1, 1)
    else:
        single = w.ndim == 1
        w2 = np.atleast_2d(w)
        if w2.shape[-1] != pdim:
            raise DomainError(f"transverse coordinates must have dimension {pdim}")
    if np.any(np.abs(w2) > HALF + FACE_TOL):
        raise DomainError("transverse coordinate outside [-1/2, 1/2]^(d-1)")
    out = ref.point(t, w2 + (1.0 - t) * mu)
    return out[0] if single else out


@dataclass(frozen=True)
class SwitchFunction:
    """Superposition of disjoint bumps over the auxiliary parameter.

    Each active center pushes the flow's final base parameter up to the
    plateau value 5h; away from every center the switch returns exactly
    zero, leaving the flow in its off regime.
    """

    dim: int
    h: float
    smoothness: int
    centers: np.ndarray
    bits: np.ndarray
    bump: Mollifier = dataclass_field(repr=False, default=None)

    def __post_init__(self):
        if self.h > 0.1 + 1e-12:
            raise ValueError("switch scale h must be at most 1/10")
        if self.smoothness < 1:
            raise ValueError("switch smoothness must be a positive integer")
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        object.__setattr__(self, "centers", centers)
        bits = np.asarray(self.bits, dtype=int).reshape(-1)
        if bits.shape[0] != centers.shape[0] or not np.all((bits == 0) | (bits == 1)):
            raise ValueError("bits must be one 0/1 flag per center")
        object.__setattr__(self, "bits", bits)
        if self.bump is None:
            object.__setattr__(self, "bump", Mollifier(self.dim, max_order=self.smoothness + 1))
        if len(centers) > 1:
            diffs = centers[:, None, :] - centers[None, :, :]
            dist = np.sqrt(np.sum(diffs**2, axis=-1))
            np.fill_diagonal(dist, np.inf)
            if dist.min() < 5.0 * self.radius - 1e-12:
                raise ValueError("switch centers closer than five support radii")

    @property
    def radius(self):
        return self.h ** (1.0 / self.smoothness)

    @property
    def delta(self):
        return 5.0 * self.h

    @property
    def size(self):
        return len(self.centers)

    def value(self, mu_hat):
        """Switch value at auxiliary parameters mu_hat, shape (..., dim)."""
        pts = np.asarray(mu_hat, dtype=float)
        single = pts.ndim <= 1
        pts = pts.reshape(-1, self.dim)
        out = np.zeros(len(pts))
        for k in range(self.size):
            if self.bits[k]:
                out += self.bump((pts - self.centers[k]) / self.radius)
        out *= self.delta
        return float(out[0]) if single else out


def make_switch(h, dim, smoothness, bits=None):
    """Switch with centers on the widest admissible centered grid."""
    radius = h ** (1.0 / smoothness)
    centers = centered_grid(5.0 * radius, dim)
    if bits is None:
        bits = np.ones(len(centers), dtype=int)
    return SwitchFunction(dim=dim, h=h, smoothness=smoothness,
                          centers=centers, bits=np.asarray(bits, dtype=int))


@dataclass(frozen=True)
class FlowField:
    """Velocity field induced by the sheared reference map.

    The base parameter has dimension d-1.  In switched mode the last
    base-parameter axis is driven by a SwitchFunction of the auxiliary
    parameter instead of being chosen directly.
    """

    reference: ReferenceMap
    smoothness: int = 1
    switch: SwitchFunction | None = None

    @property
    def param_dim(self):
        return self.reference.dim - 1


def velocity(field, mu, x):
    """Flow velocity at x: the time derivative of the sheared map,
    composed with its inverse.

    Points must lie in the slab 0 <= t <= 1.  Transversally the field is
    extended by clamping the reference coordinates to their box, so
    evaluation slightly outside the sheared range is well defined.
    """
    ref = field.reference
    mu = _check_param(mu, ref.dim - 1)
    pts, single = _as_points(x, ref.dim)
    t = pts[:, 0]
    if np.any(t < -FACE_TOL) or np.any(t > 1.0 + FACE_TOL):
        raise DomainError("point outside the transport slab 0 <= t <= 1")
    t = np.clip(t, 0.0, 1.0)
    u = ref.unwarp(t, pts[:, 1:])
    w = np.clip(u - (1.0 - t)[:, None] * mu, -HALF, HALF)
    u_c = w + (1.0 - t)[:, None] * mu
    vel = ref.dt_point(t, u_c)
    vel[:, 1:] -= ref.dw_matvec(t, u_c, mu)
    return vel[0] if single else vel


def switched_velocity(field, mu_bar, mu_hat, x):
    """Velocity of the switched flow at split parameters (mu_bar, mu_hat)."""
    if field.switch is None:
        raise DomainError("flow field carries no switch")
    ref = field.reference
    mu_bar = np.asarray(mu_bar, dtype=float).reshape(-1)
    if mu_bar.shape != (ref.dim - 2,):
        raise DomainError(f"mu_bar must have dimension {ref.dim - 2}")
    mu_hat = np.asarray(mu_hat, dtype=float).reshape(-1)
    if mu_hat.shape != (field.switch.dim,):
        raise DomainError(f"mu_hat must have dimension {field.switch.dim}")
    if np.any(np.abs(mu_hat) > 1.0 + FACE_TOL):
        raise DomainError("auxiliary parameter outside [-1, 1]^D")
    eta = field.switch.value(mu_hat)
    return velocity(field, np.concatenate([mu_bar, [eta]]), x)


def forward_map(field, mu, x):
    """Exact outflow endpoint of the characteristic through an inflow point."""
    ref = field.reference
    mu = _check_param(mu, ref.dim - 1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (ref.dim,) or abs(x[0]) > FACE_TOL:
        raise DomainError("forward_map expects a point on the inflow face t = 0")
    u = ref.unwarp(0.0, x[None, 1:])[0]
    w = u - mu
    if np.any(np.abs(w) > HALF + FACE_TOL):
        raise DomainError("inflow point outside the transported patch")
    return ref.point(1.0, w[None, :])[0]


def backward_map(field, mu, y):
    """Exact inflow footpoint of the characteristic through an outflow point."""
    ref = field.reference
    mu = _check_param(mu, ref.dim - 1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (ref.dim,) or abs(y[0] - 1.0) > FACE_TOL:
        raise DomainError("backward_map expects a point on the outflow face t = 1")
    u = ref.unwarp(1.0, y[None, 1:])[0]
    if np.any(np.abs(u) > HALF + FACE_TOL):
        raise DomainError("outflow point outside the transported patch")
    return ref.point(0.0, u[None, :] + mu)[0]


def backward_w(field, mu, zw):
    """Transverse part of backward transport, vectorized over outflow coords."""
    ref = field.reference
    zw = np.atleast_2d(np.asarray(zw, dtype=float))
    u = ref.unwarp(1.0, zw)
    return ref.warp(0.0, u + mu)


def forward_w(field, mu, xw):
    """Transverse part of forward transport, vectorized over inflow coords."""
    ref = field.reference
    xw = np.atleast_2d(np.asarray(xw, dtype=float))
    u = ref.unwarp(0.0, xw)
    return ref.warp(1.0, u - mu)


def characteristic_points(field, mu, xw, t):
    """Points at time t on the characteristics starting at inflow coords xw."""
    ref = field.reference
    xw = np.atleast_2d(np.asarray(xw, dtype=float))
    w = ref.unwarp(0.0, xw) - mu
    return ref.point(float(t), w + (1.0 - float(t)) * mu)


def trace_characteristic(field, mu, x0, steps):
    """Trace a characteristic with classical RK4 until the outflow face.

    Fixed time step 1/steps; the final step is shortened so the trace
    lands on the face, using the current velocity to size it.  Converges
    at fourth order to forward_map.
    """
    if steps < 1:
        raise DomainError("steps must be a positive integer")
    ref = field.reference
    mu = _check_param(mu, ref.dim - 1)
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if x.shape != (ref.dim,) or abs(x[0]) > FACE_TOL:
        raise DomainError("trace must start on the inflow face t = 0")
    x[0] = 0.0
    dt = 1.0 / steps
    guard = 10 * steps + 100
    taken = 0
    while x[0] < 1.0 - 1e-14:
        taken += 1
        if taken > guard:
            raise TraceError("characteristic failed to reach the outflow face")
        k1 = velocity(field, mu, x)
        step = min(dt, (1.0 - x[0]) / k1[0])
        k2 = velocity(field, mu, x + 0.5 * step * k1)
        k3 = velocity(field, mu, x + 0.5 * step * k2)
        k4 = velocity(field, mu, x + step * k3)
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(np.abs(x[1:]) > 1.0 + 1e-8):
            raise TraceError("characteristic left the domain before the outflow face")
    x[0] = 1.0
    return x
