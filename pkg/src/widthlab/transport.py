"""Exact transport solves and quantities of interest.

The stationary transport equation along the sheared flow is solved by the
method of characteristics: the solution trace on the outflow face is the
inflow data composed with the backward transport map, and the quantity of
interest integrates that trace against the outflow weight.  A volume
source adds the lift integral of the source along each characteristic
(unit transit time), which is independent of the inflow data.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import DomainError
from .parallel import parallel_map
from .quadrature import gauss_legendre, integrate_refined
from .refdomain import FlowField, _check_param, backward_w, characteristic_points

QOI_REL_TOL = 1e-8


@dataclass(frozen=True)
class TransportProblem:
    """Flow field plus boundary data for one transport solve.

    inflow and outflow_weight act on (N, d-1) arrays of transverse face
    coordinates; outflow_support bounds the support of the weight, and h
    sets the quadrature resolution on it.  source, if given, acts on full
    (N, d) interior points.
    """

    field: FlowField
    inflow: object
    outflow_weight: object
    outflow_support: tuple
    h: float
    source: object = None
    # absolute size below which the quantity of interest counts as zero;
    # sliver overlaps at the support edge cannot be integrated to any
    # relative accuracy, only below this scale
    qoi_floor: float = 0.0

    def _nodes(self):
        # 48 nodes per axis resolve the steep mollifier edges to 1e-8
        # under one doubling; the h-scaled count takes over for supports
        # wider than four bump radii
        side = max(hi - lo for lo, hi in self.outflow_support)
        return max(48, int(np.ceil(12.0 * side / self.h)))


def outflow_trace(prob, mu):
    """Exact solution trace on the outflow face, as a callable on coords."""
    mu = _check_param(mu, prob.field.param_dim)

    def trace(zw):
        return prob.inflow(backward_w(prob.field, mu, zw))

    return trace


def qoi(prob, mu):
    """Quantity of interest: outflow weight integrated against the trace."""
    trace = outflow_trace(prob, mu)

    def integrand(zw):
        return prob.outflow_weight(zw) * trace(zw)

    return integrate_refined(integrand, prob.outflow_support, prob._nodes(),
                             rel_tol=QOI_REL_TOL, abs_tol=prob.qoi_floor,
                             what="qoi")


def _source_lift(prob, mu, zw, t_panels, t_nodes=8):
    """Characteristic integral of the source, evaluated at outflow coords."""
    xw = backward_w(prob.field, mu, zw)
    acc = np.zeros(len(xw))
    edges = np.linspace(0.0, 1.0, t_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        ts, wts = gauss_legendre(t_nodes, a, b)
        for t, wt in zip(ts, wts):
            acc += wt * prob.source(characteristic_points(prob.field, mu, xw, t))
    return acc


def qoi_with_source(prob, mu):
    """Quantity of interest including the volume-source contribution.

    The outflow trace is inflow composed with the backward map plus the
    characteristic lift of the source; both enter one face quadrature so
    the result is a single solve, not a sum of separately refined parts.
    The time quadrature inside the lift is panel-refinement checked.
    """
    if prob.source is None:
        return qoi(prob, mu)
    mu_arr = _check_param(mu, prob.field.param_dim)
    trace = outflow_trace(prob, mu)

    def value(t_panels):
        def integrand(zw):
            lift = _source_lift(prob, mu_arr, zw, t_panels)
            return prob.outflow_weight(zw) * (trace(zw) + lift)
        return integrate_refined(integrand, prob.outflow_support, prob._nodes(),
                                 rel_tol=QOI_REL_TOL, abs_tol=prob.qoi_floor,
                                 what="sourced qoi")

    c1, c2 = value(4), value(8)
    if abs(c2 - c1) > QOI_REL_TOL * max(abs(c2), 1e-300) + 1e-14:
        raise DomainError("source lift did not converge under panel refinement")
    return c2


@dataclass(frozen=True)
class QoICurve:
    """Quantity-of-interest samples over a parameter grid."""

    params: np.ndarray
    values: np.ndarray
    meta: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        params = np.atleast_2d(np.asarray(self.params, dtype=float))
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(params) != len(values):
            raise DomainError("one value per grid point required")
        if not np.all(np.isfinite(values)):
            raise DomainError("curve values must be finite")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "values", values)

    @property
    def size(self):
        return len(self.values)


def qoi_curve(prob, mu_grid, meta=None):
    """Evaluate the quantity of interest over a parameter grid."""
    grid = np.atleast_2d(np.asarray(mu_grid, dtype=float))
    if grid.shape[0] == 1 and grid.shape[1] > 1 and prob.field.param_dim == 1:
        grid = grid.T
    values = parallel_map(lambda mu: qoi(prob, mu), list(grid))
    return QoICurve(params=grid, values=np.asarray(values), meta=dict(meta or {}))


def sup_distance(curve_a, curve_b):
    """Sup-norm distance of two curves sampled on the same grid."""
    if curve_a.params.shape != curve_b.params.shape or \
            not np.allclose(curve_a.params, curve_b.params, atol=1e-14):
        raise DomainError("curves are sampled on different grids")
    return float(np.max(np.abs(curve_a.values - curve_b.values)))


def family_problem(family, index=None, theta=None, source=None):
    """Transport problem for one family member or a 0/1 superposition."""
    if (index is None) == (theta is None):
        raise DomainError("give exactly one of index or theta")
    if index is not None:
        def inflow(xw):
            return family.inflow_bump(index, xw)
    else:
        theta = np.asarray(theta)

        def inflow(xw):
            return family.inflow_sum(theta, xw)

    return TransportProblem(field=family.field, inflow=inflow,
                            outflow_weight=lambda zw: family.outflow_weight(zw),
                            outflow_support=family.outflow_support,
                            h=family.h, source=source,
                            qoi_floor=1e-12 * family.qoi_scale)


def convolution_reference(inflow, outflow_weight, support, mu, abs_tol=0.0):
    """Direct overlap integral for straight-line (shear) transport in d = 2.

    Integrates inflow(z + mu) * outflow_weight(z) over the support
    interval with an independent quadrature; used as the cross-check
    oracle for the characteristic pipeline.  abs_tol plays the same role
    as the problem's qoi floor for sliver overlaps.
    """
    mu = float(np.asarray(mu, dtype=float).reshape(()))
    lo, hi = support

    def integrand(pts):
        z = pts[:, 0]
        return outflow_weight(z) * inflow(z + mu)

    return integrate_refined(integrand, ((lo, hi),), 48, rel_tol=1e-10,
                             abs_tol=abs_tol, what="convolution",
                             max_doublings=4)


def riemann_recovery(mu_true):
    """Recover the advection speed of the step-data transport demo.

    For step inflow moving at speed mu across [-1, 1] in unit time, the
    space-time average of the solution determines mu exactly:
    mu = 2 - 2 * integral.  The inner space integral is closed-form; the
    outer time integral (linear in t for |mu| <= 1) uses Gauss-Legendre.
    """
    mu = float(mu_true)
    if abs(mu) > 1.0:
        raise DomainError("recovery formula holds for |mu| <= 1")
    ts, wts = gauss_legendre(64, 0.0, 1.0)
    inner = 1.0 - np.clip(mu * ts, -1.0, 1.0)
    return 2.0 - 2.0 * float(np.sum(wts * inner))
