"""Adversarial bump families on the inflow and outflow faces.

A family places translated mollifier bumps of radius h at a centered
parameter grid of spacing 5h, plus one bump at the outflow face acting as
the observation weight.  Both sides are scaled so that measured Sobolev
norms sit just inside the unit ball: every 0/1 superposition of inflow
bumps is then admissible data, and the quantity of interest inherits the
h^(s_minus + s_plus + d - 1) separation scale that drives the entropy
bounds downstream.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError
from .mollifier import Mollifier
from .quadrature import tensor_rule
from .refdomain import FlowField, centered_grid

NORM_MARGIN = 1e-3


def param_grid(h, d_bar, offset=None):
    """Centered parameter grid of spacing exactly 5h in [-1/2, 1/2]^d_bar."""
    if h > 0.1 + 1e-12:
        raise DomainError("bump scale h must be at most 1/10")
    if d_bar < 0:
        raise DomainError("grid dimension must be nonnegative")
    pts = centered_grid(5.0 * h, d_bar)
    if offset is not None:
        pts = pts + np.asarray(offset, dtype=float)
        if np.any(np.abs(pts) > 0.5 + 1e-12):
            raise DomainError("offset pushes grid points outside the parameter box")
    return pts


def multi_indices(dim, order):
    """All derivative multi-indices with total order at most `order`."""
    out = []
    for total in range(order + 1):
        for combo in itertools.product(range(total + 1), repeat=dim):
            if sum(combo) == total:
                out.append(combo)
    return out


def _split_at_centers(box, centers):
    """Split a box at the coordinate planes through a center point.

    First-derivative magnitudes of a radial bump kink along these planes;
    splitting keeps Gauss-Legendre convergence fast for odd integrands.
    """
    pieces = [[]]
    for (lo, hi), c in zip(box, centers):
        new = []
        for piece in pieces:
            if lo < c < hi:
                new.append(piece + [(lo, c)])
                new.append(piece + [(c, hi)])
            else:
                new.append(piece + [(lo, hi)])
        pieces = new
    return [tuple(p) for p in pieces]


def _peak_polish(f2, start, box, step):
    """Refine a located maximum of f2 by coordinate-wise parabolic steps."""
    x = np.array(start, dtype=float)
    dim = len(box)
    for _ in range(6):
        for j in range(dim):
            trial = np.repeat(x[None, :], 3, axis=0)
            trial[0, j] -= step
            trial[2, j] += step
            lo, hi = box[j]
            trial[:, j] = np.clip(trial[:, j], lo, hi)
            vm, v0, vp = f2(trial)
            denom = vm - 2.0 * v0 + vp
            if denom < 0.0:
                shift = 0.5 * step * (vm - vp) / denom
                x[j] = np.clip(x[j] + np.clip(shift, -step, step), lo, hi)
            elif vp > v0 or vm > v0:
                x[j] = trial[2, j] if vp >= vm else trial[0, j]
        step *= 0.25
    return float(f2(x[None, :])[0])


def _grid_sup(f, box, n_per_axis):
    """Sup of |f| over a box: dense grid argmax plus local polishing."""
    axes = [np.linspace(lo, hi, n_per_axis) for lo, hi in box]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=-1)

    def f2(p):
        v = f(p)
        return v * v

    vals = f2(pts)
    best = int(np.argmax(vals))
    spacing = max((hi - lo) / (n_per_axis - 1) for lo, hi in box)
    peak2 = _peak_polish(f2, pts[best], box, spacing)
    return math.sqrt(max(peak2, float(vals[best])))


def sobolev_norm(f, s, p, patch, h_scale=None, rel_tol=1e-6):
    """Measured Sobolev norm of a boundary function over its support.

    f(points, alpha) must return the partial derivative D^alpha of the
    function on (N, dim) arrays.  patch is one box or a list of disjoint
    boxes covering the support.  For finite p the norm is
    (sum_{|alpha| <= s} ||D^alpha f||_p^p)^(1/p) by tensor Gauss-Legendre
    quadrature; p = inf takes the max of the derivative sups instead.
    One refinement step must move the result by less than rel_tol
    relative, otherwise a QuadratureError is raised.
    """
    if s < 0 or int(s) != s:
        raise DomainError("smoothness order must be a nonnegative integer")
    if np.ndim(patch[0]) == 1:
        patches = [tuple(tuple(b) for b in patch)]
    else:
        patches = [tuple(tuple(b) for b in box) for box in patch]
    dim = len(patches[0])
    alphas = multi_indices(dim, int(s))

    if np.isinf(p):
        def measure(n_per_axis):
            best = 0.0
            for alpha in alphas:
                for box in patches:
                    best = max(best, _grid_sup(lambda q: f(q, alpha), box, n_per_axis))
            return best
        coarse, fine = measure(129), measure(257)
    else:
        p = float(p)
        if p < 1.0:
            raise DomainError("integrability exponent must be at least 1")
        smooth = p.is_integer() and int(p) % 2 == 0

        def measure(n_per_axis):
            total = 0.0
            for box in patches:
                mid = [0.5 * (lo + hi) for lo, hi in box]
                pieces = [box] if smooth else _split_at_centers(box, mid)
                for piece in pieces:
                    pts, wts = tensor_rule(piece, n_per_axis)
                    for alpha in alphas:
                        total += float(np.sum(wts * np.abs(f(pts, alpha)) ** p))
            return total ** (1.0 / p)

        if h_scale is None:
            h_scale = max(hi - lo for lo, hi in patches[0])
        # the mollifier is steep near its support edge; 48 nodes per axis
        # is the smallest count whose doubling stays within 1e-6
        base = max(48, int(np.ceil(12.0 * max(hi - lo for lo, hi in patches[0]) / h_scale)))
        coarse, fine = measure(base), measure(2 * base)

    if abs(fine - coarse) > rel_tol * max(abs(fine), 1e-300):
        raise QuadratureError(
            f"sobolev_norm: refinement moved the value by {abs(fine - coarse):.3e} "
            f"of {fine:.6e}")
    return fine


@dataclass(frozen=True)
class ProblemFamily:
    """Normalized bump family attached to a flow field.

    params holds the full base-parameter center of each inflow bump; in
    switched mode the final coordinate is pinned to the plateau value 5h
    and the grid only spans the leading d-2 axes.
    """

    field: FlowField
    h: float
    s_minus: int
    s_plus: int
    p: float
    d_bar: int
    params: np.ndarray
    c_minus: float
    c_plus: float
    mollifier: Mollifier
    raw_norm_minus: float
    raw_norm_plus: float

    @property
    def size(self):
        return len(self.params)

    @property
    def face_dim(self):
        return self.field.reference.dim - 1

    @property
    def outflow_support(self):
        return tuple((-self.h, self.h) for _ in range(self.face_dim))

    @property
    def qoi_scale(self):
        """Separation scale of the diagonal observations."""
        return self.c_minus * self.c_plus \
            * self.h ** (self.s_minus + self.s_plus + self.face_dim)

    def inflow_support(self, i):
        c = self.params[i]
        return tuple((c[j] - self.h, c[j] + self.h) for j in range(self.face_dim))

    def _bump(self, xw, center, scale, s, alpha):
        alpha = tuple(alpha) if alpha is not None else (0,) * self.face_dim
        order = sum(alpha)
        pts = (np.atleast_2d(np.asarray(xw, dtype=float)) - center) / self.h
        return scale * self.h ** (s - order) * self.mollifier.eval(pts, alpha)

    def outflow_weight(self, zw, alpha=None):
        """Observation bump (and derivatives) in outflow face coordinates."""
        return self._bump(zw, 0.0, self.c_plus, self.s_plus, alpha)

    def inflow_bump(self, i, xw, alpha=None):
        """Inflow bump i (and derivatives) in inflow face coordinates."""
        return self._bump(xw, self.params[i], self.c_minus, self.s_minus, alpha)

    def inflow_sum(self, theta, xw, alpha=None):
        """Superposition of the inflow bumps selected by the 0/1 vector theta."""
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.size:
            raise DomainError("theta must carry one flag per family member")
        pts = np.atleast_2d(np.asarray(xw, dtype=float))
        out = np.zeros(len(pts))
        for i in range(self.size):
            if theta[i]:
                out += theta[i] * self.inflow_bump(i, pts, alpha)
        return out


def build_family(field, h, s_minus, s_plus, p=2.0, d_bar=None):
    """Build and normalize a bump family for the given flow field.

    d_bar defaults to d-1 (every base-parameter axis carries a grid);
    d_bar = d-2 pins the final axis to the switch plateau 5h instead.
    Normalization measures the worst-case inflow superposition (all bumps
    on) in W^(s_minus, p) and the outflow bump in W^(s_plus, inf), then
    scales both to 1 - 1e-3.
    """
    d = field.reference.dim
    if d_bar is None:
        d_bar = d - 1
    if d_bar not in (d - 1, d - 2):
        raise DomainError("d_bar must be d-1 (fixed flow) or d-2 (switched flow)")
    if s_minus < 1 or s_plus < 1 or int(s_minus) != s_minus or int(s_plus) != s_plus:
        raise DomainError("smoothness orders must be positive integers")
    if not 1.0 <= float(p) < np.inf:
        raise DomainError("inflow norms use finite integrability p >= 1")
    grid = param_grid(h, d_bar)
    if d_bar == d - 1:
        params = grid
    else:
        params = np.hstack([grid, np.full((len(grid), 1), 5.0 * h)])

    moll = Mollifier(d - 1, max_order=max(s_minus, s_plus) + 2)
    face_dim = d - 1

    def raw_plus(zw, alpha):
        order = sum(alpha)
        return h ** (s_plus - order) * moll.eval(np.atleast_2d(zw) / h, alpha)

    box_plus = tuple((-h, h) for _ in range(face_dim))
    raw_norm_plus = sobolev_norm(raw_plus, s_plus, np.inf, box_plus)
    c_plus = (1.0 - NORM_MARGIN) / raw_norm_plus

    def raw_minus_sum(xw, alpha):
        order = sum(alpha)
        pts = np.atleast_2d(xw)
        out = np.zeros(len(pts))
        for center in params:
            out += moll.eval((pts - center) / h, alpha)
        return h ** (s_minus - order) * out

    patches = [tuple((c[j] - h, c[j] + h) for j in range(face_dim)) for c in params]
    raw_norm_minus = sobolev_norm(raw_minus_sum, s_minus, p, patches, h_scale=h)
    c_minus = (1.0 - NORM_MARGIN) / raw_norm_minus

    return ProblemFamily(field=field, h=h, s_minus=int(s_minus), s_plus=int(s_plus),
                         p=float(p), d_bar=int(d_bar), params=params,
                         c_minus=c_minus, c_plus=c_plus, mollifier=moll,
                         raw_norm_minus=raw_norm_minus, raw_norm_plus=raw_norm_plus)
