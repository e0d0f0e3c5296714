"""Radial bump functions with closed-form derivatives.

The basic profile is exp(1 - 1/(1 - |z|^2)) on the open unit ball and zero
outside.  It is C-infinity on all of R^dim, takes the value 1 at the
origin, and every partial derivative vanishes at the ball boundary.
Derivatives are generated symbolically once per multi-index and cached as
vectorized numpy callables.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp

# Points with 1 - |z|^2 below this are exact zeros in double precision:
# exp(1 - 1/1e-10) underflows, and no derivative prefactor of the orders
# supported here overflows before that.
_EDGE = 1e-10


@lru_cache(maxsize=None)
def _derivative_fn(dim, alpha):
    zs = sp.symbols(f"z0:{dim}", real=True)
    expr = sp.exp(1 - 1 / (1 - sum(z**2 for z in zs)))
    for z, k in zip(zs, alpha):
        if k:
            expr = sp.diff(expr, z, k)
    return sp.lambdify(zs, expr, modules="numpy")


class Mollifier:
    """Bump on the unit ball of R^dim with derivatives up to max_order."""

    def __init__(self, dim, max_order=4):
        if dim < 1:
            raise ValueError("mollifier dimension must be at least 1")
        if max_order < 0:
            raise ValueError("max_order must be nonnegative")
        self.dim = int(dim)
        self.max_order = int(max_order)
        self.support_radius = 1.0

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z, alpha=None):
        """Evaluate D^alpha of the bump at points z.

        z has shape (..., dim); for dim == 1 a bare (...,) array is also
        accepted.  alpha is a multi-index (one order per axis).  Orders
        beyond max_order are rejected since their symbolic form was never
        requested at construction time.
        """
        if alpha is None:
            alpha = (0,) * self.dim
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or any(a < 0 for a in alpha):
            raise ValueError(f"bad multi-index {alpha} for dimension {self.dim}")
        if sum(alpha) > self.max_order:
            raise ValueError(
                f"derivative order {sum(alpha)} exceeds configured max {self.max_order}")

        z = np.asarray(z, dtype=float)
        if self.dim == 1 and (z.ndim == 0 or z.shape[-1] != 1):
            pts = z.reshape(-1, 1)
            out_shape = z.shape
        else:
            if z.ndim == 0 or z.shape[-1] != self.dim:
                raise ValueError(f"points of shape {z.shape} do not match dim {self.dim}")
            pts = z.reshape(-1, self.dim)
            out_shape = z.shape[:-1]

        r2 = np.sum(pts * pts, axis=1)
        inside = r2 < 1.0 - _EDGE
        out = np.zeros(len(pts))
        if np.any(inside):
            fn = _derivative_fn(self.dim, alpha)
            coords = [pts[inside, j] for j in range(self.dim)]
            with np.errstate(over="ignore", under="ignore"):
                vals = fn(*coords)
            out[inside] = np.asarray(vals, dtype=float)
        result = out.reshape(out_shape)
        return float(result) if result.ndim == 0 else result
