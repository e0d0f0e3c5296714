"""Reduced-basis baseline: affine-parametric elliptic problems in 1d.

This is the contrast case to the transport families: a diffusion problem
with affine parameter dependence whose solution manifold is smooth in the
parameter, so a greedy reduced basis reaches geometric quantity-of-
interest accuracy with a handful of stored numbers.  The same module
holds the singular-value probe showing what happens when snapshots are
discontinuous translates instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solveh_banded

from .errors import DomainError, WidthlabError
from .quadrature import gauss_legendre


class AffineEllipticProblem:
    """-(a_mu u')' = f on (0, 1), u(0) = u(1) = 0, P1 finite elements.

    a_mu(x) = a_mean(x) + sum_q mu_q * phi_q(x) with mu in [-1, 1]^Q.
    The mean must stay within [2, 3] and the perturbations sum below 1 in
    absolute value, which keeps a_mu >= 1 uniformly.  The output is the
    integral of the solution against a weight (the plain average by
    default).
    """

    def __init__(self, n_elements=512, a_mean=None, phis=(), f=None, ell_weight=None):
        if n_elements < 2:
            raise DomainError("need at least two elements")
        self.n_elements = int(n_elements)
        self.a_mean = a_mean if a_mean is not None else (lambda x: np.full_like(x, 2.5))
        self.phis = tuple(phis)
        self.f = f if f is not None else (lambda x: np.ones_like(x))
        self.ell_weight = ell_weight if ell_weight is not None else (lambda x: np.ones_like(x))

        probe = np.linspace(0.0, 1.0, 2049)
        mean_vals = np.asarray(self.a_mean(probe), dtype=float)
        if mean_vals.min() < 2.0 - 1e-12 or mean_vals.max() > 3.0 + 1e-12:
            raise DomainError("mean coefficient must take values in [2, 3]")
        if self.phis:
            spread = sum(np.abs(np.asarray(phi(probe), dtype=float)) for phi in self.phis)
            if spread.max() > 1.0 + 1e-12:
                raise DomainError("perturbation coefficients must sum below 1 in |.|")

        self.nodes = np.linspace(0.0, 1.0, self.n_elements + 1)
        self.n_interior = self.n_elements - 1
        self._mesh_h = 1.0 / self.n_elements
        self.banded_mean = self._stiffness(self.a_mean)
        self.banded_terms = [self._stiffness(phi) for phi in self.phis]
        self.f_vec = self._load(self.f)
        self.ell_vec = self._load(self.ell_weight)

    @property
    def Q(self):
        return len(self.phis)

    def _cell_integrals(self, coef):
        """Per-element integrals of a coefficient, 4-node Gauss-Legendre."""
        gx, gw = gauss_legendre(4, 0.0, 1.0)
        lefts = self.nodes[:-1]
        pts = lefts[:, None] + self._mesh_h * gx[None, :]
        vals = np.asarray(coef(pts.reshape(-1)), dtype=float).reshape(pts.shape)
        return self._mesh_h * vals @ gw

    def _stiffness(self, coef):
        """Upper banded (2, N) stiffness of the bilinear form with coef."""
        cell = self._cell_integrals(coef) / self._mesh_h ** 2
        band = np.zeros((2, self.n_interior))
        band[1] = cell[:-1] + cell[1:]
        band[0, 1:] = -cell[1:-1]
        return band

    def _load(self, density):
        """Interior load vector of the weighted hat functions."""
        gx, gw = gauss_legendre(4, 0.0, 1.0)
        lefts = self.nodes[:-1]
        pts = lefts[:, None] + self._mesh_h * gx[None, :]
        vals = np.asarray(density(pts.reshape(-1)), dtype=float).reshape(pts.shape)
        rising = self._mesh_h * (vals * gx[None, :]) @ gw
        falling = self._mesh_h * (vals * (1.0 - gx[None, :])) @ gw
        return rising[:-1] + falling[1:]

    def banded_matrix(self, mu):
        mu = self._check_mu(mu)
        band = self.banded_mean.copy()
        for q in range(self.Q):
            band += mu[q] * self.banded_terms[q]
        return band

    def _check_mu(self, mu):
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if mu.shape != (self.Q,):
            raise DomainError(f"parameter must have {self.Q} components")
        if np.any(np.abs(mu) > 1.0 + 1e-12):
            raise DomainError("parameter outside [-1, 1]^Q")
        return mu

    def matvec(self, band, v):
        out = band[1] * v
        out[:-1] += band[0, 1:] * v[1:]
        out[1:] += band[0, 1:] * v[:-1]
        return out


def default_problem(q_terms=1, n_elements=512):
    """Default instance: mean 2.5, sine perturbations, unit load/average."""
    phis = []
    for q in range(q_terms):
        freq = 2 * np.pi * (q + 1)
        phis.append(lambda x, f=freq, a=0.5 / q_terms: a * np.sin(f * x))
    return AffineEllipticProblem(n_elements=n_elements, phis=phis)


def hifi_solve(prob, mu):
    """Full finite-element solution (interior nodal values)."""
    band = prob.banded_matrix(mu)
    u = solveh_banded(band, prob.f_vec)
    residual = np.max(np.abs(prob.matvec(band, u) - prob.f_vec))
    if residual > 1e-12 * max(1.0, np.max(np.abs(prob.f_vec))):
        raise WidthlabError(f"high-fidelity solve residual {residual:.3e}")
    return u


def qoi_full(prob, mu):
    """Output functional applied to the full solution."""
    return float(prob.ell_vec @ hifi_solve(prob, mu))


@dataclass(frozen=True)
class GreedyResult:
    basis: np.ndarray
    selected: tuple
    max_errors: tuple


def greedy_basis(prob, training_mus, m, dependence_tol=1e-13):
    """Strong greedy basis from training snapshots.

    Iteratively adds the snapshot with the largest best-approximation
    error in the energy norm at mu = 0, orthonormalizing as it goes.  A
    numerically dependent snapshot (relative projection residual below
    dependence_tol) stops the loop early.
    """
    training_mus = [np.asarray(mu, dtype=float).reshape(-1) for mu in training_mus]
    snapshots = np.stack([hifi_solve(prob, mu) for mu in training_mus], axis=1)

    def energy(u, v):
        return float(u @ prob.matvec(prob.banded_mean, v))

    norms = np.array([np.sqrt(energy(snapshots[:, i], snapshots[:, i]))
                      for i in range(snapshots.shape[1])])
    residual = snapshots.copy()
    basis = []
    selected = []
    max_errors = []
    for _ in range(min(m, snapshots.shape[1])):
        res_norms = np.array([np.sqrt(max(energy(residual[:, i], residual[:, i]), 0.0))
                              for i in range(residual.shape[1])])
        pick = int(np.argmax(res_norms))
        max_errors.append(float(res_norms[pick]))
        if res_norms[pick] < dependence_tol * max(1.0, norms[pick]):
            break
        vec = residual[:, pick].copy()
        for _ in range(2):
            for b in basis:
                vec -= energy(b, vec) * b
        vec /= np.sqrt(energy(vec, vec))
        basis.append(vec)
        selected.append(pick)
        proj = np.array([energy(vec, residual[:, i]) for i in range(residual.shape[1])])
        residual -= np.outer(vec, proj)
    if not basis:
        raise WidthlabError("greedy selected no snapshot")
    return GreedyResult(basis=np.stack(basis, axis=1), selected=tuple(selected),
                        max_errors=tuple(max_errors))


@dataclass(frozen=True)
class OnlineData:
    """Dense reduced operators; everything the online stage needs.

    n_store counts the parameter-dependent blocks plus the two reduced
    vectors (Q m^2 + 2m reals); the parameter-independent mean block is
    kept alongside them.
    """

    a_mean: np.ndarray
    a_terms: tuple
    f_red: np.ndarray
    ell_red: np.ndarray

    @property
    def m(self):
        return len(self.f_red)

    @property
    def n_store(self):
        return len(self.a_terms) * self.m ** 2 + 2 * self.m


def offline(prob, basis):
    """Project the affine operator blocks onto the reduced basis."""
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != prob.n_interior:
        raise DomainError("basis must be (n_interior, m)")

    def project(band):
        cols = np.stack([prob.matvec(band, basis[:, j]) for j in range(basis.shape[1])],
                        axis=1)
        mat = basis.T @ cols
        return 0.5 * (mat + mat.T)

    return OnlineData(a_mean=project(prob.banded_mean),
                      a_terms=tuple(project(band) for band in prob.banded_terms),
                      f_red=basis.T @ prob.f_vec,
                      ell_red=basis.T @ prob.ell_vec)


def online(data, mu):
    """Reduced output at a parameter; cost depends only on m and Q."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape != (len(data.a_terms),):
        raise DomainError(f"parameter must have {len(data.a_terms)} components")
    mat = data.a_mean.copy()
    for q, term in enumerate(data.a_terms):
        mat += mu[q] * term
    try:
        factor = cho_factor(mat)
    except np.linalg.LinAlgError as exc:
        raise WidthlabError("reduced system is not positive definite") from exc
    return float(data.ell_red @ cho_solve(factor, data.f_red))


def galerkin_in_span(prob, basis, mu):
    """Output of the Galerkin solution in span(basis), assembled fresh.

    Independent consistency path for the online stage: projects the full
    assembled operator at this mu instead of combining stored blocks.
    """
    basis = np.asarray(basis, dtype=float)
    band = prob.banded_matrix(mu)
    cols = np.stack([prob.matvec(band, basis[:, j]) for j in range(basis.shape[1])],
                    axis=1)
    coeff = np.linalg.solve(basis.T @ cols, basis.T @ prob.f_vec)
    return float((basis.T @ prob.ell_vec) @ coeff)


def snapshot_svd_decay(mu_grid, x_grid):
    """Singular values of the shifted-step snapshot family.

    Snapshots are step functions x -> 1[x >= mu] sampled on x_grid, one
    per mu; the matrix carries L2 quadrature weights in x and averaging
    weights in mu, so squared tail sums are mean-square projection
    errors.
    """
    mu = np.asarray(mu_grid, dtype=float).reshape(-1)
    x = np.asarray(x_grid, dtype=float).reshape(-1)
    if x.size < 2048:
        raise DomainError("x grid must have at least 2048 points")
    if mu.size < 512:
        raise DomainError("mu grid must have at least 512 points")
    dx = (x[-1] - x[0]) / (x.size - 1)
    matrix = (x[None, :] >= mu[:, None]).astype(float)
    matrix *= np.sqrt(dx / mu.size)
    return np.linalg.svd(matrix, compute_uv=False)


def projection_error_proxy(sigma, ns):
    """Root tail sums E_n = sqrt(sum_{k > n} sigma_k^2)."""
    sigma = np.asarray(sigma, dtype=float)
    tails = np.sqrt(np.maximum(np.cumsum(sigma[::-1] ** 2)[::-1], 0.0))
    out = []
    for n in ns:
        if not 0 <= n < sigma.size:
            raise DomainError("tail index out of range")
        out.append(float(tails[n]))
    return np.asarray(out)
