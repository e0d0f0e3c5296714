"""Packing certificates, entropy lower bounds, and rate measurement.

Two certificate forms turn measured quantity-of-interest separations into
metric-entropy statements: the disjoint-support form (n mutually blind
observations give entropy index n-1 at the diagonal value) and the
counting form (pairwise-separated curve sets give index
floor(log2(count - 1)) at half the separation).  Rate fits, smoothness
probes, greedy covers, and a piecewise-polynomial upper-bound probe
complete the measurement side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .bumps import build_family
from .errors import CertificateError, DomainError
from .parallel import parallel_map
from .refdomain import FlowField, ReferenceMap, make_switch
from .transport import QoICurve, family_problem, qoi, sup_distance

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class PackingCertificate:
    """Verified separation data with its implied entropy bound.

    kind "disjoint" certifies n_ent = family_size - 1 at the smallest
    diagonal value; kind "count" certifies floor(log2(size - 1)) at half
    the pairwise separation.  witnesses records, per pair, the parameter
    and measured gap that justify the claim; verify re-checks every
    witness against fresh evaluations.
    """

    kind: str
    family_size: int
    separation: float
    n_ent: int
    bound: float
    witnesses: tuple
    log: dict = dataclass_field(default_factory=dict)


def certificate_disjoint(family, support_grid=None):
    """Certificate from mutually blind bumps: each diagonal observation is
    positive while every cross observation vanishes.

    Evaluates the full QoI matrix q_i(mu_j) over the family's own centers.
    Cross terms above 1e-12 of the diagonal peak refuse the certificate.
    If support_grid is given, supports are additionally checked to be
    pairwise disjoint on it (at most one curve nonzero per grid point).
    """
    n = family.size
    problems = [family_problem(family, index=i) for i in range(n)]

    def row(i):
        return [qoi(problems[i], mu) for mu in family.params]

    matrix = np.asarray(parallel_map(row, range(n)))
    diag = np.diag(matrix).copy()
    peak = float(diag.max())
    if peak <= 0.0:
        raise CertificateError("no positive diagonal observation")
    for i in range(n):
        for j in range(n):
            if i != j and abs(matrix[i, j]) > ZERO_TOL * peak:
                raise CertificateError(
                    f"cross observation ({i}, {j}) is {matrix[i, j]:.3e}, "
                    f"not zero at tolerance", pair=(i, j))
    eps = float(diag.min())
    witnesses = []
    for i in range(n):
        for j in range(i + 1, n):
            k = i if diag[i] >= diag[j] else j
            witnesses.append({"pair": (i, j), "mu": family.params[k].copy(),
                              "gap": float(diag[k])})
    log = {"diagonal": diag, "matrix": matrix}
    if support_grid is not None:
        support_log = _support_disjointness(family, problems, support_grid, peak)
        if not support_log["disjoint"]:
            raise CertificateError(
                f"supports overlap at parameter {support_log['witness']}")
        log["support"] = support_log
    return PackingCertificate(kind="disjoint", family_size=n, separation=eps,
                              n_ent=n - 1, bound=eps, witnesses=tuple(witnesses),
                              log=log)


def _support_disjointness(family, problems, grid, peak):
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 1 and grid.shape[1] > 1 and family.field.param_dim == 1:
        grid = grid.T
    values = np.asarray(parallel_map(
        lambda i: [qoi(problems[i], mu) for mu in grid], range(family.size)))
    active = np.abs(values) > ZERO_TOL * peak
    counts = active.sum(axis=0)
    bad = np.flatnonzero(counts > 1)
    return {"disjoint": bad.size == 0,
            "witness": grid[bad[0]] if bad.size else None,
            "values": values}


def certificate_count(curves, eps):
    """Certificate from pairwise separation: every pair of curves must
    differ by more than eps at some grid point.

    The witness for each pair is the grid argmax of the gap.  Refusal
    names the first offending pair.
    """
    m = len(curves)
    if m < 2:
        raise DomainError("counting certificate needs at least two curves")
    if eps <= 0.0:
        raise DomainError("separation threshold must be positive")
    grid = curves[0].params
    values = np.stack([c.values for c in curves])
    witnesses = []
    for i in range(m):
        if curves[i].params.shape != grid.shape or \
                not np.allclose(curves[i].params, grid, atol=1e-14):
            raise DomainError("curves are sampled on different grids")
        for j in range(i + 1, m):
            gaps = np.abs(values[i] - values[j])
            k = int(np.argmax(gaps))
            if gaps[k] <= eps:
                raise CertificateError(
                    f"curves {i} and {j} separated by only {gaps[k]:.3e} <= {eps:.3e}",
                    pair=(i, j))
            witnesses.append({"pair": (i, j), "mu": grid[k].copy(),
                              "gap": float(gaps[k])})
    n_ent = int(math.floor(math.log2(m - 1))) if m > 1 else 0
    return PackingCertificate(kind="count", family_size=m, separation=float(eps),
                              n_ent=n_ent, bound=float(eps) / 2.0,
                              witnesses=tuple(witnesses), log={"values": values})


def verify_certificate(cert, curves=None, family=None):
    """Re-check a certificate against fresh evaluations.

    For the counting form, every witness gap is re-measured from the
    curves; for the disjoint form, diagonal and cross observations are
    recomputed from the family.  Returns True only if all recorded
    separations still hold.
    """
    if cert.kind == "count":
        if curves is None:
            raise DomainError("counting certificate verifies against its curves")
        values = np.stack([c.values for c in curves])
        grid = curves[0].params
        for w in cert.witnesses:
            i, j = w["pair"]
            k = int(np.argmin(np.sum((grid - w["mu"]) ** 2, axis=1)))
            if abs(values[i, k] - values[j, k]) <= cert.separation:
                return False
        return cert.n_ent == int(math.floor(math.log2(cert.family_size - 1))) and \
            cert.bound <= cert.separation / 2.0 + 1e-300
    if cert.kind == "disjoint":
        if family is None:
            raise DomainError("disjoint certificate verifies against its family")
        for w in cert.witnesses:
            i, j = w["pair"]
            mu = w["mu"]
            qi = qoi(family_problem(family, index=i), mu)
            qj = qoi(family_problem(family, index=j), mu)
            if abs(qi - qj) < cert.separation - 1e-12 * cert.separation:
                return False
        return cert.n_ent == cert.family_size - 1
    raise DomainError(f"unknown certificate kind {cert.kind!r}")


def variable_b_family(h, d, D, s_b, s_minus=1, s_plus=1, p=2.0,
                      thetas=None, varthetas=None, cap=256,
                      map_kind="identity", curvature=0.0):
    """QoI curves of the switched-flow family over its natural grid.

    Inflow bumps sit on a (d-2)-dimensional grid with the final parameter
    axis pinned to the plateau 5h; a switch over the D-dimensional
    auxiliary parameter toggles that axis between 0 and 5h.  Each curve
    pairs a 0/1 bump selection theta with a 0/1 switch selection
    vartheta and is sampled on the product of the two center grids.
    Defaults enumerate all nonzero selections, capped at `cap` pairs in
    lexicographic order.
    """
    ref = ReferenceMap(d, map_kind, curvature)
    base_field = FlowField(ref, smoothness=s_b)
    family = build_family(base_field, h, s_minus, s_plus, p, d_bar=d - 2)
    switch_template = make_switch(h, D, s_b)
    n = family.size
    K = switch_template.size
    mu_bar = family.params[:, :d - 2]
    centers = switch_template.centers

    if thetas is None:
        thetas = [_bits(v, n) for v in range(1, 2 ** n)]
    if varthetas is None:
        varthetas = [_bits(v, K) for v in range(1, 2 ** K)]
    pairs = [(tuple(th), tuple(vt)) for th in thetas for vt in varthetas]
    if not pairs:
        raise DomainError("no curves requested")
    pairs = pairs[:cap]

    grid = np.asarray([np.concatenate([mb, c])
                       for mb in mu_bar for c in centers])

    def one_curve(pair):
        theta, vartheta = pair
        switch = make_switch(h, D, s_b, bits=np.asarray(vartheta))
        prob = family_problem(family, theta=np.asarray(theta, dtype=float))
        values = []
        for mb in mu_bar:
            for c in centers:
                eta = switch.value(c)
                values.append(qoi(prob, np.concatenate([mb, [eta]])))
        return QoICurve(params=grid, values=np.asarray(values),
                        meta={"theta": theta, "vartheta": vartheta, "h": h})

    curves = parallel_map(one_curve, pairs)
    info = {"family": family, "switch_centers": centers, "mu_bar": mu_bar,
            "n": n, "K": K,
            "diagonals": _diagonals(family, switch_template)}
    return curves, info


def _bits(value, width):
    return tuple((value >> k) & 1 for k in range(width))


def _diagonals(family, switch):
    """Per-bump diagonal observation with the switch at full plateau."""
    out = []
    for i in range(family.size):
        prob = family_problem(family, index=i)
        out.append(qoi(prob, family.params[i]))
    return np.asarray(out)


def check_product_structure(curves, n, K, eps, zero_tol):
    """Verify the on/off grid-value pattern of switched-family curves.

    At grid node (i, k) the value must exceed eps exactly when both
    theta_i and vartheta_k are set, and must vanish below zero_tol
    otherwise.  Returns (ok, first_violation).
    """
    for c in curves:
        theta = c.meta["theta"]
        vartheta = c.meta["vartheta"]
        values = c.values.reshape(n, K)
        for i in range(n):
            for k in range(K):
                v = values[i, k]
                if theta[i] and vartheta[k]:
                    if not v > eps:
                        return False, {"curve": (theta, vartheta), "node": (i, k),
                                       "value": v, "expected": "positive"}
                elif not abs(v) < zero_tol:
                    return False, {"curve": (theta, vartheta), "node": (i, k),
                                   "value": v, "expected": "zero"}
    return True, None


def _distance_matrix(curves):
    m = len(curves)
    dist = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            dist[i, j] = dist[j, i] = sup_distance(curves[i], curves[j])
    return dist


def greedy_cover(curves, eps):
    """Size of a greedy sup-norm eps-cover of the curve set."""
    return len(greedy_cover_detail(curves, eps)["centers"])


def greedy_cover_detail(curves, eps):
    """Greedy farthest-point cover: centers, radius, and assignment.

    The first curve seeds the cover; while some curve sits farther than
    eps from every center, the farthest one becomes a new center.  Ties
    break to the lowest index, so the result is deterministic.
    """
    if not curves:
        raise DomainError("cannot cover an empty curve set")
    if eps < 0.0:
        raise DomainError("cover radius must be nonnegative")
    dist = _distance_matrix(curves)
    centers = [0]
    dmin = dist[0].copy()
    while dmin.max() > eps:
        new = int(np.argmax(dmin))
        centers.append(new)
        dmin = np.minimum(dmin, dist[new])
    assignment = np.array([int(np.argmin([dist[i, c] for c in centers]))
                           for i in range(len(curves))])
    return {"centers": centers, "radius": float(dmin.max()),
            "assignment": assignment, "distances": dist}


def greedy_packing(curves, eps):
    """Indices of a maximal subset with pairwise sup distance > eps."""
    dist = _distance_matrix(curves)
    kept = []
    for i in range(len(curves)):
        if all(dist[i, j] > eps for j in kept):
            kept.append(i)
    return kept


def cover_decoder(curves, eps):
    """Bit decoder induced by the greedy cover.

    Encodes each curve as the index of its nearest cover center in
    ceil(log2(#centers)) bits; decoding returns that center.  The worst
    reconstruction error equals the cover radius by construction, which
    is the operational form of the entropy/bit-decoder equivalence.
    """
    detail = greedy_cover_detail(curves, eps)
    centers = detail["centers"]
    n_bits = max(1, math.ceil(math.log2(len(centers)))) if len(centers) > 1 else 0
    dist = detail["distances"]
    err = max(dist[i, centers[detail["assignment"][i]]] for i in range(len(curves)))
    return {"n_bits": n_bits, "centers": centers,
            "achieved_error": float(err), "radius": detail["radius"],
            "assignment": detail["assignment"]}


@dataclass(frozen=True)
class RateFit:
    """Least-squares power-law fit of bound values against entropy index."""

    samples: tuple
    alpha_hat: float
    residual: float
    alpha_theory: float = None


def rate_fit(samples, alpha_theory=None):
    """Fit bound ~ n^(-alpha) by least squares in log-log coordinates.

    Needs at least three samples spanning a factor of four in n with
    positive bounds.  alpha_hat is reported with the sign convention
    that a decaying bound gives a positive exponent.
    """
    samples = [(float(n), float(b)) for n, b in samples]
    if len(samples) < 3:
        raise DomainError("rate fit needs at least three samples")
    ns = np.asarray([s[0] for s in samples])
    bs = np.asarray([s[1] for s in samples])
    if np.any(ns <= 0.0) or np.any(bs <= 0.0):
        raise DomainError("rate fit needs positive indices and bounds")
    if ns.max() < 4.0 * ns.min() - 1e-12:
        raise DomainError("rate fit needs indices spanning a factor of four")
    if np.unique(ns).size < 2:
        raise DomainError("rate fit needs distinct indices")
    coeffs, res = np.polyfit(np.log(ns), np.log(bs), 1, full=True)[:2]
    residual = float(np.sqrt(res[0] / len(ns))) if res.size else 0.0
    return RateFit(samples=tuple(samples), alpha_hat=float(-coeffs[0]),
                   residual=residual, alpha_theory=alpha_theory)


@dataclass(frozen=True)
class ProbeResult:
    magnitude: float
    per_step: dict
    consistent: bool


def fd_derivative(q, x, order, step):
    """Central finite difference of the given order at points x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    offsets = (order / 2.0 - np.arange(order + 1)) * step
    coeffs = np.array([(-1.0) ** j * math.comb(order, j) for j in range(order + 1)])
    stencil = x[None, :] + offsets[:, None]
    vals = q(stencil.reshape(-1)).reshape(order + 1, -1)
    return coeffs @ vals / step ** order


def smoothness_probe(q, interval, order, steps=(1e-2, 5e-3, 2.5e-3),
                     grid_points=41, consistency_tol=0.10):
    """Max finite-difference derivative magnitude over a parameter interval.

    q must be vectorized over 1-d parameter arrays.  The probe evaluates
    central differences on a ladder of steps and flags the result
    consistent when the two finest ladder rungs agree within 10%.
    """
    if order < 1:
        raise DomainError("probe order must be a positive integer")
    lo, hi = interval
    margin = 0.5 * order * max(steps) * 1.01
    xs = np.linspace(lo + margin, hi - margin, grid_points)
    per_step = {}
    for step in steps:
        per_step[step] = float(np.max(np.abs(fd_derivative(q, xs, order, step))))
    finest, second = sorted(steps)[0], sorted(steps)[1]
    consistent = abs(per_step[finest] - per_step[second]) <= \
        consistency_tol * max(per_step[finest], 1e-300)
    return ProbeResult(magnitude=per_step[finest], per_step=per_step,
                       consistent=consistent)


def piecewise_poly_upper(mu_samples, q_samples, degree, pieces):
    """Sup error of a piecewise least-squares polynomial fit.

    Splits the sample interval into equal pieces, fits one polynomial of
    the given degree per piece, and returns the largest absolute misfit
    over all samples.  A piece with fewer samples than coefficients makes
    the fit underdetermined and is rejected.
    """
    mu = np.asarray(mu_samples, dtype=float).reshape(-1)
    qv = np.asarray(q_samples, dtype=float).reshape(-1)
    if mu.shape != qv.shape or mu.size == 0:
        raise DomainError("need matching nonempty sample arrays")
    edges = np.linspace(mu.min(), mu.max(), pieces + 1)
    worst = 0.0
    for k in range(pieces):
        if k + 1 < pieces:
            mask = (mu >= edges[k]) & (mu < edges[k + 1])
        else:
            mask = (mu >= edges[k]) & (mu <= edges[k + 1])
        if mask.sum() < degree + 1:
            raise DomainError(f"piece {k} has {int(mask.sum())} samples, "
                              f"fewer than {degree + 1} coefficients")
        mid = 0.5 * (edges[k] + edges[k + 1])
        coeff = np.polyfit(mu[mask] - mid, qv[mask], degree)
        err = np.max(np.abs(np.polyval(coeff, mu[mask] - mid) - qv[mask]))
        worst = max(worst, float(err))
    return worst
