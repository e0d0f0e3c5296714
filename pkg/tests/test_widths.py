import numpy as np
import pytest

import widthlab as wl
from widthlab import CertificateError, DomainError, QoICurve
from widthlab.widths import (
    check_product_structure,
    fd_derivative,
    greedy_cover_detail,
    piecewise_poly_upper,
    smoothness_probe,
)


def make_curves(values, grid=None):
    values = np.asarray(values, dtype=float)
    if grid is None:
        grid = np.linspace(-0.5, 0.5, values.shape[1]).reshape(-1, 1)
    return [QoICurve(params=grid, values=v) for v in values]


def test_rate_fit_recovers_exact_power_law():
    ns = (2.0, 4.0, 8.0, 16.0)
    fit = wl.rate_fit([(n, 3.0 * n**-2.5) for n in ns], alpha_theory=2.5)
    assert fit.alpha_hat == pytest.approx(2.5, rel=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.alpha_theory == 2.5


def test_rate_fit_guards():
    with pytest.raises(DomainError):
        wl.rate_fit([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(DomainError):
        wl.rate_fit([(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)])  # span below 4
    with pytest.raises(DomainError):
        wl.rate_fit([(1.0, 1.0), (2.0, -0.5), (4.0, 0.3)])


def test_fd_derivative_exact_on_monomials():
    # central differences are exact once the polynomial degree is reached
    assert float(fd_derivative(lambda t: t**3, 0.2, 3, 1e-2)[0]) == \
        pytest.approx(6.0, rel=1e-9)
    assert float(fd_derivative(lambda t: t**2, 1.3, 2, 1e-3)[0]) == \
        pytest.approx(2.0, rel=1e-6)
    assert float(fd_derivative(np.sin, 0.0, 1, 1e-5)[0]) == \
        pytest.approx(1.0, rel=1e-9)


def test_smoothness_probe_on_sine():
    probe = smoothness_probe(np.sin, (-1.5, 1.5), 1)
    assert probe.consistent
    assert probe.magnitude == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(DomainError):
        smoothness_probe(np.sin, (-1.5, 1.5), 0)


def test_certificate_count_and_verify():
    curves = make_curves([[0.0, 0.0, 1.0],
                          [0.0, 1.0, 0.0],
                          [1.0, 0.0, 0.0],
                          [1.0, 1.0, 0.0],
                          [0.0, 1.0, 1.0]])
    cert = wl.certificate_count(curves, eps=0.5)
    assert cert.family_size == 5
    assert cert.n_ent == 2  # floor(log2(4))
    assert cert.bound == pytest.approx(0.25)
    assert len(cert.witnesses) == 10
    assert wl.verify_certificate(cert, curves=curves)


def test_certificate_count_refusal_names_pair():
    curves = make_curves([[0.0, 1.0, 0.0],
                          [1.0, 0.0, 0.0],
                          [0.0, 1.0, 1e-3]])
    with pytest.raises(CertificateError) as err:
        wl.certificate_count(curves, eps=0.5)
    assert err.value.pair == (0, 2)
    with pytest.raises(DomainError):
        wl.certificate_count(curves[:1], eps=0.5)
    with pytest.raises(DomainError):
        wl.certificate_count(curves, eps=0.0)


def test_certificate_count_rejects_mismatched_grids():
    a = QoICurve(params=np.array([[0.0], [1.0]]), values=np.array([0.0, 1.0]))
    b = QoICurve(params=np.array([[0.0], [2.0]]), values=np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        wl.certificate_count([a, b], eps=0.1)


def test_disjoint_certificate(fixed_b_data):
    family, cert = fixed_b_data["data"][0.1]
    assert cert.kind == "disjoint"
    assert cert.family_size == 3
    assert cert.n_ent == 2  # one bit per bump beyond the first
    assert cert.separation > 0.0
    # mutually blind bumps separate at the full diagonal value
    assert cert.bound == cert.separation
    assert wl.verify_certificate(cert, family=family)


def test_product_structure_detects_tampering():
    n, K = 2, 2
    eps = 0.5
    grid = np.arange(4, dtype=float).reshape(-1, 1)

    def curve(theta, vartheta, values):
        return QoICurve(params=grid, values=np.asarray(values, dtype=float),
                        meta={"theta": theta, "vartheta": vartheta})

    good = [curve((1, 0), (1, 0), [1.0, 0.0, 0.0, 0.0]),
            curve((1, 1), (0, 1), [0.0, 1.0, 0.0, 1.0])]
    ok, witness = check_product_structure(good, n, K, eps, zero_tol=1e-12)
    assert ok and witness is None

    bad = [curve((1, 0), (1, 0), [1.0, 0.0, 1e-6, 0.0])]
    ok, witness = check_product_structure(bad, n, K, eps, zero_tol=1e-12)
    assert not ok
    assert witness["node"] == (1, 0)
    assert witness["expected"] == "zero"

    weak = [curve((1, 0), (1, 0), [0.4, 0.0, 0.0, 0.0])]
    ok, witness = check_product_structure(weak, n, K, eps, zero_tol=1e-12)
    assert not ok
    assert witness["expected"] == "positive"


def test_greedy_packing_is_maximal():
    rng = np.random.default_rng(3)
    curves = make_curves(rng.normal(size=(12, 6)))
    eps = 1.0
    kept = wl.greedy_packing(curves, eps)
    # pairwise separation of the kept set
    for a in kept:
        for b in kept:
            if a != b:
                assert wl.sup_distance(curves[a], curves[b]) > eps
    # maximality: everything else is eps-close to a kept curve
    for i in range(len(curves)):
        if i not in kept:
            assert any(wl.sup_distance(curves[i], curves[j]) <= eps
                       for j in kept)


def test_cover_decoder_achieves_the_radius():
    rng = np.random.default_rng(11)
    curves = make_curves(rng.normal(size=(16, 5)))
    decoder = wl.cover_decoder(curves, eps=1.2)
    assert decoder["achieved_error"] == decoder["radius"]
    assert decoder["achieved_error"] <= 1.2
    assert len(decoder["assignment"]) == 16
    n_centers = len(decoder["centers"])
    assert 2 ** decoder["n_bits"] >= n_centers


def test_greedy_cover_radius_is_honoured():
    rng = np.random.default_rng(5)
    curves = make_curves(rng.normal(size=(10, 4)))
    detail = greedy_cover_detail(curves, eps=1.5)
    assert detail["radius"] <= 1.5
    assert wl.greedy_cover(curves, eps=1.5) == len(detail["centers"])


def test_packing_cover_duality():
    # P(2 eps) <= N(eps) for every threshold on the same set.
    rng = np.random.default_rng(42)
    curves = make_curves(rng.normal(size=(24, 8)))
    for eps in (0.5, 1.0, 1.5, 2.0, 3.0):
        packing = len(wl.greedy_packing(curves, 2.0 * eps))
        covering = wl.greedy_cover(curves, eps)
        assert packing <= covering


def test_piecewise_fit_is_exact_on_polynomials():
    mu = np.linspace(-1.0, 1.0, 81)
    q = 2.0 - 0.5 * mu + 3.0 * mu**2
    err = piecewise_poly_upper(mu, q, degree=2, pieces=4)
    assert err < 1e-12
    # a quadratic fit of a cubic leaves a residual
    err3 = piecewise_poly_upper(mu, mu**3, degree=2, pieces=2)
    assert err3 > 1e-4


def test_piecewise_fit_rejects_underdetermined_pieces():
    mu = np.linspace(0.0, 1.0, 8)
    with pytest.raises(DomainError):
        piecewise_poly_upper(mu, mu, degree=2, pieces=8)
    with pytest.raises(DomainError):
        piecewise_poly_upper(np.array([]), np.array([]), degree=1, pieces=1)
