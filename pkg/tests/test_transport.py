import numpy as np
import pytest

import widthlab as wl
from widthlab import DomainError

PSI_L2_SQ = 0.98338081291272628


@pytest.fixture(scope="module")
def prob0(family_h01):
    return wl.family_problem(family_h01, index=0)


@pytest.fixture(scope="module")
def prob_mid(family_h01):
    # the middle bump sits at 0, so shifted parameters stay in the box
    return wl.family_problem(family_h01, index=1)


def test_diagonal_observation_closed_form(family_h01, prob0):
    # Perfectly aligned bumps: q = c- c+ h^{s-+s++1} integral psi^2.
    diag = wl.qoi(prob0, family_h01.params[0])
    scale = family_h01.c_minus * family_h01.c_plus * 0.1**3
    assert diag / scale == pytest.approx(PSI_L2_SQ, rel=1e-10)


def test_observation_vanishes_off_ball(prob_mid):
    # Supports of radius h each: no overlap once the shift passes 2h.
    for mu in (0.25, -0.25, 0.45, -0.5):
        assert wl.qoi(prob_mid, [mu]) == 0.0


def test_observation_positive_inside_ball(prob_mid):
    for mu in (0.0, 0.1, -0.15):
        assert wl.qoi(prob_mid, [mu]) > 0.0


def test_observation_even_in_shift(prob_mid):
    for delta in (0.05, 0.12, 0.19):
        left = wl.qoi(prob_mid, [-delta])
        right = wl.qoi(prob_mid, [delta])
        assert left == pytest.approx(right, rel=1e-10)


def test_interior_curvature_is_invisible(family_h01):
    # Flat inflow and outflow faces force the same endpoint map for the
    # identity and the curved interior, so the observations coincide.
    curved = wl.FlowField(wl.ReferenceMap(2, "curved", 0.2))
    fam_c = wl.build_family(curved, 0.1, 1, 1)
    p_id = wl.family_problem(family_h01, index=1)
    p_cv = wl.family_problem(fam_c, index=1)
    for mu in np.linspace(-0.15, 0.15, 7):
        a = wl.qoi(p_id, family_h01.params[1] + mu)
        b = wl.qoi(p_cv, fam_c.params[1] + mu)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-18)


def test_matches_convolution_oracle(family_h01, prob0):
    floor = 1e-12 * family_h01.qoi_scale
    for mu in (-0.45, -0.38, -0.5):
        direct = wl.qoi(prob0, [mu])
        conv = wl.convolution_reference(
            prob0.inflow, prob0.outflow_weight,
            prob0.outflow_support[0], [mu], abs_tol=floor)
        assert direct == pytest.approx(conv, rel=1e-8, abs=floor)


def test_source_free_paths_agree(family_h01, prob0):
    mu = family_h01.params[0] + 0.07
    assert wl.qoi_with_source(prob0, mu) == wl.qoi(prob0, mu)


def test_source_term_shifts_the_observation(family_h01):
    prob = wl.family_problem(
        family_h01, index=0, source=lambda x: np.ones(len(np.atleast_2d(x))))
    mu = family_h01.params[0]
    with_src = wl.qoi_with_source(prob, mu)
    without = wl.qoi(prob, mu)
    assert with_src != pytest.approx(without, rel=1e-6)


def test_family_problem_selection(family_h01):
    with pytest.raises(DomainError):
        wl.family_problem(family_h01)
    with pytest.raises(DomainError):
        wl.family_problem(family_h01, index=0, theta=np.ones(3))
    p = wl.family_problem(family_h01, theta=np.array([1.0, 0.0, 1.0]))
    xw = np.array([[-0.5], [0.0], [0.5]])
    vals = p.inflow(xw)
    assert vals[0] > 0 and vals[2] > 0 and vals[1] == 0.0


def test_qoi_curve_and_sup_distance(family_h01, prob0):
    grid = np.linspace(-0.5, -0.3, 9).reshape(-1, 1)
    curve = wl.qoi_curve(prob0, grid, meta={"index": 0})
    assert curve.values.shape == (9,)
    assert curve.meta["index"] == 0
    assert wl.sup_distance(curve, curve) == 0.0
    other = wl.qoi_curve(prob0, grid + 1e-3)
    with pytest.raises(DomainError):
        wl.sup_distance(curve, other)


def test_riemann_recovery_is_exact():
    for mu in (-1.0, -0.37, 0.0, 0.2, 1.0):
        assert wl.riemann_recovery(mu) == pytest.approx(mu, abs=1e-12)
    with pytest.raises(DomainError):
        wl.riemann_recovery(1.5)
