"""The bump prototype and its symbolic derivatives.

Reference values were computed with scipy.integrate.quad and
scipy.optimize.minimize_scalar, independently of the package's
Gauss-Legendre pipeline.
"""

import numpy as np
import pytest

from widthlab import Mollifier

PSI_HALF = 0.7165313105737893  # exp(-1/3)


def test_known_values():
    psi = Mollifier(1)
    assert psi(np.array([0.0])) == 1.0
    assert psi(np.array([0.5])) == pytest.approx(PSI_HALF, rel=1e-15)
    assert psi(np.array([0.5])) == pytest.approx(np.exp(-1.0 / 3.0), rel=1e-15)


def test_vanishes_outside_unit_ball():
    psi = Mollifier(1)
    for z in (1.0, -1.0, 1.0 + 1e-12, 3.7):
        assert psi(np.array([z])) == 0.0
    psi2 = Mollifier(2)
    assert psi2(np.array([0.8, 0.8])) == 0.0


def test_range_and_symmetry():
    psi = Mollifier(1)
    zs = np.linspace(-1.5, 1.5, 301)
    vals = np.array([psi(np.array([z])) for z in zs])
    assert np.all(vals >= 0.0)
    assert np.all(vals <= 1.0)
    assert np.allclose(vals, vals[::-1], atol=0.0)


def test_radial_reduction():
    # In any dimension the value depends on |z| only.
    psi1 = Mollifier(1)
    psi3 = Mollifier(3)
    r = 0.62
    direction = np.array([2.0, -1.0, 2.0]) / 3.0
    assert psi3(r * direction) == pytest.approx(psi1(np.array([r])), rel=1e-14)


def test_first_derivative_against_finite_differences():
    psi = Mollifier(1)
    step = 1e-6
    for z in (0.0, 0.3, -0.55, 0.9):
        fd = (psi(np.array([z + step])) - psi(np.array([z - step]))) / (2 * step)
        exact = psi.eval(np.array([z]), (1,))
        assert exact == pytest.approx(fd, abs=1e-7)


def test_second_derivative_against_finite_differences():
    psi = Mollifier(2)
    step = 1e-4
    z = np.array([0.25, -0.4])
    e0 = np.array([step, 0.0])
    fd = (psi(z + e0) - 2 * psi(z) + psi(z - e0)) / step**2
    assert psi.eval(z, (2, 0)) == pytest.approx(fd, rel=1e-5)


def test_smooth_at_support_edge():
    # All cached derivatives tend to zero approaching |z| = 1.
    psi = Mollifier(1, max_order=4)
    for order in range(1, 5):
        near = psi.eval(np.array([1.0 - 1e-4]), (order,))
        assert abs(near) < 1e-8
        assert psi.eval(np.array([1.0 + 1e-4]), (order,)) == 0.0


def test_order_cap_enforced():
    psi = Mollifier(1, max_order=2)
    with pytest.raises(ValueError):
        psi.eval(np.array([0.1]), (3,))
    with pytest.raises(ValueError):
        psi.eval(np.array([0.1]), (1, 1))


def test_constructor_guards():
    with pytest.raises(ValueError):
        Mollifier(0)
    with pytest.raises(ValueError):
        Mollifier(1, max_order=-1)
