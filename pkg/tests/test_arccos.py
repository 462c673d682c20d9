import math

import numpy as np
import pytest

from reskern import kappa0, kappa1


def test_kappa0_values():
    assert kappa0(1.0) == pytest.approx(1.0, abs=1e-15)
    assert kappa0(0.0) == pytest.approx(0.5, abs=1e-15)
    assert kappa0(0.5) == pytest.approx(2 / 3, abs=1e-15)
    assert kappa0(-1.0) == pytest.approx(0.0, abs=1e-15)


def test_kappa1_values():
    assert kappa1(1.0) == pytest.approx(1.0, abs=1e-15)
    assert kappa1(-1.0) == pytest.approx(0.0, abs=1e-15)
    assert kappa1(0.0) == pytest.approx(1 / math.pi, abs=1e-15)
    # (sqrt(3)/2 + pi/3) / pi
    assert kappa1(0.5) == pytest.approx(0.6089977810442294, abs=1e-15)


def test_clamp_band():
    assert kappa1(1 + 5e-13) == 1.0
    assert kappa0(-1 - 5e-13) == 0.0
    with pytest.raises(ValueError):
        kappa1(1 + 1e-9)
    with pytest.raises(ValueError):
        kappa0(np.array([0.0, -1.1]))


def test_shape_properties():
    u = np.linspace(-1, 1, 2001)
    k0, k1 = kappa0(u), kappa1(u)
    assert np.all(np.diff(k0) > 0)
    assert np.all(np.diff(k1) >= 0)
    assert np.all(k1 >= u - 1e-15)
    assert k0.min() >= 0 and k0.max() <= 1
    assert k1.min() >= 0 and k1.max() <= 1


def test_kappa1_derivative_is_kappa0():
    u = np.linspace(-0.99, 0.99, 41)
    h = 1e-6
    np.testing.assert_allclose((kappa1(u + h) - kappa1(u - h)) / (2 * h), kappa0(u), atol=1e-8)
