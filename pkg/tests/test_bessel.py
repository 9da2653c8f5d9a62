import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from skcprop.bessel import j0


def _integral_j0(x):
    val, _ = integrate.quad(lambda t: math.cos(x * math.sin(t)), 0.0, math.pi,
                            limit=2000, epsabs=1e-13, epsrel=1e-11)
    return val / math.pi


@pytest.mark.parametrize("x", [0.0, 0.5, 2.404825557695773, 6.0, 11.9, 12.0, 12.1, 20 * math.pi, 55.0])
def test_against_integral_definition(x):
    assert j0(x) == pytest.approx(_integral_j0(x), abs=1e-10)


def test_against_scipy_on_dense_grid():
    x = np.linspace(0.0, 400.0, 40001)
    assert np.max(np.abs(j0(x) - special.j0(x))) < 1e-11


def test_even_and_scalar():
    assert j0(-3.3) == j0(3.3)
    assert isinstance(j0(1.0), float)
    assert j0(0.0) == 1.0


def test_known_values():
    assert abs(j0(2.404825557695773)) < 1e-13
    assert j0(2 * math.pi) == pytest.approx(float(mpmath.besselj(0, 2 * mpmath.pi)), abs=1e-12)
    # the value at 10 wavelengths
    assert abs(j0(20 * math.pi)) == pytest.approx(0.0710, abs=5e-4)
