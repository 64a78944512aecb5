import math

import numpy as np
import pytest

from fracstab.errors import SingularQuadrature
from fracstab.quadrature import product_trapezoid


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 2.5, 30.0])
def test_exact_for_linear_data(alpha):
    t = np.linspace(0.0, 1.0, 65)
    h = t[1]
    assert np.allclose(product_trapezoid(np.ones_like(t), h, alpha), t**alpha / alpha,
                       rtol=0, atol=1e-13)
    assert np.allclose(product_trapezoid(t, h, alpha), t ** (alpha + 1) / (alpha * (alpha + 1)),
                       rtol=0, atol=1e-13)


def test_second_order_on_smooth_data():
    # int_0^1 (1-s)^{-1/2} s^2 ds = B(3, 1/2) = 16/15
    exact = 16.0 / 15.0
    errors = []
    for n in (32, 64, 128):
        t = np.linspace(0.0, 1.0, n + 1)
        errors.append(abs(product_trapezoid(t**2, t[1], 0.5)[-1] - exact))
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine > 3.5


def test_rejects_nonintegrable_kernel():
    with pytest.raises(SingularQuadrature):
        product_trapezoid(np.ones(4), 0.1, 0.0)


def test_first_point_is_zero():
    out = product_trapezoid(np.arange(5.0), 0.25, 0.7)
    assert out[0] == 0.0
    assert math.isfinite(out[-1])
