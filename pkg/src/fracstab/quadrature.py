r"""Product-integration weights for weakly singular Volterra kernels.

On a uniform grid :math:`t_i = i h` the integral

.. math::

    \int_0^{t_i} (t_i - s)^{\alpha - 1} y(s) \,\mathrm{d}s

is approximated by integrating the kernel exactly against the piecewise
linear interpolant of :math:`y`. This is the product-trapezoid rule used by the
fractional Adams corrector; it stays second order in the smooth factor even
though the kernel is unbounded at :math:`s = t_i` when :math:`\alpha < 1`.
"""

from __future__ import annotations

import math

import numpy as np

from fracstab.errors import SingularQuadrature


def _check_alpha(alpha: float) -> None:
    if not alpha > 0.0:
        raise SingularQuadrature(f"kernel exponent alpha - 1 = {alpha - 1} <= -1")


def interior_weights(alpha: float, h: float, count: int) -> np.ndarray:
    r"""Weights :math:`w_k` multiplying :math:`y_{i-k}` for :math:`0 \le k < count`.

    ``w[0]`` belongs to the endpoint :math:`y_i`; the same sequence serves
    every :math:`i` because the interior weights only depend on :math:`i - j`.
    The second difference of :math:`k^{\alpha+1}` is formed with ``expm1`` to
    limit cancellation.
    """
    _check_alpha(alpha)
    beta = alpha + 1.0
    scale = h**alpha / (alpha * beta)
    w = np.empty(count)
    if count == 0:
        return w
    w[0] = scale
    k = np.arange(1, count, dtype=float)
    with np.errstate(divide="ignore"):
        second = np.expm1(beta * np.log1p(1.0 / k)) + np.expm1(beta * np.log1p(-1.0 / k))
    w[1:] = scale * k**beta * second
    return w


def start_weight(alpha: float, h: float, i: int) -> float:
    """Weight of :math:`y_0` in the integral up to :math:`t_i`, ``i >= 1``."""
    _check_alpha(alpha)
    beta = alpha + 1.0
    inner = i * math.expm1(beta * math.log1p(-1.0 / i)) + beta if i > 1 else alpha
    return (i * h) ** alpha / (alpha * beta) * inner


def start_weights(alpha: float, h: float, count: int) -> np.ndarray:
    """:func:`start_weight` for ``i = 0 .. count - 1`` (zero at ``i = 0``)."""
    out = np.zeros(count)
    for i in range(1, count):
        out[i] = start_weight(alpha, h, i)
    return out


def product_trapezoid(y, h: float, alpha: float) -> np.ndarray:
    r"""Approximate :math:`\int_0^{t_i}(t_i - s)^{\alpha-1} y(s)\,ds` at every grid point.

    :arg y: samples :math:`y(t_0), \dots, y(t_N)` on a uniform grid of spacing *h*.
    :returns: array of the same length; the entry at :math:`t_0 = 0` is zero.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    out = np.zeros(n)
    if n < 2:
        return out
    w = interior_weights(alpha, h, n - 1)
    out[1:] = np.convolve(w, y[1:])[: n - 1] + start_weights(alpha, h, n)[1:] * y[0]
    return out
