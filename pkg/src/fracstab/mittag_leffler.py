r"""One-parameter Mittag-Leffler function for real order and real argument.

.. math::

    E_q(z) = \sum_{k=0}^\infty \frac{z^k}{\Gamma(kq + 1)}, \qquad 0 < q \le 1.

Moderate arguments are summed directly. Terms are formed in log space from
``lgamma`` so that no intermediate Gamma value overflows, and the partial sums
are accumulated with :func:`math.fsum`. Large positive arguments, where the
series would need more than ``switch_terms`` terms, use the exponential
asymptotic expansion (whenever its error estimate meets the tolerance)

.. math::

    E_q(z) \approx \frac{1}{q} \exp(z^{1/q})
        - \sum_{k=1}^{K} \frac{z^{-k}}{\Gamma(1 - kq)}.

Tolerances are mixed: ``tol`` is an absolute tolerance while
:math:`|E_q(z)| \le 1` and a relative one above, since a double cannot resolve
absolute errors below one ulp of a large value.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from fracstab.errors import InvalidOrder, NonConvergence, OverflowRisk

DEFAULT_TOL = 1e-12
MAX_TERMS = 10_000
SWITCH_TERMS = 500
#: ``log(DBL_MAX)``; results with ``|z|**(1/q)`` above this cannot be represented.
LOG_MAX = math.log(sys.float_info.max)

_EPS = sys.float_info.epsilon
_MAX_CORRECTIONS = 40


@dataclass(frozen=True)
class MLResult:
    value: float
    terms_used: int
    error_estimate: float
    #: one of ``"series"``, ``"asymptotic"`` or ``"exact"``
    regime: str


def _check_args(q: float, z: float, tol: float) -> None:
    if not (math.isfinite(q) and 0.0 < q <= 1.0):
        raise InvalidOrder(f"order q must lie in (0, 1], got {q!r}", field="q")
    if not math.isfinite(z):
        raise ValueError(f"argument z must be finite, got {z!r}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")


def _rgamma(x: float) -> float:
    """Reciprocal Gamma function, zero at the poles."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _series(q: float, z: float, tol: float, max_terms: int, switch_terms: int):
    """Sum the power series; return ``None`` when the asymptotic switch is hit."""
    logz = math.log(abs(z))
    negative = z < 0.0

    terms = [1.0]
    running = 1.0
    rounding = 0.0
    prev = 1.0
    k = 0
    while True:
        k += 1
        if k >= max_terms:
            raise NonConvergence(
                f"E_{q}({z}) did not reach tol={tol:g} within {max_terms} terms"
            )
        if z > 0.0 and k >= switch_terms:
            return None

        lg = math.lgamma(k * q + 1.0)
        expo = k * logz - lg
        mag = math.exp(expo)
        term = -mag if negative and k % 2 else mag
        terms.append(term)
        running += term
        rounding += mag * (abs(k * logz) + lg + 1.0)

        # past the hump the term ratios decrease, so the remainder is bounded
        # by a geometric series in the current ratio
        ratio = mag / prev
        if mag < prev and mag < tol and mag / (1.0 - ratio) < tol * max(
            1.0, abs(running)
        ):
            break
        prev = mag

    value = math.fsum(terms)
    tail = mag * ratio / (1.0 - ratio)
    error = tail + _EPS * rounding
    return value, len(terms), error


def _asymptotic(q: float, z: float) -> tuple[float, int, float]:
    growth = z ** (1.0 / q)
    value = math.exp(growth) / q

    corrections: list[float] = []
    neglected = 0.0
    if q < 1.0:
        smallest = math.inf
        for k in range(1, _MAX_CORRECTIONS + 1):
            term = z ** (-k) * _rgamma(1.0 - k * q)
            neglected = abs(term)
            if term == 0.0:
                continue
            if neglected > smallest:
                # the expansion is divergent; stop at its smallest term
                break
            corrections.append(term)
            smallest = neglected

    value -= math.fsum(corrections)
    error = neglected + 2.0 * _EPS * abs(value) * (growth + 1.0)
    return value, 1 + len(corrections), error


def ml_eval(
    q: float,
    z: float,
    tol: float = DEFAULT_TOL,
    *,
    max_terms: int = MAX_TERMS,
    switch_terms: int = SWITCH_TERMS,
) -> MLResult:
    """Evaluate :math:`E_q(z)` to the requested tolerance.

    :arg q: order, ``0 < q <= 1``.
    :arg z: real argument with ``|z|**(1/q)`` below :data:`LOG_MAX`.
    :arg tol: mixed absolute/relative tolerance, see the module docstring.
    :arg max_terms: hard cap on the number of series terms.
    :arg switch_terms: series length beyond which large positive arguments
        are evaluated with the asymptotic expansion instead.

    :raises InvalidOrder: if *q* is outside ``(0, 1]``.
    :raises OverflowRisk: if the result (or the series terms) would exceed
        the double range.
    :raises NonConvergence: if the error estimate does not reach *tol*, e.g.
        through cancellation in the alternating series for negative *z*.
    """
    q = float(q)
    z = float(z)
    _check_args(q, z, tol)

    if z == 0.0:
        return MLResult(1.0, 1, 0.0, "exact")

    if q == 1.0 and z < 0.0:
        # e^z = 1 / e^{-z} sidesteps the cancellation of the alternating series
        if -z > LOG_MAX:
            return MLResult(0.0, 1, math.exp(z), "exact")
        inner = ml_eval(1.0, -z, tol, max_terms=max_terms, switch_terms=switch_terms)
        value = 1.0 / inner.value
        error = value * (inner.error_estimate / inner.value + _EPS)
        return MLResult(value, inner.terms_used, error, inner.regime)

    growth = abs(z) ** (1.0 / q)
    if growth - math.log(q) > LOG_MAX:
        raise OverflowRisk(
            f"E_{q}({z}) exceeds the double range (|z|^(1/q) = {growth:.6g})"
        )

    out = _series(q, z, tol, max_terms, switch_terms)
    regime = "series"
    if out is None:
        value, used, error = _asymptotic(q, z)
        regime = "asymptotic"
        if not error <= tol * max(1.0, abs(value)):
            # moderate z with small q: the expansion is not yet accurate, so
            # keep summing the series up to the hard cap instead
            out = _series(q, z, tol, max_terms, max_terms)
            regime = "series"
    if out is not None:
        value, used, error = out

    if not math.isfinite(value):
        raise OverflowRisk(f"E_{q}({z}) overflowed during evaluation")
    if error > tol * max(1.0, abs(value)):
        raise NonConvergence(
            f"E_{q}({z}): error estimate {error:.3e} exceeds tol={tol:g} "
            f"in the {regime} regime"
        )
    return MLResult(value, used, error, regime)


def mittag_leffler(q: float, z, tol: float = DEFAULT_TOL):
    """Value of :math:`E_q(z)`; scalars give a float, arrays an array."""
    if np.ndim(z) == 0:
        return ml_eval(q, float(z), tol).value
    zs = np.asarray(z, dtype=float)
    out = np.empty_like(zs)
    for idx, zi in np.ndenumerate(zs):
        out[idx] = ml_eval(q, float(zi), tol).value
    return out
