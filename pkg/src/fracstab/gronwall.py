r"""Generalized Gronwall bounds for weakly singular integral inequalities.

If :math:`y(t) \le a(t) + g(t)\int_0^t (t-s)^{q-1} y(s)\,ds` with nonnegative
:math:`a`, and :math:`g` nonnegative, nondecreasing and bounded, then

.. math::

    y(t) \le a(t) + \int_0^t \sum_{n=1}^\infty
        \frac{(g(t)\Gamma(q))^n}{\Gamma(nq)} (t-s)^{nq-1} a(s) \,ds,

and for nondecreasing :math:`a` this collapses to
:math:`y(t) \le a(t) E_q(g(t)\Gamma(q) t^q)`.

Everything here works on samples over a uniform grid starting at zero. The
Picard iteration :func:`picard_oracle` builds the maximal solution of the
equality case by brute force and is used to check both closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fracstab.errors import InvalidOrder, NotNondecreasing, ValidationError
from fracstab.mittag_leffler import DEFAULT_TOL, ml_eval
from fracstab.quadrature import product_trapezoid

DEFAULT_STEPS = 512
DEFAULT_SERIES_TERMS = 60


def uniform_grid(T: float, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """``steps + 1`` equispaced points on ``[0, T]``."""
    if not T > 0.0:
        raise ValidationError(f"horizon must be positive, got {T!r}", field="T")
    if steps < 1:
        raise ValidationError(f"need at least one step, got {steps}", field="steps")
    return np.linspace(0.0, T, steps + 1)


@dataclass(frozen=True, eq=False)
class BoundInputs:
    """Sampled data of the integral inequality on a uniform grid."""

    q: float
    grid: np.ndarray
    a: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 < self.q <= 1.0:
            raise InvalidOrder(f"order q must lie in (0, 1], got {self.q!r}", field="q")
        grid = np.asarray(self.grid, dtype=float)
        a = np.asarray(self.a, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValidationError("grid needs at least two points", field="grid")
        if grid[0] != 0.0:
            raise ValidationError("grid must start at t = 0", field="grid")
        steps = np.diff(grid)
        if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValidationError("grid must be uniform and increasing", field="grid")
        for name, arr in (("a", a), ("g", g)):
            if arr.shape != grid.shape:
                raise ValidationError(
                    f"{name} has shape {arr.shape}, grid has {grid.shape}", field=name
                )
            if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
                raise ValidationError(f"{name} must be finite and nonnegative", field=name)
        if np.any(np.diff(g) < 0.0):
            raise NotNondecreasing("g must be nondecreasing on the grid", field="g")

        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "g", g)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def coarsened(self) -> BoundInputs:
        """Every other grid point; requires an even number of steps."""
        if (self.grid.size - 1) % 2:
            raise ValidationError("coarsening needs an even number of steps", field="grid")
        return BoundInputs(self.q, self.grid[::2], self.a[::2], self.g[::2])


@dataclass(frozen=True, eq=False)
class GronwallBound:
    grid: np.ndarray
    ml_form: np.ndarray | None = None
    series_form: np.ndarray | None = None
    series_terms: int = 0
    #: estimated size of the neglected series tail (max over the grid)
    tail_estimate: float = 0.0


def gronwall_ml_bound(inp: BoundInputs, tol: float = DEFAULT_TOL) -> GronwallBound:
    """Closed-form bound ``a(t) * E_q(g(t) * Gamma(q) * t**q)`` at each grid point."""
    if np.any(np.diff(inp.a) < 0.0):
        raise NotNondecreasing("a must be nondecreasing for the closed-form bound", field="a")
    q = inp.q
    args = inp.g * math.gamma(q) * inp.grid**q
    ml = np.array([ml_eval(q, float(z), tol).value for z in args])
    return GronwallBound(grid=inp.grid, ml_form=inp.a * ml)


def gronwall_series_bound(
    inp: BoundInputs, n_terms: int = DEFAULT_SERIES_TERMS
) -> GronwallBound:
    """Truncated integral-series bound, integrated by product trapezoid."""
    if n_terms < 1:
        raise ValidationError(f"n_terms must be >= 1, got {n_terms}", field="n_terms")
    q = inp.q
    h = inp.h
    with np.errstate(divide="ignore"):
        log_rate = np.log(inp.g * math.gamma(q))

    total = inp.a.copy()
    prev = None
    last = np.zeros_like(total)
    for n in range(1, n_terms + 1):
        coeff = np.exp(n * log_rate - math.lgamma(n * q))
        last = coeff * product_trapezoid(inp.a, h, n * q)
        total += last
        if n < n_terms:
            prev = last

    tail = 0.0
    if prev is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(prev > 0.0, last / prev, 0.0)
        ratio = float(np.max(ratio))
        peak = float(np.max(last))
        tail = peak * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf

    return GronwallBound(
        grid=inp.grid, series_form=total, series_terms=n_terms, tail_estimate=tail
    )


def picard_oracle(inp: BoundInputs, y0, iterations: int = 40) -> np.ndarray:
    """Iterate ``y <- a + g * int_0^t (t-s)**(q-1) y(s) ds`` from *y0*.

    Starting below the maximal solution (e.g. from ``y0 = a``) the iterates
    increase towards it, so every iterate must sit under the Gronwall bounds.
    """
    if iterations < 1:
        raise ValidationError(f"iterations must be >= 1, got {iterations}", field="iterations")
    y = np.array(y0, dtype=float)
    if y.shape != inp.grid.shape:
        raise ValidationError(
            f"y0 has shape {y.shape}, grid has {inp.grid.shape}", field="y0"
        )
    for _ in range(iterations):
        y = inp.a + inp.g * product_trapezoid(y, inp.h, inp.q)
    return y


def quadrature_error_estimate(inp: BoundInputs, y0, iterations: int = 40) -> float:
    """Max difference of :func:`picard_oracle` between grid spacing h and 2h."""
    fine = picard_oracle(inp, y0, iterations)
    coarse = picard_oracle(inp.coarsened(), np.asarray(y0)[::2], iterations)
    return float(np.max(np.abs(fine[::2] - coarse)))
