r"""Finite-time stability criteria and their simulation cross-check.

For the delayed system of :mod:`fracstab.solver` and a question
:math:`\{\delta, \varepsilon, q_u, [0, T]\}` the main sufficient condition reads

.. math::

    \left[1 + \frac{(m + b_0 q_u) T^q}{\delta \Gamma(q+1)}\right]
    E_q\big((L + \sigma (p+1)) T^q\big) < \frac{\varepsilon}{\delta},

with :math:`\sigma` the largest singular value over :math:`A_0, \dots, A_p`,
:math:`b_0 = \sigma_{\max}(B_0)`, :math:`L` the Lipschitz constant of
:math:`f` and :math:`m = \|f(t, 0)\|`. The three reduced forms for
:math:`q_u = 0`, :math:`m = 0` and :math:`L = m = 0` are evaluated through the
same code path, so they agree bit for bit under their hypotheses.

The condition is sufficient only: a failed check says nothing about the
actual trajectories.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from fracstab.errors import HypothesisViolation, ValidationError
from fracstab.linalg import max_row_sum, sigma_bound, sigma_max
from fracstab.mittag_leffler import DEFAULT_TOL, ml_eval
from fracstab.solver import (
    HistoryFn,
    InputSignal,
    SystemSpec,
    simulate_batch,
)

#: relative slack on epsilon before a simulated sample counts as a violation
VIOLATION_RTOL = 1e-6
#: relative slack on the Gronwall envelope for trajectories computed at N = 512
ENVELOPE_RTOL = 1e-4
#: share of sampled histories that are sinusoids (the rest are constants)
SINUSOID_EVERY = 5


class Variant(str, Enum):
    THEOREM31 = "theorem31"
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    LIU = "liu"


@dataclass(frozen=True)
class StabilityParams:
    delta: float
    epsilon: float
    q_u: float
    T: float

    def __post_init__(self) -> None:
        for name in ("delta", "epsilon", "T"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValidationError(f"{name} must be positive, got {value!r}", field=name)
        if not (math.isfinite(self.q_u) and self.q_u >= 0.0):
            raise ValidationError(f"q_u must be >= 0, got {self.q_u!r}", field="q_u")
        if not self.epsilon > self.delta:
            raise ValidationError(
                f"epsilon ({self.epsilon!r}) must exceed delta ({self.delta!r})",
                field="epsilon",
            )


@dataclass(frozen=True)
class DerivedConstants:
    sigma: float
    b0: float
    L: float
    m: float
    p: int
    q: float
    n: int


@dataclass(frozen=True)
class CriterionReport:
    variant: Variant
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    constants: DerivedConstants

    def to_dict(self) -> dict:
        out = asdict(self)
        out["variant"] = self.variant.value
        return out


MATRIX_NORMS = ("spectral", "row_sum")


def derive_constants(sys: SystemSpec, matrix_norm: str = "spectral") -> DerivedConstants:
    """Collect the scalar constants entering the criteria.

    ``matrix_norm="row_sum"`` replaces the largest singular values by the
    induced max-norm (max absolute row sum), the operator norm that matches
    how trajectories are measured. It is a diagnostic and is not what the
    published criterion uses.
    """
    if matrix_norm == "spectral":
        sigma = sigma_bound((sys.a0, *sys.a_delays))
        b0 = sigma_max(sys.b0)
    elif matrix_norm == "row_sum":
        sigma = max(max_row_sum(a) for a in (sys.a0, *sys.a_delays))
        b0 = max_row_sum(sys.b0)
    else:
        raise ValidationError(
            f"matrix_norm must be one of {', '.join(MATRIX_NORMS)}", field="matrix_norm"
        )
    return DerivedConstants(
        sigma=sigma,
        b0=b0,
        L=float(sys.nonlinearity.lipschitz_L),
        m=float(sys.nonlinearity.offset_m),
        p=sys.p,
        q=sys.q,
        n=sys.n,
    )


def _bound_factor(q: float, T: float, delta: float, forcing: float, rate: float, tol: float) -> float:
    Tq = T**q
    return (1.0 + forcing * Tq / (delta * math.gamma(q + 1.0))) * ml_eval(q, rate * Tq, tol).value


def _report(variant: Variant, lhs: float, params: StabilityParams, c: DerivedConstants):
    rhs = params.epsilon / params.delta
    return CriterionReport(variant, lhs, rhs, lhs < rhs, rhs - lhs, c)


def criterion_theorem31(
    sys: SystemSpec, params: StabilityParams, tol: float = DEFAULT_TOL
) -> CriterionReport:
    """Evaluate the general delayed-system criterion."""
    c = derive_constants(sys)
    forcing = c.m + c.b0 * params.q_u
    rate = c.L + c.sigma * (c.p + 1)
    lhs = _bound_factor(c.q, params.T, params.delta, forcing, rate, tol)
    return _report(Variant.THEOREM31, lhs, params, c)


def criterion_special_case(
    sys: SystemSpec, params: StabilityParams, case: int, tol: float = DEFAULT_TOL
) -> CriterionReport:
    """Reduced criterion for zero input (1), ``f(t, 0) = 0`` (2) or ``f = 0`` (3).

    :raises HypothesisViolation: if the system or parameters do not satisfy the
        reduction's assumption.
    """
    c = derive_constants(sys)
    rate = c.L + c.sigma * (c.p + 1)
    if case == 1:
        if params.q_u != 0.0:
            raise HypothesisViolation(f"case 1 needs q_u = 0, got {params.q_u!r}", field="q_u")
        forcing = c.m
        variant = Variant.CASE1
    elif case == 2:
        if c.m != 0.0:
            raise HypothesisViolation(f"case 2 needs m = 0, got {c.m!r}", field="m")
        forcing = c.b0 * params.q_u
        variant = Variant.CASE2
    elif case == 3:
        if c.L != 0.0 or c.m != 0.0:
            raise HypothesisViolation(
                f"case 3 needs L = m = 0, got L = {c.L!r}, m = {c.m!r}", field="nonlinearity"
            )
        forcing = c.b0 * params.q_u
        rate = c.sigma * (c.p + 1)
        variant = Variant.CASE3
    else:
        raise ValidationError(f"special case must be 1, 2 or 3, got {case!r}", field="case")
    lhs = _bound_factor(c.q, params.T, params.delta, forcing, rate, tol)
    return _report(variant, lhs, params, c)


def criterion_liu_linear(
    sys: SystemSpec, params: StabilityParams, tol: float = DEFAULT_TOL
) -> CriterionReport:
    """Earlier linear criterion; the nonlinearity is ignored and n is the state dimension."""
    c = derive_constants(sys)
    q, T = c.q, params.T
    Tq = T**q
    g1 = math.gamma(q + 1.0)
    rate = (c.n + 1) * c.sigma * Tq
    lhs = (1.0 + rate / g1 + params.q_u * c.b0 * Tq / (params.delta * g1)) * ml_eval(
        q, rate, tol
    ).value
    return _report(Variant.LIU, lhs, params, c)


def evaluate(
    sys: SystemSpec, params: StabilityParams, variant: Variant | str = Variant.THEOREM31
) -> CriterionReport:
    variant = Variant(variant)
    if variant is Variant.THEOREM31:
        return criterion_theorem31(sys, params)
    if variant is Variant.LIU:
        return criterion_liu_linear(sys, params)
    return criterion_special_case(sys, params, int(variant.value[-1]))


SWEEP_PARAMS = ("T", "delta", "epsilon", "q_u")


def sweep(
    sys: SystemSpec,
    params: StabilityParams,
    param: str,
    values: Sequence[float],
    variant: Variant | str = Variant.THEOREM31,
) -> list[CriterionReport]:
    """Evaluate a criterion while varying one of :data:`SWEEP_PARAMS`."""
    if param not in SWEEP_PARAMS:
        raise ValidationError(
            f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}", field="param"
        )
    return [evaluate(sys, replace(params, **{param: float(v)}), variant) for v in values]


# {{{ simulation cross-check


def gronwall_envelope(
    sys: SystemSpec, params: StabilityParams, grid, matrix_norm: str = "spectral"
) -> np.ndarray:
    r"""Pointwise bound :math:`a(t) E_q((L + \sigma(p+1)) t^q)` from the proof chain.

    Here :math:`a(t) = \delta + (m + b_0 q_u) t^q / \Gamma(q+1)`.
    """
    c = derive_constants(sys, matrix_norm)
    t = np.asarray(grid, dtype=float)
    tq = t**c.q
    a = params.delta + (c.m + c.b0 * params.q_u) * tq / math.gamma(c.q + 1.0)
    rate = c.L + c.sigma * (c.p + 1)
    return a * np.array([ml_eval(c.q, rate * z).value for z in tq])


def _bounded_vector(rng: np.random.Generator, size: int, bound: float) -> np.ndarray:
    """Random vector with max-norm exactly *bound*."""
    v = rng.uniform(-1.0, 1.0, size)
    k = rng.integers(size)
    v[k] = math.copysign(1.0, v[k])
    return bound * v


def sample_history(sys: SystemSpec, delta: float, rng: np.random.Generator, index: int) -> HistoryFn:
    if index % SINUSOID_EVERY == SINUSOID_EVERY - 1:
        return HistoryFn.sinusoid(
            _bounded_vector(rng, sys.n, 0.95 * delta),
            frequency=rng.uniform(0.1, 2.0),
            phase=rng.uniform(0.0, 2.0 * math.pi),
        )
    return HistoryFn.constant(rng.uniform(-delta, delta, sys.n))


def sample_input(sys: SystemSpec, q_u: float, rng: np.random.Generator, index: int) -> InputSignal:
    if q_u == 0.0:
        return InputSignal.zero()
    if index % 2:
        return InputSignal.sinusoid(
            _bounded_vector(rng, sys.m_in, 0.95 * q_u), frequency=rng.uniform(0.1, 2.0)
        )
    return InputSignal.constant(rng.uniform(-q_u, q_u, sys.m_in))


@dataclass(frozen=True)
class SampleResult:
    index: int
    history_kind: str
    history_sup: float
    input_sup: float
    sup_norm: float
    below_epsilon: bool
    #: largest ``||x(t)|| / envelope(t)`` over the grid
    envelope_ratio: float
    error: str | None = None


@dataclass(frozen=True)
class VerificationReport:
    criterion: CriterionReport
    epsilon: float
    grid: np.ndarray
    envelope: np.ndarray
    samples: list = field(default_factory=list)

    @property
    def completed(self) -> list:
        return [s for s in self.samples if s.error is None]

    @property
    def max_sup_norm(self) -> float:
        return max((s.sup_norm for s in self.completed), default=math.nan)

    @property
    def violations(self) -> int:
        """Samples whose sup norm reaches ``epsilon * (1 + VIOLATION_RTOL)``."""
        limit = self.epsilon * (1.0 + VIOLATION_RTOL)
        return sum(1 for s in self.completed if not s.sup_norm < limit)

    @property
    def envelope_violations(self) -> int:
        return sum(1 for s in self.completed if s.envelope_ratio > 1.0 + ENVELOPE_RTOL)

    @property
    def errors(self) -> int:
        return sum(1 for s in self.samples if s.error is not None)


def verify_by_simulation(
    sys: SystemSpec,
    params: StabilityParams,
    samples: int = 100,
    steps: int = 512,
    seed: int = 0,
    matrix_norm: str = "spectral",
) -> VerificationReport:
    """Simulate random admissible histories and inputs and compare against epsilon.

    Sample ``i`` draws from ``numpy.random.default_rng(seed + i)``, so results
    do not depend on evaluation order. Solver blow-ups are recorded per sample.
    *matrix_norm* only changes the envelope overlay, never the verdict.
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}", field="samples")
    report = criterion_theorem31(sys, params)

    histories, inputs = [], []
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        histories.append(sample_history(sys, params.delta, rng, i))
        inputs.append(sample_input(sys, params.q_u, rng, i))

    batch = simulate_batch(sys, histories, inputs, params.T, steps)
    envelope = gronwall_envelope(sys, params, batch.grid, matrix_norm)

    results = []
    for i in range(samples):
        hist, inp = histories[i], inputs[i]
        norms = batch.max_norms[:, i]
        error = batch.failed[i]
        sup = float(np.max(norms)) if error is None else math.nan
        ratio = float(np.max(norms / envelope)) if error is None else math.nan
        results.append(
            SampleResult(
                index=i,
                history_kind=hist.kind,
                history_sup=hist.sup_norm(sys.tau_max),
                input_sup=inp.sup_norm,
                sup_norm=sup,
                below_epsilon=error is None and sup < params.epsilon,
                envelope_ratio=ratio,
                error=error,
            )
        )
    return VerificationReport(report, params.epsilon, batch.grid, envelope, results)


# }}}
