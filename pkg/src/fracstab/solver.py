r"""Fractional predictor-corrector integration of multi-delay semilinear systems.

The system

.. math::

    D^q x(t) = A_0 x(t) + \sum_{i=1}^p A_i x(t - \tau_i) + B_0 u(t) + f(t, x),
    \qquad x(t) = \psi(t), \; t \in [-\tau, 0],

is read with the Caputo derivative, i.e. through the Volterra equation

.. math::

    x(t) = \psi(0) + \frac{1}{\Gamma(q)} \int_0^t (t - s)^{q-1} F(s) \,ds.

Steps use the fractional Adams scheme: a product-rectangle predictor followed
by product-trapezoid corrector sweeps (one by default, i.e. PECE) with the full
memory sum. Delayed states come from the history for arguments ``<= 0`` and
from linear interpolation between computed grid states otherwise.

The integrator is vectorized over a batch of independent samples that share
the system but differ in history and input, which is how the stability
harness drives it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fracstab.errors import (
    DimensionMismatch,
    InvalidHorizon,
    InvalidOrder,
    UnstableBlowup,
    ValidationError,
)
from fracstab.linalg import as_matrix, max_row_sum, vec_norm_max
from fracstab.quadrature import interior_weights, start_weights

DEFAULT_GUARD = 1e12
MIN_STEPS = 16


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a nonempty vector", field=name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries", field=name)
    return arr


# {{{ nonlinearity catalog

NONLINEAR_KINDS = ("zero", "tanh", "sin_plus_offset", "linear")


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Catalog nonlinearity ``f(t, x)`` with its Lipschitz constant and offset.

    ``lipschitz_L`` and ``offset_m`` default to the exact max-norm values for
    the kind. Larger values may be supplied (they are still valid bounds);
    smaller ones are rejected.

    * ``zero``: ``f = 0``
    * ``tanh``: ``f_i = scale_i * tanh(x_i)``
    * ``sin_plus_offset``: ``f = scale * sin(x) + offset``
    * ``linear``: ``f = matrix @ x``
    """

    kind: str = "zero"
    scale: np.ndarray | None = None
    offset: np.ndarray | None = None
    matrix: np.ndarray | None = None
    lipschitz_L: float | None = None
    offset_m: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in NONLINEAR_KINDS:
            raise ValidationError(
                f"unknown nonlinearity kind {self.kind!r}; expected one of "
                f"{', '.join(NONLINEAR_KINDS)}",
                field="nonlinearity.kind",
            )
        if self.kind == "tanh":
            object.__setattr__(self, "scale", _as_vector(self.scale, "nonlinearity.scale"))
        elif self.kind == "sin_plus_offset":
            scale = np.asarray(self.scale, dtype=float)
            if scale.ndim != 0 or not np.isfinite(scale):
                raise ValidationError(
                    "sin_plus_offset scale must be a finite scalar", field="nonlinearity.scale"
                )
            object.__setattr__(self, "scale", scale)
            object.__setattr__(
                self, "offset", _as_vector(self.offset, "nonlinearity.offset")
            )
        elif self.kind == "linear":
            mat = as_matrix(self.matrix, "nonlinearity.matrix")
            if mat.shape[0] != mat.shape[1]:
                raise DimensionMismatch(
                    "linear nonlinearity matrix must be square", field="nonlinearity.matrix"
                )
            object.__setattr__(self, "matrix", mat)

        exact_L, exact_m = self.exact_constants()
        for name, given, exact in (
            ("lipschitz_L", self.lipschitz_L, exact_L),
            ("offset_m", self.offset_m, exact_m),
        ):
            if given is None:
                object.__setattr__(self, name, exact)
            elif not (math.isfinite(given) and given >= exact * (1.0 - 1e-12)):
                raise ValidationError(
                    f"nonlinearity.{name} = {given!r} is below the catalog value "
                    f"{exact!r} for kind {self.kind!r}",
                    field=f"nonlinearity.{name}",
                )

    @classmethod
    def zero(cls) -> Nonlinearity:
        return cls("zero")

    @classmethod
    def tanh(cls, scale) -> Nonlinearity:
        return cls("tanh", scale=scale)

    @classmethod
    def sin_plus_offset(cls, scale: float, offset) -> Nonlinearity:
        return cls("sin_plus_offset", scale=scale, offset=offset)

    @classmethod
    def linear(cls, matrix) -> Nonlinearity:
        return cls("linear", matrix=matrix)

    def exact_constants(self) -> tuple[float, float]:
        """Max-norm Lipschitz constant and ``||f(t, 0)||`` for the kind."""
        if self.kind == "tanh":
            return float(np.max(np.abs(self.scale))), 0.0
        if self.kind == "sin_plus_offset":
            return float(abs(self.scale)), vec_norm_max(self.offset)
        if self.kind == "linear":
            return max_row_sum(self.matrix), 0.0
        return 0.0, 0.0

    @property
    def dim(self) -> int | None:
        """State dimension implied by the parameters (``None`` for ``zero``)."""
        if self.kind == "tanh":
            return None if self.scale.size == 1 else self.scale.size
        if self.kind == "sin_plus_offset":
            return self.offset.size
        if self.kind == "linear":
            return self.matrix.shape[0]
        return None

    def __call__(self, t, x: np.ndarray) -> np.ndarray:
        if self.kind == "tanh":
            return self.scale * np.tanh(x)
        if self.kind == "sin_plus_offset":
            return self.scale * np.sin(x) + self.offset
        if self.kind == "linear":
            return x @ self.matrix.T
        return np.zeros_like(x)


# }}}

# {{{ inputs and histories


@dataclass(frozen=True, eq=False)
class InputSignal:
    """Catalog input ``u(t)``.

    * ``zero``
    * ``constant``: ``u = value``
    * ``sinusoid``: ``u = amplitude * sin(2 pi frequency t)``
    """

    kind: str = "zero"
    value: np.ndarray | None = None
    amplitude: np.ndarray | None = None
    frequency: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "constant":
            object.__setattr__(self, "value", _as_vector(self.value, "input.value"))
        elif self.kind == "sinusoid":
            object.__setattr__(
                self, "amplitude", _as_vector(self.amplitude, "input.amplitude")
            )
        elif self.kind != "zero":
            raise ValidationError(f"unknown input kind {self.kind!r}", field="input.kind")

    @classmethod
    def zero(cls) -> InputSignal:
        return cls("zero")

    @classmethod
    def constant(cls, value) -> InputSignal:
        return cls("constant", value=value)

    @classmethod
    def sinusoid(cls, amplitude, frequency: float) -> InputSignal:
        return cls("sinusoid", amplitude=amplitude, frequency=float(frequency))

    @property
    def sup_norm(self) -> float:
        if self.kind == "constant":
            return vec_norm_max(self.value)
        if self.kind == "sinusoid":
            return vec_norm_max(self.amplitude)
        return 0.0

    def __call__(self, t, dim: int) -> np.ndarray:
        """Samples at times *t*, shape ``(len(t), dim)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == "zero":
            return np.zeros((t.size, dim))
        vec = self.value if self.kind == "constant" else self.amplitude
        if vec.size not in (1, dim):
            raise DimensionMismatch(
                f"input has {vec.size} components, B0 expects {dim}", field="input"
            )
        vec = np.broadcast_to(vec, (dim,))
        if self.kind == "constant":
            return np.tile(vec, (t.size, 1))
        return np.sin(2.0 * np.pi * self.frequency * t)[:, None] * vec


@dataclass(frozen=True, eq=False)
class HistoryFn:
    """Catalog initial history ``psi(t)`` on ``[-tau, 0]``.

    * ``constant``: ``psi = value``
    * ``polynomial``: ``psi = sum_k coeffs[k] * t**k``
    * ``sinusoid``: ``psi = amplitude * sin(2 pi frequency t + phase)``
    """

    kind: str = "constant"
    value: np.ndarray | None = None
    coeffs: np.ndarray | None = None
    amplitude: np.ndarray | None = None
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "constant":
            object.__setattr__(self, "value", _as_vector(self.value, "history.value"))
        elif self.kind == "polynomial":
            coeffs = np.asarray(self.coeffs, dtype=float)
            if coeffs.ndim == 1:
                coeffs = coeffs[:, None]
            if coeffs.ndim != 2 or coeffs.shape[0] == 0 or not np.all(np.isfinite(coeffs)):
                raise ValidationError(
                    "polynomial history needs finite coefficient vectors",
                    field="history.coeffs",
                )
            object.__setattr__(self, "coeffs", coeffs)
        elif self.kind == "sinusoid":
            object.__setattr__(
                self, "amplitude", _as_vector(self.amplitude, "history.amplitude")
            )
        else:
            raise ValidationError(f"unknown history kind {self.kind!r}", field="history.kind")

    @classmethod
    def constant(cls, value) -> HistoryFn:
        return cls("constant", value=value)

    @classmethod
    def polynomial(cls, coeffs) -> HistoryFn:
        return cls("polynomial", coeffs=coeffs)

    @classmethod
    def sinusoid(cls, amplitude, frequency: float, phase: float = 0.0) -> HistoryFn:
        return cls("sinusoid", amplitude=amplitude, frequency=float(frequency), phase=float(phase))

    def sup_norm(self, tau: float = 0.0) -> float:
        """Max-norm supremum over ``[-tau, 0]``, or a certified upper bound."""
        if self.kind == "constant":
            return vec_norm_max(self.value)
        if self.kind == "sinusoid":
            if tau == 0.0:
                return vec_norm_max(self.amplitude * math.sin(self.phase))
            return vec_norm_max(self.amplitude)
        # triangle inequality over the monomials
        powers = tau ** np.arange(self.coeffs.shape[0])
        return float(np.max(np.abs(self.coeffs).T @ powers))

    def __call__(self, t, dim: int) -> np.ndarray:
        """Samples at times *t*, shape ``(len(t), dim)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == "constant":
            vec = self.value
        elif self.kind == "sinusoid":
            vec = self.amplitude
        else:
            vec = self.coeffs[0]
        if vec.size not in (1, dim):
            raise DimensionMismatch(
                f"history has {vec.size} components, state has {dim}", field="history"
            )
        if self.kind == "constant":
            return np.tile(np.broadcast_to(vec, (dim,)), (t.size, 1))
        if self.kind == "sinusoid":
            phase = 2.0 * np.pi * self.frequency * t + self.phase
            return np.sin(phase)[:, None] * np.broadcast_to(vec, (dim,))
        out = np.zeros((t.size, dim))
        for c in self.coeffs[::-1]:
            out = out * t[:, None] + c
        return out


# }}}

# {{{ system


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Immutable problem data ``(q, A0, [A_i, tau_i], B0, f)``."""

    q: float
    a0: np.ndarray
    a_delays: tuple = ()
    taus: tuple = ()
    b0: np.ndarray | None = None
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity.zero)
    name: str = ""
    description: str = ""

    def __post_init__(self) -> None:
        q = float(self.q)
        if not (math.isfinite(q) and 0.0 < q <= 1.0):
            raise InvalidOrder(f"q must lie in (0, 1], got {self.q!r}", field="q")
        object.__setattr__(self, "q", q)

        a0 = as_matrix(self.a0, "A0")
        n = a0.shape[0]
        if a0.shape != (n, n):
            raise DimensionMismatch(f"A0 must be square, got {a0.shape}", field="A0")
        object.__setattr__(self, "a0", a0)

        if len(self.a_delays) != len(self.taus):
            raise ValidationError(
                f"{len(self.a_delays)} delay matrices but {len(self.taus)} delays",
                field="delays",
            )
        mats = []
        for i, mat in enumerate(self.a_delays):
            arr = as_matrix(mat, f"delays[{i}].A")
            if arr.shape != (n, n):
                raise DimensionMismatch(
                    f"delays[{i}].A has shape {arr.shape}, expected {(n, n)}",
                    field=f"delays[{i}].A",
                )
            mats.append(arr)
        object.__setattr__(self, "a_delays", tuple(mats))

        taus = []
        for i, tau in enumerate(self.taus):
            tau = float(tau)
            if not (math.isfinite(tau) and tau > 0.0):
                raise ValidationError(f"taus[{i}] must be > 0, got {tau!r}", field=f"taus[{i}]")
            taus.append(tau)
        object.__setattr__(self, "taus", tuple(taus))

        b0 = np.zeros((n, 1)) if self.b0 is None else as_matrix(self.b0, "B0")
        if b0.shape[0] != n:
            raise DimensionMismatch(
                f"B0 has {b0.shape[0]} rows, state dimension is {n}", field="B0"
            )
        object.__setattr__(self, "b0", b0)

        dim = self.nonlinearity.dim
        if dim is not None and dim != n:
            raise DimensionMismatch(
                f"nonlinearity acts on dimension {dim}, state dimension is {n}",
                field="nonlinearity",
            )

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def p(self) -> int:
        return len(self.taus)

    @property
    def m_in(self) -> int:
        return self.b0.shape[1]

    @property
    def tau_max(self) -> float:
        return max(self.taus, default=0.0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: np.ndarray
    states: np.ndarray
    max_norms: np.ndarray
    step_h: float


@dataclass(frozen=True, eq=False)
class BatchTrajectory:
    """Trajectories of independent samples on a common grid.

    ``states`` has shape ``(N + 1, samples, n)``. ``failed[s]`` holds an error
    message for samples that tripped the blow-up guard, else ``None``.
    """

    grid: np.ndarray
    states: np.ndarray
    max_norms: np.ndarray
    step_h: float
    failed: list


# }}}

# {{{ integrator


def _delay_plan(tau: float, h: float, steps: int):
    """Per-step interpolation data for the delayed argument ``t_k - tau``."""
    shift = tau / h
    pos = np.arange(steps + 1) - shift
    in_history = pos <= 0.0
    lower = np.where(in_history, 0, np.floor(pos)).astype(int)
    frac = np.where(in_history, 0.0, pos - lower)
    # guard against floor() landing one below an exact grid point
    snap = np.isclose(frac, 1.0, rtol=0.0, atol=1e-12)
    lower = np.where(snap, lower + 1, lower)
    frac = np.where(snap, 0.0, frac)
    return in_history, lower, frac, pos * h


def simulate_batch(
    sys: SystemSpec,
    histories: Sequence[HistoryFn],
    inputs: Sequence[InputSignal],
    T: float,
    N: int,
    *,
    guard: float = DEFAULT_GUARD,
    corrector_sweeps: int = 1,
) -> BatchTrajectory:
    """Integrate one system for several (history, input) samples at once."""
    if not (math.isfinite(T) and T > 0.0):
        raise InvalidHorizon(f"horizon T must be positive, got {T!r}", field="T")
    if N < MIN_STEPS:
        raise InvalidHorizon(f"need at least {MIN_STEPS} steps, got {N}", field="N")
    if len(histories) != len(inputs) or not histories:
        raise ValidationError("need one input per history and at least one sample")
    if corrector_sweeps < 1:
        raise ValidationError("corrector_sweeps must be >= 1", field="corrector_sweeps")

    q, n, S = sys.q, sys.n, len(histories)
    h = T / N
    grid = np.linspace(0.0, T, N + 1)

    U = np.stack([u(grid, sys.m_in) for u in inputs], axis=1)
    forcing = U @ sys.b0.T

    x0 = np.stack([hist(0.0, n)[0] for hist in histories])
    X = np.empty((N + 1, S, n))
    F = np.empty((N + 1, S, n))
    X[0] = x0

    plans = []
    for tau in sys.taus:
        in_hist, lower, frac, times = _delay_plan(tau, h, N)
        hist_vals = np.zeros((N + 1, S, n))
        idx = np.nonzero(in_hist)[0]
        if idx.size:
            hist_vals[idx] = np.stack([hist(times[idx], n) for hist in histories], axis=1)
        plans.append((in_hist, lower, frac, hist_vals))

    def rhs(k: int, xk: np.ndarray) -> np.ndarray:
        out = xk @ sys.a0.T + forcing[k] + sys.nonlinearity(grid[k], xk)
        for mat, (in_hist, lower, frac, hist_vals) in zip(sys.a_delays, plans):
            if in_hist[k]:
                xd = hist_vals[k]
            else:
                j, w = lower[k], frac[k]
                left = xk if j == k else X[j]
                if w == 0.0:
                    xd = left
                else:
                    right = xk if j + 1 == k else X[j + 1]
                    xd = (1.0 - w) * left + w * right
            out += xd @ mat.T
        return out

    gq = math.gamma(q)
    pred_scale = h**q / math.gamma(q + 1.0)
    kk = np.arange(N + 1, dtype=float)
    pred_w = (kk + 1.0) ** q - kk**q
    corr_w = interior_weights(q, h, N + 1) / gq
    corr_start = start_weights(q, h, N + 1) / gq

    alive = np.ones(S, dtype=bool)
    failed: list = [None] * S

    with np.errstate(over="ignore", invalid="ignore"):
        F[0] = rhs(0, X[0])
        for k in range(1, N + 1):
            # predictor: product rectangle over [0, t_k]
            memory_p = np.tensordot(pred_w[k - 1 :: -1], F[:k], axes=(0, 0))
            xk = x0 + pred_scale * memory_p

            # corrector: product trapezoid, endpoint weight corr_w[0]
            memory_c = corr_start[k] * F[0]
            if k > 1:
                memory_c = memory_c + np.tensordot(corr_w[k - 1 : 0 : -1], F[1:k], axes=(0, 0))
            for _ in range(corrector_sweeps):
                xk = x0 + memory_c + corr_w[0] * rhs(k, xk)

            X[k] = xk
            F[k] = rhs(k, xk)

            norms = np.max(np.abs(xk), axis=1)
            bad = alive & ~(norms <= guard)
            if np.any(bad):
                for s in np.nonzero(bad)[0]:
                    failed[s] = f"state norm exceeded {guard:g} at t = {grid[k]:.6g}"
                alive &= ~bad
                X[k:, bad] = np.nan
                F[k, bad] = 0.0
                X[k, bad] = 0.0

    X[:, ~alive] = np.nan
    max_norms = np.max(np.abs(X), axis=2)
    return BatchTrajectory(grid, X, max_norms, h, failed)


def solve_fdde(
    sys: SystemSpec,
    hist: HistoryFn,
    input: InputSignal,
    T: float,
    N: int,
    *,
    guard: float = DEFAULT_GUARD,
    corrector_sweeps: int = 1,
) -> Trajectory:
    """Integrate the system for a single history and input on ``N`` uniform steps.

    :raises UnstableBlowup: if the max-norm of the state exceeds *guard*.
    :raises InvalidHorizon: for ``T <= 0`` or ``N < 16``.
    """
    batch = simulate_batch(
        sys, [hist], [input], T, N, guard=guard, corrector_sweeps=corrector_sweeps
    )
    if batch.failed[0] is not None:
        raise UnstableBlowup(batch.failed[0])
    return Trajectory(batch.grid, batch.states[:, 0], batch.max_norms[:, 0], batch.step_h)


def trajectory_sup_norm(traj: Trajectory) -> float:
    return float(np.max(traj.max_norms))


# }}}
