# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
"""Solvers for the delay Caputo problem

    D^α x(t) = A x(t - τ) + g(x(t), x(t - τ)),   x = φ on [-τ, 0]

on the uniform grid t_i = -τ + i·h. ``solve_picard`` iterates the variation of
constants operator of the diagonalized system, ``solve_direct`` steps the L1
discretization in the original coordinates.
"""

from dataclasses import dataclass, field, replace
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal, special

from .exception import (
    ConfigError,
    DomainError,
    InnerIterationError,
    NoConvergenceError,
    QuadratureError,
    TrajectoryOverflowError,
)
from .helper import logger
from .linops import (
    DEFAULT_COND_LIMIT,
    DEFAULT_GAMMA,
    JordanStructure,
    TransformedSystem,
    eigendecompose,
    gamma_rescale,
    transform_nonlinearity,
)
from .mlfunc import MLParams, ml_antiderivative, ml_eval_grid
from .nonlinearity import NonlinearitySpec

HISTORY_KINDS = ("constant", "polynomial", "sampled")
IMAG_TOLERANCE = 1e-8
_ALIGN_TOL = 1e-12
# FFT convolution error scales with the largest kernel value
KERNEL_GROWTH_CUT = 1e8


@dataclass(frozen=True, eq=False)
class HistoryFunction:
    kind: str
    payload: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.kind not in HISTORY_KINDS:
            raise ConfigError("phi.kind", f"unknown kind '{self.kind}', use one of {', '.join(HISTORY_KINDS)}")

    @classmethod
    def constant(cls, value: Sequence) -> "HistoryFunction":
        value = np.atleast_1d(np.asarray(value, dtype=complex))
        if value.ndim != 1:
            raise ConfigError("phi.payload", "constant history takes one vector")
        return cls("constant", (value,))

    @classmethod
    def polynomial(cls, coefficients: Sequence) -> "HistoryFunction":
        """Coefficient rows c_0, c_1, … of φ(t) = Σ c_k t^k."""
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.ndim == 1:
            coefficients = coefficients[:, np.newaxis]
        if coefficients.ndim != 2 or coefficients.shape[0] == 0:
            raise ConfigError("phi.payload", "polynomial history takes a list of coefficient vectors")
        return cls("polynomial", (coefficients,))

    @classmethod
    def sampled(cls, grid: Sequence[float], values: Sequence) -> "HistoryFunction":
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=complex)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        if grid.ndim != 1 or grid.size < 2 or values.shape[0] != grid.size:
            raise ConfigError("phi.payload", "sampled history needs matching grid and values with two or more points")
        if np.any(np.diff(grid) <= 0):
            raise ConfigError("phi.payload", "sampled grid must be strictly increasing")
        return cls("sampled", (grid, values))

    @property
    def dim(self) -> int:
        return self.payload[-1].shape[-1] if self.kind != "constant" else self.payload[0].shape[0]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.payload[-1].imag == 0))

    def check_domain(self, tau: float):
        if self.kind != "sampled":
            return
        grid = self.payload[0]
        tol = _ALIGN_TOL * max(1.0, tau)
        if abs(grid[0] + tau) > tol or abs(grid[-1]) > tol:
            raise ConfigError("phi.payload", f"sampled grid must span [-{tau}, 0], got [{grid[0]}, {grid[-1]}]")

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == "constant":
            return np.broadcast_to(self.payload[0], (t.size, self.dim)).copy()
        if self.kind == "polynomial":
            powers = t[:, np.newaxis] ** np.arange(self.payload[0].shape[0])
            return powers @ self.payload[0]
        grid, values = self.payload
        return np.stack(
            [np.interp(t, grid, column.real) + 1j * np.interp(t, grid, column.imag) for column in values.T],
            axis=1,
        )

    def scaled(self, factor: float) -> "HistoryFunction":
        return replace(self, payload=self.payload[:-1] + (self.payload[-1] * factor,))


@dataclass
class DelaySystemSpec:
    alpha: float
    tau: float
    A: np.ndarray
    g_spec: NonlinearitySpec
    phi: HistoryFunction
    T: float
    h_step: float
    gamma: float = DEFAULT_GAMMA
    jordan: Optional[JordanStructure] = None
    cond_limit: float = DEFAULT_COND_LIMIT

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise DomainError(f"T must be positive, got {self.T}")
        if not self.h_step > 0:
            raise DomainError(f"h_step must be positive, got {self.h_step}")
        self.A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        if self.A.shape[0] != self.A.shape[1]:
            raise ConfigError("A", f"must be square, got shape {self.A.shape}")
        if not np.all(np.isfinite(self.A)):
            raise ConfigError("A", "entries must be finite")
        if self.phi.dim != self.dim:
            raise ConfigError("phi", f"dimension {self.phi.dim} does not match A ({self.dim})")
        self.phi.check_domain(self.tau)
        self._steps(self.tau, "tau")
        self._steps(self.T, "T")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def _steps(self, length: float, name: str) -> int:
        steps = int(round(length / self.h_step))
        if steps < 1 or abs(steps * self.h_step - length) > _ALIGN_TOL * max(1.0, length):
            raise QuadratureError(f"step {self.h_step} does not divide {name}={length}")
        return steps

    @property
    def delay_steps(self) -> int:
        return self._steps(self.tau, "tau")

    @property
    def horizon_steps(self) -> int:
        return self._steps(self.T, "T")

    @property
    def is_real(self) -> bool:
        real_g = self.g_spec.kind != "custom" and np.all(np.imag(np.asarray(self.g_spec.params, dtype=complex)) == 0)
        return bool(np.all(self.A.imag == 0) and self.phi.is_real and real_g)

    def times(self) -> np.ndarray:
        return (np.arange(self.delay_steps + self.horizon_steps + 1) - self.delay_steps) * self.h_step

    def history_values(self) -> np.ndarray:
        return self.phi(self.times()[: self.delay_steps + 1])


@dataclass
class Trajectory:
    t0: float
    step: float
    values: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def delay_steps(self) -> int:
        return int(round(-self.t0 / self.step))

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.values.shape[0]) - self.delay_steps) * self.step

    @property
    def future(self) -> np.ndarray:
        return self.values[self.delay_steps:]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    @property
    def sup_norm(self) -> float:
        return float(self.norms.max())

    @property
    def final_norm(self) -> float:
        return float(self.norms[-1])

    def max_deviation(self, other: "Trajectory", t_max: Optional[float] = None) -> float:
        if abs(self.step - other.step) > _ALIGN_TOL or self.delay_steps != other.delay_steps:
            raise QuadratureError("trajectories live on different grids")
        rows = min(self.values.shape[0], other.values.shape[0])
        if t_max is not None:
            rows = min(rows, self.delay_steps + int(math.floor(t_max / self.step + 1e-9)) + 1)
        return float(np.max(np.linalg.norm(self.values[:rows] - other.values[:rows], axis=1)))

    def truncated(self, rows: int) -> "Trajectory":
        return replace(self, values=self.values[:rows], meta=dict(self.meta, truncated=True))


@dataclass
class PicardReport:
    iterations: int
    final_delta: float
    contraction_ratios: List[float] = field(default_factory=list)
    deltas: List[float] = field(default_factory=list)


def diagonalize(spec: DelaySystemSpec) -> TransformedSystem:
    """linops pipeline: Jordan structure, γ-rescaling, transformed nonlinearity."""
    if spec.jordan is not None:
        spec.jordan.verify(spec.A)
        structure = spec.jordan
    else:
        structure = eigendecompose(spec.A, spec.cond_limit)
    ts = gamma_rescale(structure, spec.gamma)
    if not (spec.g_spec.is_zero and not ts.has_nilpotent):
        ts.nonlinearity_h = transform_nonlinearity(spec.g_spec, ts)
    return ts


def _kernel_tables(lam: complex, alpha: float, tau: float, t: np.ndarray):
    """E_{α,1}, ∫E_{α,α} and the second antiderivative of E_{α,α} on t."""
    if lam == 0:
        return (
            np.ones(t.shape, dtype=complex),
            (t ** alpha / special.gamma(alpha + 1)).astype(complex),
            (t ** (alpha + 1) / special.gamma(alpha + 2)).astype(complex),
        )
    p_alpha = MLParams(alpha=alpha, beta=alpha, lam=lam, tau=tau)
    return (
        ml_eval_grid(p_alpha.with_beta(1.0), t),
        ml_antiderivative(p_alpha, t, order=1),
        ml_antiderivative(p_alpha, t, order=2),
    )


def _causal_convolve(weights: np.ndarray, data: np.ndarray, length: int) -> np.ndarray:
    """First ``length`` entries of the full convolution along axis 0."""
    if data.shape[0] == 0:
        return np.zeros((length,) + data.shape[1:], dtype=complex)
    if data.ndim == 2:
        weights = weights[:, np.newaxis]
    full = signal.fftconvolve(weights, data, axes=0) if data.ndim == 2 else signal.fftconvolve(weights, data)
    out = np.zeros((length,) + data.shape[1:], dtype=complex)
    n = min(length, full.shape[0])
    out[:n] = full[:n]
    return out


class LyapunovPerronOperator:
    """Variation of constants map of the diagonalized system on a fixed grid.

    Convolutions use product integration against piecewise linear data with the
    exact kernel moments, so the map is exact whenever its data are linear on
    every cell.
    """

    def __init__(self, spec: DelaySystemSpec, ts: TransformedSystem):
        self.spec = spec
        self.ts = ts
        self.m = spec.delay_steps
        self.n = spec.horizon_steps
        h = spec.h_step

        u = np.arange(self.n + 2) * h
        d = ts.dim
        self.weights_a = np.zeros((self.n + 1, d), dtype=complex)
        self.weights_b = np.zeros((self.n + 1, d), dtype=complex)
        e_one = np.zeros((self.n + 1, d), dtype=complex)
        cache: Dict[complex, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        for i, lam in enumerate(ts.diag_lambdas):
            lam = complex(lam)
            if lam not in cache:
                k0, k1, k2 = _kernel_tables(lam, spec.alpha, spec.tau, u)
                i0 = k1[1:] - k1[:-1]
                i1 = h * k1[1:] - (k2[1:] - k2[:-1])
                cache[lam] = (k0[: self.n + 1], i0 - i1 / h, i1 / h)
            e_one[:, i], self.weights_a[:, i], self.weights_b[:, i] = cache[lam]

        self.history = ts.to_transformed(spec.history_values())
        self.linear_part = e_one * self.history[-1] + ts.diag_lambdas * self._history_integral()

    def _history_integral(self) -> np.ndarray:
        """∫_0^τ E_{α,α}(t - σ) H(t - σ) φ(σ - τ) dσ for every future grid point."""
        d = self.ts.dim
        right = np.vstack([np.zeros((1, d)), self.history[1:]])
        left = self.history[:-1]
        return self._convolve(right, self.n + 1, shift=0) + self._convolve(left, self.n + 1, shift=1)

    def _convolve(self, data: np.ndarray, length: int, shift: int) -> np.ndarray:
        weights = self.weights_a if shift == 0 else self.weights_b
        out = np.zeros((length, data.shape[1]), dtype=complex)
        for i in range(data.shape[1]):
            column = _causal_convolve(weights[:, i], data[:, i], length)
            if shift:
                out[1:, i] = column[:-1]
            else:
                out[:, i] = column
        return out

    def forcing_integral(self, forcing: np.ndarray) -> np.ndarray:
        """∫_0^t E_{α,α}(t - s) f(s) ds on the future grid, f given at the same points."""
        conv = self._convolve(forcing, self.n + 1, shift=0) + self._convolve(forcing, self.n + 1, shift=1)
        conv -= self.weights_a * forcing[0]
        conv[0] = 0
        return conv

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Image of a full-grid iterate (transformed coordinates), history rows kept."""
        image = np.empty_like(values, dtype=complex)
        image[: self.m + 1] = self.history
        image[self.m:] = self.linear_part
        nonlinearity = self.ts.nonlinearity_h
        if nonlinearity is not None:
            future = values[self.m:]
            delayed = values[: self.n + 1]
            image[self.m:] += self.forcing_integral(nonlinearity(future, delayed))
        image[self.m] = self.history[-1]
        return image


def lp_operator_apply(spec: DelaySystemSpec, xi: Trajectory, ts: Optional[TransformedSystem] = None) -> Trajectory:
    """One application of the operator; ``xi`` and the result are in transformed coordinates."""
    ts = ts if ts is not None else diagonalize(spec)
    operator = LyapunovPerronOperator(spec, ts)
    if xi.values.shape != (operator.m + operator.n + 1, ts.dim):
        raise QuadratureError(f"iterate has shape {xi.values.shape}, grid needs {(operator.m + operator.n + 1, ts.dim)}")
    return replace(xi, values=operator.apply(xi.values), meta=dict(xi.meta, solver="lp_operator"))


def _sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(a - b, axis=1)))


def _first_bad_row(values: np.ndarray) -> Optional[int]:
    bad = ~np.all(np.isfinite(values), axis=1)
    return int(np.argmax(bad)) if bad.any() else None


def _drop_imaginary(x: np.ndarray) -> np.ndarray:
    residue = float(np.max(np.abs(x.imag))) if x.size else 0.0
    if residue > IMAG_TOLERANCE:
        logger.warning("Real system produced imaginary residue %.3g, dropping it", residue)
    return x.real.astype(complex)


def _back_transform(spec: DelaySystemSpec, ts: TransformedSystem, values: np.ndarray) -> np.ndarray:
    x = ts.to_original(values)
    x[: spec.delay_steps + 1] = spec.history_values()
    return _drop_imaginary(x) if spec.is_real else x


def _bounded_kernel_points(lam: complex, alpha: float, tau: float, u: np.ndarray) -> int:
    """Leading points of ``u`` on which every kernel table is finite and below the growth cut."""

    def fits(count: int) -> bool:
        try:
            tables = _kernel_tables(lam, alpha, tau, u[:count])
        except OverflowError:
            return False
        return all(np.all(np.isfinite(k)) and float(np.max(np.abs(k))) <= KERNEL_GROWTH_CUT for k in tables)

    lo, hi = 1, u.size
    if fits(hi):
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _overflow_prefix(
    spec: DelaySystemSpec, ts: TransformedSystem, tol: float, max_iter: int, error: OverflowError
) -> TrajectoryOverflowError:
    """Solve on the part of the horizon where the kernels are representable and wrap it into the error."""
    u = np.arange(spec.horizon_steps + 2) * spec.h_step
    points = min(_bounded_kernel_points(lam, spec.alpha, spec.tau, u) for lam in {complex(v) for v in ts.diag_lambdas})
    steps = points - 2

    partial = None
    if steps >= 1:
        try:
            partial, _ = solve_picard(replace(spec, T=steps * spec.h_step), tol, max_iter, ts)
        except TrajectoryOverflowError as e:
            partial = e.trajectory
        except NoConvergenceError as e:
            logger.warning("Picard iteration on the representable part [0, %.6g] failed: %s", steps * spec.h_step, e)
    if partial is None:
        history = spec.history_values()
        partial = Trajectory(-spec.tau, spec.h_step, _drop_imaginary(history) if spec.is_real else history)
        steps = 0
    partial.meta.update(solver="picard")
    return TrajectoryOverflowError(
        f"Picard kernels grow past {KERNEL_GROWTH_CUT:g} after t={steps * spec.h_step:.6g}: {error}", partial
    )


def solve_picard(
    spec: DelaySystemSpec, tol: float = 1e-10, max_iter: int = 200, ts: Optional[TransformedSystem] = None
) -> Tuple[Trajectory, PicardReport]:
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")

    ts = ts if ts is not None else diagonalize(spec)
    try:
        operator = LyapunovPerronOperator(spec, ts)
    except OverflowError as e:
        raise _overflow_prefix(spec, ts, tol, max_iter, e) from e
    m = operator.m

    current = np.empty((m + operator.n + 1, ts.dim), dtype=complex)
    current[: m + 1] = operator.history
    current[m + 1:] = operator.history[-1]

    report = PicardReport(iterations=0, final_delta=math.inf)
    linear = ts.nonlinearity_h is None
    while True:
        image = operator.apply(current)
        report.iterations += 1
        bad = _first_bad_row(image)
        if bad is not None:
            partial = Trajectory(-spec.tau, spec.h_step, _back_transform(spec, ts, current[:bad]), {"solver": "picard"})
            raise TrajectoryOverflowError(f"Picard iterate left the double range at t={(bad - m) * spec.h_step:.6g}", partial)

        delta = _sup_distance(image, current)
        if report.deltas and report.deltas[-1] > 0:
            report.contraction_ratios.append(delta / report.deltas[-1])
        report.deltas.append(delta)
        report.final_delta = delta
        current = image
        logger.debug("Picard sweep %d: delta=%.3e", report.iterations, delta)

        if linear or delta <= tol:
            break
        if report.iterations >= max_iter:
            raise NoConvergenceError(
                f"Picard iteration stopped after {report.iterations} sweeps with delta={delta:.3e}",
                last_delta=delta,
                iterations=report.iterations,
            )

    logger.info("Picard iteration finished after %d sweeps, delta=%.3e", report.iterations, report.final_delta)
    trajectory = Trajectory(
        t0=-spec.tau,
        step=spec.h_step,
        values=_back_transform(spec, ts, current),
        meta={"solver": "picard", "iterations": report.iterations, "est_error": report.final_delta},
    )
    return trajectory, report


def l1_weights(n: int, alpha: float) -> np.ndarray:
    j = np.arange(n, dtype=float)
    return (j + 1) ** (1 - alpha) - j ** (1 - alpha)


def l1_caputo(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """L1 approximation of D^α on a uniform grid starting at the lower terminal; entry 0 is 0."""
    values = np.asarray(values, dtype=complex)
    if values.shape[0] < 2:
        return np.zeros_like(values)
    c = h ** (-alpha) / special.gamma(2 - alpha)
    increments = np.diff(values, axis=0)
    weights = l1_weights(increments.shape[0], alpha)
    result = np.zeros_like(values)
    result[1:] = c * _causal_convolve(weights, increments, increments.shape[0])
    return result


def _inner_solve(
    base: np.ndarray, start: np.ndarray, delayed: np.ndarray, g: Callable, c: float,
    n: int, max_inner: int, inner_tol: float,
) -> np.ndarray:
    z = start
    damping = 1.0
    previous = math.inf
    for _ in range(max_inner):
        with np.errstate(over="ignore", invalid="ignore"):
            target = base + g(z, delayed) / c
            # max norm, the 2-norm overflows before its entries do
            step = float(np.max(np.abs(target - z)))
        if not math.isfinite(step):
            raise InnerIterationError(f"implicit step {n} diverged", step_index=n)
        if step > previous:
            damping = 0.5
        z = z + damping * (target - z)
        if step <= inner_tol * max(1.0, float(np.max(np.abs(z)))):
            return z
        previous = step
    raise InnerIterationError(f"implicit step {n} did not settle within {max_inner} iterations", step_index=n)


def solve_direct(spec: DelaySystemSpec, max_inner: int = 50, inner_tol: float = 1e-12) -> Trajectory:
    m, n_steps, h, alpha = spec.delay_steps, spec.horizon_steps, spec.h_step, spec.alpha
    c = h ** (-alpha) / special.gamma(2 - alpha)
    weights = l1_weights(n_steps + 1, alpha)
    g = spec.g_spec
    A = spec.A

    x = np.zeros((m + n_steps + 1, spec.dim), dtype=complex)
    x[: m + 1] = spec.history_values()
    increments = np.zeros((n_steps + 1, spec.dim), dtype=complex)

    for n in range(1, n_steps + 1):
        delayed = x[n]
        previous = x[m + n - 1]
        memory = weights[1:n][::-1] @ increments[1:n]
        base = previous - memory + (A @ delayed) / c
        if g.is_zero:
            z = base
        else:
            z = _inner_solve(base, base + g(previous, delayed) / c, delayed, g, c, n, max_inner, inner_tol)
        if not np.all(np.isfinite(z)):
            partial = Trajectory(-spec.tau, h, x[: m + n], {"solver": "direct"})
            raise TrajectoryOverflowError(f"direct stepper left the double range at t={n * h:.6g}", partial)
        x[m + n] = z
        increments[n] = z - previous

    if spec.is_real:
        x = _drop_imaginary(x)
    sup = float(np.max(np.linalg.norm(x, axis=1)))
    logger.info("Direct stepper finished %d steps, sup norm %.6g", n_steps, sup)
    return Trajectory(
        t0=-spec.tau,
        step=h,
        values=x,
        meta={"solver": "direct", "iterations": 0, "est_error": h ** (2 - alpha) * max(1.0, sup)},
    )


def caputo_residual(traj: Trajectory, spec: DelaySystemSpec) -> float:
    """max over t > 0 of |L1 D^α x(t) - A x(t - τ) - g(x(t), x(t - τ))|."""
    m = traj.delay_steps
    if m != spec.delay_steps or abs(traj.step - spec.h_step) > _ALIGN_TOL:
        raise QuadratureError("trajectory grid does not match the system")
    future = traj.future
    if future.shape[0] < 2:
        return 0.0
    delayed = traj.values[: future.shape[0]]
    derivative = l1_caputo(future, traj.step, spec.alpha)
    rhs = delayed @ spec.A.T + spec.g_spec(future, delayed)
    return float(np.max(np.linalg.norm((derivative - rhs)[1:], axis=1)))
