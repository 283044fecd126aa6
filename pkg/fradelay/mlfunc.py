# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
"""Generalized delayed Mittag-Leffler function

    E^{λ,τ}_{α,β}(t) = Σ_k λ^k (t - kτ)^{αk+β-1} / Γ(αk+β) · H(t - kτ)

The sum is finite for every t. It is accumulated in double precision with
compensated summation; points whose cancellation estimate exceeds the policy
tolerance are recomputed with mpmath and rounded back to a double.
"""

from dataclasses import dataclass, replace
import math
from typing import List, Tuple

import mpmath
import numpy as np
from scipy import special

from .exception import DomainError, RegionError
from .helper import logger

_LOG_MAX = math.log(np.finfo(float).max)
_EPS = np.finfo(float).eps
# knots closer than this (relative) are treated as exact
_KNOT_RTOL = 1e-12
_CHUNK = 2048


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float
    lam: complex
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not math.isfinite(self.beta):
            raise DomainError(f"beta must be finite, got {self.beta}")
        if self.lam == 0 or not np.isfinite(self.lam):
            raise DomainError(f"lambda must be finite and nonzero, got {self.lam}")

    def with_beta(self, beta: float) -> "MLParams":
        return replace(self, beta=beta)

    def conjugate(self) -> "MLParams":
        return replace(self, lam=self.lam.conjugate())


@dataclass(frozen=True)
class EvalPolicy:
    abs_tol: float = 1e-12
    max_terms: int = 100000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1, got {self.max_terms}")


DEFAULT_POLICY = EvalPolicy()


def heaviside(t: float) -> float:
    return 1.0 if t >= 0 else 0.0


def _knot_layout(t: np.ndarray, tau: float) -> Tuple[np.ndarray, np.ndarray]:
    """Index of the last active term for every t and whether t sits on that knot."""
    ratio = t / tau
    k_last = np.floor(ratio + _KNOT_RTOL * np.maximum(1.0, ratio)).astype(np.int64)
    on_knot = np.abs(t - k_last * tau) <= _KNOT_RTOL * np.maximum(1.0, t)
    # tiny positive t stays on the k = 0 branch
    on_knot &= (k_last >= 1) | (t == 0)
    return k_last, on_knot


def _reciprocal_gamma(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``(log|1/Γ(x)|, sign)``; poles of Γ give sign 0."""
    pole = (x <= 0) & (x == np.round(x))
    safe = np.where(pole, 0.5, x)
    log_rg = -special.gammaln(safe)
    sign = np.where(pole, 0.0, special.gammasgn(safe))
    return log_rg, sign


def _series_double(p: MLParams, beta: float, t: np.ndarray, k_last: np.ndarray, on_knot: np.ndarray):
    k_max = int(k_last.max()) if t.size else 0
    ks = np.arange(k_max + 1)
    expo = p.alpha * ks + beta - 1.0
    log_rg, g_sign = _reciprocal_gamma(p.alpha * ks + beta)
    log_lam = math.log(abs(p.lam))
    arg_lam = np.angle(p.lam)

    re_sum = np.zeros(t.shape)
    im_sum = np.zeros(t.shape)
    re_c = np.zeros(t.shape)
    im_c = np.zeros(t.shape)
    abs_sum = np.zeros(t.shape)

    def neumaier(total, comp, x):
        new = total + x
        comp += np.where(np.abs(total) >= np.abs(x), (total - new) + x, (x - new) + total)
        return new

    for k in ks:
        active = k <= k_last
        if not active.any():
            break
        u = t - k * p.tau
        at_knot = active & on_knot & (k == k_last)
        inner = active & ~at_knot
        mag = np.zeros(t.shape)
        if inner.any():
            log_mag = k * log_lam + expo[k] * np.log(u[inner]) + log_rg[k]
            if np.any(log_mag > _LOG_MAX):
                raise OverflowError(
                    f"term k={k} of E(alpha={p.alpha}, beta={beta}) exceeds the double range"
                )
            mag[inner] = g_sign[k] * np.exp(log_mag)
        if at_knot.any():
            if expo[k] < 0 and g_sign[k] != 0:
                bad = t[at_knot][0]
                raise DomainError(f"kernel is singular at the knot t={bad} (exponent {expo[k]:.3g} < 0)")
            if expo[k] == 0:
                mag[at_knot] = g_sign[k] * math.exp(k * log_lam + log_rg[k])
        phase = k * arg_lam
        re_sum = neumaier(re_sum, re_c, mag * math.cos(phase))
        im_sum = neumaier(im_sum, im_c, mag * math.sin(phase))
        abs_sum += np.abs(mag)

    return (re_sum + re_c) + 1j * (im_sum + im_c), abs_sum


def _series_mp(p: MLParams, beta: float, t: float, k_last: int, on_knot: bool, dps: int) -> complex:
    with mpmath.workdps(dps):
        lam = mpmath.mpc(p.lam.real, p.lam.imag)
        alpha = mpmath.mpf(p.alpha)
        b = mpmath.mpf(beta)
        tau = mpmath.mpf(p.tau)
        tt = mpmath.mpf(t)
        total = mpmath.mpc(0)
        lam_k = mpmath.mpc(1)
        for k in range(k_last + 1):
            x = alpha * k + b
            if k == k_last and on_knot:
                if x == 1:
                    total += lam_k * mpmath.rgamma(x)
            else:
                total += lam_k * mpmath.power(tt - k * tau, x - 1) * mpmath.rgamma(x)
            lam_k *= lam
        return complex(total)


def _series(p: MLParams, beta: float, t: np.ndarray, policy: EvalPolicy) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError(f"t must be nonnegative, got {t[t < 0].min()}")
    if not np.all(np.isfinite(t)):
        raise DomainError("t must be finite")

    flat = t.ravel()
    result = np.empty(flat.shape, dtype=complex)
    n_precise = 0
    for start in range(0, flat.size, _CHUNK):
        chunk = flat[start:start + _CHUNK]
        k_last, on_knot = _knot_layout(chunk, p.tau)
        if chunk.size and k_last.max() + 1 > policy.max_terms:
            raise DomainError(
                f"t={chunk.max()} needs {k_last.max() + 1} series terms, policy allows {policy.max_terms}"
            )
        values, abs_sum = _series_double(p, beta, chunk, k_last, on_knot)
        cancel = 4 * _EPS * abs_sum
        precise = cancel > policy.abs_tol * np.maximum(1.0, np.abs(values))
        for i in np.flatnonzero(precise):
            dps = 20 + int(math.ceil(math.log10(max(abs_sum[i], 1.0))))
            values[i] = _series_mp(p, beta, float(chunk[i]), int(k_last[i]), bool(on_knot[i]), dps)
        n_precise += int(precise.sum())
        result[start:start + _CHUNK] = values

    if n_precise:
        logger.debug("Mittag-Leffler series: %d of %d points recomputed with mpmath", n_precise, flat.size)
    return result.reshape(t.shape)


def ml_eval_grid(p: MLParams, t, policy: EvalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Evaluate E^{λ,τ}_{α,β} on an array of t ≥ 0; the value at t = 0 is 1 by convention."""
    t = np.asarray(t, dtype=float)
    values = np.empty(t.shape, dtype=complex)
    zero = t == 0
    values[zero] = 1.0
    if (~zero).any():
        values[~zero] = _series(p, p.beta, t[~zero], policy)
    return values


def ml_eval(p: MLParams, t: float, policy: EvalPolicy = DEFAULT_POLICY) -> complex:
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return complex(ml_eval_grid(p, np.array([t]), policy)[0])


def ml_antiderivative(p: MLParams, t, order: int = 1, policy: EvalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """``order``-fold integral from 0 of E_{α,β}, which is E_{α,β+order} without the t = 0 convention."""
    if order < 1:
        raise DomainError(f"order must be at least 1, got {order}")
    if p.beta + order <= 1:
        raise DomainError(f"antiderivative of order {order} is not integrable for beta={p.beta}")
    return _series(p, p.beta + order, t, policy)


def _abs_mesh(p: MLParams, t_upper: float, quad_step: float) -> Tuple[np.ndarray, List[Tuple[int, float]]]:
    """Integration nodes and the (node index, exponent) pairs of singular knots.

    Segments between knots get a graded mesh when the leading power at the left knot
    is not smooth; once every later knot is at least C^1 the step grows linearly with t.
    """
    alpha, beta, tau = p.alpha, p.beta, p.tau
    k_smooth = int(math.ceil((2.0 - beta) / alpha)) + 1
    t_smooth = max(10.0, k_smooth * tau)

    nodes: List[np.ndarray] = [np.zeros(1)]
    singular: List[Tuple[int, float]] = []
    count = 1
    k = 0
    while k * tau < t_upper and k * tau < t_smooth:
        a = k * tau
        b = min((k + 1) * tau, t_upper, max(t_smooth, a))
        length = b - a
        expo = alpha * k + beta - 1.0
        if expo <= -1.0 and (k == 0 or _reciprocal_gamma(np.array([alpha * k + beta]))[1][0] != 0):
            raise DomainError(f"|E| is not integrable near t={a} (exponent {expo:.3g})")
        if expo < 1.0:
            grading = min(2.0 / (expo + 1.0), 10.0)
            n = max(2, int(math.ceil(grading * length / quad_step)))
            local = a + length * (np.arange(1, n + 1) / n) ** grading
        else:
            n = max(1, int(math.ceil(length / quad_step)))
            local = a + length * np.arange(1, n + 1) / n
        if expo < 0:
            singular.append((count - 1, expo))
        nodes.append(local)
        count += local.size
        k += 1

    last = float(nodes[-1][-1])
    if last < t_upper:
        stretched = []
        s = last
        while s < t_upper:
            s = min(t_upper, s + quad_step * max(1.0, s / t_smooth))
            stretched.append(s)
        nodes.append(np.array(stretched))

    mesh = np.concatenate(nodes)
    mesh[-1] = t_upper
    return mesh, singular


def ml_abs_cumulative(
    p: MLParams, t_upper: float, quad_step: float, policy: EvalPolicy = DEFAULT_POLICY
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and running values of ∫_0^t |E(s)| ds on the integration mesh."""
    if t_upper < 0:
        raise DomainError(f"t_upper must be nonnegative, got {t_upper}")
    if not quad_step > 0:
        raise DomainError(f"quad_step must be positive, got {quad_step}")
    if t_upper == 0:
        return np.zeros(1), np.zeros(1)

    mesh, singular = _abs_mesh(p, t_upper, quad_step)
    singular_nodes = {index: expo for index, expo in singular}

    values = np.full(mesh.shape, np.nan)
    regular = np.ones(mesh.shape, dtype=bool)
    regular[list(singular_nodes)] = False
    values[regular] = np.abs(_series(p, p.beta, mesh[regular], policy))

    widths = np.diff(mesh)
    cells = 0.5 * widths * (values[:-1] + values[1:])
    for index, expo in singular_nodes.items():
        if index > 0:
            # left limit is finite, use the value of the preceding node
            cells[index - 1] = widths[index - 1] * values[index - 1]
        # leading power c·(s - a)^expo integrated exactly over the first cell
        cells[index] = widths[index] * values[index + 1] / (expo + 1.0)
    return mesh, np.concatenate([[0.0], np.cumsum(cells)])


def ml_abs_integral(
    p: MLParams, t_upper: float, quad_step: float, policy: EvalPolicy = DEFAULT_POLICY
) -> float:
    _, cumulative = ml_abs_cumulative(p, t_upper, quad_step, policy)
    return float(cumulative[-1])


def ml_decay_constant(
    p: MLParams, rate: float, t_lo: float, t_hi: float, n_points: int = 24,
    policy: EvalPolicy = DEFAULT_POLICY,
) -> float:
    """max |E(t)|·t^rate over a geometric grid of [t_lo, t_hi]."""
    if not 0 < t_lo < t_hi:
        raise DomainError(f"need 0 < t_lo < t_hi, got [{t_lo}, {t_hi}]")
    t = np.geomspace(t_lo, t_hi, n_points)
    return float(np.max(np.abs(ml_eval_grid(p, t, policy)) * t ** rate))


def ml_sup_weight(
    p_1: MLParams, p_alpha: MLParams, grid_step: float, horizon: float,
    quad_step: float = 0.02, policy: EvalPolicy = DEFAULT_POLICY,
) -> float:
    """Upper bound of sup_t |E_{α,1}(t)| + |λ| ∫_{t-τ}^t |E_{α,α}(s)| ds + 1 over all t ≥ 0."""
    from .region import RegionParams, in_region

    if p_1.lam != p_alpha.lam or p_1.alpha != p_alpha.alpha or p_1.tau != p_alpha.tau:
        raise DomainError("both parameter sets must share alpha, tau and lambda")
    if p_1.beta != 1 or p_alpha.beta != p_alpha.alpha:
        raise DomainError("expected beta=1 for p_1 and beta=alpha for p_alpha")
    if not grid_step > 0:
        raise DomainError(f"grid_step must be positive, got {grid_step}")
    if not horizon > p_1.tau:
        raise DomainError(f"horizon must exceed tau={p_1.tau}, got {horizon}")

    verdict = in_region(p_1.lam, RegionParams(alpha=p_1.alpha, tau=p_1.tau))
    if not verdict.member:
        raise RegionError(f"lambda={p_1.lam} is outside the stability region, the weight may be unbounded")

    lam_abs = abs(p_1.lam)
    t = np.arange(0, int(math.floor(horizon / grid_step)) + 1) * grid_step
    nodes, cumulative = ml_abs_cumulative(p_alpha, horizon, quad_step, policy)
    window = np.interp(t, nodes, cumulative) - np.interp(np.maximum(t - p_1.tau, 0.0), nodes, cumulative)
    weight = np.abs(ml_eval_grid(p_1, t, policy)) + lam_abs * window + 1.0
    grid_sup = float(weight.max())

    c_fit = ml_decay_constant(p_1, p_1.alpha, horizon / 2, horizon, policy=policy)
    c_fit_alpha = ml_decay_constant(p_alpha, p_alpha.alpha + 1, horizon / 2, horizon, policy=policy)
    tail = (
        c_fit / horizon ** p_1.alpha
        + lam_abs * c_fit_alpha * p_1.tau / (horizon - p_1.tau) ** (p_1.alpha + 1)
        + 1.0
    )
    logger.debug("Sup weight for lambda=%s: grid %.6g, tail bound %.6g", p_1.lam, grid_sup, tail)
    return max(grid_sup, tail)
