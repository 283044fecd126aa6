# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from dataclasses import dataclass, field, replace
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .exception import (
    ContourTooCloseError,
    DomainError,
    InnerIterationError,
    NearDefectiveError,
    NoContractionError,
    RegionError,
)
from .helper import complex_to_json, logger
from .linops import TransformedSystem, lipschitz_h
from .mlfunc import EvalPolicy, MLParams, ml_abs_integral, ml_decay_constant, ml_eval_grid, ml_sup_weight
from .region import RegionParams, RegionVerdict, count_unstable_roots, in_region
from .solver import DelaySystemSpec, HistoryFunction, Trajectory, diagonalize, solve_direct

DEFAULT_EPS_GRID = tuple(np.geomspace(1e-4, 1.0, 41))
DEFAULT_HORIZON = 50.0
DEFAULT_QUAD_STEP = 0.02
DEFAULT_GRID_STEP = 0.05
# integrals tolerate a looser cancellation guard than point evaluations
QUADRATURE_POLICY = EvalPolicy(abs_tol=1e-6)

DECAY_RATIO = 0.01
GROWTH_FACTOR = 10.0
HISTORY_KINDS = ("constant", "linear", "sampled")

VERDICTS = ("stable_certified", "stable_empirical", "unstable_empirical", "inconclusive")


@dataclass
class StabilityConstants:
    C_alpha_lambda: float
    eps: float
    q: float
    delta: float
    sup_weight: float
    lipschitz: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "C_alpha_lambda": self.C_alpha_lambda,
            "eps": self.eps,
            "q": self.q,
            "delta": self.delta,
            "sup_weight": self.sup_weight,
            "lipschitz_h": self.lipschitz,
        }


@dataclass
class HistoryOutcome:
    kind: str
    initial_norm: float
    sup_norm: float
    final_norm: float
    decay_slope: float
    decayed: bool
    grown: bool
    criterion: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "initial_norm": self.initial_norm,
            "sup_norm": self.sup_norm,
            "final_norm": self.final_norm,
            "decay_slope": self.decay_slope,
            "decayed": self.decayed,
            "grown": self.grown,
            "criterion": self.criterion,
        }


@dataclass
class EmpiricalSummary:
    sup_norm: float
    final_norm: float
    decay_slope: float
    verdict: str
    mode: str
    scale: float
    horizon: float
    histories: List[HistoryOutcome] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sup_norm": self.sup_norm,
            "final_norm": self.final_norm,
            "decay_slope": self.decay_slope,
            "verdict": self.verdict,
            "mode": self.mode,
            "scale": self.scale,
            "horizon": self.horizon,
            "histories": [h.to_dict() for h in self.histories],
        }


@dataclass
class StabilityReport:
    region_verdicts: List[RegionVerdict]
    eigenvalues: List[complex]
    root_count_total: Optional[int]
    constants: Optional[StabilityConstants]
    empirical: EmpiricalSummary
    notes: List[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return self.empirical.verdict

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "region": [
                {
                    "lambda": complex_to_json(lam),
                    "member": v.member,
                    "margin_to_boundary": v.margin_to_boundary,
                    "arg_ok": v.arg_ok,
                }
                for lam, v in zip(self.eigenvalues, self.region_verdicts)
            ],
            "root_count_total": self.root_count_total,
            "constants": self.constants.to_dict() if self.constants else None,
            "empirical": self.empirical.to_dict(),
            "notes": list(self.notes),
        }


def _unique(values: Sequence[complex]) -> List[complex]:
    seen: List[complex] = []
    for value in values:
        if not any(abs(complex(value) - s) <= 1e-12 * max(1.0, abs(s)) for s in seen):
            seen.append(complex(value))
    return seen


def _require_region(lambdas: Sequence[complex], alpha: float, tau: float):
    p = RegionParams(alpha=alpha, tau=tau)
    for lam in lambdas:
        verdict = in_region(lam, p)
        if not verdict.member:
            raise RegionError(
                f"eigenvalue {lam:.6g} is outside the stability region (margin {verdict.margin_to_boundary:.3g})"
            )


def integral_constant(
    p_alpha: MLParams, horizon: float = DEFAULT_HORIZON, quad_step: float = DEFAULT_QUAD_STEP,
    policy: EvalPolicy = QUADRATURE_POLICY,
) -> float:
    """∫_0^∞ |E_{α,α}|: quadrature up to ``horizon`` plus a C'·t^{-α-1} tail."""
    _require_region([p_alpha.lam], p_alpha.alpha, p_alpha.tau)
    head = ml_abs_integral(p_alpha, horizon, quad_step, policy)
    c_tail = ml_decay_constant(p_alpha, p_alpha.alpha + 1, horizon / 2, horizon, policy=policy)
    tail = c_tail / (p_alpha.alpha * horizon ** p_alpha.alpha)
    logger.debug("C(alpha, lambda=%s): head %.6g, tail %.6g", p_alpha.lam, head, tail)
    return head + tail


def compute_constants(
    spec: DelaySystemSpec,
    eps_grid: Optional[Sequence[float]] = None,
    horizon: float = DEFAULT_HORIZON,
    quad_step: float = DEFAULT_QUAD_STEP,
    grid_step: float = DEFAULT_GRID_STEP,
    ts: Optional[TransformedSystem] = None,
) -> StabilityConstants:
    eps_grid = DEFAULT_EPS_GRID if eps_grid is None else eps_grid
    if len(eps_grid) == 0 or min(eps_grid) <= 0:
        raise DomainError("eps_grid must hold positive radii")
    ts = ts if ts is not None else diagonalize(spec)
    lambdas = _unique(ts.diag_lambdas)
    _require_region(lambdas, spec.alpha, spec.tau)

    c_const = 0.0
    weight = 0.0
    for lam in lambdas:
        p_alpha = MLParams(alpha=spec.alpha, beta=spec.alpha, lam=lam, tau=spec.tau)
        c_const = max(c_const, integral_constant(p_alpha, horizon, quad_step))
        weight = max(
            weight,
            ml_sup_weight(p_alpha.with_beta(1.0), p_alpha, grid_step, horizon, quad_step, QUADRATURE_POLICY),
        )

    for eps in sorted(eps_grid, reverse=True):
        ell = float(lipschitz_h(ts, spec.g_spec, eps))
        q = float(c_const * ell)
        if q < 1:
            delta = float(eps * (1 - q) / weight)
            logger.info("Constants: C=%.6g, eps=%.3g, q=%.6g, delta=%.6g", c_const, eps, q, delta)
            return StabilityConstants(
                C_alpha_lambda=float(c_const), eps=float(eps), q=q, delta=delta, sup_weight=float(weight), lipschitz=ell
            )
    raise NoContractionError(
        f"q = C·l_h(eps) >= 1 for every eps in the grid (C={c_const:.6g}, smallest eps={min(eps_grid):.3g})"
    )


def decay_fit(p: MLParams, t_lo: float, t_hi: float, n_points: int = 40):
    """Least-squares slope of log|E| against log t; returns ``(slope, r2)``."""
    _require_region([p.lam], p.alpha, p.tau)
    if not 1 <= t_lo < t_hi:
        raise DomainError(f"need 1 <= t_lo < t_hi, got [{t_lo}, {t_hi}]")
    if n_points < 3:
        raise DomainError(f"need at least 3 points, got {n_points}")
    t = np.geomspace(t_lo, t_hi, n_points)
    magnitude = np.abs(ml_eval_grid(p, t))
    if not np.all(np.isfinite(magnitude)) or np.any(magnitude == 0):
        raise DomainError("|E| vanishes or is not finite on the fit grid")
    fit = stats.linregress(np.log(t), np.log(magnitude))
    return float(fit.slope), float(fit.rvalue ** 2)


def _random_history(
    kind: str, spec: DelaySystemSpec, rng: np.random.Generator, scale: float
) -> HistoryFunction:
    d = spec.dim
    real = spec.is_real

    def draw(*shape):
        sample = rng.standard_normal(shape)
        return sample if real else sample + 1j * rng.standard_normal(shape)

    if kind == "constant":
        phi = HistoryFunction.constant(draw(d))
    elif kind == "linear":
        phi = HistoryFunction.polynomial(draw(2, d))
    else:
        m = spec.delay_steps
        nodes = np.unique(np.round(np.linspace(0, m, min(m, 8) + 1)).astype(int))
        grid = (nodes - m) * spec.h_step
        grid[0], grid[-1] = -spec.tau, 0.0
        phi = HistoryFunction.sampled(grid, draw(nodes.size, d))

    # piecewise linear on the simulation grid, so the sup sits on a grid point
    peak = float(np.max(np.linalg.norm(replace(spec, phi=phi).history_values(), axis=1)))
    return phi.scaled(scale / peak if peak > 0 else 0.0)


def _log_slope(traj: Trajectory) -> float:
    future = np.linalg.norm(traj.future, axis=1)
    n = future.size - 1
    if n < 4:
        return math.nan
    index = np.unique(np.geomspace(max(1, n // 2), n, 32).astype(int))
    t = index * traj.step
    norms = future[index]
    positive = norms > 0
    if positive.sum() < 3:
        return math.nan
    return float(stats.linregress(np.log(t[positive]), np.log(norms[positive])).slope)


def _assess(kind: str, traj: Trajectory, initial: float, alpha: float) -> HistoryOutcome:
    future = np.linalg.norm(traj.future, axis=1)
    sup_norm = float(np.max(np.linalg.norm(traj.values, axis=1)))
    final = float(future[-1])
    slope = _log_slope(traj)
    if initial == 0:
        return HistoryOutcome(kind, initial, sup_norm, final, slope, decayed=final == 0, grown=False, criterion="zero")

    grown = sup_norm >= GROWTH_FACTOR * initial
    quarter = future.size // 4
    envelope_ok = quarter == 0 or future[-quarter:].max() <= future[-2 * quarter:-quarter].max()
    criterion = None
    if envelope_ok and final < DECAY_RATIO * initial:
        criterion = "ratio"
    elif envelope_ok and final < initial and slope <= -0.5 * alpha:
        criterion = "slope"
    return HistoryOutcome(kind, initial, sup_norm, final, slope, decayed=criterion is not None, grown=grown,
                          criterion=criterion)


def verify_stability(
    spec: DelaySystemSpec,
    n_histories: int = 20,
    scale: Optional[float] = None,
    seed: int = 0,
    eps_grid: Optional[Sequence[float]] = None,
    horizon: Optional[float] = None,
) -> StabilityReport:
    if n_histories < 1:
        raise DomainError(f"n_histories must be at least 1, got {n_histories}")
    if scale is not None and scale < 0:
        raise DomainError(f"scale must be nonnegative, got {scale}")

    notes: List[str] = []
    eigenvalues = list(spec.jordan.lambdas) if spec.jordan is not None else list(np.linalg.eigvals(spec.A))
    p = RegionParams(alpha=spec.alpha, tau=spec.tau)
    verdicts = [in_region(lam, p) for lam in eigenvalues]

    root_total: Optional[int] = 0
    for lam in _unique(eigenvalues):
        try:
            root_total += count_unstable_roots(lam, p)
        except ContourTooCloseError as e:
            notes.append(f"root count unavailable: {e}")
            root_total = None
            break

    constants = None
    contraction_failed = False
    if all(v.member for v in verdicts):
        try:
            constants = compute_constants(spec, eps_grid)
        except NoContractionError as e:
            contraction_failed = True
            notes.append(f"no contraction: {e}")
        except NearDefectiveError as e:
            notes.append(f"constants unavailable: {e}")
    else:
        notes.append("some eigenvalue lies outside the stability region")

    if scale is None:
        scale = constants.delta if constants is not None else 0.1
    certified = constants is not None and scale <= constants.delta * (1 + 1e-12)
    if constants is not None and not certified:
        notes.append(f"scale {scale:.6g} exceeds delta {constants.delta:.6g}, running in empirical mode")

    h = spec.h_step
    horizon = max(50 * spec.tau, 100.0) if horizon is None else horizon
    horizon = math.ceil(horizon / h - 1e-9) * h
    rng = np.random.default_rng(seed)

    outcomes: List[HistoryOutcome] = []
    for i in range(n_histories):
        kind = HISTORY_KINDS[i % len(HISTORY_KINDS)]
        phi = _random_history(kind, spec, rng, scale)
        run = replace(spec, phi=phi, T=horizon)
        try:
            traj = solve_direct(run)
        except (OverflowError, InnerIterationError) as e:
            logger.info("History %d (%s) blew up: %s", i, kind, e)
            outcomes.append(HistoryOutcome(kind, scale, math.inf, math.inf, math.nan, decayed=False, grown=True))
            continue
        outcomes.append(_assess(kind, traj, scale, spec.alpha))

    sup_norm = max(o.sup_norm for o in outcomes)
    final_norm = max(o.final_norm for o in outcomes)
    slopes = [o.decay_slope for o in outcomes if math.isfinite(o.decay_slope)]
    decay_slope = max(slopes) if slopes else math.nan

    if any(o.grown for o in outcomes):
        verdict = "unstable_empirical"
    elif contraction_failed:
        verdict = "inconclusive"
    elif all(o.decayed for o in outcomes):
        verdict = "stable_empirical"
        if certified:
            inside = sup_norm <= constants.eps * (1 + 1e-9)
            if not inside:
                logger.warning("Trajectory left the eps=%.3g ball (sup %.3g) in certified mode", constants.eps, sup_norm)
                notes.append("certified ball was left by a trajectory")
            elif all(v.member for v in verdicts) and root_total == 0:
                verdict = "stable_certified"
    else:
        verdict = "inconclusive"

    empirical = EmpiricalSummary(
        sup_norm=sup_norm,
        final_norm=final_norm,
        decay_slope=decay_slope,
        verdict=verdict,
        mode="certified" if certified else "empirical",
        scale=scale,
        horizon=horizon,
        histories=outcomes,
    )
    logger.info("Stability verdict: %s", verdict)
    return StabilityReport(
        region_verdicts=verdicts,
        eigenvalues=[complex(lam) for lam in eigenvalues],
        root_count_total=root_total,
        constants=constants,
        empirical=empirical,
        notes=notes,
    )
