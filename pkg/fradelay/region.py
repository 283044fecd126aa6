# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from dataclasses import dataclass
import cmath
import math
from typing import List, Optional, Tuple

import numpy as np

from .exception import ContourTooCloseError, DomainError
from .helper import logger

# max. bisection depth while refining a contour edge
_MAX_REFINE = 30


@dataclass(frozen=True)
class RegionParams:
    alpha: float
    tau: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be positive, got {self.tau}")

    def threshold_radius(self, theta: float) -> float:
        return ((abs(theta) - self.alpha * math.pi / 2) / self.tau) ** self.alpha


@dataclass(frozen=True)
class RootCountWindow:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    margin: float = 1e-3

    def __post_init__(self):
        if not self.re_min < self.re_max:
            raise DomainError(f"re_min={self.re_min} must be below re_max={self.re_max}")
        if not self.im_min < self.im_max:
            raise DomainError(f"im_min={self.im_min} must be below im_max={self.im_max}")
        if not self.margin > 0:
            raise DomainError(f"margin must be positive, got {self.margin}")

    def split(self, re_cut: float) -> Tuple["RootCountWindow", "RootCountWindow"]:
        if not self.re_min < re_cut < self.re_max:
            raise DomainError(f"cut {re_cut} is not inside ({self.re_min}, {self.re_max})")
        return (
            RootCountWindow(self.re_min, re_cut, self.im_min, self.im_max, self.margin),
            RootCountWindow(re_cut, self.re_max, self.im_min, self.im_max, self.margin),
        )

    @property
    def corners(self) -> List[complex]:
        # positive orientation
        return [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]


@dataclass(frozen=True)
class RegionVerdict:
    member: bool
    margin_to_boundary: float
    arg_ok: bool


def in_region(lam: complex, p: RegionParams) -> RegionVerdict:
    lam = complex(lam)
    if lam == 0:
        return RegionVerdict(member=False, margin_to_boundary=-p.alpha * math.pi / 2, arg_ok=False)

    theta = abs(cmath.phase(lam))
    modulus = abs(lam)
    arg_ok = theta > p.alpha * math.pi / 2
    if not arg_ok:
        return RegionVerdict(
            member=False,
            margin_to_boundary=-(modulus + p.alpha * math.pi / 2 - theta),
            arg_ok=False,
        )
    margin = p.threshold_radius(theta) - modulus
    return RegionVerdict(member=bool(margin > 0), margin_to_boundary=float(margin), arg_ok=True)


def boundary_samples(p: RegionParams, n: int) -> List[Tuple[float, float, complex]]:
    """Upper branch of the region boundary; the lower branch is its mirror image."""
    if n < 2:
        raise DomainError(f"need at least 2 boundary samples, got {n}")
    theta_min = p.alpha * math.pi / 2
    # theta spans (theta_min, pi], the open end is approached but not taken
    thetas = theta_min + (math.pi - theta_min) * np.arange(1, n + 1) / n
    samples = []
    for theta in thetas:
        radius = p.threshold_radius(float(theta))
        samples.append((float(theta), radius, complex(radius * np.exp(1j * theta))))
    return samples


def _char_values(s: np.ndarray, lam: complex, p: RegionParams) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if np.any(s == 0):
        raise DomainError("the characteristic function is not defined at s=0")
    # principal branch, np.angle returns values in (-pi, pi]
    s_alpha = np.exp(p.alpha * (np.log(np.abs(s)) + 1j * np.angle(s)))
    return s_alpha - complex(lam) * np.exp(-p.tau * s)


def _char_derivative(s: np.ndarray, lam: complex, p: RegionParams) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    s_power = np.exp((p.alpha - 1) * (np.log(np.abs(s)) + 1j * np.angle(s)))
    return p.alpha * s_power + complex(lam) * p.tau * np.exp(-p.tau * s)


def char_function(s: complex, lam: complex, p: RegionParams) -> complex:
    return complex(_char_values(np.array([s]), lam, p)[0])


def root_scale(lam: complex, p: RegionParams) -> float:
    """|λ|^{1/α}; every zero with Re(s) >= 0 has at most this modulus."""
    return abs(complex(lam)) ** (1.0 / p.alpha)


def _root_free_radius(lam: complex, p: RegionParams) -> float:
    # |s^α| <= |λ|/4 and |λ·exp(-τs)| >= |λ|·exp(-1/2) inside, so f has no zeros there
    return min(0.25 ** (1.0 / p.alpha) * root_scale(lam, p), 0.5 / p.tau)


def _edge_params(start: complex, end: complex, density: float) -> np.ndarray:
    length = abs(end - start)
    n = max(16, int(math.ceil(length * density)))
    params = np.linspace(0.0, 1.0, n + 1)

    # grade the samples geometrically towards the branch point when the edge passes close to it
    direction = end - start
    t0 = min(1.0, max(0.0, -(start.conjugate() * direction).real / length ** 2))
    closest = abs(start + t0 * direction)
    if closest < length / n:
        lowest = max(0.5 * closest, 1e-15 * length)
        count = max(16, int(math.ceil(16 * math.log(length / lowest))))
        offsets = np.geomspace(lowest, length, count) / length
        params = np.concatenate([params, t0 - offsets, t0 + offsets, [t0]])
        params = np.unique(np.clip(params, 0.0, 1.0))
    return params


def _edge_phase(start: complex, end: complex, lam: complex, p: RegionParams, density: float):
    """Sample one edge until consecutive phase steps are below pi/2; return samples, values and total phase."""
    params = _edge_params(start, end, density)
    values = _char_values(start + (end - start) * params, lam, p)
    for _ in range(_MAX_REFINE):
        if np.any(values == 0):
            raise ContourTooCloseError(f"the characteristic function vanishes on the edge {start} -> {end}")
        steps = np.angle(values[1:] / values[:-1])
        coarse = np.abs(steps) >= math.pi / 2
        if not coarse.any():
            return start + (end - start) * params, values, float(steps.sum())
        midpoints = 0.5 * (params[:-1][coarse] + params[1:][coarse])
        merged = np.concatenate([params, midpoints])
        order = np.argsort(merged, kind="stable")
        params = merged[order]
        values = np.concatenate([values, _char_values(start + (end - start) * midpoints, lam, p)])[order]
    raise ContourTooCloseError(
        f"phase of the characteristic function does not resolve on the edge {start} -> {end}"
    )


def count_roots(lam: complex, p: RegionParams, w: RootCountWindow, density: float = 32.0) -> int:
    """Zeros of s^α - λ·exp(-τs) inside the window, by the argument principle."""
    if w.re_min <= 0:
        raise DomainError(f"window must lie in the right half-plane, got re_min={w.re_min}")
    if complex(lam) == 0:
        return 0

    corners = w.corners
    total = 0.0
    points, values = [], []
    for start, end in zip(corners, corners[1:] + corners[:1]):
        edge_points, edge_values, phase = _edge_phase(start, end, lam, p, density)
        total += phase
        points.append(edge_points)
        values.append(edge_values)
    points = np.concatenate(points)
    values = np.concatenate(values)

    # Newton distance |f/f'| estimates how far the nearest zero is; the root free disc
    # around the branch point is skipped, s^α is too steep there for the estimate to mean anything
    outside = np.abs(points) > _root_free_radius(lam, p)
    if outside.any():
        distance = np.abs(values[outside]) / np.abs(_char_derivative(points[outside], lam, p))
        nearest = float(distance.min())
        if nearest < w.margin:
            raise ContourTooCloseError(
                f"a zero of the characteristic function lies about {nearest:.3g} from the window boundary, "
                f"closer than the margin {w.margin:.3g}"
            )

    winding = total / (2 * math.pi)
    count = int(round(winding))
    logger.debug("Winding number for lambda=%s: %.6f (%d roots)", lam, winding, count)
    return count


def stability_window(
    lam: complex, p: RegionParams, re_min: Optional[float] = None, margin: Optional[float] = None
) -> RootCountWindow:
    """Window large enough to hold every characteristic root with Re(s) >= re_min.

    The left edge and the margin default to fractions of the root scale |λ|^{1/α}, so small
    eigenvalues whose zeros sit close to the origin are still counted.
    """
    scale = min(1.0, root_scale(lam, p)) if complex(lam) != 0 else 1.0
    re_min = 1e-6 * scale if re_min is None else re_min
    margin = 1e-3 * scale if margin is None else margin
    r = max(2.0, (abs(lam) * math.e) ** (1.0 / p.alpha) + 1.0)
    y = min(r * math.tan(math.pi / 2 - 0.05), 10.0 * r)
    return RootCountWindow(re_min=re_min, re_max=r, im_min=-y, im_max=y, margin=margin)


def count_unstable_roots_window(lam: complex, p: RegionParams, retries: int = 2) -> Tuple[int, RootCountWindow]:
    """Count zeros with Re(s) > 0; on a zero near the contour retry with a moved window."""
    window = stability_window(lam, p)
    if complex(lam) == 0:
        return 0, window
    for attempt in range(retries + 1):
        try:
            return count_roots(lam, p, window), window
        except ContourTooCloseError as e:
            if attempt == retries:
                raise
            logger.warning("Root count for lambda=%s failed (%s), moving the window", lam, e)
            window = RootCountWindow(
                re_min=window.re_min * 1e-2,
                re_max=window.re_max * 1.1,
                im_min=window.im_min * 1.1,
                im_max=window.im_max * 1.1,
                margin=window.margin,
            )


def count_unstable_roots(lam: complex, p: RegionParams) -> int:
    return count_unstable_roots_window(lam, p)[0]
