# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
"""Built-in nonlinearities g(x, y) with g(0, 0) = 0.

Every built-in acts componentwise on the current state x and the delayed state y
and ships an analytic bound for the local Lipschitz modulus

    ℓ_g(ρ) = sup ‖g(x,y) - g(x̂,ŷ)‖ / (‖x - x̂‖ + ‖y - ŷ‖)   over the ρ-ball.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .exception import ConfigError, DomainError

KINDS = ("zero", "quadratic", "cubic", "sine", "linear_perturb", "custom")


def _pair(params: Tuple, kind: str) -> Tuple[complex, complex]:
    if len(params) == 1:
        return complex(params[0]), 0j
    if len(params) == 2:
        return complex(params[0]), complex(params[1])
    raise ConfigError("g.params", f"'{kind}' takes one or two coefficients, got {len(params)}")


@dataclass(frozen=True)
class NonlinearitySpec:
    kind: str = "zero"
    params: Tuple = ()
    # only for kind "custom"
    func: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, compare=False)
    bound: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError("g.kind", f"unknown kind '{self.kind}', use one of {', '.join(KINDS)}")
        object.__setattr__(self, "params", tuple(self.params))
        if self.kind in ("quadratic", "cubic", "sine"):
            _pair(self.params, self.kind)
        elif self.kind == "linear_perturb":
            matrix = np.asarray(self.params, dtype=complex)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ConfigError("g.params", "'linear_perturb' takes a square matrix")
        elif self.kind == "custom" and self.func is None:
            raise ConfigError("g.func", "'custom' needs a callable")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    @property
    def satisfies_h2(self) -> bool:
        """Whether ℓ_g(ρ) vanishes as ρ → 0."""
        return self.kind != "linear_perturb"

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.params, dtype=complex)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = np.asarray(y)
        if self.kind == "zero":
            return np.zeros(np.broadcast(x, y).shape, dtype=complex)
        if self.kind == "quadratic":
            c_x, c_y = _pair(self.params, self.kind)
            return c_x * x ** 2 + c_y * y ** 2
        if self.kind == "cubic":
            c_x, c_y = _pair(self.params, self.kind)
            return c_x * x ** 3 + c_y * y ** 3
        if self.kind == "sine":
            c_x, c_y = _pair(self.params, self.kind)
            return c_x * (np.sin(x) - x) + c_y * (np.sin(y) - y)
        if self.kind == "linear_perturb":
            return y @ self.matrix.T
        return np.asarray(self.func(x, y))

    def analytic_lipschitz(self, rho: float) -> Optional[float]:
        if rho <= 0:
            raise DomainError(f"rho must be positive, got {rho}")
        if self.kind == "zero":
            return 0.0
        if self.kind == "quadratic":
            return 2.0 * rho * max(abs(c) for c in _pair(self.params, self.kind))
        if self.kind == "cubic":
            return 3.0 * rho ** 2 * max(abs(c) for c in _pair(self.params, self.kind))
        if self.kind == "sine":
            # |cos(s) - 1| <= s^2 / 2
            return 0.5 * rho ** 2 * max(abs(c) for c in _pair(self.params, self.kind))
        if self.kind == "linear_perturb":
            return float(np.linalg.norm(self.matrix, 2))
        if self.bound is not None:
            return float(self.bound(rho))
        return None
