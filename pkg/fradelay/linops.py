# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
"""Diagonalization of the linear part and the γ-rescaled system

    D^α y(t) = diag(λ_i) y(t - τ) + h(y(t), y(t - τ))
    h(u, v)  = diag(γ_i N) v + (TP)^{-1} g(TP u, TP v)
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import linalg

from .exception import ConfigError, DomainError, NearDefectiveError
from .helper import logger
from .nonlinearity import NonlinearitySpec

DEFAULT_COND_LIMIT = 1e8
DEFAULT_GAMMA = 0.01
MC_SAMPLES = 10000
MC_SAFETY = 1.25


@dataclass(frozen=True)
class JordanBlock:
    lam: complex
    size: int = 1
    eta: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        if self.size < 1:
            raise ConfigError("jordan.blocks.size", f"must be positive, got {self.size}")
        if self.eta not in (0, 1):
            raise ConfigError("jordan.blocks.eta", f"must be 0 or 1, got {self.eta}")


@dataclass
class JordanStructure:
    blocks: List[JordanBlock]
    transform: np.ndarray

    def __post_init__(self):
        self.transform = np.asarray(self.transform, dtype=complex)
        d = self.transform.shape[0]
        if self.transform.shape != (d, d):
            raise ConfigError("jordan.T", "transform must be square")
        if sum(b.size for b in self.blocks) != d:
            raise ConfigError("jordan.blocks", f"block sizes must add up to {d}")
        if np.linalg.matrix_rank(self.transform) < d:
            raise NearDefectiveError("transform matrix is singular")

    @property
    def dim(self) -> int:
        return self.transform.shape[0]

    @property
    def lambdas(self) -> np.ndarray:
        return np.concatenate([np.full(b.size, b.lam) for b in self.blocks])

    def jordan_matrix(self) -> np.ndarray:
        return linalg.block_diag(*[b.lam * np.eye(b.size) + b.eta * _shift(b.size) for b in self.blocks])

    def verify(self, A: np.ndarray, tol: float = 1e-8):
        """Check T^{-1} A T against the declared Jordan matrix."""
        A = np.asarray(A, dtype=complex)
        residual = np.linalg.solve(self.transform, A @ self.transform) - self.jordan_matrix()
        scale = max(1.0, float(np.linalg.norm(A, 2)))
        if np.linalg.norm(residual, 2) > tol * scale:
            raise ConfigError("jordan", f"T^-1 A T does not match the blocks (residual {np.linalg.norm(residual, 2):.3g})")


@dataclass
class TransformedSystem:
    diag_lambdas: np.ndarray
    combined_transform: np.ndarray
    inverse_transform: np.ndarray
    gamma: float
    nilpotent: np.ndarray
    nonlinearity_h: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.diag_lambdas)

    @property
    def has_nilpotent(self) -> bool:
        return bool(np.any(self.nilpotent != 0))

    def to_original(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y) @ self.combined_transform.T

    def to_transformed(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.inverse_transform.T


def _shift(size: int) -> np.ndarray:
    return np.eye(size, k=1)


def eigendecompose(A, cond_limit: float = DEFAULT_COND_LIMIT) -> JordanStructure:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"A must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("A has non-finite entries")

    eigenvalues, vectors = np.linalg.eig(A)
    cond = float(np.linalg.cond(vectors))
    if not np.isfinite(cond) or cond > cond_limit:
        raise NearDefectiveError(
            f"eigenvector matrix condition estimate {cond:.3g} exceeds {cond_limit:.3g}, "
            "supply the Jordan structure explicitly"
        )

    structure = JordanStructure(blocks=[JordanBlock(lam=lam) for lam in eigenvalues], transform=vectors)
    try:
        structure.verify(A)
    except ConfigError as e:
        raise NearDefectiveError(str(e)) from e
    logger.info("Diagonalized A, eigenvalues %s, condition %.3g", np.round(eigenvalues, 12), cond)
    return structure


def gamma_rescale(j: JordanStructure, gamma: float = DEFAULT_GAMMA) -> TransformedSystem:
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    scaling = np.concatenate([gamma ** np.arange(b.size) for b in j.blocks])
    nilpotent = linalg.block_diag(*[gamma * b.eta * _shift(b.size) for b in j.blocks])
    combined = j.transform * scaling[np.newaxis, :]
    return TransformedSystem(
        diag_lambdas=j.lambdas,
        combined_transform=combined,
        inverse_transform=np.linalg.inv(combined),
        gamma=gamma,
        nilpotent=np.asarray(nilpotent, dtype=complex),
    )


def transform_nonlinearity(g: NonlinearitySpec, ts: TransformedSystem) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    combined = ts.combined_transform
    inverse = ts.inverse_transform
    nilpotent = ts.nilpotent

    def h(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return v @ nilpotent.T + g(u @ combined.T, v @ combined.T) @ inverse.T

    return h


def estimate_lipschitz(
    g_spec: NonlinearitySpec, rho: float, dim: int = 1, samples: int = MC_SAMPLES, seed: int = 0
) -> float:
    """Upper bound of ℓ_g(ρ), analytic for built-ins and sampled otherwise."""
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    bound = g_spec.analytic_lipschitz(rho)
    if bound is not None:
        return bound

    logger.warning("No analytic Lipschitz bound for '%s', sampling %d pairs", g_spec.kind, samples)
    rng = np.random.default_rng(seed)

    def sphere(n: int) -> np.ndarray:
        points = rng.standard_normal((n, dim))
        return rho * points / np.linalg.norm(points, axis=1, keepdims=True)

    x, y, x_hat, y_hat = (sphere(samples) for _ in range(4))
    numerator = np.linalg.norm(g_spec(x, y) - g_spec(x_hat, y_hat), axis=1)
    denominator = np.linalg.norm(x - x_hat, axis=1) + np.linalg.norm(y - y_hat, axis=1)
    valid = denominator > 0
    return float(MC_SAFETY * np.max(numerator[valid] / denominator[valid]))


def lipschitz_h(ts: TransformedSystem, g_spec: NonlinearitySpec, rho: float) -> float:
    """Bound of ℓ_h(ρ) for the transformed nonlinearity."""
    norm_tp = float(np.linalg.norm(ts.combined_transform, 2))
    norm_inv = float(np.linalg.norm(ts.inverse_transform, 2))
    nilpotent_part = float(np.linalg.norm(ts.nilpotent, 2))
    return nilpotent_part + norm_inv * norm_tp * estimate_lipschitz(g_spec, norm_tp * rho, dim=ts.dim)


def jordan_from_blocks(transform: Sequence, blocks: Sequence[JordanBlock]) -> JordanStructure:
    return JordanStructure(blocks=list(blocks), transform=np.asarray(transform, dtype=complex))
