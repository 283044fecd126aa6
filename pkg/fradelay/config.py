# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
"""Input document schema.

One JSON document serves every command. Complex numbers are written as
``[re, im]`` or as a bare real; unknown fields are rejected.
"""

from dataclasses import dataclass
import json
import sys
from typing import Annotated, Any, Dict, List, Literal, Optional, Type, TypeVar

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exception import ConfigError
from .helper import logger, parse_complex
from .linops import DEFAULT_GAMMA, JordanBlock, JordanStructure
from .mlfunc import MLParams
from .nonlinearity import NonlinearitySpec
from .region import RegionParams
from .solver import DelaySystemSpec, HistoryFunction


def _complex_field(value: Any) -> complex:
    return parse_complex(value)


ComplexValue = Annotated[Any, AfterValidator(_complex_field)]
ComplexMatrix = List[List[ComplexValue]]

SOLVERS = ("picard", "direct", "both")

Model = TypeVar("Model", bound=BaseModel)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NonlinearityInput(_Strict):
    kind: Literal["zero", "quadratic", "cubic", "sine", "linear_perturb"] = "zero"
    params: List[Any] = Field(default_factory=list)

    def build(self) -> NonlinearitySpec:
        if self.kind == "linear_perturb":
            params = [[parse_complex(v, "g.params") for v in row] for row in self.params]
        else:
            params = [parse_complex(v, "g.params") for v in self.params]
        return NonlinearitySpec(kind=self.kind, params=tuple(params))


class SampledPayload(_Strict):
    grid: List[float]
    values: List[Any]


class HistoryInput(_Strict):
    kind: Literal["constant", "polynomial", "sampled"] = "constant"
    payload: Any = None

    def build(self, dim: int) -> HistoryFunction:
        if self.kind == "constant":
            if self.payload is None:
                return HistoryFunction.constant(np.zeros(dim))
            return HistoryFunction.constant(_vector(self.payload, "phi.payload"))
        if self.kind == "polynomial":
            if not isinstance(self.payload, list) or not self.payload:
                raise ConfigError("phi.payload", "polynomial history takes a list of coefficients")
            return HistoryFunction.polynomial([_vector(row, "phi.payload") for row in self.payload])
        try:
            sampled = SampledPayload.model_validate(self.payload)
        except ValidationError as e:
            raise _config_error(e, prefix="phi.payload") from e
        return HistoryFunction.sampled(sampled.grid, [_vector(row, "phi.payload.values") for row in sampled.values])


class JordanBlockInput(_Strict):
    lam: ComplexValue = Field(alias="lambda")
    size: int = Field(default=1, ge=1)
    eta: Literal[0, 1] = 0


class JordanInput(_Strict):
    T: ComplexMatrix
    blocks: List[JordanBlockInput]

    def build(self) -> JordanStructure:
        return JordanStructure(
            blocks=[JordanBlock(lam=b.lam, size=b.size, eta=b.eta) for b in self.blocks],
            transform=np.array(self.T, dtype=complex),
        )


class SystemInput(_Strict):
    alpha: float = Field(gt=0, lt=1)
    tau: float = Field(gt=0)
    A: ComplexMatrix
    g: NonlinearityInput = Field(default_factory=NonlinearityInput)
    phi: HistoryInput = Field(default_factory=HistoryInput)
    T: float = Field(default=10.0, gt=0)
    h_step: float = Field(default=0.01, gt=0)
    gamma: float = Field(default=DEFAULT_GAMMA, gt=0)
    jordan: Optional[JordanInput] = None
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _square(self):
        if not self.A or any(len(row) != len(self.A) for row in self.A):
            raise ValueError("A must be a non-empty square matrix")
        return self

    def build(self, config: Optional["RunConfig"] = None) -> DelaySystemSpec:
        config = config or RunConfig()
        return DelaySystemSpec(
            alpha=self.alpha,
            tau=self.tau,
            A=np.array(self.A, dtype=complex),
            g_spec=self.g.build(),
            phi=self.phi.build(len(self.A)),
            T=config.horizon if config.horizon is not None else self.T,
            h_step=config.step if config.step is not None else self.h_step,
            gamma=config.gamma if config.gamma is not None else self.gamma,
            jordan=self.jordan.build() if self.jordan is not None else None,
        )


class MLInput(_Strict):
    alpha: float = Field(gt=0, lt=1)
    beta: float
    lam: ComplexValue = Field(alias="lambda")
    tau: float = Field(gt=0)
    t: Optional[List[float]] = None
    t_start: float = 0.0
    t_stop: float = 1.0
    t_step: float = Field(default=0.1, gt=0)
    quad_step: float = Field(default=0.02, gt=0)

    def params(self) -> MLParams:
        return MLParams(alpha=self.alpha, beta=self.beta, lam=self.lam, tau=self.tau)

    def grid(self) -> np.ndarray:
        if self.t is not None:
            return np.asarray(self.t, dtype=float)
        if self.t_stop < self.t_start:
            raise ConfigError("t_stop", f"must not be below t_start={self.t_start}")
        count = int(np.floor((self.t_stop - self.t_start) / self.t_step + 1e-9)) + 1
        return self.t_start + self.t_step * np.arange(count)


class RegionInput(_Strict):
    alpha: float = Field(gt=0, lt=1)
    tau: float = Field(gt=0)
    A: Optional[ComplexMatrix] = None
    lambdas: Optional[List[ComplexValue]] = None
    n: int = Field(default=64, ge=2)

    @model_validator(mode="after")
    def _source(self):
        if self.A is not None and self.lambdas is not None:
            raise ValueError("give either A or lambdas, not both")
        return self

    def params(self) -> RegionParams:
        return RegionParams(alpha=self.alpha, tau=self.tau)

    def eigenvalues(self) -> List[complex]:
        if self.A is None and self.lambdas is None:
            raise ConfigError("A", "the command needs A or lambdas")
        if self.lambdas is not None:
            return [complex(lam) for lam in self.lambdas]
        if not self.A or any(len(row) != len(self.A) for row in self.A):
            raise ConfigError("A", "must be a non-empty square matrix")
        return [complex(lam) for lam in np.linalg.eigvals(np.array(self.A, dtype=complex))]


@dataclass
class RunConfig:
    command: Optional[str] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    solver: str = "picard"
    tol: float = 1e-10
    max_iter: int = 200
    step: Optional[float] = None
    horizon: Optional[float] = None
    seed: Optional[int] = None
    gamma: Optional[float] = None
    n_histories: int = 20
    scale: Optional[float] = None

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError("solver", f"unknown solver '{self.solver}', use one of {', '.join(SOLVERS)}")
        for name in ("tol", "step", "horizon", "gamma"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(name, f"must be positive, got {value}")
        for name in ("max_iter", "n_histories"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be at least 1, got {getattr(self, name)}")
        if self.scale is not None and self.scale < 0:
            raise ConfigError("scale", f"must be nonnegative, got {self.scale}")


def _vector(value: Any, name: str) -> List[complex]:
    if isinstance(value, list):
        return [parse_complex(v, name) for v in value]
    return [parse_complex(value, name)]


def _config_error(error: ValidationError, prefix: str = "") -> ConfigError:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"])
    if prefix:
        location = f"{prefix}.{location}" if location else prefix
    return ConfigError(location or "input", first["msg"])


def read_document(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        raise ConfigError("input", "no input document given, use --input")
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as e:
        raise ConfigError("input", f"unable to read '{path}': {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("input", f"malformed JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("input", "document must be a JSON object")
    logger.debug("Read input document '%s' with fields %s", path, sorted(data))
    return data


def parse_document(data: Dict[str, Any], model: Type[Model]) -> Model:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise _config_error(e) from e


def load(path: Optional[str], model: Type[Model]) -> Model:
    return parse_document(read_document(path), model)
