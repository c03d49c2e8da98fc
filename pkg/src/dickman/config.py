"""Run-configuration schemas for each CLI subcommand.

Configs are JSON objects. Unknown keys are rejected (fail-closed) and
every validation failure names the offending key path.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigValidationError
from .inversions import SubsetScheme
from .mixing import MixingLaw
from .schedules import MuSchedule, PSchedule


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MuSpec(Strict):
    c: float = Field(gt=0)
    a: list[float] = Field(min_length=1)

    def build(self) -> MuSchedule:
        return MuSchedule(self.c, tuple(self.a))


class PSpec(Strict):
    c: float = Field(gt=0)
    b: list[float] = Field(min_length=1)

    def build(self) -> PSchedule:
        return PSchedule(self.c, tuple(self.b))


class SchemeSpec(Strict):
    variant: Literal["full", "singleton", "top", "last_n", "ratio", "custom"]
    N: int | None = Field(default=None, ge=1)
    ratios: list[float] | None = None
    subsets: list[list[int]] | None = None

    def build(self) -> SubsetScheme:
        return SubsetScheme(
            self.variant,
            N=self.N,
            ratios=tuple(self.ratios or ()),
            subsets=None if self.subsets is None else tuple(tuple(e) for e in self.subsets),
        )


class MixingSpec(Strict):
    variant: Literal["point_mass_one", "finite_discrete"] = "point_mass_one"
    atoms: list[float] | None = None
    weights: list[float] | None = None

    def build(self) -> MixingLaw:
        if self.variant == "point_mass_one":
            return MixingLaw.point_mass_one()
        if not self.atoms:
            raise ConfigValidationError("mixing.atoms: required for finite_discrete mixing")
        return MixingLaw.finite_discrete(self.atoms, self.weights)


class DeterministicModel(Strict):
    variant: Literal["deterministic"]
    mu: MuSpec
    p: PSpec


class SubsetModel(Strict):
    variant: Literal["subset_uniform"]
    scheme: SchemeSpec


class PoissonModel(Strict):
    variant: Literal["truncated_poisson"]
    theta0: float = Field(gt=0)


ModelSpec = Annotated[Union[DeterministicModel, SubsetModel, PoissonModel], Field(discriminator="variant")]


class Seeded(Strict):
    seed: int | None = Field(default=None, ge=0, lt=2**64)


class DensityConfig(Seeded):
    theta: float = Field(gt=0)
    x_max: float = Field(default=20.0, ge=2)
    tol: float = Field(default=1e-10, gt=0, le=1e-6)
    points_per_unit: int = Field(default=100, ge=1, le=10_000)
    method: Literal["steps", "recursion"] = "steps"


class SampleConfig(Seeded):
    theta: float = Field(gt=0)
    mixing: MixingSpec = MixingSpec()
    tol: float = Field(default=1e-8, gt=0, le=1e-3)
    count: int = Field(ge=1)


class ClassifyConfig(Seeded):
    mu: MuSpec | None = None
    p: PSpec | None = None
    scheme: SchemeSpec | None = None

    @field_validator("scheme")
    @classmethod
    def _structured(cls, v):
        if v is not None and v.variant == "custom":
            raise ValueError("custom schemes cannot be classified; simulate them instead")
        return v


class SimulateConfig(Seeded):
    model: ModelSpec
    n_grid: list[int] = Field(min_length=1)
    replicates: int = Field(ge=100)


class InversionsConfig(Seeded):
    scheme: SchemeSpec
    n: int = Field(ge=1)
    replicates: int = Field(ge=1)
    oracle_cases: int = Field(default=0, ge=0)


class SmoothConfig(Seeded):
    N: int = Field(ge=2, le=10**8)
    s: float | list[float]


class VerifyConfig(Seeded):
    criteria: list[int] | None = None


SCHEMAS = {
    "density": DensityConfig,
    "sample": SampleConfig,
    "classify": ClassifyConfig,
    "simulate": SimulateConfig,
    "inversions": InversionsConfig,
    "smooth": SmoothConfig,
    "verify": VerifyConfig,
}


def parse_config(subcommand: str, data: dict):
    """Validate ``data`` against the subcommand schema or raise ConfigValidationError."""
    if not isinstance(data, dict):
        raise ConfigValidationError("config must be a JSON object")
    try:
        return SCHEMAS[subcommand].model_validate(data)
    except ValidationError as exc:
        unknown = [".".join(str(p) for p in e["loc"]) for e in exc.errors() if e["type"] == "extra_forbidden"]
        lines = [f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in exc.errors()]
        head = f"unknown keys: {', '.join(unknown)}; " if unknown else ""
        raise ConfigValidationError(head + "; ".join(lines)) from None
