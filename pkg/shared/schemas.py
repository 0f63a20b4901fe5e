"""Shared Pydantic schemas and enums for delta-robin."""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shared.utils import is_prime, parse_fraction


class PlaceKind(str, Enum):
    """Kind of place a compact set lives over."""

    ARCHIMEDEAN = "archimedean"
    NONARCHIMEDEAN = "nonarchimedean"


class Regime(str, Enum):
    """Which branch of the interval formulas applies."""

    EXTERNAL_FIELD = "external_field"  # r >= 1, log^+|x| is active on the set
    CLASSICAL = "classical"  # r < 1, the δ-kernel is the plain log kernel


class SingularityKind(str, Enum):
    """Singularity types the quadrature module handles explicitly."""

    INVERSE_SQRT_ENDPOINT = "inverse_sqrt_endpoint"
    LOG_POINT = "log_point"
    REMOVABLE_POINT = "removable_point"


class DiagonalMode(str, Enum):
    """How the discrete energy matrix fills its diagonal."""

    CELL_SELF_ENERGY = "cell_self_energy"


class OutputFormat(str, Enum):
    """CLI payload format."""

    JSON = "json"
    CSV = "csv"
    HUMAN = "human"


class CheckStatus(str, Enum):
    """Outcome of a verification check."""

    PASS = "PASS"
    FAIL = "FAIL"


class LocalFieldSpec(BaseModel):
    """A finite extension K of Q_p given by ramification index e and residue degree f.

    The absolute value is normalised by |p| = 1/p, so −log|π| = (log p)/e and
    the residue field has q = p^f elements.
    """

    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=2, description="Residue characteristic")
    e: int = Field(default=1, ge=1, description="Ramification index")
    f: int = Field(default=1, ge=1, description="Residue degree")

    @field_validator("p")
    @classmethod
    def validate_prime(cls, value: int) -> int:
        """Reject composite residue characteristics."""
        if not is_prime(value):
            raise ValueError(f"p={value} is not prime")
        return value

    @property
    def q(self) -> int:
        """Order of the residue field."""
        return self.p**self.f

    @property
    def neg_log_abs_pi(self) -> Fraction:
        """−log|π| as a rational multiple of log p."""
        return Fraction(1, self.e)

    @property
    def label(self) -> str:
        if self.e == 1 and self.f == 1:
            return f"Q_{self.p}"
        return f"K/Q_{self.p}(e={self.e},f={self.f})"


class RealIntervalSpec(BaseModel):
    """The symmetric interval [−r, r]."""

    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0, description="Half-width of the interval")

    @field_validator("r")
    @classmethod
    def validate_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("r must be finite")
        return value

    @property
    def regime(self) -> Regime:
        return Regime.EXTERNAL_FIELD if self.r >= 1.0 else Regime.CLASSICAL

    @property
    def label(self) -> str:
        return f"[-{self.r:g}, {self.r:g}]"


class PlaceSpec(BaseModel):
    """One place of the global bound: a real interval or a disc π^n O_K.

    ``weight`` is N_v = [K_v:Q_v]/[K:Q]; the default 1 is the base field Q.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: PlaceKind
    interval: RealIntervalSpec | None = None
    field: LocalFieldSpec | None = None
    n: int | None = None
    weight: Fraction = Fraction(1)

    @field_validator("weight", mode="before")
    @classmethod
    def coerce_weight(cls, value: Any) -> Fraction:
        """Accept ints, floats, Fractions and "num/den" strings."""
        weight = parse_fraction(value)
        if not 0 < weight <= 1:
            raise ValueError(f"weight must lie in (0, 1], got {weight}")
        return weight

    @model_validator(mode="after")
    def validate_kind_fields(self) -> "PlaceSpec":
        """Ensure exactly the fields of the declared kind are present."""
        if self.kind == PlaceKind.ARCHIMEDEAN:
            if self.interval is None or self.field is not None or self.n is not None:
                raise ValueError("archimedean place needs an interval and no field/n")
        else:
            if self.field is None or self.n is None or self.interval is not None:
                raise ValueError("nonarchimedean place needs field and n and no interval")
        return self

    @classmethod
    def real(cls, r: float, weight: Any = 1) -> "PlaceSpec":
        return cls(
            kind=PlaceKind.ARCHIMEDEAN, interval=RealIntervalSpec(r=r), weight=weight
        )

    @classmethod
    def padic(cls, p: int, n: int, e: int = 1, f: int = 1, weight: Any = 1) -> "PlaceSpec":
        return cls(
            kind=PlaceKind.NONARCHIMEDEAN,
            field=LocalFieldSpec(p=p, e=e, f=f),
            n=n,
            weight=weight,
        )

    def describe(self) -> str:
        """Human-readable description of the set at this place."""
        if self.interval is not None:
            return f"real {self.interval.label}"
        assert self.field is not None
        return f"pi^{self.n} O_K over {self.field.label}"

    def parameters(self) -> dict[str, Any]:
        """Flat parameter mapping used in reports."""
        if self.interval is not None:
            return {"r": self.interval.r}
        assert self.field is not None
        return {"p": self.field.p, "e": self.field.e, "f": self.field.f, "n": self.n}
