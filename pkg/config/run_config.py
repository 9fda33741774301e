from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import (
    DEFAULT_CLAMP, DEFAULT_REPEATS, DEFAULT_SAMPLES, DEFAULT_SEED,
    DEFAULT_SHOTS, MAX_TABLE_N, SUPPORTED_N, SUPPORTED_S
)


class RingSpec(BaseModel):
    """Parameters of GF(2^N) (s=1) or GR(2^s, N)"""

    model_config = ConfigDict(frozen=True)

    s: int = Field(ge=min(SUPPORTED_S), le=max(SUPPORTED_S))
    N: int = Field(ge=1, le=MAX_TABLE_N)
    poly: Optional[List[int]] = None

    @model_validator(mode="after")
    def _check_poly(self) -> "RingSpec":
        if self.poly is None:
            return self
        q = 2 ** self.s
        if len(self.poly) != self.N + 1:
            raise ValueError(f"poly needs {self.N + 1} coefficients, got {len(self.poly)}")
        if any(c < 0 or c >= q for c in self.poly):
            raise ValueError(f"poly coefficients must lie in [0, {q})")
        if self.poly[-1] != 1:
            raise ValueError("poly must be monic")
        return self


class StateEnsembleSpec(BaseModel):
    """Random state ensemble: Fubini-Study pure or Hilbert-Schmidt mixed"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["pure", "mixed"]
    dim: int = Field(ge=2)
    count: int = Field(ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)


class RunConfig(BaseModel):
    """Validated options of one CLI invocation"""

    command: str
    n_values: List[int] = Field(default_factory=lambda: [1])
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    shots: List[int] = Field(default_factory=lambda: list(DEFAULT_SHOTS))
    repeats: int = Field(default=DEFAULT_REPEATS, ge=1)
    ensemble: Literal["pure", "mixed", "both"] = "both"
    samples: int = Field(default=DEFAULT_SAMPLES, ge=1)
    clamp: float = Field(default=DEFAULT_CLAMP, gt=0)
    fmt: Literal["json", "csv"] = "csv"
    out: Optional[Path] = None
    tolerance: Optional[float] = Field(default=None, gt=0)
    n_jobs: int = Field(default=1, ge=1)
    dump_states: bool = False

    @field_validator("n_values")
    @classmethod
    def _check_n(cls, values: List[int]) -> List[int]:
        if not values:
            raise ValueError("at least one N is required")
        bad = [n for n in values if n not in SUPPORTED_N]
        if bad:
            raise ValueError(f"N must be one of {SUPPORTED_N}, got {bad}")
        return values

    @field_validator("shots")
    @classmethod
    def _check_shots(cls, values: List[int]) -> List[int]:
        if not values or any(m < 1 for m in values):
            raise ValueError("shots must be positive integers")
        return values

    def ensembles(self) -> List[str]:
        return ["pure", "mixed"] if self.ensemble == "both" else [self.ensemble]

    def echo(self) -> Dict[str, Any]:
        """Config echo embedded into every artifact"""
        data = self.model_dump(mode="json")
        data.pop("dump_states", None)
        return data
