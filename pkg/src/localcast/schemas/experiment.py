import math
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from src.localcast.core.config import settings
from src.localcast.models.node_state import Variant
from src.localcast.schemas.scenario import PhysParams, Scenario
from src.localcast.schemas.trace import TrialSummary


class WakeModel(BaseModel):
    kind: Literal["all_zero", "staggered", "random_window"] = "all_zero"
    # staggered: nodes woken per slot
    rate: float = Field(default=1.0, gt=0)
    # random_window: wake slots drawn uniformly from [0, window)
    window: int = Field(default=1, ge=1)

    @classmethod
    def parse(cls, spec: str) -> "WakeModel":
        """all_zero, staggered:<rate> or random_window:<w>."""
        kind, _, arg = spec.partition(":")
        if kind == "staggered":
            return cls(kind=kind, rate=float(arg or 1.0))
        if kind == "random_window":
            return cls(kind=kind, window=int(arg or 1))
        return cls(kind=kind)


class ShutdownModel(BaseModel):
    kind: Literal["never", "after"] = "never"
    # after: shutdown = wake + slots
    slots: int = Field(default=1, ge=1)

    @classmethod
    def parse(cls, spec: str) -> "ShutdownModel":
        """never or after:<slots>."""
        kind, _, arg = spec.partition(":")
        if kind == "after":
            return cls(kind=kind, slots=int(arg or 1))
        return cls(kind=kind)


class GeneratorSpec(BaseModel):
    """Parameters of a generated scenario. Generation is deterministic given seed."""

    kind: Literal["uniform_square", "clustered", "two_region", "line"] = "uniform_square"
    n: int = Field(default=64, ge=1)
    n_bound: Optional[int] = Field(default=None, ge=1)
    seed: int = 0

    # uniform_square: give side, or density (nodes per unit area); default one node per r_t^2
    side: Optional[float] = Field(default=None, gt=0)
    density: Optional[float] = Field(default=None, gt=0)

    # clustered: n nodes split over `clusters` discs; radius defaults to r_b/2
    clusters: int = Field(default=1, ge=1)
    cluster_radius: Optional[float] = Field(default=None, gt=0)
    cluster_spacing: Optional[float] = Field(default=None, gt=0)

    # line: spacing defaults to r_b
    spacing: Optional[float] = Field(default=None, gt=0)

    # two_region: n is Delta, the dense count
    sparse: int = Field(default=3, ge=1)
    r_t: float = Field(default=1.0, gt=0)
    r_i: float = Field(default=4.0, gt=0)

    wake: WakeModel = Field(default_factory=WakeModel)
    shutdown: ShutdownModel = Field(default_factory=ShutdownModel)
    phys: PhysParams = Field(default_factory=PhysParams)
    delta: int = Field(default=settings.DEFAULT_DELTA, ge=1)
    gamma: float = Field(default=settings.DEFAULT_GAMMA, ge=1)

    @model_validator(mode="after")
    def check_layout(self) -> "GeneratorSpec":
        if self.side is not None and self.density is not None:
            if not math.isclose(self.n / self.side**2, self.density):
                raise ValueError("side and density disagree")
        if self.kind == "clustered" and self.clusters > self.n:
            raise ValueError("More clusters than nodes")
        return self


class SweepConfig(BaseModel):
    """A grid of trials; every grid must be non-empty."""

    kind: Literal["uniform_square", "clustered"] = "clustered"
    variants: List[Variant] = Field(default_factory=lambda: [Variant.ALG1, Variant.ALG2])
    # uniform_square: node counts (n_bound = n); clustered: n_bound for every cell
    n_values: List[int] = Field(default_factory=lambda: [256])
    # clustered only: nodes per cluster, i.e. N_x
    cluster_sizes: List[int] = Field(default_factory=lambda: [8, 16, 32, 64, 128])
    trials: int = Field(default=50, ge=1)
    seed: int = 0
    max_slots: Optional[int] = Field(default=None, ge=1)
    wake: WakeModel = Field(default_factory=WakeModel)
    delta: int = Field(default=settings.DEFAULT_DELTA, ge=1)
    gamma: float = Field(default=settings.DEFAULT_GAMMA, ge=1)

    @field_validator("variants", "n_values", "cluster_sizes")
    @classmethod
    def non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("Sweep grids must be non-empty")
        return value

    @field_validator("n_values", "cluster_sizes")
    @classmethod
    def positive(cls, value: List[int]) -> List[int]:
        if any(v < 1 for v in value):
            raise ValueError("Grid values must be positive")
        return sorted(set(value))


class LowerBoundConfig(BaseModel):
    n: int = Field(default=256, ge=2)
    policy: str = "fixed:auto"
    t_max: int = Field(default=4096, ge=1)
    trials: int = Field(default=0, ge=0)
    seed: int = 0
    sparse: int = Field(default=3, ge=1)
    j_cap: Optional[int] = Field(default=None, ge=0)

    @field_validator("n")
    @classmethod
    def power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError("n must be a power of 2")
        return value


class FitCell(BaseModel):
    n: int
    N_x: int
    median_active_slots: float
    count: int


class FitReport(BaseModel):
    form: str
    a: float
    b: float
    residual: float
    cells: List[FitCell]


class TrialRequest(BaseModel):
    scenario: Scenario
    variant: Variant = Variant.ALG1
    seed: int = 0
    max_slots: Optional[int] = Field(default=None, ge=1)
    include_outcomes: bool = False


class TrialResponse(BaseModel):
    summary: TrialSummary
    # per-slot records in the trace JSONL layout, when requested
    outcomes: Optional[List[dict]] = None


class ScenarioReport(BaseModel):
    nodes: int
    n_bound: int
    model: str
    r_t: float
    r_b: float
    cover_constant: int
    max_n_x: int


class BoundRowOut(BaseModel):
    t: int
    p_t: float
    range_i: int
    exact_cond_prob: float
    bound: float
    holds: bool
    cumulative_exact: float
    cumulative_bound: float


class LowerBoundResponse(BaseModel):
    n: int
    j: int
    j_unconstrained: int
    delta: int
    sparse: int
    weights: List[float]
    all_hold: bool
    rows: List[BoundRowOut]
