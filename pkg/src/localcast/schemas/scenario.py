import json
from pathlib import Path
from typing import Any, ClassVar, List, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    ValidationError,
    model_validator,
)

from src.localcast.core.config import settings
from src.localcast.core.exceptions import ScenarioError
from src.localcast.models.deployment import Deployment


class PhysParams(BaseModel):
    """
    Physical layer parameters. Transmit power is fixed at 1.

    The transmission radius r_t and broadcast radius r_b are derived once,
    when the model is built.
    """

    model_config = ConfigDict(frozen=True)

    POWER: ClassVar[float] = 1.0

    alpha: float = Field(default=settings.DEFAULT_ALPHA, gt=2)
    beta: float = Field(default=settings.DEFAULT_BETA, ge=1)
    noise: float = Field(gt=0)
    phi: float = Field(default=settings.DEFAULT_PHI, gt=0, le=1 / 6)

    _r_t: float = PrivateAttr()
    _r_b: float = PrivateAttr()

    @model_validator(mode="before")
    @classmethod
    def default_noise(cls, data: Any) -> Any:
        # N = 1/beta puts the transmission radius at exactly 1
        if isinstance(data, dict) and data.get("noise") is None:
            beta = data.get("beta", settings.DEFAULT_BETA)
            data = {**data, "noise": 1 / beta}
        return data

    def model_post_init(self, __context: Any) -> None:
        self._r_t = (self.noise * self.beta) ** (-1 / self.alpha)
        self._r_b = self.phi * self._r_t

    @property
    def r_t(self) -> float:
        return self._r_t

    @property
    def r_b(self) -> float:
        return self._r_b


class AlgoConsts(BaseModel):
    """
    Algorithm constants: inner-loop multiplier delta, halting budget gamma.

    n_bound is the crude bound on n known to every node; it lives at the
    top level of a scenario file and is copied in here on load.
    """

    model_config = ConfigDict(frozen=True)

    delta: int = Field(default=settings.DEFAULT_DELTA, ge=1)
    gamma: float = Field(default=settings.DEFAULT_GAMMA, ge=1)
    n_bound: int = Field(default=2, ge=1, exclude=True)

    @property
    def log_n(self) -> int:
        """ceil(log2 n_bound), at least 1."""
        return max(1, (self.n_bound - 1).bit_length())

    @property
    def inner_length(self) -> int:
        return self.delta * self.log_n

    @property
    def budget(self) -> float:
        return self.gamma * self.log_n


class NodeSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    x: float
    y: float
    wake: int = Field(default=0, ge=0)
    shutdown: Optional[int] = None

    @model_validator(mode="after")
    def wake_before_shutdown(self) -> "NodeSpec":
        if self.shutdown is not None and self.wake >= self.shutdown:
            raise ValueError(
                f"Node {self.id}: wake slot {self.wake} must precede shutdown {self.shutdown}"
            )
        return self

    def awake_at(self, slot: int) -> bool:
        return self.wake <= slot and (self.shutdown is None or slot < self.shutdown)


class ProtocolRadii(BaseModel):
    model_config = ConfigDict(frozen=True)

    r_t: float = Field(gt=0)
    r_i: float = Field(gt=0)

    @model_validator(mode="after")
    def interference_covers_transmission(self) -> "ProtocolRadii":
        if self.r_i < self.r_t:
            raise ValueError("Protocol model needs r_i >= r_t")
        return self


class ProtocolModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    protocol: ProtocolRadii


class Scenario(BaseModel):
    """
    A complete simulation input: nodes, physics, interference model and constants.

    Immutable after construction. Validation rejects duplicate ids, an
    n_bound below the node count, and co-located nodes.
    """

    model_config = ConfigDict(frozen=True)

    phys: PhysParams = Field(default_factory=PhysParams)
    model: Union[Literal["sinr"], ProtocolModel] = "sinr"
    n_bound: int = Field(ge=1)
    consts: AlgoConsts = Field(default_factory=AlgoConsts)
    nodes: List[NodeSpec] = Field(default_factory=list)

    _deployment: Deployment = PrivateAttr()

    @model_validator(mode="before")
    @classmethod
    def share_n_bound(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "n_bound" not in data:
            return data
        consts = data.get("consts") or {}
        if isinstance(consts, AlgoConsts):
            consts = consts.model_copy(update={"n_bound": data["n_bound"]})
        else:
            consts = {**consts, "n_bound": data["n_bound"]}
        return {**data, "consts": consts}

    @model_validator(mode="after")
    def check_nodes(self) -> "Scenario":
        ids = [node.id for node in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("Node ids must be distinct")
        if self.n_bound < len(self.nodes):
            raise ValueError(
                f"n_bound {self.n_bound} is below the node count {len(self.nodes)}"
            )
        positions = np.array([(node.x, node.y) for node in self.nodes], dtype=np.float64)
        if len(positions) and len(np.unique(positions, axis=0)) < len(positions):
            raise ValueError("Co-located nodes are not allowed")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._deployment = Deployment(
            [node.id for node in self.nodes], [(node.x, node.y) for node in self.nodes]
        )

    @property
    def deployment(self) -> Deployment:
        return self._deployment

    @property
    def is_protocol(self) -> bool:
        return isinstance(self.model, ProtocolModel)

    @property
    def node_ids(self) -> List[int]:
        return [node.id for node in self.nodes]

    def node(self, node_id: int) -> NodeSpec:
        return self.nodes[self._deployment.index_of(node_id)]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2)

    def save(self, path: Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def load_scenario(path: Path) -> Scenario:
    """
    Load and validate a scenario file.

    Raises:
        ScenarioError: If the file content does not describe a valid scenario
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioError(f"Cannot read scenario {path}: {e}")
    return parse_scenario(data)


def parse_scenario(data: dict) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"Invalid scenario: {e}")
