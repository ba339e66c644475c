"""Scenario configuration: pydantic models, JSON round-trip and builders.

The JSON layout has five sections (`topology`, `flows`, `learning`,
`engine`, `output`); unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .topology import Flow, Topology, generate_grid, generate_line


class TopologyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["grid", "line"] = "grid"
    side_count: int = Field(5, ge=2)
    count: int = Field(4, ge=2)  # line only
    region_size: float = Field(1500.0, gt=0)
    spacing: float = Field(100.0, gt=0)  # line only
    tx_range: float = Field(320.0, gt=0)
    interference_range: float = Field(450.0, ge=0)
    num_radios: Union[int, list[int]] = 2
    capacity: int = Field(10, gt=0)

    @model_validator(mode="after")
    def _check(self):
        if self.interference_range < self.tx_range:
            raise ValueError("interference_range must be at least tx_range")
        radios = self.num_radios if isinstance(self.num_radios, list) else [self.num_radios]
        if not radios or any(m < 1 for m in radios):
            raise ValueError("num_radios entries must be >= 1")
        return self

    def node_count(self) -> int:
        return self.side_count**2 if self.kind == "grid" else self.count

    def max_radios(self) -> int:
        if isinstance(self.num_radios, list):
            return max(self.num_radios)
        return self.num_radios


class FlowConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    src: int
    dst: int
    load: float = Field(4.0, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if self.src == self.dst:
            raise ValueError("flow endpoints must differ")
        return self


class FlowsConfig(BaseModel):
    """`preset: cross` lays row and column flows over a grid; otherwise
    `items` lists explicit flows."""

    model_config = ConfigDict(extra="forbid")

    preset: Optional[Literal["cross"]] = "cross"
    load: float = Field(4.0, ge=0)
    items: list[FlowConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self):
        if self.preset is not None and self.items:
            raise ValueError("give either a flow preset or explicit items, not both")
        return self


class LearningConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    scheme: Literal["reward-inaction", "reward-penalty"] = "reward-inaction"
    lam: float = Field(0.1, gt=0, lt=1, alias="lambda")
    lambda1: float = Field(0.1, gt=0, lt=1)
    lambda2: float = Field(0.1, ge=0, lt=1)


class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    channels: int = Field(10, ge=1)
    theta: float = Field(1.0, gt=0)
    horizon: int = Field(200, ge=0)
    warmup: int = Field(50, ge=0)
    seed: int = 1
    feedback: Literal["binary-improvement", "continuous"] = "binary-improvement"
    track_probabilities: bool = True
    debug_checks: bool = False


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: str = "out"
    prefix: str = "run"


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    flows: FlowsConfig = Field(default_factory=FlowsConfig)
    learning: LearningConfig = Field(default_factory=LearningConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _check(self):
        if self.engine.horizon < self.engine.warmup:
            raise ValueError("horizon must be at least warmup")
        if self.engine.channels < self.topology.max_radios():
            raise ValueError("channel count must be at least the largest radio count")
        if isinstance(self.topology.num_radios, list):
            expected = self.topology.node_count()
            if len(self.topology.num_radios) != expected:
                raise ValueError(
                    f"num_radios list needs {expected} entries for this topology"
                )
        return self


def default_config() -> ScenarioConfig:
    return ScenarioConfig()


def load_config(path) -> ScenarioConfig:
    """Parse a scenario JSON file, raising ConfigError with diagnostics."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(raw, source=str(path))


def parse_config(raw: dict, source: str = "config") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as exc:
        fields = "; ".join(
            ".".join(str(p) for p in err["loc"]) + ": " + err["msg"] for err in exc.errors()
        )
        raise ConfigError(f"{source}: {fields}") from exc


def dump_config(config: ScenarioConfig) -> dict:
    return config.model_dump(by_alias=True)


def save_config(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(dump_config(config), indent=2) + "\n")


def build_topology(config: ScenarioConfig) -> Topology:
    t = config.topology
    if t.kind == "grid":
        return generate_grid(
            side_count=t.side_count,
            region_size=t.region_size,
            tx_range=t.tx_range,
            interference_range=t.interference_range,
            num_radios=t.num_radios,
            capacity=t.capacity,
        )
    return generate_line(
        count=t.count,
        spacing=t.spacing,
        tx_range=t.tx_range,
        interference_range=t.interference_range,
        num_radios=t.num_radios,
        capacity=t.capacity,
    )


def cross_flows(side_count: int, load: float) -> list[Flow]:
    """One flow per row and per column of a grid.

    The border flows form a cycle (each corner that terminates one flow
    originates the crossing one), so every node sits on some flow's path
    as a source or a forwarder and receives channel-state feedback.
    """
    s = side_count
    nid = lambda r, c: r * s + c
    flows = []
    fid = 0
    for r in range(s):
        if r == s - 1:
            src, dst = nid(r, s - 1), nid(r, 0)
        else:
            src, dst = nid(r, 0), nid(r, s - 1)
        flows.append(Flow(id=fid, src=src, dst=dst, load=load))
        fid += 1
    for c in range(s):
        if c == 0:
            src, dst = nid(s - 1, 0), nid(0, 0)
        else:
            src, dst = nid(0, c), nid(s - 1, c)
        flows.append(Flow(id=fid, src=src, dst=dst, load=load))
        fid += 1
    return flows


def build_flows(config: ScenarioConfig, topology: Topology) -> list[Flow]:
    fc = config.flows
    if fc.preset == "cross":
        if config.topology.kind != "grid":
            raise ConfigError("the cross flow preset needs a grid topology")
        return cross_flows(config.topology.side_count, fc.load)
    flows = []
    node_ids = {n.id for n in topology.nodes}
    for i, item in enumerate(fc.items):
        if item.src not in node_ids or item.dst not in node_ids:
            raise ConfigError(f"flow {i}: endpoints {item.src}->{item.dst} not in topology")
        flows.append(Flow(id=i, src=item.src, dst=item.dst, load=item.load))
    return flows
