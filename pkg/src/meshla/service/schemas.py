"""Request/response models for the simulation service."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from ..config import ScenarioConfig


class HealthResponse(BaseModel):
    status: str
    version: str


class SeriesPayload(BaseModel):
    """Per-slot metrics; mirrors the CSV schema column for column."""

    slot: list[int]
    delivered: list[int]
    connectivity: list[int]
    interference: list[int]
    mean_cq: list[float]
    mean_max_prob: list[float]
    suboptimal_l1: list[float]
    switches: list[int]


class NodeConvergencePayload(BaseModel):
    node: int
    converged: bool
    action: Optional[int] = None
    slot: Optional[int] = None


class ConvergencePayload(BaseModel):
    threshold: float
    all_converged: bool
    achieved_vs_oracle: Optional[float] = None
    nodes: list[NodeConvergencePayload]


class SummaryPayload(BaseModel):
    seed: int
    delivered_per_slot: float
    connectivity: float
    interference: float
    switch_rate: float
    mean_cq: float
    warmup: int
    horizon: int
    interference_connectivity_ratio: list[float]
    convergence: ConvergencePayload
    strategy: Optional[str] = None


class RunPayload(BaseModel):
    seed: int
    summary: SummaryPayload
    series: Optional[SeriesPayload] = None


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    seeds: Optional[list[int]] = None
    include_series: bool = True


class SimulateResponse(BaseModel):
    runs: list[RunPayload]


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    parameter: Literal["num_radios", "K", "lambda", "feedback"]
    values: list[Union[int, float, str]]
    seeds: Optional[list[int]] = None


class SweepPointPayload(BaseModel):
    value: Union[int, float, str]
    mean_delivered: float
    mean_connectivity: float
    mean_interference: float
    mean_switch_rate: float
    converged_fraction: float
    mean_delivered_trajectory: list[float]
    mean_connectivity_trajectory: list[float]


class SweepRunPayload(BaseModel):
    value: Union[int, float, str]
    summary: SummaryPayload


class SweepResponse(BaseModel):
    parameter: str
    seeds: list[int]
    points: list[SweepPointPayload]
    runs: list[SweepRunPayload]


class BaselineRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    strategy: Literal["random-static", "common-channel"]
    seeds: Optional[list[int]] = None
    include_series: bool = True


class OracleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig
    eval_slots: int = Field(100, ge=1)
    eval_seeds: int = Field(3, ge=1)


class NodeSelectionPayload(BaseModel):
    node: int
    channels: list[int]


class OracleResponse(BaseModel):
    selection: list[NodeSelectionPayload]
    mean_delivered: float
    assignments_evaluated: int
