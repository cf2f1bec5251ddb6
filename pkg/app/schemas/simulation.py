# app/schemas/simulation.py
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator

from app.config.settings import DEFAULT_DT, DEFAULT_END_TIME


class SimConfig(BaseModel):
    dt: float = Field(default=DEFAULT_DT, gt=0, description="Constant Euler step in seconds")
    end_time: float = Field(default=DEFAULT_END_TIME, ge=0, description="Simulated seconds")
    recorded: Optional[List[str]] = None  # None records every scalar/vector slot of the root object
    # Initial-value overrides applied after the private section runs, e.g. {"w1": 620.6}
    overrides: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("recorded")
    @classmethod
    def _non_empty_paths(cls, paths):
        if paths is not None and any(not p.strip() for p in paths):
            raise ValueError("recorded paths must be non-empty")
        return paths


class SimulateRequest(BaseModel):
    source: Optional[str] = None
    builtin: Optional[str] = None
    entry: str
    args: List[str] = Field(default_factory=list)  # each parsed with the expression grammar
    config: SimConfig = Field(default_factory=SimConfig)


class TraceRow(BaseModel):
    t: float
    values: List[Union[float, bool, str, List[float], List[List[float]]]]


class TraceResponse(BaseModel):
    entry: str
    columns: List[str]
    rows: List[TraceRow]
    status: Literal["success"] = "success"


class ClassSummary(BaseModel):
    name: str
    params: List[str]
    private_inits: int
    statements: int
    continuous: int


class ParseRequest(BaseModel):
    source: str


class ParseResponse(BaseModel):
    classes: List[ClassSummary]


class DemoScenario(BaseModel):
    """Canned run of a built-in model."""
    model: str
    entry: str
    args: List[Any] = Field(default_factory=list)
    config: SimConfig = Field(default_factory=SimConfig)
