# app/schemas/derive.py
from typing import List, Optional

from pydantic import BaseModel, Field


class DeriveRequest(BaseModel):
    spec: Optional[str] = Field(default=None, description="Lagrangian spec text")
    builtin: Optional[str] = Field(default=None, description="pendulum, double_pendulum or gimbal")
    emit: bool = False
    class_name: Optional[str] = None


class DeriveResponse(BaseModel):
    name: str
    coords: List[str]
    residuals: List[str]
    mass_matrix: List[List[str]]
    bias: List[str]
    source: Optional[str] = None
