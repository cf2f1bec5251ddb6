# app/schemas/vehicles.py
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator


def _three(values: List[float]) -> List[float]:
    if len(values) != 3:
        raise ValueError("expected 3 components")
    return [float(v) for v in values]


class QuadParams(BaseModel):
    """Physical constants of the quadcopter; defaults are the reference airframe."""
    model_config = ConfigDict(frozen=True)

    g: float = Field(default=9.81, gt=0)
    m: float = Field(default=0.468, gt=0, description="mass, kg")
    l: float = Field(default=0.225, gt=0, description="arm length, m")
    k: float = Field(default=2.98e-6, gt=0, description="thrust coefficient")
    b: float = Field(default=1.140e-7, gt=0, description="drag torque coefficient")
    IM: float = Field(default=3.357e-5, gt=0, description="rotor inertia")
    Ixx: float = Field(default=4.856e-3, gt=0)
    Iyy: float = Field(default=4.856e-3, gt=0)
    Izz: float = Field(default=8.801e-3, gt=0)
    Ax: float = Field(default=0.25, gt=0)
    Ay: float = Field(default=0.25, gt=0)
    Az: float = Field(default=0.25, gt=0)


class QuadState(BaseModel):
    P: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    P_dot: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    phi_dot: float = 0.0
    theta_dot: float = 0.0
    psi_dot: float = 0.0
    # body angular rates
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0
    # rotor speeds, rad/s
    w1: float = 0.0
    w2: float = 0.0
    w3: float = 0.0
    w4: float = 0.0

    @field_validator("P", "P_dot")
    @classmethod
    def _vector3(cls, values):
        return _three(values)


class QuadDerivatives(BaseModel):
    P_ddot: List[float]
    phi_ddot: float
    theta_ddot: float
    psi_ddot: float
    p_dot: float
    q_dot: float
    r_dot: float

    def magnitudes(self) -> List[float]:
        return [abs(v) for v in self.P_ddot] + [
            abs(self.phi_ddot), abs(self.theta_ddot), abs(self.psi_ddot),
            abs(self.p_dot), abs(self.q_dot), abs(self.r_dot),
        ]


class GimbalParams(BaseModel):
    """Three-axis wrist gimbal. Defaults of 1.0 are placeholders, not measured hardware values."""
    model_config = ConfigDict(frozen=True)

    I1: float = 1.0
    I2: float = 1.0
    I3: float = 1.0
    m1: float = 1.0
    m3: float = 1.0
    l2: float = 1.0
    l3: float = 1.0
    g: float = 9.81
