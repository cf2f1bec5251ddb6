# app/services/model_library.py
import logging
from typing import Callable, Dict, List, Optional

from app.schemas.simulation import DemoScenario, SimConfig
from app.schemas.vehicles import GimbalParams
from app.services.errors import NonPositiveParam, UnknownModel
from app.services.lagrangian import LagrangianSystem
from app.services.quadcopter import hover_overrides, quadcopter_args
from app.services.symbolic import SymVec3, Sym, cos, dot3, sin

logger = logging.getLogger(__name__)

PENDULUM_SOURCE = """\
class pendulum (l)
private
  theta := 0;theta':=0;theta'':=0;
  g:=9.81;
end
  theta'' = g/l*cos(theta);
end
"""

DOUBLE_PENDULUM_SOURCE = """\
class double_pendulum (m_1, m_2, L_1, L_2)
private
  t_1 := 0; t_2 := 0;
  t_1' := 0; t_2' := 0;
  t_1'' := 0; t_2'' := 0;
  g:=9.81;
end
  t_1'' =
   (m_2*L_2*(t_2''*cos(t_1-t_2)
             +t_2'^2*sin(t_1-t_2))
    + (m_1+m_2)*g*cos(t_1))
   *(-1)/((m_1+m_2)*L_1);
  t_2'' =
   (m_2*L_1*(t_1''*cos(t_1-t_2)
             -t_1'^2*sin(t_1-t_2))
    +m_2*g*cos(t_2))
   *(-1)/(m_2*L_2);
end
"""

QUADCOPTER_SOURCE = """\
class QuadCopter(P,phi,theta,psi)
private
  g := 9.81;     m := 0.468;
  l := 0.225;    k := 2.98*10^(-6);
  b := 1.140*10^(-7);
  IM := 3.357*10^(-5);
  Ixx := 4.856*10^(-3);
  Iyy := 4.856*10^(-3);
  Izz := 8.801*10^(-3);
  Ax  := 0.25;  Ay  := 0.25;
  Az  := 0.25;
  w1 := 0;  w2:= 0;   w3 := 0;
  w4 := 0;  wT := 0;  f1 := 0;
  f2 := 0;  f3 := 0;  f4 := 0;
  TM1 := 0; TM2 := 0; T := 0;
  TM3 := 0; TM4 := 0;
  P' := [0,0,0];    P'' := [0,0,0];
  phi' := 0; theta' := 0; psi' := 0;
  phi'' := 0; theta'' := 0; psi'' := 0;
  p := 0; q := 0; r := 0; p' := 0;
  q' := 0; r' := 0; Ch:=0; Sh:=0;
  Sp:=0; Cp:=0; St:=0; Ct:=0; Tt:=0
end
  T = k* (w1^2 + w2^2 + w3^2 + w4^2);
  f1 = k * w1^2; TM1 = b * w1^2;
  f2 = k * w2^2; TM2 = b * w2^2;
  f3 = k * w3^2; TM3 = b * w3^2;
  f4 = k * w4^2; TM4 = b * w4^2;
  wT = w1 - w2 + w3 - w4;

  Ch = cos(phi); Sh = sin(phi);
  Sp = sin(psi); Cp = cos(psi);
  St = sin(theta); Ct = cos(theta);
  Tt = tan(theta);

  P'' = -g * [0,0,1] + T/m
   *[Cp*St*Ch+Sp*Sh,Sp*St*Ch-Cp*Sh,Ct*Ch]
   -1/m*[Ax*dot(P',[1,0,0]),
         Ay*dot(P',[0,1,0]),
         Az*dot(P',[0,0,1])];
  p' = (Iyy-Izz)*q*r/Ixx - IM*q/Ixx*wT
   + l*k*(w4^2 - w2^2)/Ixx;
  q' = (Izz-Ixx)*p*r/Iyy-IM*(-p)/Iyy*wT
   + l*k*(w3^2 -w1^2)/Iyy;
  r' = (Ixx - Iyy)*p*q/Izz  + b*(w1^2
   + w2^2 -w3^2 -w4^2)/Izz;
  phi'' = (phi'*Ch*Tt+ theta'*Sh/Ct^2)*q
   + (-phi'*Sh*Ct+theta'*Ch/Ct^2)*r
   + (p'+q'*Sh*Tt+r'*Ch*Tt);
  theta'' = (-phi'*Sh)*q + (-phi'*Ch)*r
   + (q'*Ch+r'*(-Sh));
  psi'' = (phi'*Ch/Ct+phi'*Sh*Tt/Ct)*q
   + (-phi'*Sh/Ct+theta'*Ch*Tt/Ct)*r
   + (q'*Sh/Ct+r'*Ch/Ct);
end
"""

BUILTIN_SOURCES: Dict[str, str] = {
    "pendulum": PENDULUM_SOURCE,
    "double_pendulum": DOUBLE_PENDULUM_SOURCE,
    "quadcopter": QUADCOPTER_SOURCE,
}

# Entry class of each built-in source.
BUILTIN_ENTRIES: Dict[str, str] = {
    "pendulum": "pendulum",
    "double_pendulum": "double_pendulum",
    "quadcopter": "QuadCopter",
}


def builtin_source(name: str) -> str:
    try:
        return BUILTIN_SOURCES[name]
    except KeyError:
        raise UnknownModel(name, sorted(BUILTIN_SOURCES))


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise NonPositiveParam(name, value)


def pendulum_lagrangian(m: float = 1.0, l: float = 1.0, g: float = 9.81) -> LagrangianSystem:
    """Point mass on a rigid rod; theta is measured from the horizontal, downwards positive."""
    _require_positive(m=m, l=l, g=g)
    theta, theta_dot = Sym("theta"), Sym("theta'")
    mass, length, gravity = Sym("m"), Sym("l"), Sym("g")
    T = 0.5 * mass * length ** 2 * theta_dot ** 2
    V = -mass * gravity * length * sin(theta)
    return LagrangianSystem(name="pendulum", coords=("theta",), T=T, V=V,
                            params={"m": m, "l": l, "g": g})


def double_pendulum_lagrangian(m1: float = 1.0, m2: float = 1.0, l1: float = 1.0, l2: float = 1.0,
                               g: float = 9.81) -> LagrangianSystem:
    _require_positive(m1=m1, m2=m2, l1=l1, l2=l2, g=g)
    t1, t2, v1, v2 = Sym("t_1"), Sym("t_2"), Sym("t_1'"), Sym("t_2'")
    M1, M2, L1, L2, G = Sym("m_1"), Sym("m_2"), Sym("L_1"), Sym("L_2"), Sym("g")

    T = 0.5 * M1 * (L1 * v1) ** 2 + 0.5 * M2 * (
        (L1 * v1) ** 2 + (L2 * v2) ** 2 + 2 * L1 * L2 * v1 * v2 * cos(t1 - t2)
    )
    V = M1 * G * L1 * sin(t1) + M2 * G * L2 * sin(t2) + M2 * G * L1 * sin(t1)
    return LagrangianSystem(name="double_pendulum", coords=("t_1", "t_2"), T=T, V=V,
                            params={"m_1": m1, "m_2": m2, "L_1": l1, "L_2": l2, "g": g})


def gimbal_angular_velocities() -> List[SymVec3]:
    """Angular velocity of each gimbal ring expressed in its own frame."""
    t1, t2, t3 = Sym("theta_1"), Sym("theta_2"), Sym("theta_3")
    d1, d2, d3 = Sym("theta_1'"), Sym("theta_2'"), Sym("theta_3'")
    omega1 = SymVec3.of(d1, 0, 0)
    omega2 = SymVec3.of(d1 * cos(t2), -(d1 * sin(t2)), d2)
    omega3 = SymVec3.of(
        d1 * (cos(t2) * cos(t3)) + d2 * (-sin(t3)),
        d1 * (-sin(t2)) + d3,
        d1 * (-sin(t3) * cos(t2)) + d2 * (-cos(t3)),
    )
    return [omega1, omega2, omega3]


def gimbal_lagrangian(params: Optional[GimbalParams] = None) -> LagrangianSystem:
    params = params or GimbalParams()
    _require_positive(I1=params.I1, I2=params.I2, I3=params.I3)
    omega1, omega2, omega3 = gimbal_angular_velocities()
    I1, I2, I3 = Sym("I1"), Sym("I2"), Sym("I3")
    m1, m3, l2, l3, g = Sym("m1"), Sym("m3"), Sym("l2"), Sym("l3"), Sym("g")
    t1, t3 = Sym("theta_1"), Sym("theta_3")

    T = 0.5 * (I1 * dot3(omega1, omega1) + I2 * dot3(omega2, omega2) + I3 * dot3(omega3, omega3))
    V = -(m1 * g * l2 * cos(t1)) + m3 * g * l3 * sin(t1) * sin(t3)
    return LagrangianSystem(name="gimbal", coords=("theta_1", "theta_2", "theta_3"), T=T, V=V,
                            params=params.model_dump())


LAGRANGIAN_LIBRARY: Dict[str, Callable[[], LagrangianSystem]] = {
    "pendulum": pendulum_lagrangian,
    "double_pendulum": double_pendulum_lagrangian,
    "gimbal": gimbal_lagrangian,
}


def library_system(name: str) -> LagrangianSystem:
    try:
        factory = LAGRANGIAN_LIBRARY[name]
    except KeyError:
        raise UnknownModel(name, sorted(LAGRANGIAN_LIBRARY))
    return factory()


def demo_scenario(name: str) -> DemoScenario:
    """Canned configurations behind `demo NAME`."""
    if name == "pendulum":
        return DemoScenario(model=name, entry="pendulum", args=[1.0],
                            config=SimConfig(dt=0.001, end_time=5.0))
    if name == "double_pendulum":
        return DemoScenario(model=name, entry="double_pendulum", args=[1.0, 1.0, 1.0, 1.0],
                            config=SimConfig(dt=0.001, end_time=5.0))
    if name == "quadcopter":
        return DemoScenario(model=name, entry="QuadCopter", args=quadcopter_args(),
                            config=SimConfig(dt=0.001, end_time=10.0, overrides=hover_overrides()))
    raise UnknownModel(name, sorted(BUILTIN_SOURCES))
