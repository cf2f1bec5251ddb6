# app/services/quadcopter.py
import math
import logging
from typing import List, Optional, Tuple

import numpy as np

from app.config.settings import GIMBAL_LOCK_TOLERANCE
from app.schemas.vehicles import QuadDerivatives, QuadParams, QuadState
from app.services.errors import GimbalLock

logger = logging.getLogger(__name__)


def hover_speed(params: Optional[QuadParams] = None) -> float:
    """Equal rotor speed whose total thrust k*4*w^2 balances m*g."""
    params = params or QuadParams()
    return math.sqrt(params.m * params.g / (4.0 * params.k))


def body_rates(phi: float, theta: float, phi_dot: float, theta_dot: float, psi_dot: float) -> Tuple[float, float, float]:
    """(p, q, r) from Euler angle rates."""
    w_eta = np.array([
        [1.0, 0.0, -math.sin(theta)],
        [0.0, math.cos(phi), math.cos(theta) * math.sin(phi)],
        [0.0, -math.sin(phi), math.cos(theta) * math.cos(phi)],
    ])
    p, q, r = w_eta @ np.array([phi_dot, theta_dot, psi_dot])
    return float(p), float(q), float(r)


def quad_derivatives(state: QuadState, params: Optional[QuadParams] = None) -> QuadDerivatives:
    """
    Translational and rotational accelerations, term for term as in the
    shipped quadcopter model source (thrust, linear drag, gyroscopic rotor
    term, arm torques, yaw drag torque, Euler-angle kinematics).
    """
    p_ = params or QuadParams()
    ch, sh = math.cos(state.phi), math.sin(state.phi)
    sp, cp = math.sin(state.psi), math.cos(state.psi)
    st, ct = math.sin(state.theta), math.cos(state.theta)
    if abs(ct) < GIMBAL_LOCK_TOLERANCE:
        raise GimbalLock(state.theta)
    tt = math.tan(state.theta)

    w1, w2, w3, w4 = state.w1, state.w2, state.w3, state.w4
    thrust = p_.k * (w1 ** 2 + w2 ** 2 + w3 ** 2 + w4 ** 2)
    w_total = w1 - w2 + w3 - w4

    velocity = np.array(state.P_dot)
    drag = np.array([p_.Ax, p_.Ay, p_.Az]) * velocity
    direction = np.array([cp * st * ch + sp * sh, sp * st * ch - cp * sh, ct * ch])
    P_ddot = -p_.g * np.array([0.0, 0.0, 1.0]) + thrust / p_.m * direction - 1.0 / p_.m * drag

    p, q, r = state.p, state.q, state.r
    p_dot = (p_.Iyy - p_.Izz) * q * r / p_.Ixx - p_.IM * q / p_.Ixx * w_total \
        + p_.l * p_.k * (w4 ** 2 - w2 ** 2) / p_.Ixx
    q_dot = (p_.Izz - p_.Ixx) * p * r / p_.Iyy - p_.IM * (-p) / p_.Iyy * w_total \
        + p_.l * p_.k * (w3 ** 2 - w1 ** 2) / p_.Iyy
    r_dot = (p_.Ixx - p_.Iyy) * p * q / p_.Izz + p_.b * (w1 ** 2 + w2 ** 2 - w3 ** 2 - w4 ** 2) / p_.Izz

    phi_d, theta_d = state.phi_dot, state.theta_dot
    phi_ddot = (phi_d * ch * tt + theta_d * sh / ct ** 2) * q \
        + (-phi_d * sh * ct + theta_d * ch / ct ** 2) * r \
        + (p_dot + q_dot * sh * tt + r_dot * ch * tt)
    theta_ddot = (-phi_d * sh) * q + (-phi_d * ch) * r + (q_dot * ch + r_dot * (-sh))
    psi_ddot = (phi_d * ch / ct + phi_d * sh * tt / ct) * q \
        + (-phi_d * sh / ct + theta_d * ch * tt / ct) * r \
        + (q_dot * sh / ct + r_dot * ch / ct)

    return QuadDerivatives(
        P_ddot=[float(v) for v in P_ddot],
        phi_ddot=phi_ddot, theta_ddot=theta_ddot, psi_ddot=psi_ddot,
        p_dot=p_dot, q_dot=q_dot, r_dot=r_dot,
    )


def quadcopter_args(position: Optional[List[float]] = None, phi: float = 0.0, theta: float = 0.0,
                    psi: float = 0.0) -> List[object]:
    """Constructor arguments (P, phi, theta, psi) for the QuadCopter class."""
    return [list(position or [0.0, 0.0, 0.0]), phi, theta, psi]


def rotor_overrides(w1: float, w2: float, w3: float, w4: float) -> dict:
    """Initial rotor speeds for a simulation run; the model keeps them constant."""
    return {"w1": w1, "w2": w2, "w3": w3, "w4": w4}


def hover_overrides(params: Optional[QuadParams] = None) -> dict:
    w = hover_speed(params)
    logger.debug(f"Hover rotor speed {w:.4f} rad/s")
    return rotor_overrides(w, w, w, w)
