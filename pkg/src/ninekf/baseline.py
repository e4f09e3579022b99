"""Comparison filter: contact-aided right-invariant EKF assuming a static
world-fixed ground ("SRS"), estimating world-frame orientation, velocity,
position and the contact-point position."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .filter import COND_LIMIT, SensorStreams, _check_monotonic
from .kinematics import JointState, KinematicChain, forward_kinematics
from .liegroup import gamma, gamma_all, hat3, project_rotation
from .models import Frame, ImuSample, NoiseParams

log = logging.getLogger(__name__)

# FK position-measurement noise SD (m); stands in for encoder uncertainty
# mapped through the leg geometry.
DEFAULT_FK_POS_SD = 0.01


@dataclass(frozen=True)
class SrsState:
    """World-frame state (R, v, p) plus contact-point position d and the
    12x12 covariance of the right-invariant error."""

    R: np.ndarray
    v: np.ndarray
    p: np.ndarray
    d: np.ndarray
    P: np.ndarray
    t: float = 0.0
    innovation_norm: float = float("nan")


def _exp12_left(xi: np.ndarray, state: SrsState) -> SrsState:
    """Left-multiply the state by the group exponential of a 12-tangent."""
    Re = gamma(0, xi[:3])
    J = gamma(1, xi[:3])
    return replace(state,
                   R=Re @ state.R,
                   v=Re @ state.v + J @ xi[3:6],
                   p=Re @ state.p + J @ xi[6:9],
                   d=Re @ state.d + J @ xi[9:12])


def srs_phi(gravity, dt: float) -> np.ndarray:
    """Exact expm(A dt) for the static-world right-invariant error dynamics."""
    G = hat3(gravity)
    Phi = np.eye(12)
    Phi[3:6, :3] = G * dt
    Phi[6:9, :3] = 0.5 * G * dt * dt
    Phi[6:9, 3:6] = np.eye(3) * dt
    return Phi


def srs_propagate(state: SrsState, uB: ImuSample, dt: float,
                  noise: NoiseParams, gravity=(0.0, 0.0, -9.81)) -> SrsState:
    """World-frame strapdown propagation with gravity; the contact point is
    held constant with a small random-walk noise."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if uB.frame is not Frame.ROBOT_B:
        raise ValueError("srs_propagate expects a robot-frame sample")
    g = np.asarray(gravity, dtype=float)
    G0, G1, G2 = gamma_all(uB.omega * dt)
    Rn = state.R @ G0
    vn = state.v + state.R @ (G1 @ uB.accel) * dt + g * dt
    pn = (state.p + state.v * dt + state.R @ (G2 @ uB.accel) * dt * dt
          + 0.5 * g * dt * dt)
    if np.max(np.abs(Rn.T @ Rn - np.eye(3))) > 1e-8:
        Rn = project_rotation(Rn)

    # Ad covw Ad^T expanded in blocks: the gyro columns of the adjoint spread
    # across the whole state, the accelerometer and contact random walks land
    # on their own diagonal blocks unchanged.
    R = state.R
    B = np.empty((12, 3))
    B[:3] = R
    B[3:6] = hat3(state.v) @ R
    B[6:9] = hat3(state.p) @ R
    B[9:12] = hat3(state.d) @ R
    Q = noise.sd_omega_b ** 2 * (B @ B.T)
    idx = np.arange(3)
    Q[idx + 3, idx + 3] += noise.sd_accel_b ** 2
    Q[idx + 9, idx + 9] += noise.sd_contact_vel ** 2
    Phi = srs_phi(g, dt)
    Pn = Phi @ (state.P + Q * dt) @ Phi.T
    Pn = 0.5 * (Pn + Pn.T)
    return replace(state, R=Rn, v=vn, p=pn, P=Pn, t=state.t + dt)


def srs_update(state: SrsState, joint: JointState, chain: KinematicChain,
               noise: NoiseParams, fk_pos_sd: float = DEFAULT_FK_POS_SD) -> SrsState:
    """Forward-kinematics relative-position update: measurement s(q) of the
    contact point seen from the base, h = R^T (d - p)."""
    r = forward_kinematics(chain, joint.q) - state.R.T @ (state.d - state.p)
    Rt = state.R.T
    H = np.zeros((3, 12))
    H[:, 6:9] = -Rt
    H[:, 9:12] = Rt
    N = fk_pos_sd ** 2 * np.eye(3)
    HP = H @ state.P
    S = HP @ H.T + N
    S = 0.5 * (S + S.T)
    evals = np.linalg.eigvalsh(S)
    if evals[0] <= 0.0 or evals[-1] > COND_LIMIT * evals[0]:
        log.warning("SRS innovation covariance ill-conditioned at t=%.4f; "
                    "update skipped", state.t)
        return replace(state, innovation_norm=float(np.linalg.norm(r)))
    K = np.linalg.solve(S, HP).T
    new = _exp12_left(K @ r, state)
    IKH = np.eye(12) - K @ H
    Pn = IKH @ state.P @ IKH.T + K @ N @ K.T
    Pn = 0.5 * (Pn + Pn.T)
    return replace(new, P=Pn, innovation_norm=float(np.linalg.norm(r)))


@dataclass(frozen=True)
class SrsTraceRecord:
    t: float
    R: np.ndarray
    v: np.ndarray
    p: np.ndarray
    P_diag: np.ndarray
    innovation_norm: float


def srs_run(streams: SensorStreams, initial: SrsState, chain: KinematicChain,
            noise: NoiseParams, gravity=(0.0, 0.0, -9.81),
            fk_pos_sd: float = DEFAULT_FK_POS_SD) -> list[SrsTraceRecord]:
    """Run the SRS baseline over a log, stepping at the robot-IMU rate; the
    ground IMU stream is ignored by construction."""
    if streams.robot_t.size == 0:
        raise ValueError("empty robot IMU stream")
    _check_monotonic(streams.robot_t, "robot IMU")
    state = initial

    def record(s: SrsState) -> SrsTraceRecord:
        return SrsTraceRecord(s.t, s.R.copy(), s.v.copy(), s.p.copy(),
                              np.diag(s.P)[:9].copy(), s.innovation_norm)

    trace = [record(state)]
    for j in range(1, streams.robot_t.size):
        dt = float(streams.robot_t[j] - streams.robot_t[j - 1])
        uB = ImuSample(float(streams.robot_t[j - 1]),
                       streams.robot_omega[j - 1], streams.robot_accel[j - 1],
                       Frame.ROBOT_B)
        state = srs_propagate(state, uB, dt, noise, gravity)
        joint = JointState(streams.encoder_q[j], streams.encoder_qdot[j],
                           float(streams.encoder_t[j]))
        state = srs_update(state, joint, chain, noise, fk_pos_sd)
        trace.append(record(state))
    return trace
