"""The proposed relative-state InEKF: closed-form discrete propagation and
the contact-velocity measurement update."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kinematics import JointState, KinematicChain
from .liegroup import SE23, exp_se23, gamma_all
from .models import (Frame, ImuSample, NoiseParams, jacobian_H, measurement_h,
                     measurement_y, phi_blocks, qbar)

log = logging.getLogger(__name__)

COND_LIMIT = 1e12

_I9 = np.eye(9)
_I9.setflags(write=False)


@dataclass(frozen=True)
class FilterState:
    """Estimate Xhat, covariance P of the right-invariant error, clock t and
    the noise parameters the filter runs with."""

    Xhat: SE23
    P: np.ndarray
    t: float
    noise: NoiseParams = field(default_factory=NoiseParams)
    innovation_norm: float = float("nan")


@dataclass(frozen=True)
class FilterConfig:
    noise: NoiseParams
    initial_state: SE23
    initial_cov_diag: np.ndarray = field(
        default_factory=lambda: np.array([0.2, 0.2, 0.2, 1.0, 1.0, 1.0,
                                          3.0, 3.0, 3.0]) ** 2)
    reorth_threshold: float = 1e-8

    def __post_init__(self):
        diag = np.asarray(self.initial_cov_diag, dtype=float)
        if np.any(diag <= 0):
            raise ValueError("initial covariance diagonal must be positive")
        object.__setattr__(self, "initial_cov_diag", diag)

    def initial_filter_state(self, t0: float = 0.0) -> FilterState:
        return FilterState(self.initial_state, np.diag(self.initial_cov_diag),
                           t0, self.noise)


def zmatrix(sample: ImuSample, dt: float) -> np.ndarray:
    """Closed-form 5x5 matrix exponential of build_U(sample) * dt.

    Top blocks are Gamma_0(w dt), Gamma_1(w dt) a dt and Gamma_2(w dt) a dt^2;
    the (3, 4) entry carries dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    G0, G1, G2 = gamma_all(sample.omega * dt)
    Z = np.eye(5)
    Z[:3, :3] = G0
    Z[:3, 3] = G1 @ sample.accel * dt
    Z[:3, 4] = G2 @ sample.accel * dt * dt
    Z[3, 4] = dt
    return Z


def _zinv(Z: np.ndarray, dt: float) -> np.ndarray:
    """Analytic inverse of a zmatrix (block upper-triangular)."""
    Rt = Z[:3, :3].T
    Zi = np.eye(5)
    Zi[:3, :3] = Rt
    Zi[:3, 3] = -Rt @ Z[:3, 3]
    Zi[:3, 4] = Rt @ (Z[:3, 3] * dt - Z[:3, 4])
    Zi[3, 4] = -dt
    return Zi


def propagate(state: FilterState, uB: ImuSample, uD: ImuSample, dt: float,
              reorth_threshold: float = 1e-8) -> FilterState:
    """One propagation step: X <- Z_D^-1 X Z_B and the discretized Riccati
    update P <- Phi P Phi^T + Phi Qbar Phi^T dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if uB.frame is not Frame.ROBOT_B or uD.frame is not Frame.GROUND_D:
        raise ValueError("propagate expects (robot, ground) samples")
    # a sum over all inputs is finite iff every entry is finite
    if not math.isfinite(float(uB.omega.sum() + uB.accel.sum()
                               + uD.omega.sum() + uD.accel.sum())):
        raise FloatingPointError("non-finite IMU input")

    ZB = zmatrix(uB, dt)
    ZD = zmatrix(uD, dt)
    Xm = _zinv(ZD, dt) @ state.Xhat.as_matrix() @ ZB
    Xnew = SE23.from_matrix(Xm)
    if Xnew.orthonormality_error() > reorth_threshold:
        Xnew = Xnew.reorthonormalized()

    Phi = phi_blocks(uD.omega, uD.accel, dt)
    Q = qbar(state.Xhat, state.noise)
    Pn = Phi @ (state.P + Q * dt) @ Phi.T
    Pn = 0.5 * (Pn + Pn.T)
    return replace(state, Xhat=Xnew, P=Pn, t=state.t + dt)


def update(state: FilterState, joint: JointState, omegaB, omegaD,
           chain: KinematicChain, noise: NoiseParams | None = None) -> FilterState:
    """Measurement update with the contact-velocity observation.

    Applies the correction exp(K r) on the left of Xhat and the Joseph-form
    covariance update. A near-singular innovation covariance skips the update
    with a warning.
    """
    if noise is None:
        noise = state.noise
    Xbar = state.Xhat
    r = measurement_y(omegaB, joint, chain) - measurement_h(Xbar, omegaD, joint, chain)
    H = jacobian_H(Xbar, omegaD, joint, chain)
    N = Xbar.R @ noise.cov_contact() @ Xbar.R.T
    HP = H @ state.P
    S = HP @ H.T + N
    S = 0.5 * (S + S.T)
    evals = np.linalg.eigvalsh(S)
    if evals[0] <= 0.0 or evals[-1] > COND_LIMIT * evals[0]:
        log.warning("innovation covariance ill-conditioned at t=%.4f; update skipped",
                    state.t)
        return replace(state, innovation_norm=float(np.linalg.norm(r)))
    K = np.linalg.solve(S, HP).T
    Xnew = exp_se23(K @ r).compose(Xbar)
    IKH = _I9 - K @ H
    Pn = IKH @ state.P @ IKH.T + K @ N @ K.T
    Pn = 0.5 * (Pn + Pn.T)
    return replace(state, Xhat=Xnew, P=Pn,
                   innovation_norm=float(np.linalg.norm(r)))


@dataclass(frozen=True)
class SensorStreams:
    """Time-sorted sensor logs: robot IMU, ground IMU and encoders.

    Robot IMU and encoders share a clock; the ground IMU may run slower and is
    zero-order-held between its samples.
    """

    robot_t: np.ndarray
    robot_omega: np.ndarray   # (N, 3)
    robot_accel: np.ndarray   # (N, 3)
    ground_t: np.ndarray
    ground_omega: np.ndarray  # (M, 3)
    ground_accel: np.ndarray  # (M, 3)
    encoder_t: np.ndarray
    encoder_q: np.ndarray     # (N, J)
    encoder_qdot: np.ndarray  # (N, J)


@dataclass(frozen=True)
class TraceRecord:
    t: float
    Xhat: SE23
    P_diag: np.ndarray
    innovation_norm: float


def _check_monotonic(t: np.ndarray, name: str):
    bad = np.nonzero(np.diff(t) <= 0)[0]
    if bad.size:
        raise ValueError(f"{name} timestamps regress at index {bad[0] + 1}")


def run(streams: SensorStreams, config: FilterConfig,
        chain: KinematicChain) -> list[TraceRecord]:
    """Run the filter over the full log, stepping at the robot-IMU rate.

    The ground IMU is zero-order-held at its own rate; each propagation step
    uses the average of the held values at the step endpoints (trapezoidal
    input), which removes the first-order bias of start-of-step sampling.
    The measurement update runs at every encoder sample (same clock as the
    robot IMU).
    """
    if streams.robot_t.size == 0:
        raise ValueError("empty robot IMU stream")
    _check_monotonic(streams.robot_t, "robot IMU")
    _check_monotonic(streams.ground_t, "ground IMU")
    _check_monotonic(streams.encoder_t, "encoder")

    state = config.initial_filter_state(float(streams.robot_t[0]))
    trace = [TraceRecord(state.t, state.Xhat, np.diag(state.P).copy(),
                         state.innovation_norm)]
    # index of the latest ground sample not newer than each robot timestamp
    gidx = np.searchsorted(streams.ground_t, streams.robot_t, side="right") - 1
    gidx = np.clip(gidx, 0, None)
    for j in range(1, streams.robot_t.size):
        dt = float(streams.robot_t[j] - streams.robot_t[j - 1])
        uB = ImuSample(float(streams.robot_t[j - 1]),
                       0.5 * (streams.robot_omega[j - 1] + streams.robot_omega[j]),
                       0.5 * (streams.robot_accel[j - 1] + streams.robot_accel[j]),
                       Frame.ROBOT_B)
        g0, g1 = gidx[j - 1], gidx[j]
        uD = ImuSample(float(streams.ground_t[g0]),
                       0.5 * (streams.ground_omega[g0] + streams.ground_omega[g1]),
                       0.5 * (streams.ground_accel[g0] + streams.ground_accel[g1]),
                       Frame.GROUND_D)
        state = propagate(state, uB, uD, dt,
                          reorth_threshold=config.reorth_threshold)
        gj = gidx[j]
        joint = JointState(streams.encoder_q[j], streams.encoder_qdot[j],
                           float(streams.encoder_t[j]))
        state = update(state, joint, streams.robot_omega[j],
                       streams.ground_omega[gj], chain, config.noise)
        trace.append(TraceRecord(state.t, state.Xhat, np.diag(state.P).copy(),
                                 state.innovation_norm))
    return trace
