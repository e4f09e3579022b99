"""Continuous process model, leg-odometry measurement model and their
linearization matrices for the relative-state filter."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .kinematics import JointState, KinematicChain, forward_kinematics, leg_jacobian
from .liegroup import SE23, gamma_all, hat3


class Frame(enum.Enum):
    ROBOT_B = "robot"
    GROUND_D = "ground"


_DIAG3 = np.arange(3)


@dataclass(frozen=True)
class ImuSample:
    """One IMU reading: body-frame angular velocity and specific force."""

    t: float
    omega: np.ndarray
    accel: np.ndarray
    frame: Frame

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        object.__setattr__(self, "accel", np.asarray(self.accel, dtype=float))


@dataclass(frozen=True)
class NoiseParams:
    """Per-axis standard deviations of the sensor noise.

    sd_contact_vel is the lumped contact-velocity noise covering encoder
    uncertainty and slippage.
    """

    sd_omega_b: float = 0.01
    sd_accel_b: float = 0.1
    sd_omega_d: float = 0.01
    sd_accel_d: float = 0.1
    sd_contact_vel: float = 0.1

    def __post_init__(self):
        for name in ("sd_omega_b", "sd_accel_b", "sd_omega_d", "sd_accel_d",
                     "sd_contact_vel"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def cov_robot(self) -> np.ndarray:
        d = np.zeros(9)
        d[:3] = self.sd_omega_b ** 2
        d[3:6] = self.sd_accel_b ** 2
        return np.diag(d)

    def cov_ground(self) -> np.ndarray:
        d = np.zeros(9)
        d[:3] = self.sd_omega_d ** 2
        d[3:6] = self.sd_accel_d ** 2
        return np.diag(d)

    def cov_contact(self) -> np.ndarray:
        return self.sd_contact_vel ** 2 * np.eye(3)


def build_U(sample: ImuSample) -> np.ndarray:
    """5x5 input matrix [[hat(w), a, 0], [0, 0, 1], [0, 0, 0]]."""
    U = np.zeros((5, 5))
    U[:3, :3] = hat3(sample.omega)
    U[:3, 3] = sample.accel
    U[3, 4] = 1.0
    return U


def process_f(X: SE23, uB: ImuSample, uD: ImuSample) -> np.ndarray:
    """Noise-free drift dX/dt = -U_D X + X U_B as a 5x5 matrix."""
    if uB.frame is not Frame.ROBOT_B:
        raise ValueError("uB must be a robot-frame sample")
    if uD.frame is not Frame.GROUND_D:
        raise ValueError("uD must be a ground-frame sample")
    Xm = X.as_matrix()
    return -build_U(uD) @ Xm + Xm @ build_U(uB)


def measurement_y(omegaB, joint: JointState, chain: KinematicChain) -> np.ndarray:
    """Observation built from robot-side proprioception only:
    [w_B]x s(q) + J(q) qdot."""
    s = forward_kinematics(chain, joint.q)
    J = leg_jacobian(chain, joint.q)
    return hat3(omegaB) @ s + J @ joint.qdot


def measurement_h(X: SE23, omegaD, joint: JointState,
                  chain: KinematicChain) -> np.ndarray:
    """Predicted observation R^T ([w_D]x R s(q) - v + [w_D]x p)."""
    s = forward_kinematics(chain, joint.q)
    Wd = hat3(omegaD)
    return X.R.T @ (Wd @ (X.R @ s) - X.v + Wd @ X.p)


def jacobian_H(Xbar: SE23, omegaD, joint: JointState,
               chain: KinematicChain) -> np.ndarray:
    """3x9 measurement Jacobian [c, -R^T, R^T [w_D]x] for the right-error
    convention h(Xbar) - h(X) ~ H xi."""
    s = forward_kinematics(chain, joint.q)
    Rt = Xbar.R.T
    Wd = hat3(omegaD)
    Rs = Xbar.R @ s
    c = (Rt @ hat3(Wd @ Rs) - Rt @ Wd @ hat3(Rs)
         + Rt @ hat3(Wd @ Xbar.p) - Rt @ Wd @ hat3(Xbar.p))
    return np.hstack([c, -Rt, Rt @ Wd])


def matrix_A(omegaD, accelD) -> np.ndarray:
    """Continuous-time error-dynamics matrix for the right-invariant error."""
    Wd = hat3(omegaD)
    Ad = hat3(accelD)
    A = np.zeros((9, 9))
    A[:3, :3] = -Wd
    A[3:6, :3] = -Ad
    A[3:6, 3:6] = -Wd
    A[6:9, 3:6] = np.eye(3)
    A[6:9, 6:9] = -Wd
    return A


def phi_blocks(omegaD, accelD, dt: float) -> np.ndarray:
    """Discrete state-transition matrix Phi = expm(A dt) in closed form.

    With E = Gamma_0(-w dt) the blocks are
        Phi_11 = Phi_22 = Phi_33 = E,
        Phi_21 = -[Gamma_1(-w dt) a dt]x E,
        Phi_31 = -[(Gamma_1 - Gamma_2)(-w dt) a dt^2]x E,
        Phi_32 = E dt.
    The Gamma factors in Phi_21 and Phi_31 make the blocks exact for constant
    inputs; dropping them recovers the usual first-order-in-dt forms.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    omegaD = np.asarray(omegaD, dtype=float)
    accelD = np.asarray(accelD, dtype=float)
    E, G1, G2 = gamma_all(-omegaD * dt)
    Phi = np.zeros((9, 9))
    Phi[:3, :3] = E
    Phi[3:6, 3:6] = E
    Phi[6:9, 6:9] = E
    Phi[3:6, :3] = -hat3(G1 @ accelD * dt) @ E
    Phi[6:9, :3] = -hat3((G1 - G2) @ accelD * dt * dt) @ E
    Phi[6:9, 3:6] = dt * E
    return Phi


def qbar(Xbar: SE23, noise: NoiseParams) -> np.ndarray:
    """Process noise covariance Ad_X Cov(w_B) Ad_X^T + Cov(w_D).

    Expanded in blocks: only the gyro columns of the adjoint spread across the
    state, the robot accelerometer maps onto the velocity block unchanged, and
    the ground terms are diagonal.
    """
    R = Xbar.R
    B = np.empty((9, 3))
    B[:3] = R
    B[3:6] = hat3(Xbar.v) @ R
    B[6:9] = hat3(Xbar.p) @ R
    Q = noise.sd_omega_b ** 2 * (B @ B.T)
    Q[_DIAG3, _DIAG3] += noise.sd_omega_d ** 2
    Q[_DIAG3 + 3, _DIAG3 + 3] += noise.sd_accel_b ** 2 + noise.sd_accel_d ** 2
    return 0.5 * (Q + Q.T)
