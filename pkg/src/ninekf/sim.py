"""Synthetic treadmill experiment: pitch/sway ground motion, a robot standing
on it with static foot contact, and the resulting sensor streams."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from .filter import SensorStreams
from .kinematics import KinematicChain, forward_kinematics
from .liegroup import SE23, gamma, hat3
from .models import NoiseParams


def _cross(a, b) -> np.ndarray:
    """3-vector cross product without the ufunc dispatch overhead."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


_STREAM_IDS = {"imu_robot": 1, "imu_ground": 2, "encoders": 3, "init_error": 4}


@dataclass(frozen=True)
class GroundMotionParams:
    """Sinusoidal pitch rotation and cosine sway translation of the ground.

    An optional sinusoidal roll about a second axis (default amplitude 0)
    makes the ground rotation axis vary over time, which is what renders the
    full relative state observable; with roll disabled the rotation axis is
    fixed and the relative position along it stays unobservable.
    """

    pitch_amplitude: float = math.radians(10.0)   # rad
    pitch_frequency: float = math.pi / 2.0        # rad/s
    sway_amplitude: float = 0.05                  # m
    sway_frequency: float = math.pi / 2.0         # rad/s
    roll_amplitude: float = 0.0                   # rad
    roll_frequency: float = math.pi / 3.0         # rad/s
    sway_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    pitch_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    roll_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))

    def __post_init__(self):
        object.__setattr__(self, "sway_axis", np.asarray(self.sway_axis, float))
        object.__setattr__(self, "pitch_axis", np.asarray(self.pitch_axis, float))
        object.__setattr__(self, "roll_axis", np.asarray(self.roll_axis, float))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, float))
        if self.pitch_frequency <= 0 or self.sway_frequency <= 0 \
                or self.roll_frequency <= 0:
            raise ValueError("frequencies must be positive")
        if self.pitch_amplitude < 0 or self.sway_amplitude < 0 \
                or self.roll_amplitude < 0:
            raise ValueError("amplitudes must be non-negative")
        if self.sway_amplitude > 0 and \
                abs(np.linalg.norm(self.sway_axis) - 1.0) > 1e-9:
            raise ValueError("sway axis must have unit norm")
        if self.roll_amplitude > 0 and \
                abs(np.linalg.norm(self.roll_axis) - 1.0) > 1e-9:
            raise ValueError("roll axis must have unit norm")

    @staticmethod
    def stationary() -> "GroundMotionParams":
        return GroundMotionParams(pitch_amplitude=0.0, sway_amplitude=0.0)


@dataclass(frozen=True)
class SensorRig:
    robot_imu_rate: float = 500.0
    ground_imu_rate: float = 200.0
    encoder_rate: float = 500.0
    noise: NoiseParams = field(default_factory=NoiseParams)
    seed: int = 0

    def __post_init__(self):
        if min(self.robot_imu_rate, self.ground_imu_rate, self.encoder_rate) <= 0:
            raise ValueError("rates must be positive")


@dataclass(frozen=True)
class GroundKinematics:
    """World-frame pose, velocity and acceleration of the ground frame at one
    instant, with its world-frame angular velocity and acceleration."""

    R: np.ndarray          # world orientation of {D}
    p: np.ndarray          # world position of {D}
    v: np.ndarray          # world velocity of {D}
    a: np.ndarray          # world acceleration of {D}
    omega_world: np.ndarray
    alpha_world: np.ndarray


@dataclass(frozen=True)
class GroundTruthRecord:
    t: float
    rel: SE23              # relative state (R, v, p) of {B} in {D}
    ground: GroundKinematics
    R_B: np.ndarray
    v_B: np.ndarray
    p_B: np.ndarray
    foot_d: np.ndarray     # stance-foot position in {D}


def ground_motion(t: float, params: GroundMotionParams) -> GroundKinematics:
    """Analytic ground kinematics: theta(t) = A_p sin(w_p t) about the pitch
    axis, optionally composed with phi(t) = A_r sin(w_r t) about the roll
    axis, and x(t) = A_s cos(w_s t) along the sway axis."""
    wp, ws = params.pitch_frequency, params.sway_frequency
    theta = params.pitch_amplitude * math.sin(wp * t)
    dtheta = params.pitch_amplitude * wp * math.cos(wp * t)
    ddtheta = -params.pitch_amplitude * wp * wp * math.sin(wp * t)
    Rp = gamma(0, params.pitch_axis * theta)
    omega = dtheta * params.pitch_axis
    alpha = ddtheta * params.pitch_axis
    if params.roll_amplitude > 0:
        wr = params.roll_frequency
        phi = params.roll_amplitude * math.sin(wr * t)
        dphi = params.roll_amplitude * wr * math.cos(wr * t)
        ddphi = -params.roll_amplitude * wr * wr * math.sin(wr * t)
        R = Rp @ gamma(0, params.roll_axis * phi)
        # omega of a composed rotation R_p R_r: the roll rate rotates into the
        # world through R_p, and its time derivative picks up [omega_p]x R_p.
        roll_rate_world = Rp @ (dphi * params.roll_axis)
        alpha = (alpha + _cross(omega, roll_rate_world)
                 + Rp @ (ddphi * params.roll_axis))
        omega = omega + roll_rate_world
    else:
        R = Rp
    p = params.sway_amplitude * math.cos(ws * t) * params.sway_axis
    v = -params.sway_amplitude * ws * math.sin(ws * t) * params.sway_axis
    a = -params.sway_amplitude * ws * ws * math.cos(ws * t) * params.sway_axis
    return GroundKinematics(R, p, v, a, omega, alpha)


def ground_truth(t: float, params: GroundMotionParams, standing: SE23,
                 chain: KinematicChain, q_stand: np.ndarray) -> GroundTruthRecord:
    """True world and relative states of a robot rigidly standing on the
    ground with relative pose (standing.R, standing.p)."""
    g = ground_motion(t, params)
    lever = g.R @ standing.p
    R_B = g.R @ standing.R
    p_B = g.p + lever
    v_B = g.v + _cross(g.omega_world, lever)
    omega_body = g.R.T @ g.omega_world
    # relative velocity R_D^T (v_B - v_D) = [omega_D]x p_rel
    v_rel = hat3(omega_body) @ standing.p
    rel = SE23(standing.R.copy(), v_rel, standing.p.copy())
    foot_d = standing.p + standing.R @ forward_kinematics(chain, q_stand)
    return GroundTruthRecord(t, rel, g, R_B, v_B, p_B, foot_d)


def _robot_imu_truth(t: float, params: GroundMotionParams, standing: SE23):
    """True body-frame angular velocity and specific force of the robot IMU."""
    g = ground_motion(t, params)
    lever = g.R @ standing.p
    R_B = g.R @ standing.R
    accel_B = (g.a + _cross(g.alpha_world, lever)
               + _cross(g.omega_world, _cross(g.omega_world, lever)))
    omega = R_B.T @ g.omega_world
    specific = R_B.T @ (accel_B - params.gravity)
    return omega, specific


def _ground_imu_truth(t: float, params: GroundMotionParams):
    g = ground_motion(t, params)
    omega = g.R.T @ g.omega_world
    specific = g.R.T @ (g.a - params.gravity)
    return omega, specific


def _noise(seed: int, stream: str, index: int, n: int) -> np.ndarray:
    """Per-sample counter-based Gaussian draws, reproducible independently of
    generation order or chunking."""
    key = (int(seed) << 64) | (_STREAM_IDS[stream] << 32) | int(index)
    return Generator(Philox(key=key)).standard_normal(n)


@dataclass(frozen=True)
class SimulationResult:
    streams: SensorStreams
    truth: list[GroundTruthRecord]
    q_stand: np.ndarray


def synthesize_sensors(params: GroundMotionParams, rig: SensorRig,
                       chain: KinematicChain, standing: SE23,
                       q_stand: np.ndarray, duration: float) -> SimulationResult:
    """Generate robot IMU, ground IMU, encoder and ground-truth logs.

    Samples cover [0, duration): t = 0 included, t = duration excluded.
    Encoder angle channels are noise-free (the robot holds a constant q); the
    lumped contact-velocity noise enters through the joint-rate channels.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    q_stand = np.asarray(q_stand, dtype=float)
    nz = rig.noise

    nrob = int(round(duration * rig.robot_imu_rate))
    ngnd = int(round(duration * rig.ground_imu_rate))
    robot_t = np.arange(nrob) / rig.robot_imu_rate
    ground_t = np.arange(ngnd) / rig.ground_imu_rate

    robot_omega = np.empty((nrob, 3))
    robot_accel = np.empty((nrob, 3))
    truth = []
    for j, t in enumerate(robot_t):
        w, a = _robot_imu_truth(float(t), params, standing)
        n = _noise(rig.seed, "imu_robot", j, 6)
        robot_omega[j] = w + nz.sd_omega_b * n[:3]
        robot_accel[j] = a + nz.sd_accel_b * n[3:]
        truth.append(ground_truth(float(t), params, standing, chain, q_stand))

    ground_omega = np.empty((ngnd, 3))
    ground_accel = np.empty((ngnd, 3))
    for j, t in enumerate(ground_t):
        w, a = _ground_imu_truth(float(t), params)
        n = _noise(rig.seed, "imu_ground", j, 6)
        ground_omega[j] = w + nz.sd_omega_d * n[:3]
        ground_accel[j] = a + nz.sd_accel_d * n[3:]

    nenc = int(round(duration * rig.encoder_rate))
    njoints = chain.njoints
    encoder_t = np.arange(nenc) / rig.encoder_rate
    encoder_q = np.tile(q_stand, (nenc, 1))
    encoder_qdot = np.zeros((nenc, njoints))
    for j in range(nenc):
        n = _noise(rig.seed, "encoders", j, njoints)
        encoder_qdot[j] += nz.sd_contact_vel * n

    streams = SensorStreams(robot_t, robot_omega, robot_accel,
                            ground_t, ground_omega, ground_accel,
                            encoder_t, encoder_q, encoder_qdot)
    return SimulationResult(streams, truth, q_stand)


def sample_initial_error(seed: int, rot_range_deg=(-23.0, 23.0),
                         vel_range=(-1.0, 1.0), pos_range=(-3.0, 3.0)) -> np.ndarray:
    """Uniform per-axis initial error tangent (rotation, velocity, position)."""
    u = Generator(Philox(key=(int(seed) << 64) | (_STREAM_IDS["init_error"] << 32)))
    xi = np.empty(9)
    xi[:3] = np.radians(u.uniform(rot_range_deg[0], rot_range_deg[1], 3))
    xi[3:6] = u.uniform(vel_range[0], vel_range[1], 3)
    xi[6:9] = u.uniform(pos_range[0], pos_range[1], 3)
    return xi
