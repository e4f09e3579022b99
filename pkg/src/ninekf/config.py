"""Sectioned key-value config file describing a scenario: ground motion,
sensor rig, leg chain, standing pose, filter tuning and error sampling."""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import KinematicChain
from .liegroup import SE23, gamma
from .models import NoiseParams
from .sim import GroundMotionParams, SensorRig

DEFAULT_CONFIG = """\
[ground_motion]
pitch_amplitude_deg = 10.0
pitch_frequency = 1.5707963267948966
sway_amplitude = 0.05
sway_frequency = 1.5707963267948966
roll_amplitude_deg = 0.0
roll_frequency = 1.0471975511965976
pitch_axis = 0, 1, 0
sway_axis = 1, 0, 0
roll_axis = 1, 0, 0
gravity = 0, 0, -9.81

[rig]
robot_imu_rate = 500
ground_imu_rate = 200
encoder_rate = 500
seed = 0

[noise]
sd_omega_b = 0.01
sd_accel_b = 0.1
sd_omega_d = 0.01
sd_accel_d = 0.1
sd_contact_vel = 0.1

[chain]
base_offset = 0, 0, -0.1
foot_offset = 0, 0, -0.4
joint_axes = 0,1,0 ; 1,0,0 ; 0,1,0
joint_offsets = 0,0,0 ; 0,0,-0.45 ; 0,0,0
standing_q = 0.3, 0.1, -0.2

[standing]
position = 0.1, 0.05, 0.9
rotation_rpy_deg = 0, 0, 0

[sim]
duration = 10.0

[filter]
init_cov_rot = 0.1
init_cov_vel = 1.0
init_cov_pos = 9.0
reorth_threshold = 1e-8
fk_pos_sd = 0.01

[init_error]
rot_deg = -23, 23
vel = -1, 1
pos = -3, 3

[rmse]
steady_state_start = 5.0
"""


def _vec(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")])


def _vec_list(text: str) -> np.ndarray:
    return np.array([_vec(part) for part in text.split(";")])


@dataclass(frozen=True)
class Scenario:
    motion: GroundMotionParams
    rig: SensorRig
    chain: KinematicChain
    standing: SE23
    q_stand: np.ndarray
    duration: float
    init_cov_diag: np.ndarray
    reorth_threshold: float
    fk_pos_sd: float
    rot_error_range_deg: tuple
    vel_error_range: tuple
    pos_error_range: tuple
    steady_state_start: float


def _range(text: str, name: str) -> tuple:
    lo, hi = (float(x) for x in text.split(","))
    if lo > hi:
        raise ValueError(f"{name} range must satisfy lo <= hi")
    return (lo, hi)


def load_scenario(path, seed_override: int | None = None) -> Scenario:
    cp = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as f:
        cp.read_file(f)

    gm = cp["ground_motion"]
    motion = GroundMotionParams(
        pitch_amplitude=math.radians(gm.getfloat("pitch_amplitude_deg")),
        pitch_frequency=gm.getfloat("pitch_frequency"),
        sway_amplitude=gm.getfloat("sway_amplitude"),
        sway_frequency=gm.getfloat("sway_frequency"),
        roll_amplitude=math.radians(gm.getfloat("roll_amplitude_deg",
                                                fallback=0.0)),
        roll_frequency=gm.getfloat("roll_frequency",
                                   fallback=math.pi / 3.0),
        pitch_axis=_vec(gm.get("pitch_axis")),
        sway_axis=_vec(gm.get("sway_axis")),
        roll_axis=_vec(gm.get("roll_axis", fallback="1, 0, 0")),
        gravity=_vec(gm.get("gravity")),
    )

    nz = cp["noise"]
    noise = NoiseParams(
        sd_omega_b=nz.getfloat("sd_omega_b"),
        sd_accel_b=nz.getfloat("sd_accel_b"),
        sd_omega_d=nz.getfloat("sd_omega_d"),
        sd_accel_d=nz.getfloat("sd_accel_d"),
        sd_contact_vel=nz.getfloat("sd_contact_vel"),
    )

    rg = cp["rig"]
    seed = seed_override if seed_override is not None else rg.getint("seed")
    rig = SensorRig(
        robot_imu_rate=rg.getfloat("robot_imu_rate"),
        ground_imu_rate=rg.getfloat("ground_imu_rate"),
        encoder_rate=rg.getfloat("encoder_rate"),
        noise=noise,
        seed=seed,
    )

    ch = cp["chain"]
    chain = KinematicChain(
        axes=_vec_list(ch.get("joint_axes")),
        offsets=_vec_list(ch.get("joint_offsets")),
        base_offset=_vec(ch.get("base_offset")),
        foot_offset=_vec(ch.get("foot_offset")),
    )
    q_stand = _vec(ch.get("standing_q"))
    if q_stand.shape != (chain.njoints,):
        raise ValueError("standing_q length must match the joint count")

    st = cp["standing"]
    rpy = np.radians(_vec(st.get("rotation_rpy_deg")))
    R = (gamma(0, np.array([0.0, 0.0, rpy[2]]))
         @ gamma(0, np.array([0.0, rpy[1], 0.0]))
         @ gamma(0, np.array([rpy[0], 0.0, 0.0])))
    standing = SE23(R, np.zeros(3), _vec(st.get("position")))

    fl = cp["filter"]
    init_cov = np.concatenate([
        np.full(3, fl.getfloat("init_cov_rot")),
        np.full(3, fl.getfloat("init_cov_vel")),
        np.full(3, fl.getfloat("init_cov_pos")),
    ])

    ie = cp["init_error"]
    return Scenario(
        motion=motion,
        rig=rig,
        chain=chain,
        standing=standing,
        q_stand=q_stand,
        duration=cp["sim"].getfloat("duration"),
        init_cov_diag=init_cov,
        reorth_threshold=fl.getfloat("reorth_threshold"),
        fk_pos_sd=fl.getfloat("fk_pos_sd"),
        rot_error_range_deg=_range(ie.get("rot_deg"), "rot_deg"),
        vel_error_range=_range(ie.get("vel"), "vel"),
        pos_error_range=_range(ie.get("pos"), "pos"),
        steady_state_start=cp["rmse"].getfloat("steady_state_start"),
    )
