"""Shared oracles and fixtures: truncated-series matrix exponentials,
random group elements and a default standing-robot scenario."""
import numpy as np
import pytest

from ninekf.kinematics import KinematicChain
from ninekf.liegroup import SE23, project_rotation
from ninekf.models import NoiseParams
from ninekf.sim import GroundMotionParams, SensorRig, synthesize_sensors


def series_expm(M, terms=30):
    """Truncated matrix-exponential series: independent oracle for all
    closed-form exponentials."""
    M = np.asarray(M, dtype=float)
    out = np.eye(M.shape[0])
    P = np.eye(M.shape[0])
    for n in range(1, terms):
        P = P @ M / n
        out = out + P
    return out


def rand_rot(rng, scale=1.0):
    return project_rotation(np.eye(3) + scale * rng.standard_normal((3, 3)))


def rand_se23(rng, scale=1.0):
    return SE23(rand_rot(rng), scale * rng.standard_normal(3),
                scale * rng.standard_normal(3))


def rand_chain(rng, njoints=3):
    axes = rng.standard_normal((njoints, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    return KinematicChain(axes=axes,
                          offsets=0.3 * rng.standard_normal((njoints, 3)),
                          base_offset=0.1 * rng.standard_normal(3),
                          foot_offset=0.3 * rng.standard_normal(3))


NOISE_FREE = NoiseParams(0.0, 0.0, 0.0, 0.0, 0.0)

Q_STAND = np.array([0.3, 0.1, -0.2])
STANDING = SE23(np.eye(3), np.zeros(3), np.array([0.1, 0.05, 0.9]))


@pytest.fixture(scope="session")
def chain():
    return KinematicChain(
        axes=np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        offsets=np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -0.45], [0.0, 0.0, 0.0]]),
        base_offset=np.array([0.0, 0.0, -0.1]),
        foot_offset=np.array([0.0, 0.0, -0.4]),
    )


def make_sim(chain, duration=1.0, noise=NOISE_FREE, seed=0,
             ground_rate=500.0, motion=None, gravity=None):
    """Standing-robot simulation with the treadmill defaults."""
    if motion is None:
        motion = (GroundMotionParams() if gravity is None
                  else GroundMotionParams(gravity=np.asarray(gravity, float)))
    rig = SensorRig(robot_imu_rate=500.0, ground_imu_rate=ground_rate,
                    encoder_rate=500.0, noise=noise, seed=seed)
    return synthesize_sensors(motion, rig, chain, STANDING, Q_STAND, duration)
