"""Invariant EKF for legged-robot state estimation relative to a moving,
non-inertial ground, with a synthetic treadmill simulator, an SRS baseline
filter and observability analysis tools."""

from .kinematics import JointState, KinematicChain, forward_kinematics, leg_jacobian
from .liegroup import SE23, adjoint, exp_se23, gamma, hat3, log_se23, vee3, wedge_se23
from .models import Frame, ImuSample, NoiseParams

__all__ = [
    "SE23", "Frame", "ImuSample", "JointState", "KinematicChain",
    "NoiseParams", "adjoint", "exp_se23", "forward_kinematics", "gamma",
    "hat3", "leg_jacobian", "log_se23", "vee3", "wedge_se23",
]
