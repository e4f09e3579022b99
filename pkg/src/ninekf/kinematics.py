"""Serial-chain leg forward kinematics and Jacobian for leg odometry."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liegroup import gamma, hat3


@dataclass(frozen=True)
class KinematicChain:
    """Pure revolute serial chain with fixed translation offsets.

    axes[j] is the rotation axis of joint j in its own link frame (unit norm),
    offsets[j] the translation from the previous joint to joint j expressed in
    the previous link frame. base_offset goes from the base frame to joint 0,
    foot_offset from the last joint to the foot in the last link frame.
    """

    axes: np.ndarray        # (N, 3)
    offsets: np.ndarray     # (N, 3)
    base_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    foot_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        axes = np.atleast_2d(np.asarray(self.axes, dtype=float))
        offsets = np.atleast_2d(np.asarray(self.offsets, dtype=float))
        if axes.shape[0] < 1:
            raise ValueError("chain needs at least one joint")
        if axes.shape != offsets.shape:
            raise ValueError("axes and offsets must have matching shapes")
        norms = np.linalg.norm(axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("joint axes must have unit norm")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "base_offset",
                           np.asarray(self.base_offset, dtype=float))
        object.__setattr__(self, "foot_offset",
                           np.asarray(self.foot_offset, dtype=float))

    @property
    def njoints(self) -> int:
        return self.axes.shape[0]


@dataclass(frozen=True)
class JointState:
    q: np.ndarray
    qdot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "qdot", np.asarray(self.qdot, dtype=float))


def _check_q(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (chain.njoints,):
        raise ValueError(f"expected {chain.njoints} joint angles, got shape {q.shape}")
    return q


# The filter evaluates forward kinematics and the Jacobian several times per
# step on the same joint reading; a single-entry memo keyed on the full chain
# geometry and configuration makes the repeats free.
_frames_cache: dict = {}


def _chain_frames(chain: KinematicChain, q: np.ndarray):
    """Per-joint origins and world-frame axes plus the foot position,
    all expressed in the base frame."""
    key = (chain.axes.tobytes(), chain.offsets.tobytes(),
           chain.base_offset.tobytes(), chain.foot_offset.tobytes(),
           q.tobytes())
    hit = _frames_cache.get(key)
    if hit is not None:
        return hit
    R = np.eye(3)
    pos = chain.base_offset.copy()
    origins = np.empty((chain.njoints, 3))
    axes_world = np.empty((chain.njoints, 3))
    for j in range(chain.njoints):
        pos = pos + R @ chain.offsets[j]
        origins[j] = pos
        axes_world[j] = R @ chain.axes[j]
        R = R @ gamma(0, chain.axes[j] * q[j])
    foot = pos + R @ chain.foot_offset
    if len(_frames_cache) > 4:
        _frames_cache.clear()
    _frames_cache[key] = (origins, axes_world, foot)
    return origins, axes_world, foot


def forward_kinematics(chain: KinematicChain, q) -> np.ndarray:
    """Foot position relative to the base, expressed in the base frame."""
    q = _check_q(chain, q)
    _, _, foot = _chain_frames(chain, q)
    return foot.copy()


def leg_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """Analytic 3xN Jacobian of forward_kinematics.

    Column j = axis_j x (foot - origin_j) with axis and origin in the base
    frame.
    """
    q = _check_q(chain, q)
    origins, axes_world, foot = _chain_frames(chain, q)
    J = np.empty((3, chain.njoints))
    for j in range(chain.njoints):
        J[:, j] = hat3(axes_world[j]) @ (foot - origins[j])
    return J
