"""Local observability matrix assembly and numeric rank analysis."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .filter import FilterState
from .kinematics import JointState, KinematicChain
from .models import ImuSample, jacobian_H, phi_blocks

RANK_TOL_FACTOR = 1e-10


class Classification(enum.Enum):
    FULLY_OBSERVABLE = "FullyObservable"
    YAW_AND_POSITION_UNOBSERVABLE = "YawAndPositionUnobservable"
    OTHER = "Other"


@dataclass(frozen=True)
class ObservabilityReport:
    O: np.ndarray
    rank: int
    singular_values: np.ndarray
    nullspace: np.ndarray        # (9, 9 - rank), orthonormal columns
    classification: Classification


def rank_and_nullspace(M, tol: float):
    """Numeric rank and orthonormal null-space basis via SVD.

    rank counts singular values above tol * sigma_max; the basis columns are
    the right singular vectors of the remaining directions.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise ValueError("empty matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    _, s, Vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    basis = Vt[rank:].T
    return rank, basis


def _classify(rank: int, nullspace: np.ndarray, accelD: np.ndarray) -> Classification:
    if rank == 9:
        return Classification.FULLY_OBSERVABLE
    if rank != 5 or nullspace.shape[1] != 4:
        return Classification.OTHER
    # null space should span the 3 position directions plus the yaw direction
    # aligned with the ground accelerometer reading
    proj = nullspace @ nullspace.T
    for k in range(3):
        e = np.zeros(9)
        e[6 + k] = 1.0
        if np.linalg.norm(proj @ e - e) > 1e-6:
            return Classification.OTHER
    a = np.asarray(accelD, dtype=float)
    na = np.linalg.norm(a)
    if na == 0:
        return Classification.OTHER
    yaw = np.zeros(9)
    yaw[:3] = a / na
    if np.linalg.norm(proj @ yaw - yaw) > 1e-6:
        return Classification.OTHER
    return Classification.YAW_AND_POSITION_UNOBSERVABLE


def build_observability(states: list[FilterState], inputsD: list[ImuSample],
                        joints: list[JointState], chain: KinematicChain,
                        k: int) -> ObservabilityReport:
    """Stack H_{j} Phi_{j-1} ... Phi_0 for j = 0..k-1 (defining product form)
    and report numeric rank and unobservable directions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(states) < k or len(inputsD) < k or len(joints) < k:
        raise ValueError("need at least k states, ground samples and joint states")

    rows = []
    prod = np.eye(9)
    for j in range(k):
        H = jacobian_H(states[j].Xhat, inputsD[j].omega, joints[j], chain)
        rows.append(H @ prod)
        if j + 1 < k:
            dt = inputsD[j + 1].t - inputsD[j].t
            if dt <= 0:
                dt = inputsD[1].t - inputsD[0].t if len(inputsD) > 1 else 1.0
            prod = phi_blocks(inputsD[j].omega, inputsD[j].accel, dt) @ prod
    O = np.vstack(rows)
    tol = max(O.shape) * RANK_TOL_FACTOR
    rank, basis = rank_and_nullspace(O, tol)
    return ObservabilityReport(O, rank, np.linalg.svd(O, compute_uv=False),
                               basis, _classify(rank, basis, inputsD[0].accel))
