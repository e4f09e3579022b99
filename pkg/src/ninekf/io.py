"""CSV schemas and serialization helpers shared by the CLI and tests.

All files are UTF-8 with a mandatory header row, '.' decimal separator and
17 significant digits.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.spatial.transform import Rotation

from .baseline import SrsTraceRecord
from .filter import SensorStreams, TraceRecord
from .sim import GroundTruthRecord

IMU_HEADER = ["t", "wx", "wy", "wz", "ax", "ay", "az"]
TRACE_HEADER = (["t", "qw", "qx", "qy", "qz", "vx", "vy", "vz",
                 "px", "py", "pz"]
                + [f"P{i}{i}" for i in range(1, 10)] + ["innov_norm"])
_REL = ["qw", "qx", "qy", "qz", "vx", "vy", "vz", "px", "py", "pz"]
TRUTH_HEADER = (["t"] + _REL
                + ["dW" + c for c in _REL] + ["bW" + c for c in _REL]
                + ["fx", "fy", "fz"])


class CsvParseError(Exception):
    """Malformed CSV; carries the offending line number."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def rot_to_quat(R) -> np.ndarray:
    """Rotation matrix -> unit quaternion (w, x, y, z) with w >= 0."""
    q = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat()
    q = np.array([q[3], q[0], q[1], q[2]])
    if q[0] < 0:
        q = -q
    return q


def quat_to_rot(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return Rotation.from_quat([q[1], q[2], q[3], q[0]]).as_matrix()


def rots_to_quats(Rs) -> np.ndarray:
    """Batched rot_to_quat: (N, 3, 3) stack -> (N, 4) with w >= 0."""
    q = Rotation.from_matrix(np.asarray(Rs, dtype=float)).as_quat()
    q = q[:, [3, 0, 1, 2]]
    q[q[:, 0] < 0] *= -1.0
    return q


def quats_to_rots(qs) -> np.ndarray:
    """Batched quat_to_rot: (N, 4) (w, x, y, z) rows -> (N, 3, 3) stack."""
    qs = np.asarray(qs, dtype=float)
    return Rotation.from_quat(qs[:, [1, 2, 3, 0]]).as_matrix()


def error_rpy_deg(R_est, R_true) -> np.ndarray:
    """Intrinsic Z-Y-X (yaw, pitch, roll) angles of the error rotation
    R_est @ R_true^T, returned as (roll, pitch, yaw) in degrees."""
    err = np.asarray(R_est) @ np.asarray(R_true).T
    yaw, pitch, roll = Rotation.from_matrix(err).as_euler("ZYX", degrees=True)
    return np.array([roll, pitch, yaw])


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(float(x)) for x in row) + "\n")


def read_csv(path, expected_header=None):
    """Read a schema CSV into (header, float array). Malformed content raises
    CsvParseError with the line number."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise CsvParseError(path, 1, "empty file")
    header = lines[0].split(",")
    if expected_header is not None:
        missing = [c for c in expected_header if c not in header]
        if missing:
            raise CsvParseError(path, 1, f"missing columns: {', '.join(missing)}")
    data = np.empty((len(lines) - 1, len(header)))
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise CsvParseError(path, i,
                                f"expected {len(header)} fields, got {len(parts)}")
        try:
            data[i - 2] = [float(p) for p in parts]
        except ValueError as e:
            raise CsvParseError(path, i, str(e)) from None
    return header, data


def write_imu_csv(path, t, omega, accel):
    write_csv(path, IMU_HEADER,
              (np.concatenate([[t[j]], omega[j], accel[j]])
               for j in range(len(t))))


def encoder_header(njoints: int):
    return (["t"] + [f"q{i}" for i in range(1, njoints + 1)]
            + [f"qd{i}" for i in range(1, njoints + 1)])


def write_encoder_csv(path, t, q, qdot):
    write_csv(path, encoder_header(q.shape[1]),
              (np.concatenate([[t[j]], q[j], qdot[j]]) for j in range(len(t))))


def write_truth_csv(path, records: list[GroundTruthRecord]):
    def row(r: GroundTruthRecord):
        gk = r.ground
        return np.concatenate([
            [r.t],
            rot_to_quat(r.rel.R), r.rel.v, r.rel.p,
            rot_to_quat(gk.R), gk.v, gk.p,
            rot_to_quat(r.R_B), r.v_B, r.p_B,
            r.foot_d,
        ])
    write_csv(path, TRUTH_HEADER, (row(r) for r in records))


def write_trace_csv(path, trace):
    def row(rec):
        if isinstance(rec, TraceRecord):
            R, v, p = rec.Xhat.R, rec.Xhat.v, rec.Xhat.p
        else:
            assert isinstance(rec, SrsTraceRecord)
            R, v, p = rec.R, rec.v, rec.p
        innov = rec.innovation_norm
        return np.concatenate([
            [rec.t], rot_to_quat(R), v, p, rec.P_diag,
            [innov if np.isfinite(innov) else 0.0],
        ])
    write_csv(path, TRACE_HEADER, (row(r) for r in trace))


def read_streams(logs_dir) -> SensorStreams:
    _, robot = read_csv(os.path.join(logs_dir, "imu_robot.csv"), IMU_HEADER)
    _, ground = read_csv(os.path.join(logs_dir, "imu_ground.csv"), IMU_HEADER)
    enc_path = os.path.join(logs_dir, "encoders.csv")
    header, enc = read_csv(enc_path)
    njoints = (len(header) - 1) // 2
    if len(header) != 1 + 2 * njoints:
        raise CsvParseError(enc_path, 1, "encoder column count must be odd (t,q*,qd*)")
    return SensorStreams(
        robot[:, 0], robot[:, 1:4], robot[:, 4:7],
        ground[:, 0], ground[:, 1:4], ground[:, 4:7],
        enc[:, 0], enc[:, 1:1 + njoints], enc[:, 1 + njoints:],
    )
