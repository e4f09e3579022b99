"""Exact small-matrix Lie group math for SO(3) and SE2(3).

The group element packs a rotation and two 3-vector columns (velocity and
position) into a 5x5 matrix; the tangent space is 9-dimensional with blocks
(rotation, velocity, position).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Below this rotation magnitude the Gamma closed forms switch to a truncated
# Taylor series to avoid 0/0 cancellation.
SMALL_ANGLE = 1e-4
# Between SMALL_ANGLE and this bound the trig coefficients of Gamma_1/Gamma_2
# still lose ~1e-16/theta^2 to cancellation, so a longer Taylor series is used.
_MID_ANGLE = 0.05

_FACT = [math.factorial(n) for n in range(16)]
# shared read-only identity; never handed out to callers directly
_I3 = np.eye(3)
_I3.setflags(write=False)


def hat3(v) -> np.ndarray:
    """Skew-symmetric matrix S with S @ w == cross(v, w)."""
    x, y, z = v
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def vee3(S) -> np.ndarray:
    """Inverse of hat3 on skew-symmetric matrices."""
    S = np.asarray(S, dtype=float)
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def gamma(m: int, phi) -> np.ndarray:
    """Gamma_m(phi) = sum_n [phi]x^n / (n+m)! for m in {0, 1, 2}.

    Gamma_0 is the SO(3) exponential, Gamma_1 the left Jacobian and Gamma_2
    the double-integral kernel used in constant-input strapdown terms.
    """
    if m not in (0, 1, 2):
        raise ValueError(f"gamma order must be 0, 1 or 2, got {m}")
    phi = np.asarray(phi, dtype=float)
    W = hat3(phi)
    theta = math.sqrt(float(phi @ phi))
    if theta < _MID_ANGLE:
        terms = 5 if theta < SMALL_ANGLE else 10
        G = np.zeros((3, 3))
        P = np.eye(3)
        for n in range(terms):
            G += P / _FACT[n + m]
            P = P @ W
        return G
    W2 = W @ W
    t2 = theta * theta
    s, c = math.sin(theta), math.cos(theta)
    if m == 0:
        return np.eye(3) + (s / theta) * W + ((1.0 - c) / t2) * W2
    if m == 1:
        return (np.eye(3) + ((1.0 - c) / t2) * W
                + ((theta - s) / (t2 * theta)) * W2)
    return (0.5 * np.eye(3) + ((theta - s) / (t2 * theta)) * W
            + ((t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2)) * W2)


def gamma_all(phi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Gamma_0, Gamma_1, Gamma_2) of the same argument, sharing the angle and
    skew-power computations. Matches gamma(m, phi) exactly for each order."""
    phi = np.asarray(phi, dtype=float)
    W = hat3(phi)
    theta = math.sqrt(float(phi @ phi))
    W2 = W @ W
    t2 = theta * theta
    if theta < _MID_ANGLE:
        # Powers of a skew matrix reduce to {I, W, W^2}; the scalar
        # coefficients are evaluated as cancellation-free Horner series.
        a = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
        b = 0.5 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0)))
        c = (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0))) / 6.0
        d = (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0 * (1.0 - t2 / 90.0))) / 24.0
        return (_I3 + a * W + b * W2,
                _I3 + b * W + c * W2,
                0.5 * _I3 + c * W + d * W2)
    s, c = math.sin(theta), math.cos(theta)
    a = (1.0 - c) / t2
    b = (theta - s) / (t2 * theta)
    G0 = _I3 + (s / theta) * W + a * W2
    G1 = _I3 + a * W + b * W2
    G2 = 0.5 * _I3 + b * W + ((t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2)) * W2
    return G0, G1, G2


@dataclass(frozen=True)
class SE23:
    """Group element (R, v, p); logically the 5x5 matrix

        [ R  v  p ]
        [ 0  1  0 ]
        [ 0  0  1 ].
    """

    R: np.ndarray
    v: np.ndarray
    p: np.ndarray

    @staticmethod
    def identity() -> "SE23":
        return SE23(np.eye(3), np.zeros(3), np.zeros(3))

    @staticmethod
    def from_matrix(M) -> "SE23":
        M = np.asarray(M, dtype=float)
        return SE23(M[:3, :3].copy(), M[:3, 3].copy(), M[:3, 4].copy())

    def as_matrix(self) -> np.ndarray:
        M = np.eye(5)
        M[:3, :3] = self.R
        M[:3, 3] = self.v
        M[:3, 4] = self.p
        return M

    def compose(self, other: "SE23") -> "SE23":
        return SE23(self.R @ other.R,
                    self.R @ other.v + self.v,
                    self.R @ other.p + self.p)

    def inverse(self) -> "SE23":
        Rt = self.R.T
        return SE23(Rt.copy(), -Rt @ self.v, -Rt @ self.p)

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.R.T @ self.R - _I3)))

    def reorthonormalized(self) -> "SE23":
        return SE23(project_rotation(self.R), self.v.copy(), self.p.copy())


def project_rotation(R) -> np.ndarray:
    """Nearest rotation matrix (polar projection via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def wedge_se23(xi) -> np.ndarray:
    """9-vector (xiR, xiV, xiP) -> 5x5 Lie algebra matrix."""
    xi = np.asarray(xi, dtype=float)
    M = np.zeros((5, 5))
    M[:3, :3] = hat3(xi[:3])
    M[:3, 3] = xi[3:6]
    M[:3, 4] = xi[6:9]
    return M


def vee_se23(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return np.concatenate([vee3(M[:3, :3]), M[:3, 3], M[:3, 4]])


def exp_se23(xi) -> SE23:
    """Group exponential: matches the matrix exponential of wedge_se23(xi)."""
    xi = np.asarray(xi, dtype=float)
    G0, J, _ = gamma_all(xi[:3])
    return SE23(G0, J @ xi[3:6], J @ xi[6:9])


def log_so3(R) -> np.ndarray:
    """Principal logarithm of a rotation matrix; angle must be below pi."""
    R = np.asarray(R, dtype=float)
    tr = float(np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0))
    theta = math.acos(tr)
    if theta >= math.pi - 1e-6:
        raise ValueError(f"rotation angle {theta} too close to pi for principal log")
    w = vee3(R - R.T)
    if theta < 1e-7:
        # theta/(2 sin theta) ~ 1/2 (1 + theta^2/6)
        return 0.5 * (1.0 + theta * theta / 6.0) * w
    return (theta / (2.0 * math.sin(theta))) * w


def log_se23(X: SE23) -> np.ndarray:
    """Inverse of exp_se23 (principal branch)."""
    xiR = log_so3(X.R)
    J = gamma(1, xiR)
    xiV = np.linalg.solve(J, X.v)
    xiP = np.linalg.solve(J, X.p)
    return np.concatenate([xiR, xiV, xiP])


def adjoint(X: SE23) -> np.ndarray:
    """Adjoint matrix satisfying (Ad_X xi)^wedge = X xi^wedge X^-1."""
    A = np.zeros((9, 9))
    A[:3, :3] = X.R
    A[3:6, :3] = hat3(X.v) @ X.R
    A[3:6, 3:6] = X.R
    A[6:9, :3] = hat3(X.p) @ X.R
    A[6:9, 6:9] = X.R
    return A
