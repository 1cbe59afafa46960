"""Bivectors on an oriented orthonormal 4-frame, realized as skew 4x4 matrices.

Convention: ``(u ^ v) w = <u, w> v - <v, w> u``, so that ``e1^e2 + e3^e4`` is
the matrix ``I`` below. The inner product is ``<a, b> = trace(a.T b) / 4``,
under which ``(I, J, K)`` is orthonormal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

IDENTITY_TOL = 1e-12


def wedge(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.einsum("...i,...j->...ij", v, u) - np.einsum("...i,...j->...ij", u, v)


_E = np.eye(4)

I = wedge(_E[0], _E[1]) + wedge(_E[2], _E[3])
J = wedge(_E[0], _E[2]) + wedge(_E[3], _E[1])
K = wedge(_E[0], _E[3]) + wedge(_E[1], _E[2])
IBAR = wedge(_E[0], _E[1]) - wedge(_E[2], _E[3])
JBAR = wedge(_E[0], _E[2]) - wedge(_E[3], _E[1])
KBAR = wedge(_E[0], _E[3]) - wedge(_E[1], _E[2])

SELF_DUAL = np.stack([I, J, K])
ANTI_SELF_DUAL = np.stack([IBAR, JBAR, KBAR])
# Operator basis (I, J, K, Ibar, Jbar, Kbar) used for the 6x6 curvature matrix.
BASIS6 = np.concatenate([SELF_DUAL, ANTI_SELF_DUAL])


def _levi_civita() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


LEVI_CIVITA = _levi_civita()


def hodge_star(alpha) -> np.ndarray:
    return 0.5 * np.einsum("ijkl,...kl->...ij", LEVI_CIVITA, np.asarray(alpha, dtype=float))


def project_pm(alpha, sign: int) -> np.ndarray:
    """Component of ``alpha`` in the (+1) or (-1) eigenspace of the Hodge star."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    alpha = np.asarray(alpha, dtype=float)
    return 0.5 * (alpha + sign * hodge_star(alpha))


def inner(alpha, beta) -> np.ndarray | float:
    return 0.25 * np.einsum("...ij,...ij->...", np.asarray(alpha, float), np.asarray(beta, float))


def norm(alpha) -> np.ndarray | float:
    return np.sqrt(inner(alpha, alpha))


def commutator(alpha, beta) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return alpha @ beta - beta @ alpha


def sd_matrix(coeffs) -> np.ndarray:
    """``a I + b J + c K`` for coefficients ``(a, b, c)`` (batched over leading axes)."""
    return np.einsum("...a,aij->...ij", np.asarray(coeffs, dtype=float), SELF_DUAL)


def sd_coeffs(alpha) -> np.ndarray:
    """Coordinates of the self-dual part of ``alpha`` in the basis (I, J, K)."""
    return np.einsum("aij,...ij->...a", SELF_DUAL, np.asarray(alpha, float)) / 4.0


def basis6_coeffs(alpha) -> np.ndarray:
    return np.einsum("aij,...ij->...a", BASIS6, np.asarray(alpha, float)) / 4.0


def check_complex_structure(P, tol: float = 1e-9) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    residual = np.max(np.abs(P @ P + np.eye(4)))
    if residual > tol:
        raise ValueError(f"not an almost complex structure: |P^2 + Id| = {residual:.3e}")
    return P


def g1(u, v, P) -> np.ndarray:
    """``u^v - Pu^Pv``; lies in the self-dual plane orthogonal to P for P self-dual."""
    P = check_complex_structure(P)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return wedge(u, v) - wedge(P @ u, P @ v)


def g2(u, v, P) -> np.ndarray:
    P = check_complex_structure(P)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return wedge(P @ u, v) + wedge(u, P @ v)


@dataclass(frozen=True)
class UnitQ:
    """A point of the fiber sphere: ``Q = a I + b J + c K`` with ``a^2+b^2+c^2 = 1``."""

    coeffs: tuple[float, float, float]

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.coeffs)) - 1.0) > IDENTITY_TOL * 100:
            raise ValueError(f"coefficients {self.coeffs} are not a unit vector")

    @classmethod
    def normalized(cls, a: float, b: float, c: float) -> "UnitQ":
        v = np.array([a, b, c], dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector cannot be normalized")
        v = v / n
        return cls((float(v[0]), float(v[1]), float(v[2])))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    @property
    def matrix(self) -> np.ndarray:
        return sd_matrix(self.array)


def as_coeffs(q) -> np.ndarray:
    """Accept a UnitQ, a coefficient triple, or a self-dual 4x4 matrix."""
    if isinstance(q, UnitQ):
        return q.array
    q = np.asarray(q, dtype=float)
    if q.shape[-2:] == (4, 4):
        return sd_coeffs(q)
    return q


def complete_frame(s) -> tuple[np.ndarray, np.ndarray]:
    """Unit coefficient vectors (t, u) with (s, t, u) oriented orthonormal in R^3.

    ``t`` is the normalized projection of J (or of K when s is nearly along J)
    onto the plane orthogonal to ``s``. The product of self-dual matrices
    realizes the cross product, so ``sd(s) sd(t) = sd(u)``.
    """
    s = np.asarray(s, dtype=float)
    ref = np.array([0.0, 1.0, 0.0]) if abs(s[1]) < 0.9 else np.array([0.0, 0.0, 1.0])
    t = ref - np.dot(ref, s) * s
    t = t / np.linalg.norm(t)
    return t, np.cross(s, t)
