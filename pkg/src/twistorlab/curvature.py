"""Levi-Civita connection and curvature operator in an orthonormal frame.

Index conventions (all frame indices):

* ``c[i, j, m]``: ``[theta_i, theta_j] = c_ij^m theta_m``.
* ``gamma[i, j, k]``: ``nabla_{theta_i} theta_j = Gamma_ij^k theta_k``.
* ``endo[i, j, l, k]``: the matrix of ``R(theta_i, theta_j)``, i.e. ``R^l_{kij}``.

The curvature operator on bivectors is ``Rop(e_i ^ e_j) = -R(theta_i, theta_j)``
(as skew matrices), the sign for which the unit round 4-sphere has ``A = +Id``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bivectors as bv
from . import _kernels
from .charts import Chart, frame_arrays, section_jet

_EI = np.eye(4)
# E_WEDGE[i, j] = e_i ^ e_j as a skew matrix
E_WEDGE = bv.wedge(_EI[:, None, :], _EI[None, :, :])
# coefficients of each e_i ^ e_j in the orthonormal basis (I, J, K, Ibar, Jbar, Kbar)
E_WEDGE_COEFFS = bv.basis6_coeffs(E_WEDGE)


@dataclass(frozen=True)
class FrameData:
    """Pointwise (possibly batched) connection and curvature data."""

    E: np.ndarray  # (..., 4, 4) frame vectors as columns
    c: np.ndarray  # (..., 4, 4, 4)
    gamma: np.ndarray  # (..., 4, 4, 4)
    dgamma: np.ndarray  # (..., 4, 4, 4, 4): dgamma[..., i, j, k, d] = theta_d(Gamma_ij^k)
    endo: np.ndarray  # (..., 4, 4, 4, 4)


@dataclass(frozen=True)
class CurvatureBlocks:
    full: np.ndarray
    ricci: np.ndarray | None = None

    @property
    def A(self) -> np.ndarray:
        return self.full[..., :3, :3]

    @property
    def B(self) -> np.ndarray:
        return self.full[..., 3:, :3]

    @property
    def C(self) -> np.ndarray:
        return self.full[..., 3:, 3:]

    @classmethod
    def from_blocks(cls, A, B=None, C=None) -> "CurvatureBlocks":
        A = np.asarray(A, dtype=float)
        B = np.zeros((3, 3)) if B is None else np.asarray(B, dtype=float)
        C = A * 0.0 + np.trace(A) / 3.0 * np.eye(3) if C is None else np.asarray(C, dtype=float)
        full = np.block([[A, B.T], [B, C]])
        return cls(full)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.full))


@dataclass(frozen=True)
class CurvatureInvariants:
    s: float
    Wplus: np.ndarray
    Wplus_eigs: np.ndarray
    normWplus2: float
    normB2: float
    ricci: np.ndarray
    einstein_residual: float


def frame_data(chart: Chart, x) -> FrameData:
    (E, dE, d2E), batch = frame_arrays(chart, x)
    m = E.shape[0]
    c = np.empty((m, 4, 4, 4))
    gamma = np.empty((m, 4, 4, 4))
    dgamma = np.empty((m, 4, 4, 4, 4))
    endo = np.empty((m, 4, 4, 4, 4))
    _kernels.frame_curvature(E, np.linalg.inv(E), dE, d2E, c, gamma, dgamma, endo)

    def back(arr):
        return arr.reshape(batch + arr.shape[1:])

    return FrameData(back(E), back(c), back(gamma), back(dgamma), back(endo))


def structure_coeffs(chart: Chart, x):
    """``(c, dc)`` with ``dc[..., i, j, m, k] = theta_k(c_ij^m)``."""
    fd = frame_data(chart, x)
    # c_ij^k = Gamma_ij^k - Gamma_ji^k, so the derivatives follow from those of Gamma
    dc = fd.dgamma - np.swapaxes(fd.dgamma, -3, -4)
    return fd.c, dc


def connection_coeffs(chart: Chart, x):
    """``(gamma, dgamma)`` with ``dgamma[..., i, j, k, d] = theta_d(Gamma_ij^k)``."""
    fd = frame_data(chart, x)
    return fd.gamma, fd.dgamma


def curvature_endo(chart: Chart, x, i: int, j: int) -> np.ndarray:
    """Matrix of ``R(theta_i, theta_j)`` (0-based frame indices)."""
    return frame_data(chart, x).endo[..., i, j, :, :]


def operator_from_endo(endo: np.ndarray) -> np.ndarray:
    """6x6 matrix ``full[a, b] = <Rop(b_a), b_b>`` from the curvature endomorphisms."""
    # Rop(alpha) = sum_{i<j} alpha_ij Rop(e_i ^ e_j) = -(1/2) sum_{i,j} coeff_ij R(theta_i, theta_j)
    # where alpha = sum_{i<j} coeff_ij e_i ^ e_j and coeff_ij = alpha[j, i].
    endo = np.asarray(endo, dtype=float)
    batch = endo.shape[:-4]
    m = int(np.prod(batch))
    left = -0.5 * np.swapaxes(bv.BASIS6, -1, -2).reshape(6, 16)  # [a, (i, j)]
    right = bv.BASIS6.reshape(6, 16).T / 4.0  # [(l, k), b]
    # two plain matrix products over the flattened batch
    images = left @ np.moveaxis(endo.reshape(m, 16, 16), 0, 1).reshape(16, m * 16)  # [a, (z, l, k)]
    full = images.reshape(6 * m, 16) @ right  # [(a, z), b]
    return np.moveaxis(full.reshape(6, m, 6), 0, 1).reshape(batch + (6, 6))


def ricci_from_endo(endo: np.ndarray) -> np.ndarray:
    """``Ric_jk = sum_i <R(theta_i, theta_j) theta_k, theta_i>``."""
    return np.einsum("...ijik->...jk", endo)


def curvature_operator(chart: Chart, x) -> CurvatureBlocks:
    """Curvature blocks at ``x``; a batch of points gives batched arrays."""
    fd = frame_data(chart, x)
    return CurvatureBlocks(operator_from_endo(fd.endo), ricci_from_endo(fd.endo))


def ricci_from_operator(full: np.ndarray) -> np.ndarray:
    """``Ric_jk = 2 sum_i <Rop(e_i ^ e_j), e_i ^ e_k>``, computed from the 6x6 matrix alone."""
    return 2.0 * np.einsum("ija,...ab,ikb->...jk", E_WEDGE_COEFFS, full, E_WEDGE_COEFFS)


def invariants(blocks: CurvatureBlocks) -> CurvatureInvariants:
    A = blocks.A
    B = blocks.B
    s = 4.0 * float(np.trace(A))
    Wplus = A - (s / 12.0) * np.eye(3)
    eigs = np.sort(np.linalg.eigvalsh(0.5 * (Wplus + Wplus.T)))
    ricci = blocks.ricci if blocks.ricci is not None else ricci_from_operator(blocks.full)
    return CurvatureInvariants(
        s=s,
        Wplus=Wplus,
        Wplus_eigs=eigs,
        normWplus2=float(np.sum(Wplus * Wplus)),
        normB2=float(np.sum(B * B)),
        ricci=ricci,
        einstein_residual=float(np.linalg.norm(B)),
    )


def default_tol(A) -> float:
    return 1e-7 * (1.0 + float(np.linalg.norm(A)))


def lck_split(chart: Chart | None, x, J_M=None, *, blocks: CurvatureBlocks | None = None, tol: float | None = None):
    """``(x_val, y_val, adapted_ok)`` for A against the structure ``J_M``.

    ``J_M`` may be a UnitQ, a coefficient triple or a 4x4 matrix; it defaults
    to the chart's kahler_section evaluated at ``x``.
    """
    if blocks is None:
        blocks = curvature_operator(chart, x)
    if J_M is None:
        j = section_jet(chart, x).value
    else:
        j = bv.as_coeffs(J_M)
        j = j / np.linalg.norm(j)
    A = blocks.A
    x_val = float(j @ A @ j)
    y_val = 0.5 * (float(np.trace(A)) - x_val)
    P = np.outer(j, j)
    model = x_val * P + y_val * (np.eye(3) - P)
    tol = default_tol(A) if tol is None else tol
    return x_val, y_val, bool(np.linalg.norm(A - model) <= tol)


def integrand_from_blocks(full: np.ndarray) -> np.ndarray:
    """``2 |W+|^2 + s^2 / 24 - 2 |B|^2`` from (batched) 6x6 curvature matrices."""
    A = full[..., :3, :3]
    B = full[..., 3:, :3]
    trA = np.trace(A, axis1=-2, axis2=-1)
    s = 4.0 * trA
    W = A - (s / 12.0)[..., None, None] * np.eye(3)
    return 2.0 * np.sum(W * W, axis=(-2, -1)) + s * s / 24.0 - 2.0 * np.sum(B * B, axis=(-2, -1))


def gauss_bonnet_integrand(chart: Chart, x) -> np.ndarray | float:
    val = integrand_from_blocks(curvature_operator(chart, x).full)
    return float(val) if np.ndim(val) == 0 else val
