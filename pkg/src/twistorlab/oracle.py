"""Brute-force Nijenhuis tensor of a compatible structure, straight from Lie brackets.

The twistor space is charted by ``(x1, .., x4, w1, w2)`` where ``w`` is the
stereographic coordinate of the fiber coefficient vector ``q`` projected from
``-q0`` (so the base point ``q0`` sits at ``w = 0``, far from the pole). The
structure is assembled as a 6x6 matrix field on coordinate vectors and the
tensor follows from

    N^k_ij = J^l_i d_l J^k_j - J^l_j d_l J^k_i - J^k_l (d_i J^l_j - d_j J^l_i)

with sixth-order central differences. Nothing here uses the closed-form
horizontal/vertical decomposition.
"""

from __future__ import annotations

import numpy as np

from . import bivectors as bv
from .charts import Chart
from .curvature import frame_data
from .twistor import FiberMorphism, connection_matrices

STEP = 1e-3
_OFFSETS = np.array([-3, -2, -1, 1, 2, 3], dtype=float)
_WEIGHTS = np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60.0


class _FiberChart:
    """Stereographic chart of the unit sphere centred on ``q0``."""

    def __init__(self, q0):
        self.q0 = np.asarray(q0, dtype=float)
        self.t, self.u = bv.complete_frame(self.q0)
        self.v = np.stack([self.t, self.u])  # (2, 3)

    def to_q(self, w):
        w = np.asarray(w, dtype=float)
        r = np.sum(w * w, axis=-1)[..., None]
        return ((1.0 - r) * self.q0 + 2.0 * w @ self.v) / (1.0 + r)

    def dq_dw(self, w):
        """``(..., 3, 2)`` Jacobian of :meth:`to_q`."""
        w = np.asarray(w, dtype=float)
        r = np.sum(w * w, axis=-1)[..., None, None]
        num = (1.0 - r[..., 0]) * self.q0 + 2.0 * w @ self.v  # (..., 3)
        dnum = -2.0 * w[..., None, :] * self.q0[:, None] + 2.0 * self.v.T  # (..., 3, 2)
        return dnum / (1.0 + r) - 2.0 * num[..., :, None] * w[..., None, :] / (1.0 + r) ** 2

    def dw_dq(self, q):
        """``(..., 2, 3)`` differential of the projection at ``q`` (applied to tangent vectors)."""
        q = np.asarray(q, dtype=float)
        den = 1.0 + q @ self.q0  # (...)
        qv = q @ self.v.T  # (..., 2)
        return self.v / den[..., None, None] - qv[..., :, None] * self.q0 / den[..., None, None] ** 2


def _structure_field(chart: Chart, f: FiberMorphism, fc: _FiberChart, y: np.ndarray) -> np.ndarray:
    """6x6 matrices of the compatible structure on coordinate vectors at points ``y (N, 6)``."""
    x, w = y[:, :4], y[:, 4:]
    q = fc.to_q(w)
    fd = frame_data(chart, x)
    E = fd.E
    Ei = np.linalg.inv(E)
    omega = connection_matrices(fd.gamma)  # (N, 4, 4, 4)
    Q = bv.sd_matrix(q)
    P = bv.sd_matrix(f.evaluate(chart, x, q))
    # vertical drift of the fixed-coefficient coordinate field along theta_k
    drift = bv.sd_coeffs(omega @ Q[:, None] - Q[:, None] @ omega)  # (N, 4, 3): [omega_k, Q]
    dqdw = fc.dq_dw(w)
    dwdq = fc.dw_dq(q)

    def to_coords(h, X):
        # (h, X) with h frame components, X vertical coefficients
        dx = np.einsum("nai,ni->na", E, h)
        dq = X - np.einsum("nk,nkc->nc", h, drift)
        return np.concatenate([dx, np.einsum("nbc,nc->nb", dwdq, dq)], axis=-1)

    def from_coords(v):
        h = np.einsum("nia,na->ni", Ei, v[:, :4])
        dq = np.einsum("ncb,nb->nc", dqdw, v[:, 4:])
        return h, dq + np.einsum("nk,nkc->nc", h, drift)

    cols = []
    for a in range(6):
        v = np.zeros((len(y), 6))
        v[:, a] = 1.0
        h, X = from_coords(v)
        Jh = np.einsum("nmi,ni->nm", P, h)
        JX = bv.sd_coeffs(Q @ bv.sd_matrix(X))
        cols.append(to_coords(Jh, JX))
    return np.stack(cols, axis=-1)


def _nijenhuis_coords(chart, f, fc, y0, step=STEP):
    """``(J, N)`` at a single point ``y0``: ``N[k, i, j]`` in coordinates."""
    pts = [y0[None]]
    for l in range(6):
        for o in _OFFSETS:
            p = y0.copy()
            p[l] += o * step
            pts.append(p[None])
    field = _structure_field(chart, f, fc, np.concatenate(pts))
    J = field[0]
    stencil = field[1:].reshape(6, len(_OFFSETS), 6, 6)
    dJ = np.einsum("o,lokj->lkj", _WEIGHTS, stencil) / step  # dJ[l, k, j] = d_l J^k_j
    t1 = np.einsum("li,lkj->kij", J, dJ)
    bracket = np.einsum("ilj->lij", dJ)  # d_i J^l_j as [l, i, j]
    N = t1 - np.swapaxes(t1, 1, 2) - np.einsum("kl,lij->kij", J, bracket - np.swapaxes(bracket, 1, 2))
    return J, N


def bruteforce_nijenhuis(chart: Chart, f: FiberMorphism, x, q, V, W, step: float = STEP):
    """``N(V, W)`` at ``(x, q)`` for tangent vectors given as ``(h, X)``.

    ``h`` holds frame components of the horizontal part and ``X`` is the
    vertical part as a skew matrix or self-dual coefficient vector. The result
    is returned in the same split form ``(h, X_coeffs)``.
    """
    x = np.asarray(x, dtype=float)
    q = bv.as_coeffs(q)
    q = q / np.linalg.norm(q)
    fc = _FiberChart(q)
    y0 = np.concatenate([x, [0.0, 0.0]])
    _, N = _nijenhuis_coords(chart, f, fc, y0, step)

    fd = frame_data(chart, x[None])
    E, omega = fd.E[0], connection_matrices(fd.gamma)[0]
    Q = bv.sd_matrix(q)
    drift = np.array([bv.sd_coeffs(bv.commutator(omega[k], Q)) for k in range(4)])
    dqdw = fc.dq_dw(np.zeros(2))
    dwdq = fc.dw_dq(q)

    def to_coords(vec):
        h, X = np.asarray(vec[0], float), bv.as_coeffs(vec[1])
        return np.concatenate([E @ h, dwdq @ (X - h @ drift)])

    out = np.einsum("kij,i,j->k", N, to_coords(V), to_coords(W))
    h = np.linalg.solve(E, out[:4])
    return h, dqdw @ out[4:] + h @ drift
