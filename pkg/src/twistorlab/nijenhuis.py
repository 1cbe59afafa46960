"""Nijenhuis tensor of compatible almost complex structures on the twistor space.

For horizontal lifts the tensor splits as

* horizontal: ``E + F``, where ``E`` is the Nijenhuis tensor on the base of the
  field ``P0 = f(., q)`` at frozen fiber coefficients and ``F`` gathers the
  terms in which a lift differentiates ``P`` along the fiber;
* vertical: a curvature term ``[M(g1) + Q M(g2), Q]`` with
  ``g1 = e_i^e_j - Pe_i^Pe_j`` and ``g2 = Pe_i^e_j + e_i^Pe_j``.

A vertical argument only meets the holomorphy defect ``dP(QX) - P dP(X)``, and
two vertical arguments give zero. ``M(e_a^e_b) = R(theta_a, theta_b)`` is the
curvature endomorphism, which is minus the curvature operator ``Rop``;
:func:`g_tensor` is written with ``Rop`` and so equals minus the true vertical
component. Only its vanishing matters for the verdicts.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from . import bivectors as bv
from .charts import Chart, section_jet
from .curvature import (
    CurvatureBlocks,
    FrameData,
    E_WEDGE_COEFFS,
    default_tol,
    frame_data,
    operator_from_endo,
    ricci_from_operator,
)
from .twistor import (
    Antipodal,
    Constant,
    FiberMorphism,
    Identity,
    TwistorPoint,
    _section_exprs,
    connection_matrices,
    fiber_derivative_coeffs,
    power_map,
)

PAIRS = tuple(itertools.combinations(range(4), 2))
X_STEP = 1e-3
_FD_OFFSETS = np.array([-3, -2, -1, 1, 2, 3], dtype=float)
_FD_WEIGHTS = np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60.0
DISTINCT = 1e-2  # residuals can be quadratic at a root, so refined roots are only sqrt(tol) accurate


class NijenhuisError(ValueError):
    pass


# --- curvature term ------------------------------------------------------------


def rop(full: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Curvature operator applied to the bivector ``alpha`` through its 6x6 matrix."""
    coeffs = bv.basis6_coeffs(alpha)
    return np.einsum("...a,...ab,bij->...ij", coeffs, full, bv.BASIS6)


def _unit(e: int) -> np.ndarray:
    v = np.zeros(4)
    v[e] = 1.0
    return v


def g_coeffs_all(full: np.ndarray, q, p) -> np.ndarray:
    """Self-dual coefficients of :func:`g_tensor` for all pairs, ``(..., 4, 4, 3)``.

    Anti-self-dual bivectors commute with ``Q``, so only the self-dual part
    ``v = A^T a+ + B^T a-`` of ``Rop`` survives, and with ``sd(s) sd(t) =
    -<s,t> + sd(s x t)`` the bracket reduces to ``2 (v1 x q + (q x v2) x q)``.
    """
    full = np.asarray(full, dtype=float)
    q = np.asarray(q, dtype=float)
    P = bv.sd_matrix(np.asarray(p, dtype=float))
    W = E_WEDGE_COEFFS  # (4, 4, 6)
    WP1 = np.einsum("...li,lja->...ija", P, W)
    WPP = np.einsum("...rj,...ira->...ija", P, WP1)
    W1P = np.einsum("...rj,ira->...ija", P, W)
    plus = full[..., :, :3]  # rows: basis index a, columns: self-dual output
    if plus.ndim > 2:
        plus = plus[..., None, :, :]
    v1 = (W - WPP) @ plus
    v2 = (WP1 + W1P) @ plus
    qb = np.broadcast_to(q[..., None, None, :], v1.shape)
    return 2.0 * (np.cross(v1, qb) + np.cross(np.cross(qb, v2), qb))


def g_tensor_all(full: np.ndarray, q, p) -> np.ndarray:
    """Batched :func:`g_tensor` for all frame pairs: ``(..., 4, 4, 4, 4)`` indexed ``[i, j]``."""
    return bv.sd_matrix(g_coeffs_all(full, q, p))


def g_tensor(blocks: CurvatureBlocks | np.ndarray, q, p, i: int, j: int) -> np.ndarray:
    """``[Rop(g1) + Q Rop(g2), Q]`` for the frame pair ``(i, j)`` (0-based).

    ``q`` is the fiber point and ``p`` the horizontal structure ``P``. The
    result anticommutes with ``Q``.
    """
    full = blocks.full if isinstance(blocks, CurvatureBlocks) else np.asarray(blocks, dtype=float)
    qc, pc = bv.as_coeffs(q), bv.as_coeffs(p)
    G = g_tensor_all(full, qc, pc)[i, j]
    Q = bv.sd_matrix(qc)
    if np.max(np.abs(G @ Q + Q @ G)) > 1e-10 * (1.0 + np.max(np.abs(full))):
        raise NijenhuisError("vertical component fails to anticommute with Q")
    return G


def _g_true(endo: np.ndarray, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Vertical Nijenhuis components ``(..., 4, 4, 4, 4)`` for all frame pairs."""
    # Rm[a, b] = R(P e_a, P e_b) etc., built from endo[l, r] = R(theta_l, theta_r)
    RPP = np.einsum("...la,...rb,...lrxy->...abxy", P, P, endo)
    RP1 = np.einsum("...la,...lbxy->...abxy", P, endo)  # R(P e_a, e_b)
    R1P = np.einsum("...rb,...arxy->...abxy", P, endo)  # R(e_a, P e_b)
    M1 = endo - RPP
    M2 = RP1 + R1P
    Qb = Q[..., None, None, :, :]
    inner = M1 + Qb @ M2
    return inner @ Qb - Qb @ inner


# --- x-derivatives of P at frozen q -------------------------------------------


def _p_derivatives(f: FiberMorphism, chart: Chart, x, q, E):
    """``D[..., k, m, i] = theta_k(P[m, i])`` with the fiber coefficients held fixed."""
    n = x.shape[0]
    if isinstance(f, (Identity, Antipodal)):
        return np.zeros((n, 4, 4, 4))
    if isinstance(f, Constant):
        jet = section_jet(chart, x, _section_exprs(chart, f.section))
        dP = np.einsum("ncd,cmi->ndmi", jet.grad, bv.SELF_DUAL)
    else:
        pts = x[:, None, None, :] + X_STEP * _FD_OFFSETS[None, None, :, None] * np.eye(4)[None, :, None, :]
        qs = np.broadcast_to(q[:, None, None, :], (n, 4, len(_FD_OFFSETS), 3))
        vals = f.evaluate(chart, pts.reshape(-1, 4), qs.reshape(-1, 3)).reshape(n, 4, len(_FD_OFFSETS), 3)
        dcoef = np.einsum("o,ndoc->ndc", _FD_WEIGHTS, vals) / X_STEP
        dP = bv.sd_matrix(dcoef)
    return np.einsum("ndk,ndmi->nkmi", E, dP)


# --- assembly ------------------------------------------------------------------


@dataclass(frozen=True)
class _Core:
    P: np.ndarray  # (N, 4, 4)
    Q: np.ndarray
    E: np.ndarray  # (N, 4, 4, 4): E[n, i, j, m]
    F: np.ndarray
    G: np.ndarray  # (N, 4, 4, 4, 4): true vertical component for (i, j)
    mixed: np.ndarray  # (N, 2, 4, 4): holomorphy defect matrices on the vertical basis
    full: np.ndarray  # (N, 6, 6)
    omega: np.ndarray


def _derivative_terms(P, D):
    """Terms of the Nijenhuis bracket in which a frame field differentiates ``P``.

    ``D[n, k, m, i]`` is the derivative of ``P[m, i]`` along the k-th field.
    """
    T1 = np.einsum("nli,nlmj->nijm", P, D)
    swap = np.einsum("nikj->nijk", D) - np.einsum("njki->nijk", D)
    return T1 - np.swapaxes(T1, 1, 2) - np.einsum("nmk,nijk->nijm", P, swap)


def _e_from(P, D, c):
    """Nijenhuis tensor of ``P`` on the base: ``E[n, i, j, m]``."""
    T3 = np.einsum("nli,nrj,nlrm->nijm", P, P, c)
    Pc = np.einsum("nli,nljk->nijk", P, c) + np.einsum("nrj,nirk->nijk", P, c)
    return _derivative_terms(P, D) + T3 - np.einsum("nmk,nijk->nijm", P, Pc) - c


def _core(chart: Chart, f: FiberMorphism, x, q, fd: FrameData | None = None) -> _Core:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    n = x.shape[0]
    fd = frame_data(chart, x) if fd is None else fd
    P = bv.sd_matrix(f.evaluate(chart, x, q))
    Q = bv.sd_matrix(q)
    omega = connection_matrices(fd.gamma)  # (N, 4, 4, 4)

    D = _p_derivatives(f, chart, x, q, fd.E)
    E = _e_from(P, D, fd.c)

    # fiber derivatives of P along the vertical parts -[omega_k, Q] of the lifts
    lift = -bv.sd_coeffs(omega @ Q[:, None] - Q[:, None] @ omega)  # (N, 4, 3)
    xs = np.repeat(x, 4, axis=0)
    qs = np.repeat(q, 4, axis=0)
    dp, _ = fiber_derivative_coeffs(f, chart, xs, qs, lift.reshape(-1, 3))
    delta = bv.sd_matrix(dp.reshape(n, 4, 3))
    F = _derivative_terms(P, delta)

    G = _g_true(fd.endo, P, Q)

    # holomorphy defect matrices dP(QX) - P dP(X) on the vertical basis X = (t, u), Q t = u
    t = np.empty((n, 3))
    u = np.empty((n, 3))
    for k in range(n):
        t[k], u[k] = bv.complete_frame(q[k])
    dirs = np.stack([t, u, u, -t], axis=1)  # X1, X2 and Q X1 = X2, Q X2 = -X1
    dd, _ = fiber_derivative_coeffs(f, chart, np.repeat(x, 4, axis=0), np.repeat(q, 4, axis=0),
                                    dirs.reshape(-1, 3))
    dd = bv.sd_matrix(dd.reshape(n, 4, 3))
    mixed = np.stack([dd[:, 2] - P @ dd[:, 0], dd[:, 3] - P @ dd[:, 1]], axis=1)
    return _Core(P, Q, E, F, G, mixed, operator_from_endo(fd.endo), omega)


def assembled_nijenhuis(chart: Chart, f: FiberMorphism, x, q, V, W):
    """``N(V, W)`` from the closed forms, for ``V = (h, X)`` and ``W = (k, Y)``.

    Returns ``(horizontal frame components, vertical self-dual coefficients)``.
    """
    core = _core(chart, f, np.asarray(x, float)[None], bv.as_coeffs(q)[None])
    h, X = np.asarray(V[0], float), bv.sd_matrix(bv.as_coeffs(V[1]))
    k, Y = np.asarray(W[0], float), bv.sd_matrix(bv.as_coeffs(W[1]))
    P = core.P[0]
    qc = bv.as_coeffs(q)

    def defect_matrix(Z):
        zc = bv.sd_coeffs(Z)
        if np.allclose(zc, 0.0):
            return np.zeros((4, 4))
        pair = np.stack([zc, bv.sd_coeffs(core.Q[0] @ Z)])
        d, _ = fiber_derivative_coeffs(f, chart, np.stack([x, x]), np.stack([qc, qc]), pair)
        d = bv.sd_matrix(d)
        return d[1] - P @ d[0]

    hor = np.einsum("i,j,ijm->m", h, k, core.E[0] + core.F[0])
    hor = hor + defect_matrix(X) @ k - defect_matrix(Y) @ h
    ver = np.einsum("i,j,ijxy->xy", h, k, core.G[0])
    return hor, bv.sd_coeffs(ver)


def e_tensor(chart: Chart, x, f: FiberMorphism, q, i: int, j: int) -> np.ndarray:
    """Frame components of the base Nijenhuis tensor of ``f(., q)`` on ``(theta_i, theta_j)``."""
    return _core(chart, f, np.asarray(x, float)[None], bv.as_coeffs(q)[None]).E[0, i, j]


def f_tensor(chart: Chart, x, f: FiberMorphism, q, i: int, j: int) -> np.ndarray:
    """Frame components of the fiber-derivative part of the horizontal Nijenhuis tensor."""
    return _core(chart, f, np.asarray(x, float)[None], bv.as_coeffs(q)[None]).F[0, i, j]


# --- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class NijenhuisReport:
    E: np.ndarray  # (samples, 6, 4) for the pairs in PAIRS
    F: np.ndarray
    G: np.ndarray  # (samples, 6, 3) self-dual coefficients
    defect: np.ndarray  # (samples,)
    tol: float
    maxE: float
    maxF: float
    maxH: float  # max |E + F|
    maxG: float
    max_defect: float
    integrable: bool
    semi_integrable: bool
    failing_witness: tuple | None  # ((i, j) or None, component), pair 1-based
    witness_sample: int | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)


def full_check(chart: Chart, f: FiberMorphism, samples, tol: float | None = None) -> NijenhuisReport:
    """Evaluate all components of the Nijenhuis tensor over ``samples`` and render verdicts."""
    samples = list(samples)
    if not samples:
        raise NijenhuisError("empty sample list")
    x = np.array([s.x for s in samples], dtype=float)
    q = np.array([s.q.array if isinstance(s, TwistorPoint) else bv.as_coeffs(s.q) for s in samples])
    core = _core(chart, f, x, q)
    idx = tuple(np.array(PAIRS).T)
    E = core.E[:, idx[0], idx[1]]
    F = core.F[:, idx[0], idx[1]]
    G = bv.sd_coeffs(core.G[:, idx[0], idx[1]])
    normE = np.linalg.norm(E, axis=-1)
    normF = np.linalg.norm(F, axis=-1)
    normH = np.linalg.norm(E + F, axis=-1)
    normG = np.linalg.norm(G, axis=-1)
    defect = np.max(bv.norm(core.mixed), axis=-1)
    if tol is None:
        tol = default_tol(np.max(np.linalg.norm(core.full, axis=(-2, -1))))
    witness, where = None, None
    if np.max(defect) > tol:
        where = int(np.argmax(defect > tol))
        witness = (None, "defect")
    elif np.max(normH) > tol:
        where, pair = np.argwhere(normH > tol)[0]
        label = "E" if normE[where, pair] >= normF[where, pair] else "F"
        i, j = PAIRS[pair]
        witness = ((i + 1, j + 1), label)
    elif np.max(normG) > tol:
        where, pair = np.argwhere(normG > tol)[0]
        i, j = PAIRS[pair]
        witness = ((i + 1, j + 1), "G")
    maxG = float(np.max(normG))
    return NijenhuisReport(
        E=E, F=F, G=G, defect=defect, tol=float(tol),
        maxE=float(np.max(normE)), maxF=float(np.max(normF)), maxH=float(np.max(normH)),
        maxG=maxG, max_defect=float(np.max(defect)),
        integrable=witness is None, semi_integrable=maxG <= tol,
        failing_witness=witness, witness_sample=None if where is None else int(where),
    )


# --- classification by the eigenvalue pair of A --------------------------------------------


@dataclass(frozen=True)
class Theorem2Verdict:
    case: str  # "A", "B", "C", "D" or "NotLck"
    x: float
    y: float
    ratio: float
    theta: float | None
    morphisms: tuple[str, ...]
    factors: tuple[complex, ...] = ()  # lambda values of the lambda Id morphisms (cases C, D)


def classify_theorem2(x_val: float, y_val: float, tol: float = 1e-9, adapted: bool = True) -> Theorem2Verdict:
    """Case and semi-integrable morphisms from the eigenvalue pair ``(x, y)`` of ``A``."""
    x_val, y_val = float(x_val), float(y_val)
    if not adapted:
        return Theorem2Verdict("NotLck", x_val, y_val, math.nan, None, ())
    if abs(x_val) <= tol and abs(y_val) <= tol:
        return Theorem2Verdict("A", x_val, y_val, math.nan, None, ("infinitely many",))
    if abs(y_val) <= tol:
        return Theorem2Verdict("B", x_val, y_val, math.copysign(math.inf, x_val), None, ("inf", "-inf"))
    ratio = x_val / y_val
    if abs(ratio) <= 1.0:
        theta = math.acos(ratio)
        lams = (complex(math.cos(theta), math.sin(theta)), complex(math.cos(theta), -math.sin(theta)))
        return Theorem2Verdict("C", x_val, y_val, ratio, theta, ("exp(+i theta) Id", "exp(-i theta) Id"), lams)
    cos_t = y_val / x_val
    theta = math.acos(cos_t)
    sin_t = math.sqrt(1.0 - cos_t * cos_t)
    u1 = (1.0 + sin_t) / cos_t
    # (1 - sin) / cos rewritten as cos / (1 + sin), which avoids cancellation as cos -> 0
    u2 = cos_t / (1.0 + sin_t)
    return Theorem2Verdict("D", x_val, y_val, ratio, theta, ("u1 Id", "u2 Id"), (complex(u1), complex(u2)))


def case_d_product(verdict: Theorem2Verdict) -> Fraction:
    """``u1 * u2`` in exact arithmetic from ``cos(theta) = y / x``.

    With ``c = cos(theta)`` and ``s^2 = 1 - c^2`` the product of the two
    factors is ``(1 + s)(1 - s) / c^2 = (1 - s^2) / c^2``, which needs no
    square root and so can be evaluated over the rationals.
    """
    if verdict.case != "D":
        raise NijenhuisError(f"case {verdict.case} has no u1, u2")
    c = Fraction(verdict.y) / Fraction(verdict.x)
    s2 = 1 - c * c
    return (1 - s2) / (c * c)


def _fiber_grid() -> np.ndarray:
    """The 26 nonzero points of ``{-1, 0, 1}^3`` projected to the sphere."""
    pts = [p for p in itertools.product((-1.0, 0.0, 1.0), repeat=3) if any(p)]
    pts = np.array(pts)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


FIBER_GRID = _fiber_grid()


def fiber_samples(count: int, seed: int = 0) -> np.ndarray:
    """Deterministic random unit coefficient vectors."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _max_g(full, q, p) -> np.ndarray:
    """``max over pairs |g_tensor(q, p, pair)|``, batched over leading axes of ``q`` and ``p``."""
    G = g_coeffs_all(full, q, p)
    idx = tuple(np.array(PAIRS).T)
    return np.max(np.linalg.norm(G[..., idx[0], idx[1], :], axis=-1), axis=-1)


def semi_integrable_residual(blocks, fiber_map, qs) -> float:
    """``max |g_tensor(q, fiber_map(q), pair)|`` over the sample points and pairs."""
    full = blocks.full if isinstance(blocks, CurvatureBlocks) else np.asarray(blocks, float)
    qs = np.asarray(qs, dtype=float)
    ps = np.array([fiber_map(q) for q in qs])
    return float(np.max(_max_g(full, qs, ps)))


def verdict_fiber_maps(verdict: Theorem2Verdict, section) -> list:
    """Fiber maps ``q -> p`` for the morphisms listed in a verdict (section at infinity)."""
    s = bv.as_coeffs(section)
    s = s / np.linalg.norm(s)
    if verdict.case == "A":
        # any fiberwise holomorphic map: two representatives
        return [lambda q: q, lambda q: power_map(q, s, 2.0, 1)]
    if verdict.case == "B":
        return [lambda q: s, lambda q: -s]
    return [lambda q, lam=lam: power_map(q, s, lam, 1) for lam in verdict.factors]


def verify_semi_integrable(blocks, verdict: Theorem2Verdict, section=(1.0, 0.0, 0.0), samples=None) -> float:
    """Largest vertical Nijenhuis residual over the verdict's morphisms and the sampled fiber points."""
    qs = fiber_samples(32, seed=11) if samples is None else np.asarray(samples, float)
    maps = verdict_fiber_maps(verdict, section)
    if not maps:
        raise NijenhuisError(f"case {verdict.case} lists no morphisms")
    return max(semi_integrable_residual(blocks, m, qs) for m in maps)


# --- quaternionic Kahler formula -------------------------------------------------


def lemma3_g(ricci, n: int, q, p, i: int, j: int, structures=None, tol: float = 1e-8) -> np.ndarray:
    """Vertical term from the Ricci tensor of an Einstein quaternionic Kahler base.

    The self-dual part of ``Rop(X^Y)`` is ``(alpha, beta, gamma)(X, Y) / 2``
    with ``alpha(X, Y) = r(IX, Y) / (n + 2)`` and likewise for ``J``, ``K``.
    Only ``n = 1`` (real dimension 4) is realized by the charts here.
    """
    ricci = np.asarray(ricci, dtype=float)
    if int(n) != n or n < 1:
        raise NijenhuisError("n must be a positive integer")
    dim = ricci.shape[-1]
    if dim != 4 * n:
        raise NijenhuisError(f"ricci is {dim}x{dim}, expected {4 * n}x{4 * n}")
    s = float(np.trace(ricci))
    residual = float(np.linalg.norm(ricci - s / dim * np.eye(dim)))
    if residual > tol * (1.0 + abs(s)):
        raise NijenhuisError(f"ricci is not Einstein (residual {residual:.3e})")
    structures = bv.SELF_DUAL if structures is None else np.asarray(structures, float)
    kappa = 1.0 / (n + 2)
    Q = bv.sd_matrix(bv.as_coeffs(q))
    P = bv.sd_matrix(bv.as_coeffs(p))

    def L(X, Y):
        # r(S X, Y) for each structure S, as self-dual coefficients
        return 0.5 * kappa * np.array([(S @ X) @ ricci @ Y for S in structures])

    ei, ej = _unit(i), _unit(j)
    l1 = L(ei, ej) - L(P @ ei, P @ ej)
    l2 = L(P @ ei, ej) + L(ei, P @ ej)
    return bv.commutator(bv.sd_matrix(l1) + Q @ bv.sd_matrix(l2), Q)


def ricci_for_lemma3(blocks: CurvatureBlocks) -> np.ndarray:
    return blocks.ricci if blocks.ricci is not None else ricci_from_operator(blocks.full)


# --- uniqueness scan --------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    unique: bool
    witnesses: tuple  # (q, p, residual) survivors with p != q
    survivors: int
    note: str = "falsification scan over a 26-point grid with local refinement, not a proof"


def _refine(residual, p, stop: float, steps: int = 200):
    """Batched compass search on the sphere for ``residual(index, points)``.

    ``p`` holds one starting point per row; a row stops once its residual is
    below ``stop`` or its step underflows.
    """
    p = p.copy()
    r = residual(np.arange(len(p)), p)
    h = np.full(r.shape, 0.3)
    for _ in range(steps):
        act = np.nonzero((r > stop) & (h > 1e-10))[0]
        if act.size == 0:
            break
        pa, ra, ha = p[act], r[act], h[act]
        t = np.cross(pa, np.where(np.abs(pa[:, :1]) < 0.9, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))
        t /= np.linalg.norm(t, axis=-1, keepdims=True)
        u = np.cross(pa, t)
        improved = np.zeros(act.size, dtype=bool)
        for d in (t, -t, u, -u):
            cand = np.cos(ha)[:, None] * pa + np.sin(ha)[:, None] * d
            rc = residual(act, cand)
            better = rc < ra
            pa = np.where(better[:, None], cand, pa)
            ra = np.where(better, rc, ra)
            improved |= better
        p[act], r[act], h[act] = pa, ra, np.where(improved, ha, 0.5 * ha)
    return p, r


def theorem_e_scan(blocks, tol: float | None = None, grid=None) -> ScanResult:
    """Search for pairs ``(q, p)`` with ``p != q`` on which the vertical term vanishes.

    For every grid value ``q`` and every grid start ``p`` the residual
    ``max_pairs |g_tensor(q, p)|`` is refined by a compass search on the
    sphere; a survivor is a refined ``p`` with residual below ``tol``.
    ``unique`` means every survivor equals ``q``, i.e. only the identity passes.
    """
    full = blocks.full if isinstance(blocks, CurvatureBlocks) else np.asarray(blocks, float)
    tol = default_tol(full[:3, :3]) if tol is None else tol
    grid = FIBER_GRID if grid is None else np.asarray(grid, float)
    m = len(grid)
    q = np.repeat(grid, m, axis=0)
    p, r = _refine(lambda k, pts: _max_g(full, q[k], pts), np.tile(grid, (m, 1)), stop=1e-3 * tol)
    alive = r <= tol
    other = alive & (np.linalg.norm(p - q, axis=-1) > DISTINCT)
    witnesses = tuple((tuple(map(float, q[k])), tuple(map(float, p[k])), float(r[k]))
                      for k in np.nonzero(other)[0])
    return ScanResult(not witnesses, witnesses, int(np.sum(alive)))


def fiber_survivors(blocks, p, tol: float | None = None, grid=None) -> np.ndarray:
    """Fiber points ``q`` (refined from a grid) with ``g_tensor(q, p) = 0`` for all pairs at fixed ``p``."""
    full = blocks.full if isinstance(blocks, CurvatureBlocks) else np.asarray(blocks, float)
    tol = default_tol(full[:3, :3]) if tol is None else tol
    grid = FIBER_GRID if grid is None else np.asarray(grid, float)
    pc = bv.as_coeffs(p)
    pc = pc / np.linalg.norm(pc)
    q, r = _refine(lambda k, pts: _max_g(full, pts, np.broadcast_to(pc, pts.shape)), grid, stop=1e-3 * tol)
    found = []
    for point in q[r <= tol]:
        if all(np.linalg.norm(point - f) > DISTINCT for f in found):
            found.append(point)
    return np.array(found).reshape(-1, 3)
