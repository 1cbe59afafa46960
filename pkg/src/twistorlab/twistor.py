"""Points of the twistor space, the vertical/horizontal splitting and fiber morphisms.

A point ``z = (x, Q)`` is a chart point ``x`` and a unit self-dual structure
``Q = aI + bJ + cK`` written in the (I, J, K) frame built from the chart's
orthonormal frame. Vertical vectors are skew 4x4 matrices anticommuting with
``Q``; the horizontal lift of ``theta_i`` is ``theta_i - t [omega_i, Q]`` where
``omega_i[k, j] = Gamma_ij^k``.

Fiber coordinates relative to a section ``S`` (with ``(S, T, S x T)`` the
oriented frame from :func:`bivectors.complete_frame`) are

    a = <Q, S>,   z = <Q, T> - i <Q, S x T>,   u = z / (1 - a),

so ``S`` itself is ``u = infinity`` and ``-S`` is ``u = 0``. With this sign of
the imaginary part ``u`` is a holomorphic coordinate for ``X -> QX``.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import bivectors as bv
from .charts import Chart, sample_box, section_jet
from .curvature import connection_coeffs
from .expr import COORDINATES, Expr, evaluate, parse, to_text

FS_SCALE = 0.25  # round metric of radius 1/2 on the fiber: Gaussian curvature 4
SPHERE_TOL = 1e-8
HOLOMORPHY_TOL = 1e-7
FIBER_STEP = 1e-5
X_STEP = 1e-3


@dataclass(frozen=True)
class TwistorPoint:
    x: tuple[float, float, float, float]
    q: bv.UnitQ

    @classmethod
    def make(cls, x, q) -> "TwistorPoint":
        q = q if isinstance(q, bv.UnitQ) else bv.UnitQ.normalized(*bv.as_coeffs(q))
        return cls(tuple(float(v) for v in x), q)


@dataclass(frozen=True)
class SphereCoords:
    a: float
    z: complex

    @property
    def u(self) -> complex | float:
        if abs(1.0 - self.a) < 1e-15:
            return math.inf
        return self.z / (1.0 - self.a)


def is_vertical(q, X, tol: float = 1e-10) -> bool:
    Q = bv.sd_matrix(bv.as_coeffs(q))
    X = np.asarray(X, dtype=float)
    return bool(np.max(np.abs(X + X.T)) <= tol and np.max(np.abs(Q @ X + X @ Q)) <= tol)


def vertical_basis(q) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``(X1, X2)`` spanning the vertical space at ``q``, with ``Q X1 = X2``."""
    t, u = bv.complete_frame(bv.as_coeffs(q))
    return bv.sd_matrix(t), bv.sd_matrix(u)


def fiber_J(q, X) -> np.ndarray:
    return bv.sd_matrix(bv.as_coeffs(q)) @ np.asarray(X, dtype=float)


def connection_matrices(gamma: np.ndarray) -> np.ndarray:
    """``omega[..., i, k, j] = Gamma_ij^k``: the matrix of ``nabla_{theta_i}`` on the frame."""
    return np.swapaxes(gamma, -1, -2)


def horizontal_lift(chart: Chart, z: TwistorPoint, i: int, t: float = 1.0):
    """``(e_i, -t [omega_i, Q])``: frame index of the horizontal part and the vertical correction."""
    gamma, _ = connection_coeffs(chart, np.asarray(z.x))
    omega = connection_matrices(gamma)[i]
    e = np.zeros(4)
    e[i] = 1.0
    return e, -t * bv.commutator(omega, z.q.matrix)


def twistor_metric(chart: Chart, z: TwistorPoint, V, W) -> float:
    """Inner product of ``V = (h, X)`` and ``W = (k, Y)``: frame components ``h`` of the
    horizontal part, ``X`` the vertical matrix."""
    del chart, z
    h, X = V
    k, Y = W
    return float(np.dot(h, k) + FS_SCALE * bv.inner(X, Y))


def J_on_tangent(p, q, V):
    """Action of the compatible structure with horizontal value ``P``: ``(h, X) -> (P h, Q X)``."""
    h, X = V
    return bv.sd_matrix(bv.as_coeffs(p)) @ np.asarray(h, float), fiber_J(q, X)


# --- sphere coordinates ----------------------------------------------------


def section_frame(s: np.ndarray):
    """Batched ``(T, U)`` completing unit ``S`` to an oriented orthonormal triple."""
    s = np.asarray(s, dtype=float)
    flat = s.reshape(-1, 3)
    ts = np.empty_like(flat)
    us = np.empty_like(flat)
    for n, row in enumerate(flat):
        ts[n], us[n] = bv.complete_frame(row)
    return ts.reshape(s.shape), us.reshape(s.shape)


def to_sphere_coords(q, s, t, u):
    """``(a, z)`` of ``q`` relative to the frame ``(s, t, u)`` (batched)."""
    q = np.asarray(q, dtype=float)
    a = np.sum(q * s, axis=-1)
    z = np.sum(q * t, axis=-1) - 1j * np.sum(q * u, axis=-1)
    return a, z


def from_sphere_coords(a, z, s, t, u) -> np.ndarray:
    a = np.asarray(a, dtype=float)[..., None]
    z = np.asarray(z, dtype=complex)[..., None]
    return a * s + z.real * t - z.imag * u


def power_map(q, s, factor, n: int) -> np.ndarray:
    """``u -> factor * u^n`` about the section ``s`` (``s`` at infinity), on coefficient arrays."""
    q = np.asarray(q, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), q.shape)
    t, u = section_frame(s)
    a, z = to_sphere_coords(q, s, t, u)
    lam2 = np.abs(factor) ** 2
    plus, minus = (1.0 + a) ** n, (1.0 - a) ** n
    D = lam2 * plus + minus
    a_new = (lam2 * plus - minus) / D
    z_new = 2.0 * factor * z**n / D
    return from_sphere_coords(a_new, z_new, s, t, u)


def sphere_coords(q, s=(1.0, 0.0, 0.0)) -> SphereCoords:
    s = np.asarray(bv.as_coeffs(s), dtype=float)
    t, u = bv.complete_frame(s)
    a, z = to_sphere_coords(bv.as_coeffs(q), s, t, u)
    return SphereCoords(float(a), complex(z))


# --- fiber morphisms --------------------------------------------------------


class MorphismError(ValueError):
    pass


def _section_exprs(chart: Chart, section):
    if section is not None:
        return section
    exprs = chart.kahler_section
    if exprs is None:
        raw = chart.label("hermitian_section")
        if raw is not None:
            exprs = tuple(parse(p.strip()) for p in raw.split(","))
    if exprs is None:
        raise MorphismError(f"chart {chart.name} has no section; this morphism needs one")
    return exprs


@dataclass(frozen=True)
class FiberMorphism:
    """Base class. ``evaluate`` maps batched chart points ``x (N, 4)`` and fiber
    coefficients ``q (N, 3)`` to the coefficients of ``P = f(x, q)``."""

    def evaluate(self, chart: Chart, x, q) -> np.ndarray:
        raise NotImplementedError

    @property
    def x_dependent(self) -> bool:
        return True

    @property
    def needs_section(self) -> bool:
        return True

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(FiberMorphism):
    def evaluate(self, chart, x, q):
        return np.array(q, dtype=float)

    @property
    def x_dependent(self):
        return False

    @property
    def needs_section(self):
        return False

    def describe(self):
        return "id"


@dataclass(frozen=True)
class Antipodal(FiberMorphism):
    def evaluate(self, chart, x, q):
        return -np.array(q, dtype=float)

    @property
    def x_dependent(self):
        return False

    @property
    def needs_section(self):
        return False

    def describe(self):
        return "antipodal"


@dataclass(frozen=True)
class Constant(FiberMorphism):
    section: tuple[Expr, Expr, Expr] | None = None

    def evaluate(self, chart, x, q):
        s = section_jet(chart, x, _section_exprs(chart, self.section)).value
        return np.broadcast_to(s, np.shape(q)).copy()

    def describe(self):
        if self.section is None:
            return "const"
        return "const:" + ",".join(to_text(e) for e in self.section)


def _check_lambda(lam: complex) -> complex:
    lam = complex(lam)
    if lam == 0:
        raise MorphismError("lambda must be non-zero")
    return lam


def _complex_text(lam: complex) -> str:
    if lam.imag == 0:
        return repr(lam.real)
    sign = "+" if lam.imag >= 0 else "-"
    return f"{lam.real!r}{sign}{abs(lam.imag)!r}i"


@dataclass(frozen=True)
class LambdaId(FiberMorphism):
    """``u -> lambda u`` in the stereographic coordinate with the section at infinity."""

    lam: complex
    section: tuple[Expr, Expr, Expr] | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_lambda(self.lam))

    def evaluate(self, chart, x, q):
        return PowerTwist(self.lam, 1, None, self.section).evaluate(chart, x, q)

    def describe(self):
        return f"lambda:{_complex_text(self.lam)}"


@dataclass(frozen=True)
class PowerTwist(FiberMorphism):
    """``(a, z) -> (f1(a), lambda e^{i phase(x)} f2(a) z^n)``, i.e. ``u -> lambda e^{i phase} u^n``."""

    lam: complex
    n: int
    phase: Expr | None = None
    section: tuple[Expr, Expr, Expr] | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_lambda(self.lam))
        if int(self.n) != self.n or self.n < 1:
            raise MorphismError("n must be a positive integer")

    def evaluate(self, chart, x, q):
        x = np.asarray(x, dtype=float)
        q = np.asarray(q, dtype=float)
        s = section_jet(chart, x, _section_exprs(chart, self.section)).value
        s = np.broadcast_to(s, q.shape)
        factor = self.lam
        if self.phase is not None:
            ph = evaluate(self.phase, {k: x[..., i] for i, k in enumerate(COORDINATES)})
            factor = factor * np.exp(1j * np.asarray(ph, dtype=float))
        return power_map(q, s, factor, self.n)

    def describe(self):
        text = f"power:n={self.n},lambda={_complex_text(self.lam)}"
        if self.phase is not None:
            text += f",phase={to_text(self.phase)}"
        return text


CUSTOM_VARIABLES = ("a", "zr", "zi") + COORDINATES


@dataclass(frozen=True)
class Custom(FiberMorphism):
    """User map ``(a, zr, zi) -> (a', zr', zi')`` in fiber coordinates about the section."""

    a_expr: Expr
    zr_expr: Expr
    zi_expr: Expr
    section: tuple[Expr, Expr, Expr] | None = None

    def evaluate(self, chart, x, q):
        x = np.asarray(x, dtype=float)
        q = np.asarray(q, dtype=float)
        s = section_jet(chart, x, _section_exprs(chart, self.section)).value
        s = np.broadcast_to(s, q.shape)
        t, u = section_frame(s)
        a, z = to_sphere_coords(q, s, t, u)
        env = {"a": a, "zr": z.real, "zi": z.imag}
        env.update({k: x[..., i] for i, k in enumerate(COORDINATES)})
        cache: dict = {}
        a2 = np.broadcast_to(evaluate(self.a_expr, env, cache), a.shape)
        zr2 = np.broadcast_to(evaluate(self.zr_expr, env, cache), a.shape)
        zi2 = np.broadcast_to(evaluate(self.zi_expr, env, cache), a.shape)
        off = np.max(np.abs(a2**2 + zr2**2 + zi2**2 - 1.0)) if a2.size else 0.0
        if off > SPHERE_TOL:
            raise MorphismError(f"custom map leaves the sphere by {off:.3e}")
        return from_sphere_coords(a2, zr2 + 1j * zi2, s, t, u)

    def describe(self):
        return f"custom:a'={to_text(self.a_expr)};zr'={to_text(self.zr_expr)};zi'={to_text(self.zi_expr)}"


def parse_complex(text: str) -> complex:
    """Accepts ``2``, ``-1``, ``0.5+0.5i``, ``i`` and ``3-i`` (``j`` works as well)."""
    t = text.strip().replace(" ", "").replace("j", "i")
    if t.endswith("i"):
        t = t[:-1]
        if t == "" or t[-1] in "+-":
            t += "1"
        t += "j"
    try:
        return complex(t)
    except ValueError:
        raise MorphismError(f"bad complex number {text!r}") from None


def parse_morphism(text: str) -> FiberMorphism:
    """Mini-language: ``id | antipodal | const[:s1,s2,s3] | lambda:<c> |
    power:n=<int>,lambda=<c>[,phase=<expr>] | custom:a'=..;zr'=..;zi'=..``."""
    text = text.strip()
    head, _, body = text.partition(":")
    head = head.strip().lower()
    try:
        if head == "id" and not body:
            return Identity()
        if head == "antipodal" and not body:
            return Antipodal()
        if head == "const":
            if not body:
                return Constant()
            parts = body.split(",")
            if len(parts) != 3:
                raise MorphismError("const section needs three expressions")
            return Constant(tuple(parse(p) for p in parts))
        if head == "lambda" and body:
            return LambdaId(parse_complex(body))
        if head == "power" and body:
            opts: dict[str, str] = {}
            key = None
            for piece in body.split(","):
                k, eq, v = piece.partition("=")
                if eq and k.strip() in ("n", "lambda", "phase"):
                    key = k.strip()
                    opts[key] = v
                elif key == "phase":
                    opts[key] += "," + piece
                else:
                    raise MorphismError(f"bad power option {piece!r}")
            if "n" not in opts:
                raise MorphismError("power needs n=<int>")
            n = int(opts["n"])
            lam = parse_complex(opts.get("lambda", "1"))
            phase = parse(opts["phase"]) if "phase" in opts else None
            return PowerTwist(lam, n, phase)
        if head == "custom" and body:
            fields: dict[str, Expr] = {}
            for piece in body.split(";"):
                k, eq, v = piece.partition("=")
                k = k.strip().rstrip("'")
                if not eq or k not in ("a", "zr", "zi"):
                    raise MorphismError(f"bad custom component {piece!r}")
                fields[k] = parse(v, CUSTOM_VARIABLES)
            if set(fields) != {"a", "zr", "zi"}:
                raise MorphismError("custom needs a', zr' and zi'")
            return Custom(fields["a"], fields["zr"], fields["zi"])
    except ValueError as exc:
        if isinstance(exc, MorphismError):
            raise
        raise MorphismError(f"bad morphism {text!r}: {exc}") from exc
    raise MorphismError(f"unknown morphism {text!r}")


# --- evaluation helpers -----------------------------------------------------


def morphism_eval(f: FiberMorphism, chart: Chart, x, q) -> bv.UnitQ:
    p = f.evaluate(chart, np.asarray(x, dtype=float)[None], bv.as_coeffs(q)[None])[0]
    return bv.UnitQ.normalized(*p)


def _geodesic(q, xdir, t):
    """Point at arc length ``t`` from unit ``q`` along unit tangent ``xdir`` (batched in t)."""
    t = np.asarray(t, dtype=float)[..., None]
    return np.cos(t) * q + np.sin(t) * xdir


def fiber_derivative_coeffs(f: FiberMorphism, chart: Chart, x, q, xdir, step: float = FIBER_STEP):
    """Derivative of ``q -> f(x, q)`` along the tangent coefficient vector ``xdir``.

    Returns ``(dp, richardson_gap)``; exact for the identity, antipodal and
    constant families, fourth-order central differences along the great circle
    otherwise (``richardson_gap`` compares steps h and 2h).
    """
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    xdir = np.asarray(xdir, dtype=float)
    if isinstance(f, Identity):
        return xdir.copy(), 0.0
    if isinstance(f, Antipodal):
        return -xdir.copy(), 0.0
    if isinstance(f, Constant):
        return np.zeros_like(xdir), 0.0
    speed = np.linalg.norm(xdir, axis=-1)
    if np.all(speed == 0):
        return np.zeros_like(xdir), 0.0
    unit = xdir / np.where(speed == 0, 1.0, speed)[..., None]
    offsets = np.array([-2.0, -1.0, 1.0, 2.0, -4.0, -2.0, 2.0, 4.0]) * step
    pts = np.stack([_geodesic(q, unit, o) for o in offsets], axis=-2)
    xs = np.broadcast_to(x[..., None, :], pts.shape[:-1] + (4,))
    vals = f.evaluate(chart, xs.reshape(-1, 4), pts.reshape(-1, 3)).reshape(pts.shape)
    w = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
    d1 = np.einsum("k,...kc->...c", w, vals[..., :4, :]) / step
    d2 = np.einsum("k,...kc->...c", w, vals[..., 4:, :]) / (2 * step)
    gap = float(np.max(np.abs(d1 - d2))) if d1.size else 0.0
    return d1 * speed[..., None], gap


def morphism_fiber_derivative(f: FiberMorphism, chart: Chart, x, q, X) -> np.ndarray:
    """``dP`` along the vertical matrix ``X`` at ``(x, q)``, as a 4x4 matrix."""
    d, _ = fiber_derivative_coeffs(f, chart, x, bv.as_coeffs(q), bv.sd_coeffs(X))
    return bv.sd_matrix(d)


def holomorphy_defect(f: FiberMorphism, chart: Chart, x, q) -> float:
    """``max_X |dP(QX) - P dP(X)|`` over the vertical basis at ``q``."""
    qc = bv.as_coeffs(q)
    Q = bv.sd_matrix(qc)
    P = morphism_eval(f, chart, x, qc).matrix
    worst = 0.0
    for X in vertical_basis(qc):
        lhs = morphism_fiber_derivative(f, chart, x, qc, Q @ X)
        rhs = P @ morphism_fiber_derivative(f, chart, x, qc, X)
        worst = max(worst, float(bv.norm(lhs - rhs)))
    return worst


def equivariance_gap(f: FiberMorphism, chart: Chart, x, q, h) -> float:
    """``max |f(h(x), q) - f(x, q)|`` for a chart identification ``h`` acting on base points only."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    hx = np.array([h(row) for row in x])
    return float(np.max(np.abs(f.evaluate(chart, hx, q) - f.evaluate(chart, x, q))))


def identification_map(chart: Chart):
    """The chart's recorded identification ``x -> h(x)``, or None."""
    raw = chart.label("identification")
    if raw is None:
        return None
    exprs = [parse(p.strip()) for p in raw.split(",")]
    if len(exprs) != 4:
        raise ValueError("identification needs four expressions")

    def h(x):
        env = {k: float(x[i]) for i, k in enumerate(COORDINATES)}
        return np.array([float(evaluate(e, env)) for e in exprs])

    return h


def sample_points(chart: Chart, base: int = 16, fiber: int = 4, seed: int = 0) -> list[TwistorPoint]:
    """``base * fiber`` twistor points from scrambled Sobol sequences.

    Base points fill the chart's sampling box; fiber points are spread over the
    sphere by the area-preserving map ``(u, v) -> (z = 2u - 1, phi = 2 pi v)``,
    with an independent draw for every base point.
    """
    if base < 1 or fiber < 1:
        raise ValueError("sample counts must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = sample_box(chart)
    with warnings.catch_warnings():
        # counts that are not powers of two only lose the balance property
        warnings.simplefilter("ignore", UserWarning)
        xs = qmc.scale(qmc.Sobol(4, scramble=True, seed=rng).random(base), lo, hi)
        uv = qmc.Sobol(2, scramble=True, seed=rng).random(base * fiber)
    zc = 2.0 * uv[:, 0] - 1.0
    phi = 2.0 * np.pi * uv[:, 1]
    rho = np.sqrt(np.maximum(0.0, 1.0 - zc * zc))
    qs = np.stack([rho * np.cos(phi), rho * np.sin(phi), zc], axis=-1)
    return [TwistorPoint.make(xs[k // fiber], qs[k]) for k in range(base * fiber)]


def lambda_descriptor(lam: complex) -> str:
    return f"lambda:{_complex_text(complex(lam))}"


__all__ = [
    "Antipodal", "Constant", "Custom", "FiberMorphism", "Identity", "LambdaId", "PowerTwist",
    "SphereCoords", "TwistorPoint", "fiber_J", "holomorphy_defect", "horizontal_lift",
    "morphism_eval", "morphism_fiber_derivative", "parse_morphism", "sample_points", "sphere_coords",
    "twistor_metric", "vertical_basis",
]
