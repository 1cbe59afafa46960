"""Truncated cohomology ring of the twistor space and the Gauss-Bonnet bridge.

Classes live on the basis ``1, h, c, p, hc, hp`` where ``h`` is the degree-2
generator over the base, ``c`` the pullback of ``c1(J_M)`` and ``p`` the
pullback of the point class. Coefficients are exact ``Fraction`` values.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .charts import Chart, Interval
from .curvature import frame_data, integrand_from_blocks, operator_from_endo

BASIS = ("1", "h", "c", "p", "hc", "hp")
DEGREE = {"1": 0, "h": 2, "c": 2, "p": 4, "hc": 4, "hp": 6}


class RingError(ValueError):
    pass


@dataclass(frozen=True)
class RingContext:
    tau: int
    chi: int
    c1sq: int | None = None  # c1(J_M)^2; None when no complex structure is declared

    def __post_init__(self):
        if self.c1sq is not None and self.c1sq != 2 * self.chi + 3 * self.tau:
            raise RingError(f"c1^2 = {self.c1sq} contradicts 2 chi + 3 tau = {2 * self.chi + 3 * self.tau}")

    @classmethod
    def complex_surface(cls, tau: int, chi: int) -> "RingContext":
        return cls(tau, chi, 2 * chi + 3 * tau)

    @property
    def h_squared(self) -> Fraction:
        """Coefficient of ``p`` in ``h^2``."""
        return Fraction(3 * self.tau + 2 * self.chi, 4)


def _table(ctx: RingContext):
    """Products of basis monomials as sparse coefficient dicts."""
    hh = ctx.h_squared
    cc = None if ctx.c1sq is None else Fraction(ctx.c1sq)
    t = {
        ("h", "h"): {"p": hh},
        ("h", "c"): {"hc": Fraction(1)},
        ("h", "p"): {"hp": Fraction(1)},
        ("h", "hc"): {},  # h^2 c = (3 tau + 2 chi)/4 p c = 0
        ("h", "hp"): {},
        ("c", "c"): None if cc is None else {"p": cc},
        ("c", "p"): {},
        ("c", "hc"): None if cc is None else {"hp": cc},
        ("c", "hp"): {},
        ("p", "p"): {},
        ("p", "hc"): {},
        ("p", "hp"): {},
        ("hc", "hc"): {},
        ("hc", "hp"): {},
        ("hp", "hp"): {},
    }
    return t


@dataclass(frozen=True)
class CohClass:
    coeffs: tuple[Fraction, ...]
    ctx: RingContext

    def __post_init__(self):
        if len(self.coeffs) != len(BASIS):
            raise RingError("a class has six coefficients")
        if self.ctx.c1sq is None and (self.coeffs[2] or self.coeffs[4]):
            raise RingError("c1(J_M) terms need a context with a declared complex structure")

    @classmethod
    def make(cls, ctx: RingContext, **terms) -> "CohClass":
        unknown = set(terms) - set(BASIS) - {"one"}
        if unknown:
            raise RingError(f"unknown basis monomials {sorted(unknown)}")
        vals = [Fraction(terms.get("one" if b == "1" else b, 0)) for b in BASIS]
        return cls(tuple(vals), ctx)

    @classmethod
    def one(cls, ctx: RingContext) -> "CohClass":
        return cls.make(ctx, one=1)

    def __getitem__(self, name: str) -> Fraction:
        return self.coeffs[BASIS.index(name)]

    def _check(self, other: "CohClass"):
        if self.ctx != other.ctx:
            raise RingError("classes from different ring contexts")

    def __add__(self, other):
        if not isinstance(other, CohClass):
            other = CohClass.one(self.ctx) * other
        self._check(other)
        return CohClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.ctx)

    __radd__ = __add__

    def __neg__(self):
        return CohClass(tuple(-a for a in self.coeffs), self.ctx)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CohClass(tuple(a * other for a in self.coeffs), self.ctx)
        self._check(other)
        return mul(self, other)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n: int):
        out = CohClass.one(self.ctx)
        for _ in range(n):
            out = out * self
        return out

    def degree_part(self, degree: int) -> "CohClass":
        return CohClass(tuple(a if DEGREE[b] == degree else Fraction(0) for a, b in zip(self.coeffs, BASIS)), self.ctx)

    def text(self) -> str:
        parts = []
        for a, b in zip(self.coeffs, BASIS):
            if a == 0:
                continue
            mono = "" if b == "1" else ("h*c" if b == "hc" else "h*p" if b == "hp" else b)
            if not mono:
                parts.append(str(a))
            elif a == 1:
                parts.append(mono)
            else:
                parts.append(f"({a})*{mono}" if a.denominator != 1 or a < 0 else f"{a}*{mono}")
        return " + ".join(parts) if parts else "0"


def mul(a: CohClass, b: CohClass) -> CohClass:
    """Product in the truncated ring (everything above degree 6 vanishes)."""
    a._check(b)
    table = _table(a.ctx)
    out = [Fraction(0)] * len(BASIS)
    for i, x in enumerate(a.coeffs):
        if x == 0:
            continue
        for j, y in enumerate(b.coeffs):
            if y == 0:
                continue
            u, v = BASIS[i], BASIS[j]
            if u == "1":
                out[j] += x * y
                continue
            if v == "1":
                out[i] += x * y
                continue
            key = (u, v) if (u, v) in table else (v, u)
            prod = table[key]
            if prod is None:
                raise RingError("c1(J_M)^2 is undefined without a declared complex structure")
            for name, coef in prod.items():
                out[BASIS.index(name)] += x * y * coef
    return CohClass(tuple(out), a.ctx)


def integrate(a: CohClass) -> Fraction:
    """Evaluation on the fundamental class: only ``h p`` integrates to 1."""
    return a["hp"]


def total_chern(which: str, ctx: RingContext) -> CohClass:
    """Total Chern class of ``J_Id`` or ``J_inf``.

    Scalars of degree 4 are read as multiples of the point class, so the
    Euler class of the base enters as ``chi * p``.
    """
    if which in ("J_Id", "id"):
        return CohClass.make(ctx, one=1, h=4, p=3 * ctx.tau + 3 * ctx.chi, hp=2 * ctx.chi)
    if which in ("J_inf", "inf"):
        if ctx.c1sq is None:
            raise RingError("c(J_inf) needs a context with a declared complex structure")
        one = CohClass.one(ctx)
        return (one + CohClass.make(ctx, h=2)) * (one + CohClass.make(ctx, c=1, p=ctx.chi))
    raise RingError(f"unknown structure {which!r}; expected J_Id or J_inf")


def first_chern(which: str, ctx: RingContext) -> CohClass:
    return total_chern(which, ctx).degree_part(2)


@dataclass(frozen=True)
class Obstruction:
    distinct_chern_numbers: bool
    detail: str
    c1_cubed_id: Fraction
    c1_cubed_inf: Fraction | None


def deformation_obstructed(ctx: RingContext) -> Obstruction:
    """Compare ``c1^3`` of ``J_Id`` (16(3 tau + 2 chi)) and ``J_inf`` (8(3 tau + 2 chi))."""
    k = 3 * ctx.tau + 2 * ctx.chi
    id_val = integrate(first_chern("J_Id", ctx) ** 3)
    inf_val = integrate(first_chern("J_inf", ctx) ** 3) if ctx.c1sq is not None else None
    if k != 0:
        detail = (f"c1(J_Id)^3 = {id_val} differs from c1(J_inf)^3 = {Fraction(8 * k)}; "
                  "the structures cannot be deformed into each other")
        return Obstruction(True, detail, id_val, inf_val)
    detail = ("3 tau + 2 chi = 0, so both Chern numbers vanish; "
              "deciding the deformation question requires B = 0 analysis (comparison of first Chern classes)")
    return Obstruction(False, detail, id_val, inf_val)


def c1_power_map(n: int, ctx: RingContext | None = None) -> CohClass:
    """First Chern class ``2(n + 1) h`` of the power-twist structure; only odd ``n`` is integrable."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1 or n % 2 == 0:
        raise RingError(f"power map exponent must be an odd positive integer, got {n!r}")
    ctx = RingContext(0, 0, 0) if ctx is None else ctx
    return CohClass.make(ctx, h=2 * (int(n) + 1))


# --- Gauss-Bonnet -----------------------------------------------------------

DE_HALF_WIDTH = 2.0  # double-exponential trapezoid on t in [-L, L]
REL_TOL = 1e-3
CHUNK = 16384


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, result: "GaussBonnetResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class GaussBonnetResult:
    value: float  # refined grid
    coarse: float  # grid at the chart's resolution hint
    gap: float
    tol: float
    converged: bool
    points: int


@dataclass(frozen=True)
class _Rule:
    fine_x: np.ndarray
    fine_w: np.ndarray
    coarse_x: np.ndarray
    coarse_w: np.ndarray
    nested: np.ndarray | None  # positions of the coarse nodes inside the fine rule


def _rule(iv: Interval, n: int) -> _Rule:
    lo, hi = iv.lo, iv.hi
    if iv.periodic:
        def mid(m):
            x = lo + (np.arange(m) + 0.5) * (hi - lo) / m
            return x, np.full(m, (hi - lo) / m)
        fx, fw = mid(2 * n)
        cx, cw = mid(n)
        return _Rule(fx, fw, cx, cw, None)
    if math.isfinite(lo) and math.isfinite(hi):
        def gl(m):
            t, w = np.polynomial.legendre.leggauss(m)
            return lo + (t + 1.0) * (hi - lo) / 2, w * (hi - lo) / 2
        fx, fw = gl(2 * n)
        cx, cw = gl(n)
        return _Rule(fx, fw, cx, cw, None)
    # infinite ends: trapezoid after a double-exponential substitution
    n = n if n % 2 else n + 1
    m = 2 * n - 1
    t = np.linspace(-DE_HALF_WIDTH, DE_HALF_WIDTH, m)
    h = t[1] - t[0]
    s = 0.5 * np.pi * np.sinh(t)
    ds = 0.5 * np.pi * np.cosh(t)
    if math.isinf(lo) and math.isinf(hi):
        x, dx = np.sinh(s), np.cosh(s) * ds
    elif math.isinf(hi):
        x, dx = lo + np.exp(s), np.exp(s) * ds
    else:
        x, dx = hi - np.exp(-s), np.exp(-s) * ds
    w = h * dx
    idx = np.arange(0, m, 2)
    return _Rule(x, w, x[idx], 2.0 * w[idx], idx)


def _integrate_grid(chart: Chart, xs, ws) -> np.ndarray:
    """Weighted integrand on the tensor grid, shape ``(n1, n2, n3, n4)``."""
    shape = tuple(len(x) for x in xs)
    grids = np.meshgrid(*xs, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    out = np.empty(len(pts))
    for start in range(0, len(pts), CHUNK):
        fd = frame_data(chart, pts[start:start + CHUNK])
        dens = 1.0 / np.abs(np.linalg.det(fd.E))
        out[start:start + CHUNK] = integrand_from_blocks(operator_from_endo(fd.endo)) * dens
    W = ws[0][:, None, None, None] * ws[1][None, :, None, None] * ws[2][None, None, :, None] * ws[3][None, None, None, :]
    return out.reshape(shape) * W


@functools.lru_cache(maxsize=16)
def _gauss_bonnet_grids(chart: Chart, n: int):
    """``(refined, coarse, refined point count)``; charts are immutable, so results are memoized."""
    rules = [_rule(iv, n) for iv in chart.domain]
    scale = 1.0 / (4.0 * np.pi**2)
    fine = _integrate_grid(chart, [r.fine_x for r in rules], [r.fine_w for r in rules])
    value = float(np.sum(fine)) * scale
    if all(r.nested is not None for r in rules):
        sub = fine[np.ix_(*[r.nested for r in rules])]
        # coarse weights relative to the fine weights at the shared nodes
        cw = [r.coarse_w / r.fine_w[r.nested] for r in rules]
        factor = cw[0][:, None, None, None] * cw[1][None, :, None, None] * cw[2][None, None, :, None] * cw[3][None, None, None, :]
        coarse = float(np.sum(sub * factor)) * scale
    else:
        coarse = float(np.sum(_integrate_grid(chart, [r.coarse_x for r in rules], [r.coarse_w for r in rules]))) * scale
    return value, coarse, int(np.prod([len(r.fine_x) for r in rules]))


def gauss_bonnet(chart: Chart, resolution: int | None = None, tol: float | None = None) -> GaussBonnetResult:
    """``(1 / 4 pi^2) * integral of (2|W+|^2 + s^2/24 - 2|B|^2) dvol`` with a doubling check.

    Periodic coordinates use the midpoint rule, bounded ones Gauss-Legendre
    and unbounded ones a double-exponential trapezoid. The value is taken on
    the doubled grid; the grid at the resolution hint serves as the check.
    Raises :class:`ConvergenceError` when the two disagree by more than ``tol``
    (default ``1e-3`` relative, with an absolute floor of ``1e-3``).
    """
    n = chart.resolution if resolution is None else int(resolution)
    value, coarse, points = _gauss_bonnet_grids(chart, n)
    gap = abs(value - coarse)
    tol = REL_TOL * max(1.0, abs(value)) if tol is None else float(tol)
    converged = bool(np.isfinite(value) and np.isfinite(coarse) and gap <= tol)
    result = GaussBonnetResult(value, coarse, gap, tol, converged, points)
    if not converged:
        raise ConvergenceError(
            f"Gauss-Bonnet integral on {chart.name} failed the doubling test "
            f"(coarse {coarse:.6g}, refined {value:.6g}, tolerance {tol:.3g}); the volume may be infinite",
            result,
        )
    return result


def gauss_bonnet_number(chart: Chart) -> float:
    return gauss_bonnet(chart).value
