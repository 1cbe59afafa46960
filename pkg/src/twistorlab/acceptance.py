"""Acceptance criteria 1-13 as plain functions shared by the test suite and ``verify-all``.

Each criterion returns a :class:`CriterionResult` holding the measured
quantities next to their thresholds, so a failure reports how far off it is.
Random draws come from generators seeded by ``(seed, criterion number)``.
"""

from __future__ import annotations

import json
import math
import sys
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bivectors as bv
from . import catalog
from .charts import sample_box
from .chern import (
    ConvergenceError,
    RingContext,
    deformation_obstructed,
    first_chern,
    gauss_bonnet,
    integrate,
)
from .curvature import CurvatureBlocks, curvature_operator, lck_split
from .nijenhuis import (
    PAIRS,
    assembled_nijenhuis,
    case_d_product,
    classify_theorem2,
    fiber_samples,
    fiber_survivors,
    full_check,
    g_tensor,
    lemma3_g,
    semi_integrable_residual,
    theorem_e_scan,
    verify_semi_integrable,
)
from .oracle import bruteforce_nijenhuis
from .twistor import (
    MorphismError,
    equivariance_gap,
    identification_map,
    parse_morphism,
    power_map,
    sample_points,
    vertical_basis,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    detail: str = ""

    def as_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "measured": _plain(self.measured), "detail": self.detail}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.title}" + (f": {self.detail}" if self.detail else "")


def _plain(value):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    return value


def _rng(seed: int, number: int, tag: str = "") -> np.random.Generator:
    return np.random.default_rng(zlib.crc32(f"{seed}:{number}:{tag}".encode()))


def _seed(seed: int, number: int, tag: str = "") -> int:
    return zlib.crc32(f"{seed}:{number}:{tag}".encode())


def _chart(name):
    return catalog.get(name).chart


# --- 1 ---------------------------------------------------------------------------


def criterion_1(seed: int = 0) -> CriterionResult:
    """The G1/G2 identities at 1e-12."""
    rng = _rng(seed, 1)
    tol = 1e-12
    e = np.eye(4)
    I, J, K = bv.SELF_DUAL
    worst_closed = worst_g2 = worst_sq = worst_sum = 0.0
    for _ in range(200):
        a, b, c = bv.UnitQ.normalized(*rng.normal(size=3)).coeffs
        P = a * I + b * J + c * K
        worst_sq = max(worst_sq, float(np.max(np.abs(P @ P + np.eye(4)))))
        G1 = bv.g1(e[0], e[1], P)
        worst_closed = max(worst_closed, float(np.max(np.abs(G1 - ((1 - a * a) * I - a * b * J - a * c * K)))))
        u, v = rng.normal(size=(2, 4))
        g1 = bv.g1(u, v, P)
        g2 = bv.g2(u, v, P)
        worst_g2 = max(worst_g2, float(np.max(np.abs(g2 - P @ g1))))
        worst_sum = max(worst_sum, float(np.max(np.abs(g1 + P @ g2))))
    table = [
        ((0, 1), J, I), ((0, 1), K, I), ((0, 2), I, J), ((0, 2), K, J), ((0, 3), I, K), ((0, 3), J, K),
        ((0, 1), I, 0 * I), ((0, 2), J, 0 * I), ((0, 3), K, 0 * I),
    ]
    worst_table = max(float(np.max(np.abs(bv.g1(e[i], e[j], P) - want))) for (i, j), P, want in table)
    measured = {"g1_closed_form": worst_closed, "g2_equals_P_g1": worst_g2, "P_squared": worst_sq,
                "g1_plus_P_g2": worst_sum, "table": worst_table, "tol": tol}
    passed = max(worst_closed, worst_g2, worst_sq, worst_sum, worst_table) <= tol
    return CriterionResult(1, "G1/G2 bivector identities", passed, measured,
                           f"max deviation {max(worst_closed, worst_g2, worst_sq, worst_sum, worst_table):.2e}")


# --- 2 ---------------------------------------------------------------------------


def criterion_2(seed: int = 0) -> CriterionResult:
    """Antipodal map: holomorphy-defect witness everywhere, flat charts with E = F = G = 0."""
    f = parse_morphism("antipodal")
    measured = {}
    passed = True
    for name in catalog.names():
        ch = _chart(name)
        rep = full_check(ch, f, sample_points(ch, 4, 4, _seed(seed, 2, name)))
        ok = rep.failing_witness is not None and rep.failing_witness[1] == "defect" and rep.max_defect >= 1e-2
        measured[name] = {"witness": rep.failing_witness[1] if rep.failing_witness else None,
                          "defect": float(np.min(rep.defect))}
        passed &= ok
        if name in ("flat_r4", "flat_torus"):
            flat = max(rep.maxE, rep.maxF, rep.maxG)
            measured[name]["max_EFG"] = flat
            passed &= flat <= 1e-12
    low = min(v["defect"] for v in measured.values())
    return CriterionResult(2, "antipodal fiber map is never integrable", passed, measured,
                           f"smallest defect {low:.3f}")


# --- 3 ---------------------------------------------------------------------------


def criterion_3(seed: int = 0) -> CriterionResult:
    f = parse_morphism("id")
    measured = {}
    passed = True
    for name in ("round_s4", "hyperbolic_h4"):
        ch = _chart(name)
        rep = full_check(ch, f, sample_points(ch, 16, 4, _seed(seed, 3, name)))
        measured[name] = rep.maxG
        passed &= rep.maxG <= 1e-8
    ch = _chart("cp2_fs")
    rep = full_check(ch, f, sample_points(ch, 16, 4, _seed(seed, 3, "cp2_fs")))
    label = rep.failing_witness[1] if rep.failing_witness else None
    measured["cp2_fs"] = {"maxG": rep.maxG, "witness": label}
    passed &= label == "G" and rep.maxG >= 1e-2
    return CriterionResult(3, "J_Id integrable iff A is a homothety", passed, measured,
                           f"S4 {measured['round_s4']:.1e}, H4 {measured['hyperbolic_h4']:.1e}, CP2 witness {label}")


# --- 4 ---------------------------------------------------------------------------


def criterion_4(seed: int = 0) -> CriterionResult:
    ch = _chart("cp2_fs")
    pts = sample_points(ch, 16, 4, _seed(seed, 4))
    rep = full_check(ch, parse_morphism("const"), pts)
    comps = {"maxH": rep.maxH, "maxG": rep.maxG, "defect": rep.max_defect}
    ok_const = max(comps.values()) <= 1e-7 and rep.integrable
    # closed form G(theta1, theta2) at Q = J, P = aI + bJ + cK
    rng = _rng(seed, 4, "closed")
    worst = 0.0
    for pt in pts[::4]:
        blocks = curvature_operator(ch, np.array(pt.x))
        s = 4.0 * float(np.trace(blocks.A))
        p = bv.UnitQ.normalized(*rng.normal(size=3)).array
        want = (1 - p[0] ** 2) * (s / 2) * bv.K
        worst = max(worst, float(np.max(np.abs(g_tensor(blocks, (0.0, 1.0, 0.0), p, 0, 1) - want))))
    synth = full_check(ch, parse_morphism("const:cos(x1),sin(x1),0"), pts)
    label = synth.failing_witness[1] if synth.failing_witness else None
    passed = ok_const and worst <= 1e-8 and label == "E"
    measured = {"const": comps, "closed_form": worst, "synthetic_witness": label, "synthetic_maxE": synth.maxE}
    return CriterionResult(4, "J_inf on a Kahler base", passed, measured,
                           f"const max {max(comps.values()):.1e}, closed form {worst:.1e}, synthetic witness {label}")


# --- 5 ---------------------------------------------------------------------------


def criterion_5(seed: int = 0) -> CriterionResult:
    measured = {}
    passed = True
    for name in ("flat_torus", "bielliptic"):
        ch = _chart(name)
        pts = sample_points(ch, 16, 4, _seed(seed, 5, name))
        for lam in ("2", "-1", "0.5+0.5i"):
            rep = full_check(ch, parse_morphism(f"lambda:{lam}"), pts)
            worst = max(rep.maxH, rep.maxG, rep.max_defect)
            measured[f"{name} lambda={lam}"] = worst
            passed &= rep.integrable and worst <= 1e-7
    ch = _chart("cp2_fs")
    rep = full_check(ch, parse_morphism("lambda:2"), sample_points(ch, 16, 4, _seed(seed, 5, "cp2")))
    label = rep.failing_witness[1] if rep.failing_witness else None
    measured["cp2_fs lambda=2"] = {"witness": label, "maxG": rep.maxG}
    passed &= label == "G"
    worst = max(v for v in measured.values() if isinstance(v, float))
    return CriterionResult(5, "lambda Id on flat bases", passed, measured,
                           f"flat max {worst:.1e}, CP2 witness {label}")


# --- 6 ---------------------------------------------------------------------------


def criterion_6(seed: int = 0) -> CriterionResult:
    x0 = _rng(seed, 6).uniform(-0.4, 0.4, 4)
    measured = {}
    passed = True
    for name, want in (("round_s4", True), ("hyperbolic_h4", True), ("flat_r4", False)):
        blocks = curvature_operator(_chart(name), x0)
        scan = theorem_e_scan(blocks)
        measured[name] = {"unique": scan.unique, "survivors": scan.survivors}
        passed &= scan.unique == want
        if want:
            found = fiber_survivors(blocks, (0.0, 1.0, 0.0))
            only = len(found) == 1 and float(np.linalg.norm(found[0] - np.array([0.0, 1.0, 0.0]))) <= 1e-2
            measured[name]["fiber_survivors"] = found.round(6).tolist()
            passed &= only
    return CriterionResult(6, "identity is the only semi-integrable choice", passed, measured,
                           "S4/H4 unique, flat not unique" if passed else "unexpected scan outcome")


# --- 7 ---------------------------------------------------------------------------


def criterion_7(seed: int = 0) -> CriterionResult:
    rng = _rng(seed, 7)
    measured = {}
    passed = True
    for name, want in (("flat_torus", "A"), ("s2xh2", "A"), ("cp2_fs", "B")):
        ch = _chart(name)
        cases, resid = set(), 0.0
        lo, hi = _inner_box(ch)
        for x in rng.uniform(lo, hi, size=(4, 4)):
            blocks = curvature_operator(ch, x)
            xv, yv, ok = lck_split(ch, x, blocks=blocks)
            v = classify_theorem2(xv, yv, tol=1e-7, adapted=ok)
            cases.add(v.case)
            if v.case == want:
                resid = max(resid, verify_semi_integrable(blocks, v))
        measured[name] = {"cases": sorted(cases), "residual": resid}
        passed &= cases == {want} and resid <= 1e-7
    qs = fiber_samples(32, seed=_seed(seed, 7, "fiber"))
    s = np.array([1.0, 0.0, 0.0])
    controls = (lambda q: q, lambda q: power_map(q, s, 2.0, 1), lambda q: s)
    for (xv, yv), want in (((0.5, 1.0), "C"), ((2.0, 1.0), "D")):
        v = classify_theorem2(xv, yv)
        blocks = CurvatureBlocks.from_blocks(np.diag([xv, yv, yv]))
        resid = verify_semi_integrable(blocks, v, samples=qs)
        neg = min(semi_integrable_residual(blocks, m, qs) for m in controls)
        entry = {"case": v.case, "residual": resid, "negative_control_min": neg}
        ok = v.case == want and resid <= 1e-7 and neg >= 1e-2
        if want == "C":
            entry["theta"] = v.theta
            ok &= abs(v.theta - math.pi / 3) <= 1e-12
        else:
            u1, u2 = (z.real for z in v.factors)
            exact = case_d_product(v)
            entry.update(u1=u1, u2=u2, product=u1 * u2, product_exact=exact)
            ok &= abs(u1 - (2 + math.sqrt(3))) <= 1e-12 and abs(u2 - (2 - math.sqrt(3))) <= 1e-12
            # the identity holds exactly over the rationals; in floating point to a few ulps
            ok &= exact == 1 and abs(u1 * u2 - 1.0) <= 4 * sys.float_info.epsilon
        measured[f"synthetic {xv},{yv}"] = entry
        passed &= ok
    return CriterionResult(7, "classification by the eigenvalue pair of A", passed, measured,
                           "cases A, A, B, C, D as expected" if passed else "classification mismatch")


def _inner_box(ch):
    lo, hi = np.empty(4), np.empty(4)
    for k, iv in enumerate(ch.domain):
        lo[k] = max(iv.lo + 1e-3, -1.0) if not iv.periodic else iv.lo
        hi[k] = min(iv.hi - 1e-3, 1.0) if not iv.periodic else iv.hi - 1e-9
    return lo, hi


# --- 8 ---------------------------------------------------------------------------


def criterion_8(seed: int = 0) -> CriterionResult:
    ch = _chart("bielliptic")
    pts = sample_points(ch, 16, 4, _seed(seed, 8))
    h = identification_map(ch)
    x = np.array([p.x for p in pts])
    q = np.array([p.q.array for p in pts])
    measured = {}
    passed = True
    for n in (1, 2, 3, 5):
        f = parse_morphism(f"power:n={n},lambda=2,phase=2*pi*({n}-1)*x1")
        gap = equivariance_gap(f, ch, x, q, h)
        entry = {"equivariance_gap": gap}
        if n % 2:
            rep = full_check(ch, f, pts)
            worst = max(rep.maxH, rep.maxG, rep.max_defect)
            entry["nijenhuis_max"] = worst
            passed &= rep.integrable and worst <= 1e-7 and gap <= 1e-9
        else:
            passed &= gap >= 1e-2
        measured[f"n={n}"] = entry
    return CriterionResult(8, "Power twists on the bielliptic surface", passed, measured,
                           "odd n integrable and equivariant, n = 2 not equivariant" if passed else "mismatch")


# --- 9 ---------------------------------------------------------------------------

ORACLE_MORPHISMS = ("id", "antipodal", "const", "lambda:2", "lambda:0.5+0.5i",
                    "power:n=3,lambda=2,phase=x1", "custom:a'=a;zr'=zi;zi'=-zr")


def criterion_9(seed: int = 0, draws: int = 100) -> CriterionResult:
    rng = _rng(seed, 9)
    names = catalog.names()
    worst, scale, done = 0.0, 0.0, 0
    while done < draws:
        name = names[rng.integers(len(names))]
        spec = ORACLE_MORPHISMS[rng.integers(len(ORACLE_MORPHISMS))]
        ch = _chart(name)
        f = parse_morphism(spec)
        x = rng.uniform(*sample_box(ch, margin=0.1, infinite_extent=0.9))
        q = bv.UnitQ.normalized(*rng.normal(size=3)).array
        X1, X2 = vertical_basis(q)
        V = (rng.normal(size=4), rng.normal() * X1 + rng.normal() * X2)
        W = (rng.normal(size=4), rng.normal() * X1 + rng.normal() * X2)
        try:
            hb, vb = bruteforce_nijenhuis(ch, f, x, q, V, W)
        except MorphismError:
            continue  # the morphism needs a section this chart does not carry
        ha, va = assembled_nijenhuis(ch, f, x, q, V, W)
        worst = max(worst, float(np.max(np.abs(hb - ha))), float(np.max(np.abs(vb - va))))
        scale = max(scale, float(np.max(np.abs(hb))), float(np.max(np.abs(vb))))
        done += 1
    # F = -E for the identity
    f = parse_morphism("id")
    fe = 0.0
    for name in ("bielliptic", "round_s4", "cp2_fs", "s2xh2"):
        ch = _chart(name)
        rep = full_check(ch, f, sample_points(ch, 4, 4, _seed(seed, 9, name)))
        fe = max(fe, float(np.max(np.abs(rep.E + rep.F))))
    passed = worst <= 1e-5 and fe <= 1e-7
    return CriterionResult(9, "Oracle equivalence", passed,
                           {"draws": done, "max_deviation": worst, "largest_component": scale, "F_plus_E": fe},
                           f"max deviation {worst:.1e} over {done} draws, |F + E| {fe:.1e}")


# --- 10 --------------------------------------------------------------------------


def criterion_10(seed: int = 0) -> CriterionResult:
    rng = _rng(seed, 10)
    measured = {}
    passed = True
    for name in ("round_s4", "hyperbolic_h4"):
        ch = _chart(name)
        worst = 0.0
        for _ in range(30):
            x = rng.uniform(-0.4, 0.4, 4)
            blocks = curvature_operator(ch, x)
            q, p = (bv.UnitQ.normalized(*v).array for v in rng.normal(size=(2, 3)))
            i, j = PAIRS[rng.integers(len(PAIRS))]
            worst = max(worst, float(np.max(np.abs(lemma3_g(blocks.ricci, 1, q, p, i, j) - g_tensor(blocks, q, p, i, j)))))
        measured[name] = worst
        passed &= worst <= 1e-8
    flat = 0.0
    for _ in range(10):
        q, p = (bv.UnitQ.normalized(*v).array for v in rng.normal(size=(2, 3)))
        for i, j in PAIRS:
            flat = max(flat, float(np.max(np.abs(lemma3_g(np.zeros((4, 4)), 1, q, p, i, j)))))
    measured["ricci_flat"] = flat
    passed &= flat == 0.0
    return CriterionResult(10, "vertical term from the Ricci tensor", passed, measured,
                           f"S4 {measured['round_s4']:.1e}, H4 {measured['hyperbolic_h4']:.1e}, Ricci-flat {flat}")


# --- 11 --------------------------------------------------------------------------


def criterion_11(seed: int = 0) -> CriterionResult:
    rng = _rng(seed, 11)
    ok_cubes = True
    for _ in range(20):
        tau, chi = (int(v) for v in rng.integers(-40, 41, size=2))
        ctx = RingContext.complex_surface(tau, chi)
        k = 3 * tau + 2 * chi
        ok_cubes &= integrate(first_chern("J_Id", ctx) ** 3) == 16 * k
        ok_cubes &= integrate(first_chern("J_inf", ctx) ** 3) == 8 * k
    k3 = deformation_obstructed(RingContext.complex_surface(-16, 24))
    torus = deformation_obstructed(RingContext.complex_surface(0, 0))
    cp2 = deformation_obstructed(RingContext.complex_surface(1, 3))
    passed = ok_cubes and not k3.distinct_chern_numbers and not torus.distinct_chern_numbers and cp2.distinct_chern_numbers
    measured = {"cubes_exact": ok_cubes, "K3": k3.distinct_chern_numbers, "torus": torus.distinct_chern_numbers,
                "CP2": cp2.distinct_chern_numbers}
    return CriterionResult(11, "Chern numbers and deformation obstruction", passed, measured,
                           "c1^3 = 16k and 8k exactly; K3/torus unobstructed, CP2 obstructed")


# --- 12 --------------------------------------------------------------------------


def criterion_12(seed: int = 0) -> CriterionResult:
    targets = (("flat_torus", 0.0, 1e-10), ("round_s4", 4.0, 1e-3), ("cp2_fs", 9.0, 1e-2))
    measured = {}
    passed = True
    for name, want, tol in targets:
        try:
            res = gauss_bonnet(_chart(name))
        except ConvergenceError as exc:
            res = exc.result
        ok = res is not None and res.converged and abs(res.value - want) <= tol
        measured[name] = {"value": res.value, "coarse": res.coarse, "gap": res.gap, "converged": res.converged,
                          "error": abs(res.value - want), "tol": tol}
        passed &= ok
    detail = ", ".join(f"{k} {v['value']:.6f}" for k, v in measured.items())
    return CriterionResult(12, "Gauss-Bonnet integrals", passed, measured, detail)


# --- 13 --------------------------------------------------------------------------


def criterion_13(seed: int = 0) -> CriterionResult:
    """Repeat the sampled criteria with the same seed and compare their machine output."""
    runs = []
    for _ in range(2):
        doc = [c(seed).as_dict() for c in (criterion_3, criterion_7)]
        runs.append(json.dumps(doc, sort_keys=True))
    same = runs[0] == runs[1]
    return CriterionResult(13, "Determinism of seeded runs", same, {"identical": same},
                           "repeated seeded runs are byte-identical" if same else "repeated runs differ")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13)


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    out = []
    for k, crit in enumerate(CRITERIA, start=1):
        if only is not None and k not in only:
            continue
        out.append(crit(seed))
    return out
