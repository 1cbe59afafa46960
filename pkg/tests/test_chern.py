import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistorlab import catalog
from twistorlab.charts import Interval, frame_chart
from twistorlab.chern import (
    BASIS, CohClass, ConvergenceError, RingContext, RingError, c1_power_map, deformation_obstructed,
    first_chern, gauss_bonnet, gauss_bonnet_number, integrate, total_chern,
)

small = st.integers(-20, 20)
contexts = st.tuples(small, small).map(lambda t: RingContext.complex_surface(*t))
fractions = st.fractions(min_value=-10, max_value=10, max_denominator=7)


@st.composite
def classes(draw, ctx):
    return CohClass(tuple(draw(fractions) for _ in BASIS), ctx)


@st.composite
def triples(draw):
    ctx = draw(contexts)
    return ctx, draw(classes(ctx)), draw(classes(ctx)), draw(classes(ctx))


@given(triples())
def test_ring_axioms(t):
    ctx, a, b, c = t
    one = CohClass.one(ctx)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert one * a == a and a * one == a
    assert a - a == CohClass.make(ctx)


@given(contexts)
def test_top_chern_class_is_twice_euler(ctx):
    assert integrate(total_chern("J_Id", ctx).degree_part(6)) == 2 * ctx.chi
    assert integrate(total_chern("J_inf", ctx).degree_part(6)) == 2 * ctx.chi


@given(contexts)
def test_c1_cubed(ctx):
    k = 3 * ctx.tau + 2 * ctx.chi
    assert integrate(first_chern("J_Id", ctx) ** 3) == 16 * k
    assert integrate(first_chern("J_inf", ctx) ** 3) == 8 * k


def test_h_cubed():
    ctx = RingContext(1, 3)
    h = CohClass.make(ctx, h=1)
    assert h * h * h == CohClass.make(ctx, hp=Fraction(9, 4))
    assert integrate(h ** 3) == Fraction(9, 4)


def test_two_h_plus_c_cubed():
    ctx = RingContext.complex_surface(-16, 24)
    cls = CohClass.make(ctx, h=2, c=1)
    assert integrate(cls ** 3) == 8 * (3 * -16 + 2 * 24)
    ctx = RingContext.complex_surface(1, 3)
    assert integrate(CohClass.make(ctx, h=2, c=1) ** 3) == 72


def test_torus_total_chern():
    ctx = RingContext.complex_surface(0, 0)
    assert total_chern("J_Id", ctx) == CohClass.make(ctx, one=1, h=4)
    assert total_chern("J_Id", ctx).text() == "1 + 4*h"


def test_cp2_numbers():
    ctx = RingContext.complex_surface(1, 3)
    assert integrate(first_chern("J_Id", ctx) ** 3) == 144
    assert deformation_obstructed(ctx).distinct_chern_numbers


@pytest.mark.parametrize("tau, chi", [(-16, 24), (0, 0)])
def test_unobstructed_contexts(tau, chi):
    ob = deformation_obstructed(RingContext.complex_surface(tau, chi))
    assert not ob.distinct_chern_numbers
    assert "B = 0" in ob.detail


def test_power_map_classes():
    assert c1_power_map(1) == CohClass.make(RingContext(0, 0, 0), h=4)
    assert c1_power_map(1) == first_chern("J_Id", RingContext(0, 0, 0))
    assert c1_power_map(3)["h"] == 8
    for bad in (2, 0, -1, 1.0, True):
        with pytest.raises(RingError):
            c1_power_map(bad)


def test_ring_errors():
    with pytest.raises(RingError):
        RingContext(1, 3, 10)
    plain = RingContext(0, 2)
    with pytest.raises(RingError):
        CohClass.make(plain, c=1)
    with pytest.raises(RingError):
        total_chern("J_inf", plain)
    with pytest.raises(RingError):
        total_chern("J_foo", plain)
    with pytest.raises(RingError):
        CohClass.make(plain, q=1)
    with pytest.raises(RingError):
        CohClass.one(plain) + CohClass.one(RingContext(0, 0))


def test_text_rendering():
    ctx = RingContext.complex_surface(1, 3)
    assert CohClass.make(ctx, h=Fraction(-1, 2), hp=3).text() == "(-1/2)*h + 3*h*p"
    assert CohClass.make(ctx).text() == "0"


# --- Gauss-Bonnet -------------------------------------------------------------


def test_gauss_bonnet_flat_torus():
    assert abs(gauss_bonnet_number(catalog.flat_torus())) <= 1e-10


def test_gauss_bonnet_sphere():
    r = gauss_bonnet(catalog.round_s4())
    assert r.value == pytest.approx(4.0, abs=1e-3)
    assert r.converged and r.gap <= r.tol
    # constant integrand 6 over the volume 8 pi^2 / 3
    assert 6.0 * (8 * math.pi**2 / 3) / (4 * math.pi**2) == pytest.approx(4.0)


def test_gauss_bonnet_cp2():
    r = gauss_bonnet(catalog.cp2_fs())
    assert r.value == pytest.approx(9.0, abs=1e-2)
    assert r.converged


def test_gauss_bonnet_bounded_box():
    # a flat box with Gauss-Legendre nodes in every direction integrates to zero
    box = frame_chart("box", [Interval(0.0, 1.0)] * 4, [["1" if a == b else "0" for b in range(4)] for a in range(4)],
                      resolution=3)
    assert gauss_bonnet_number(box) == 0.0


def test_gauss_bonnet_infinite_volume_fails():
    with pytest.raises(ConvergenceError) as info:
        gauss_bonnet(catalog.hyperbolic_h4())
    assert not info.value.result.converged


def test_gauss_bonnet_flags_coarse_grids():
    # too few nodes: the nested refinement moves the value by far more than the tolerance
    with pytest.raises(ConvergenceError) as info:
        gauss_bonnet(catalog.round_s4(), resolution=7)
    r = info.value.result
    assert r.gap > r.tol and abs(r.value - 4.0) < abs(r.coarse - 4.0)
