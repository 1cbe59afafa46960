import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistorlab import expr as ex
from twistorlab.jets import DomainError


def test_parse_tree_shape():
    assert ex.parse("x1 + 2*x2") == ex.Add(ex.Var("x1"), ex.Mul(ex.Num(2.0), ex.Var("x2")))


def test_rotating_frame_coefficient():
    e = ex.parse("cos(2*pi*x1)")
    assert e == ex.Call("cos", ex.Mul(ex.Mul(ex.Num(2.0), ex.PI), ex.Var("x1")))
    assert ex.evaluate(e, {"x1": 0.25}) == pytest.approx(0.0, abs=1e-15)


def test_unbalanced_parenthesis_offset():
    with pytest.raises(ex.ExprSyntaxError) as info:
        ex.parse("1/(1 - x1")
    # the error sits at the end of the input, 0-based
    assert info.value.offset == 9


def test_unknown_identifier():
    with pytest.raises(ex.UnknownIdentifier) as info:
        ex.parse("x1 + foo")
    assert info.value.offset == 5


@pytest.mark.parametrize("text", ["2 +", "x1^x2", "x1^1.5", "sin x1", "(x1", "x1 x2", ""])
def test_syntax_errors(text):
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse(text)


def test_extra_variables():
    e = ex.parse("a*zr - zi", ("a", "zr", "zi"))
    assert ex.evaluate(e, {"a": 2.0, "zr": 3.0, "zi": 1.0}) == pytest.approx(5.0)


def test_power_and_unary_minus():
    assert ex.evaluate(ex.parse("-2^2"), {}) == -4.0
    assert ex.evaluate(ex.parse("2^-1"), {}) == 0.5
    assert ex.evaluate(ex.parse("8/2/2"), {}) == 2.0
    assert ex.evaluate(ex.parse("8-2-2"), {}) == 4.0


def test_domain_errors():
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse("1/x1"), {"x1": 0.0})
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse("sqrt(x1)"), {"x1": -1.0})
    with pytest.raises(DomainError):
        ex.eval_jet2(ex.parse("1/x1"), np.zeros(4))


def test_unbound_variable():
    with pytest.raises(KeyError):
        ex.evaluate(ex.parse("x2"), {"x1": 1.0})


def test_jet_examples():
    j = ex.eval_jet2(ex.parse("x1^2"), np.array([3.0, 0, 0, 0]))
    assert j.value == 9.0
    assert np.array_equal(j.grad, [6, 0, 0, 0])
    assert np.array_equal(j.hess, np.diag([2.0, 0, 0, 0]))
    j = ex.eval_jet2(ex.parse("sin(x1)"), np.zeros(4))
    assert j.value == 0.0
    assert np.array_equal(j.grad, [1, 0, 0, 0])
    assert np.array_equal(j.hess, np.zeros((4, 4)))


def test_batched_evaluation_matches_pointwise():
    e = ex.parse("exp(x1)*cos(x2) + x3*x4^3")
    xs = np.random.default_rng(0).normal(size=(5, 4))
    batch = ex.eval_jet2(e, xs)
    for k in range(5):
        single = ex.eval_jet2(e, xs[k])
        assert np.allclose(batch.value[k], single.value)
        assert np.allclose(batch.hess[k], single.hess)


# random expression trees for the printer and the jet checks

_leaves = st.one_of(
    st.sampled_from(ex.COORDINATES).map(ex.Var),
    st.integers(1, 5).map(lambda n: ex.Num(float(n))),
    st.just(ex.PI),
)


def _extend(children):
    safe_funcs = ("sin", "cos", "tanh")
    return st.one_of(
        st.tuples(children, children).map(lambda t: ex.Add(*t)),
        st.tuples(children, children).map(lambda t: ex.Sub(*t)),
        st.tuples(children, children).map(lambda t: ex.Mul(*t)),
        children.map(ex.Neg),
        st.tuples(children, st.integers(0, 3)).map(lambda t: ex.Pow(*t)),
        st.tuples(st.sampled_from(safe_funcs), children).map(lambda t: ex.Call(*t)),
        # denominators and exponentials kept away from singular or huge values
        st.tuples(children, children).map(lambda t: ex.Div(t[0], ex.Add(ex.Num(2.0), ex.Call("cos", t[1])))),
        children.map(lambda c: ex.Call("exp", ex.Call("sin", c))),
        children.map(lambda c: ex.Call("sqrt", ex.Add(ex.Num(2.0), ex.Call("sin", c)))),
    )


trees = st.recursive(_leaves, _extend, max_leaves=8)
points = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).map(np.array)


@given(trees)
def test_printer_round_trip(e):
    text = ex.to_text(e)
    again = ex.parse(text)
    assert ex.to_text(again) == text
    x = np.array([0.3, -0.7, 0.2, 0.9])
    env = ex.coordinate_env(x)
    assert ex.evaluate(again, env) == pytest.approx(ex.evaluate(e, env), rel=1e-12, abs=1e-12)


@settings(max_examples=100)
@given(trees, points)
def test_jet_matches_central_differences(e, x):
    j = ex.eval_jet2(e, x)
    f = lambda y: float(ex.evaluate(e, ex.coordinate_env(y)))  # noqa: E731
    assert j.value == pytest.approx(f(x), rel=1e-12, abs=1e-12)
    eye = np.eye(4)

    def grad(h):
        return np.array([(f(x + h * eye[k]) - f(x - h * eye[k])) / (2 * h) for k in range(4)])

    def hess(h):
        return np.array([[(f(x + h * eye[a] + h * eye[b]) - f(x + h * eye[a] - h * eye[b])
                           - f(x - h * eye[a] + h * eye[b]) + f(x - h * eye[a] - h * eye[b])) / (4 * h * h)
                          for b in range(4)] for a in range(4)])

    # Richardson extrapolation removes the h^2 term, which is large for nested oscillating calls
    h = 1e-3
    g_fd = (4 * grad(h / 2) - grad(h)) / 3
    h_fd = (4 * hess(h / 2) - hess(h)) / 3
    scale = 1.0 + np.max(np.abs(j.hess)) + np.max(np.abs(j.grad))
    assert np.max(np.abs(j.grad - g_fd)) <= 1e-6 * scale
    assert np.max(np.abs(j.hess - h_fd)) <= 1e-6 * scale
    assert np.array_equal(j.hess, np.swapaxes(j.hess, -1, -2))


def test_pi_constant():
    assert ex.evaluate(ex.parse("pi"), {}) == math.pi
