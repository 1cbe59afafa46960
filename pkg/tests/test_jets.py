import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistorlab.jets import DomainError, Jet2, stack

coef = st.floats(-2, 2, allow_nan=False)


def _quadratic(c0, g, H, x):
    """Jet of c0 + g.x + x.H.x / 2 at x (H symmetric)."""
    return Jet2(c0 + g @ x + 0.5 * x @ H @ x, g + H @ x, H)


def _sym(rng):
    m = rng.normal(size=(4, 4))
    return m + m.T


@given(st.integers(0, 2**31 - 1))
def test_product_rule(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=4)
    f = _quadratic(rng.normal(), rng.normal(size=4), _sym(rng), x)
    g = _quadratic(rng.normal(), rng.normal(size=4), _sym(rng), x)
    fg = f * g
    assert np.allclose(fg.value, f.value * g.value, rtol=1e-12)
    assert np.allclose(fg.grad, f.value * g.grad + g.value * f.grad, rtol=1e-12, atol=1e-12)
    hess = f.value * g.hess + g.value * f.hess + np.outer(f.grad, g.grad) + np.outer(g.grad, f.grad)
    assert np.allclose(fg.hess, hess, rtol=1e-12, atol=1e-12)


@given(st.integers(0, 2**31 - 1))
def test_chain_rule_through_exp(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=4)
    f = _quadratic(0.3 * rng.normal(), rng.normal(size=4), _sym(rng), x)
    e = f.exp()
    v = np.exp(f.value)
    assert np.allclose(e.grad, v * f.grad, rtol=1e-12)
    assert np.allclose(e.hess, v * (f.hess + np.outer(f.grad, f.grad)), rtol=1e-12, atol=1e-12)


@given(coef, coef)
def test_division_inverts_multiplication(a, b):
    x = Jet2.variable(np.array(1.5 + abs(a)), 0) * (2.0 + b * b)
    y = Jet2.variable(np.array(0.7), 1) + 1.0
    q = (x * y) / y
    assert np.allclose(q.value, x.value, rtol=1e-12)
    assert np.allclose(q.grad, x.grad, atol=1e-12)
    assert np.allclose(q.hess, x.hess, atol=1e-12)


def test_integer_powers():
    x = Jet2.variable(np.array(2.0), 0)
    assert np.isclose((x ** 3).hess[0, 0], 12.0)
    assert np.isclose((x ** -1).grad[0], -0.25)
    assert np.isclose((x ** 0).value, 1.0)
    with pytest.raises(TypeError):
        x ** 0.5


def test_domain_guards():
    zero = Jet2.constant(0.0)
    with pytest.raises(DomainError):
        zero.reciprocal()
    with pytest.raises(DomainError):
        (zero - 1.0).sqrt()


def test_sqrt_second_derivative():
    x = Jet2.variable(np.array(4.0), 2)
    r = x.sqrt()
    assert np.isclose(r.grad[2], 0.25)
    assert np.isclose(r.hess[2, 2], -1.0 / 32.0)


def test_stack_and_index():
    a = Jet2.variable(np.arange(3.0), 0)
    b = Jet2.variable(np.arange(3.0), 1)
    s = stack([a, b])
    assert s.value.shape == (3, 2)
    assert s.grad.shape == (3, 2, 4)
    assert np.array_equal(s[1].value, [1.0, 1.0])
    assert np.array_equal(s[:, 1].grad[:, 1], np.ones(3))
