import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from twistorlab import bivectors as bv

e = np.eye(4)
finite = st.floats(-3, 3, allow_nan=False)
vec4 = st.lists(finite, min_size=4, max_size=4).map(np.array)
unit3 = st.lists(finite, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3).map(
    lambda v: np.array(v) / np.linalg.norm(v))


def _skew(rng):
    m = rng.normal(size=(4, 4))
    return m - m.T


def test_wedge_matches_action_convention():
    u, v, w = np.random.default_rng(0).normal(size=(3, 4))
    assert np.allclose(bv.wedge(u, v) @ w, (u @ w) * v - (v @ w) * u)


def test_printed_matrix_of_I():
    expected = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
    assert np.array_equal(bv.I, expected)


def test_quaternion_relations():
    for M in (bv.I, bv.J, bv.K):
        assert np.allclose(M @ M, -np.eye(4))
    assert np.allclose(bv.I @ bv.J, bv.K)
    assert np.allclose(bv.commutator(bv.I, bv.J), 2 * bv.K)
    assert np.allclose(bv.commutator(bv.I, bv.I), 0)


def test_basis6_orthonormal():
    gram = bv.inner(bv.BASIS6[:, None], bv.BASIS6[None, :])
    assert np.allclose(gram, np.eye(6), atol=1e-15)


def test_inner_examples():
    assert bv.inner(bv.I, bv.I) == pytest.approx(1.0)
    assert bv.inner(bv.I, bv.J) == pytest.approx(0.0)
    assert bv.inner(bv.wedge(e[0], e[1]), bv.wedge(e[0], e[1])) == pytest.approx(0.5)


def test_hodge_star_eigenspaces():
    assert np.allclose(bv.hodge_star(bv.SELF_DUAL), bv.SELF_DUAL)
    assert np.allclose(bv.hodge_star(bv.ANTI_SELF_DUAL), -bv.ANTI_SELF_DUAL)


def test_split_of_e12():
    a = bv.wedge(e[0], e[1])
    assert np.allclose(bv.project_pm(a, 1), bv.I / 2)
    assert np.allclose(bv.project_pm(a, -1), bv.IBAR / 2)
    assert np.allclose(bv.project_pm(bv.I, 1), bv.I)
    assert np.allclose(bv.project_pm(bv.I, -1), 0)


def test_random_split_recombines():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = _skew(rng)
        assert np.max(np.abs(bv.project_pm(a, 1) + bv.project_pm(a, -1) - a)) <= 1e-14


def test_project_rejects_bad_sign():
    with pytest.raises(ValueError):
        bv.project_pm(bv.I, 0)


def test_plus_and_minus_commute():
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = bv.project_pm(_skew(rng), 1)
        b = bv.project_pm(_skew(rng), -1)
        assert np.max(np.abs(bv.commutator(a, b))) <= 1e-12


def test_lemma_table():
    E1, E2, E3, E4 = e
    I, J, K = bv.I, bv.J, bv.K
    cases = [
        ((E1, E2, J), I), ((E1, E2, K), I),
        ((E1, E3, I), J), ((E1, E3, K), J),
        ((E1, E4, I), K), ((E1, E4, J), K),
        ((E1, E2, I), 0 * I), ((E1, E3, J), 0 * I), ((E1, E4, K), 0 * I),
    ]
    for (u, v, P), expected in cases:
        assert np.max(np.abs(bv.g1(u, v, P) - expected)) <= 1e-12


def test_check_complex_structure_rejects():
    with pytest.raises(ValueError):
        bv.check_complex_structure(2 * bv.I)


def test_unitq_validation():
    with pytest.raises(ValueError):
        bv.UnitQ((1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        bv.UnitQ.normalized(0, 0, 0)
    q = bv.UnitQ.normalized(3, 0, 4)
    assert np.allclose(q.array, [0.6, 0, 0.8])
    assert np.allclose(q.matrix @ q.matrix, -np.eye(4))


def test_as_coeffs_accepts_matrix():
    assert np.allclose(bv.as_coeffs(bv.J), [0, 1, 0])


@given(unit3)
def test_unit_combination_squares_to_minus_one(c):
    M = bv.sd_matrix(c)
    assert np.max(np.abs(M @ M + np.eye(4))) <= 1e-12


@given(vec4, vec4, unit3)
def test_g1_plus_p_g2_vanishes(u, v, c):
    P = bv.sd_matrix(c)
    assert np.max(np.abs(bv.g1(u, v, P) + P @ bv.g2(u, v, P))) <= 1e-12 * (1 + np.dot(u, u) + np.dot(v, v))


@given(vec4, vec4, unit3)
def test_g1_is_self_dual_and_orthogonal_to_p(u, v, c):
    P = bv.sd_matrix(c)
    g = bv.g1(u, v, P)
    scale = 1 + np.dot(u, u) + np.dot(v, v)
    assert np.max(np.abs(bv.project_pm(g, -1))) <= 1e-12 * scale
    assert abs(bv.inner(g, P)) <= 1e-12 * scale


@given(unit3)
def test_complete_frame_realizes_cross_product(s):
    t, u = bv.complete_frame(s)
    assert np.allclose([s @ t, s @ u, t @ u], 0, atol=1e-12)
    assert np.allclose(bv.sd_matrix(s) @ bv.sd_matrix(t), bv.sd_matrix(u), atol=1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_star_commutes_with_rotations(seed):
    rng = np.random.default_rng(seed)
    g = special_ortho_group.rvs(4, random_state=rng)
    a = _skew(rng)
    rotated = g @ a @ g.T
    assert np.allclose(bv.hodge_star(rotated), g @ bv.hodge_star(a) @ g.T, atol=1e-12)
