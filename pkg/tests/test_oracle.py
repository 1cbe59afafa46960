import numpy as np
import pytest

from twistorlab import bivectors as bv
from twistorlab import catalog
from twistorlab.curvature import curvature_operator
from twistorlab.nijenhuis import assembled_nijenhuis, g_tensor
from twistorlab.oracle import bruteforce_nijenhuis
from twistorlab.twistor import MorphismError, parse_morphism, sample_points, vertical_basis

MORPHISMS = ["id", "antipodal", "const", "lambda:2", "lambda:0.5+0.5i", "power:n=3,lambda=1,phase=4*pi*x1",
             "custom:a'=a;zr'=zr*cos(x1)-zi*sin(x1);zi'=zr*sin(x1)+zi*cos(x1)"]


def _tangent(rng, q, unit=False):
    X1, X2 = vertical_basis(q)
    c = rng.normal(size=6)
    if unit:
        c /= np.linalg.norm(c)
    return c[:4], c[4] * X1 + c[5] * X2


def test_flat_identity_vanishes():
    ch = catalog.flat_r4()
    f = parse_morphism("id")
    rng = np.random.default_rng(0)
    for z in sample_points(ch, 4, 1, seed=0):
        h, v = bruteforce_nijenhuis(ch, f, np.array(z.x), z.q, _tangent(rng, z.q.array, True),
                                    _tangent(rng, z.q.array, True))
        assert np.max(np.abs(h)) <= 1e-12 and np.max(np.abs(v)) <= 1e-12


def test_sphere_constant_matches_vertical_term():
    ch = catalog.round_s4()
    f = parse_morphism("const")
    for z in sample_points(ch, 3, 2, seed=1):
        x = np.array(z.x)
        blocks = curvature_operator(ch, x)
        p = f.evaluate(ch, x[None], z.q.array[None])[0]
        # P = I makes (theta1, theta2) a complex line, on which the term vanishes identically
        for i, j in ((0, 2), (1, 3)):
            ei, ej = np.eye(4)[i], np.eye(4)[j]
            _, v = bruteforce_nijenhuis(ch, f, x, z.q, (ei, np.zeros(3)), (ej, np.zeros(3)))
            G = bv.sd_coeffs(g_tensor(blocks, z.q, p, i, j))
            assert np.linalg.norm(G) > 1e-2
            # the true vertical component is minus the bracket built from the curvature operator
            assert np.max(np.abs(v + G)) <= 1e-4


@pytest.mark.parametrize("name", ["round_s4", "cp2_fs", "bielliptic"])
def test_vertical_pairs_vanish(name):
    ch = catalog.get(name).chart
    rng = np.random.default_rng(2)
    for text in ("id", "lambda:0.5+0.5i", "antipodal"):
        f = parse_morphism(text)
        for z in sample_points(ch, 2, 1, seed=2):
            X1, X2 = vertical_basis(z.q.array)
            h, v = bruteforce_nijenhuis(ch, f, np.array(z.x), z.q, (np.zeros(4), X1), (np.zeros(4), X2))
            assert np.max(np.abs(h)) <= 1e-6 and np.max(np.abs(v)) <= 1e-6
            h, v = assembled_nijenhuis(ch, f, np.array(z.x), z.q, (np.zeros(4), X1), (np.zeros(4), X2))
            assert not h.any() and not v.any()


@pytest.mark.parametrize("name", catalog.names())
def test_assembly_matches_bruteforce(name):
    ch = catalog.get(name).chart
    rng = np.random.default_rng(3)
    z = sample_points(ch, 1, 1, seed=4)[0]
    x = np.array(z.x)
    for text in MORPHISMS:
        f = parse_morphism(text)
        V, W = _tangent(rng, z.q.array), _tangent(rng, z.q.array)
        try:
            a = assembled_nijenhuis(ch, f, x, z.q, V, W)
        except MorphismError:
            continue
        b = bruteforce_nijenhuis(ch, f, x, z.q, V, W)
        scale = 1.0 + np.max(np.abs(b[0])) + np.max(np.abs(b[1]))
        assert np.max(np.abs(a[0] - b[0])) <= 1e-5 * scale
        assert np.max(np.abs(a[1] - b[1])) <= 1e-5 * scale
