import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistorlab import catalog
from twistorlab.charts import (
    ChartFormatError, DegenerateError, Interval, export_chart, frame_at, frame_chart, metric_at,
    metric_chart, parse_chart, sample_box, volume_density,
)
from twistorlab.jets import DomainError

R = Interval(-math.inf, math.inf)


def _points(chart, n, seed):
    lo, hi = sample_box(chart, margin=0.1, infinite_extent=1.5)
    return np.random.default_rng(seed).uniform(lo, hi, size=(n, 4))


def test_flat_frame():
    E, dE, d2E = frame_at(catalog.flat_r4(), np.array([0.3, -1.0, 2.0, 0.5]))
    assert np.array_equal(E, np.eye(4))
    assert not dE.any() and not d2E.any()


def test_bielliptic_columns_rotate():
    x1 = 0.13
    E, dE, _ = frame_at(catalog.bielliptic(), np.array([x1, 0.2, 0.4, 0.6]))
    c, s = math.cos(2 * math.pi * x1), math.sin(2 * math.pi * x1)
    assert np.allclose(E[2:, 2:], [[c, s], [-s, c]], atol=1e-15)
    assert np.allclose(E[:2, :2], np.eye(2))
    assert np.allclose(dE[2:, 2:, 0], 2 * math.pi * np.array([[-s, c], [-c, -s]]))


def test_metric_sphere_reproduces_conformal_frame():
    ch = catalog.round_s4(presentation="metric")
    xs = _points(ch, 10, 0)
    E, dE, d2E = frame_at(ch, xs)
    r2 = np.sum(xs * xs, axis=-1)
    expected = ((1 + r2) / 2)[:, None, None] * np.eye(4)
    assert np.max(np.abs(E - expected)) <= 1e-9
    # d_d E[a, a] = x_d
    assert np.allclose(np.einsum("naad->nad", dE), np.repeat(xs[:, None, :], 4, axis=1), atol=1e-12)
    assert np.allclose(np.einsum("naade->nade", d2E), np.broadcast_to(np.eye(4), (10, 4, 4, 4)), atol=1e-12)


def test_gram_schmidt_matches_cholesky():
    # orthonormalizing d1..d4 in order gives E = L^{-T} for the Cholesky factor g = L L^T
    ch = catalog.cp2_fs()
    xs = _points(ch, 20, 1)
    E, _, _ = frame_at(ch, xs)
    L = np.linalg.cholesky(metric_at(ch, xs))
    assert np.max(np.abs(E - np.linalg.inv(np.swapaxes(L, -1, -2)))) <= 1e-12


def test_gram_schmidt_jets_match_finite_differences():
    ch = catalog.cp2_fs()
    x = np.array([0.3, -0.4, 0.8, 0.1])
    E, dE, d2E = frame_at(ch, x)
    h = 1e-4
    for d in range(4):
        step = h * np.eye(4)[d]
        Ep, dEp, _ = frame_at(ch, x + step)
        Em, dEm, _ = frame_at(ch, x - step)
        assert np.max(np.abs((Ep - Em) / (2 * h) - dE[..., d])) <= 1e-7
        assert np.max(np.abs((dEp - dEm) / (2 * h) - d2E[..., d])) <= 1e-7


@pytest.mark.parametrize("name", catalog.names())
def test_frames_are_orthonormal(name):
    ch = catalog.get(name).chart
    xs = _points(ch, 25, 2)
    E, _, _ = frame_at(ch, xs)
    gram = np.swapaxes(E, -1, -2) @ metric_at(ch, xs) @ E
    assert np.max(np.abs(gram - np.eye(4))) <= 1e-10


def test_orientation_reversal_flips_last_column():
    x = np.array([0.2, 0.1, -0.3, 0.5])
    E, _, _ = frame_at(catalog.cp2_fs(), x)
    Er, _, _ = frame_at(catalog.cp2_fs_reversed(), x)
    assert np.allclose(Er[:, :3], E[:, :3])
    assert np.allclose(Er[:, 3], -E[:, 3])


@settings(max_examples=25)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=4, max_size=4), st.integers(-3, 3))
def test_periodic_jets_repeat(x, shift):
    ch = catalog.bielliptic()
    x = np.array(x)
    a = frame_at(ch, x)
    b = frame_at(ch, x + shift * np.array([1.0, 1.0, 1.0, 1.0]))
    for u, v in zip(a, b):
        assert np.max(np.abs(u - v)) <= 1e-12


def test_open_domain_boundary():
    ch = catalog.hyperbolic_h4()
    with pytest.raises(DomainError):
        frame_at(ch, np.array([0.5, 0.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        frame_at(catalog.flat_r4(), np.array([np.inf, 0.0, 0.0, 0.0]))


def test_degenerate_frame_and_metric():
    with pytest.raises(DegenerateError):
        frame_at(frame_chart("d", [R] * 4, [["x1", "0", "0", "0"], ["0", "1", "0", "0"],
                                            ["0", "0", "1", "0"], ["0", "0", "0", "1"]]), np.zeros(4))
    with pytest.raises(DegenerateError):
        frame_at(metric_chart("d", [R] * 4, [["1", "1", "0", "0"], ["1", "1", "0", "0"],
                                             ["0", "0", "1", "0"], ["0", "0", "0", "1"]]), np.zeros(4))


def test_volume_density():
    ch = catalog.round_s4()
    x = np.array([1.0, 0.0, 0.0, 0.0])
    assert volume_density(ch, x) == pytest.approx(1.0)  # 16 / (1 + 1)^4


CHART_TEXT = """
# a conformally flat chart
[chart]
name = bump
x1 in (-1, 1)
x2 in (-inf, inf)
x3 in (0, 2*pi) periodic
x4 in (-inf, inf)
orientation = -1
resolution = 6
[metric]
g_11 = exp(2*x1)
g_22 = exp(2*x1)
g_33 = exp(2*x1)
g_44 = exp(2*x1)
g_12 = 0
g_13 = 0
g_14 = 0
g_23 = 0
g_24 = 0
g_34 = 0
[truth]
note = free text
"""


def test_chart_file_round_trip():
    ch = parse_chart(CHART_TEXT)
    assert ch.name == "bump" and ch.orientation == -1 and ch.resolution == 6
    assert ch.domain[2] == Interval(0.0, 2 * math.pi, periodic=True)
    assert ch.label("note") == "free text"
    again = parse_chart(export_chart(ch))
    assert again == ch


@pytest.mark.parametrize("name", catalog.names())
def test_catalog_export_round_trip(name):
    ch = catalog.get(name).chart
    assert parse_chart(catalog.export(name)) == ch


@pytest.mark.parametrize("text, line", [
    ("name = x", 1),
    ("[chart]\nname = x\n[bogus]", 3),
    ("[chart]\nname = x\nx1 in (1, 0)", 3),
    ("[chart]\nname = x\nx1 in (0, foo)", 3),
    ("[chart]\nname = x\nx1 in (0, 1)\nx2 in (0, 1)\nx3 in (0, 1)\nx4 in (0, 1)\n[frame]\ne1_1 = 1 +", 8),
    ("[chart]\nname = x\nx1 in (0, 1)\nx2 in (0, 1)\nx3 in (0, 1)\nx4 in (0, 1)\n[frame]\nf1_1 = 1", 8),
])
def test_chart_format_errors_carry_line(text, line):
    with pytest.raises(ChartFormatError) as info:
        parse_chart(text)
    assert info.value.line == line


def test_chart_format_missing_pieces():
    head = "[chart]\nname = x\nx1 in (0, 1)\nx2 in (0, 1)\nx3 in (0, 1)\nx4 in (0, 1)\n"
    for text in (head, head + "[frame]\ne1_1 = 1\n", "[chart]\nname = x\n[frame]\ne1_1 = 1",
                 head + "[metric]\ng_11 = 1\ng_12 = 0\ng_21 = 1\n"):
        with pytest.raises(ChartFormatError):
            parse_chart(text)
