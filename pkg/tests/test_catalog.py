import numpy as np
import pytest

from twistorlab import bivectors as bv
from twistorlab import catalog
from twistorlab.charts import frame_at, sample_box
from twistorlab.chern import RingContext, gauss_bonnet
from twistorlab.curvature import curvature_operator, frame_data, invariants, lck_split
from twistorlab.nijenhuis import classify_theorem2, full_check
from twistorlab.twistor import identification_map, parse_morphism, sample_points

ENTRIES = catalog.entries()
IDS = [e.name for e in ENTRIES]


def _points(chart, n=50, seed=0):
    lo, hi = sample_box(chart, margin=0.1, infinite_extent=1.5)
    return np.random.default_rng(seed).uniform(lo, hi, size=(n, 4))


def _flag(entry, key):
    value = entry.labels.get(key)
    return None if value is None else value == "true"


def test_names_and_lookup():
    assert catalog.names() == ["flat_r4", "flat_torus", "bielliptic", "round_s4", "hyperbolic_h4", "cp2_fs",
                               "cp2_fs_reversed", "s2xh2"]
    with pytest.raises(KeyError):
        catalog.get("k3")
    with pytest.raises(ValueError):
        catalog.round_s4(r=-1.0)
    assert catalog.get("round_s4", r=2.0).chart.label("scalar_curvature") == "3.0"


@pytest.mark.parametrize("entry", ENTRIES, ids=IDS)
def test_curvature_labels(entry):
    ch = entry.chart
    blocks = curvature_operator(ch, _points(ch))
    W = blocks.A - (np.trace(blocks.A, axis1=-2, axis2=-1) / 3)[:, None, None] * np.eye(3)
    w_plus = np.max(np.linalg.norm(W, axis=(-2, -1)))
    s = 4 * np.trace(blocks.A, axis1=-2, axis2=-1)
    b = np.max(np.linalg.norm(blocks.B, axis=(-2, -1)))
    for key, measured in (("anti_self_dual", w_plus), ("scalar_flat", np.max(np.abs(s))), ("einstein", b)):
        flag = _flag(entry, key)
        if flag is True:
            assert measured <= 1e-8, key
        elif flag is False:
            assert measured > 1e-3, key
    if "scalar_curvature" in entry.labels:
        assert np.allclose(s, float(entry.labels["scalar_curvature"]), atol=1e-8)


@pytest.mark.parametrize("entry", ENTRIES, ids=IDS)
def test_hyperkahler_label(entry):
    ch = entry.chart
    fd = frame_data(ch, _points(ch, 20, 1))
    A = curvature_operator(ch, _points(ch, 20, 1)).A
    # I, J, K are all parallel exactly when the connection has no self-dual part
    omega = np.swapaxes(fd.gamma, -1, -2)
    sd = np.max(np.abs(bv.sd_coeffs(omega)))
    flat_plus = max(sd, float(np.max(np.abs(A))))
    if _flag(entry, "hyperkahler"):
        assert flat_plus <= 1e-10
    else:
        assert flat_plus > 1e-3


@pytest.mark.parametrize("entry", [e for e in ENTRIES if "kahler_section" in e.labels], ids=lambda e: e.name)
def test_kahler_section_is_integrable(entry):
    ch = entry.chart
    rep = full_check(ch, parse_morphism("const"), sample_points(ch, 8, 2, seed=3))
    assert rep.integrable and rep.maxE <= 1e-8


@pytest.mark.parametrize("entry", [e for e in ENTRIES if "theorem2_case" in e.labels], ids=lambda e: e.name)
def test_theorem2_label(entry):
    ch = entry.chart
    for x in _points(ch, 10, 4):
        x_val, y_val, ok = lck_split(ch, x)
        assert classify_theorem2(x_val, y_val, tol=1e-7, adapted=ok).case == entry.labels["theorem2_case"]


@pytest.mark.parametrize("entry", [e for e in ENTRIES if "chi" in e.labels], ids=lambda e: e.name)
def test_gauss_bonnet_matches_signature_and_euler(entry):
    tau, chi = int(entry.labels["tau"]), int(entry.labels["chi"])
    result = gauss_bonnet(entry.chart)
    assert result.converged
    assert result.value == pytest.approx(3 * tau + 2 * chi, abs=1e-2)


@pytest.mark.parametrize("entry", [e for e in ENTRIES if "c1_selfintersection" in e.labels], ids=lambda e: e.name)
def test_c1_label_is_consistent(entry):
    ctx = RingContext.complex_surface(int(entry.labels["tau"]), int(entry.labels["chi"]))
    assert ctx.c1sq == int(entry.labels["c1_selfintersection"])


def test_bielliptic_equivariance():
    ch = catalog.bielliptic()
    h = identification_map(ch)
    dh = np.diag([1.0, 1.0, -1.0, -1.0])
    for x in _points(ch, 20, 5):
        hx = h(x)
        # the differential of h carries the frame at x to the frame at h(x)
        assert np.allclose(dh @ frame_at(ch, x)[0], frame_at(ch, hx)[0], atol=1e-10)
        a, b = curvature_operator(ch, x), curvature_operator(ch, hx)
        assert np.allclose(a.full, b.full, atol=1e-10)
        assert np.allclose(invariants(a).ricci, invariants(b).ricci, atol=1e-10)
