"""Built-in charts with ground-truth labels.

Labels are claims to be re-derived by the engine, never inputs to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .charts import Chart, Interval, export_chart, frame_chart, metric_chart

INF = math.inf
R = Interval(-INF, INF)
UNIT_PERIOD = Interval(0.0, 1.0, periodic=True)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    chart: Chart
    description: str

    @property
    def labels(self) -> dict[str, str]:
        return self.chart.labels


def _diag(entries) -> list[list[str]]:
    return [[entries[a] if a == b else "0" for b in range(4)] for a in range(4)]


def _fmt(v: float) -> str:
    return repr(float(v))


def flat_r4() -> Chart:
    return frame_chart(
        "flat_r4", [R] * 4, _diag(["1"] * 4), resolution=8,
        truth=(("anti_self_dual", "true"), ("scalar_flat", "true"), ("einstein", "true"),
               ("hyperkahler", "true"), ("kahler_section", "1, 0, 0"), ("theorem2_case", "A")),
    )


def flat_torus() -> Chart:
    return frame_chart(
        "flat_torus", [UNIT_PERIOD] * 4, _diag(["1"] * 4), resolution=4,
        truth=(("anti_self_dual", "true"), ("scalar_flat", "true"), ("einstein", "true"),
               ("hyperkahler", "true"), ("kahler_section", "1, 0, 0"), ("theorem2_case", "A"),
               ("tau", "0"), ("chi", "0"), ("c1_selfintersection", "0")),
    )


def bielliptic() -> Chart:
    # theta1 + i theta2 = d1 + i d2 and theta3 + i theta4 = exp(2 pi i x1) (d3 + i d4)
    frame = [
        ["1", "0", "0", "0"],
        ["0", "1", "0", "0"],
        ["0", "0", "cos(2*pi*x1)", "sin(2*pi*x1)"],
        ["0", "0", "-sin(2*pi*x1)", "cos(2*pi*x1)"],
    ]
    return frame_chart(
        "bielliptic", [UNIT_PERIOD] * 4, frame, resolution=4,
        truth=(("anti_self_dual", "true"), ("scalar_flat", "true"), ("einstein", "true"),
               ("hyperkahler", "false"), ("kahler_section", "1, 0, 0"), ("theorem2_case", "A"),
               ("tau", "0"), ("chi", "0"), ("c1_selfintersection", "0"),
               ("identification", "x1 + 1/2, x2, -x3, -x4")),
    )


def round_s4(r: float = 1.0, presentation: str = "frame") -> Chart:
    """Round 4-sphere of radius ``r`` in stereographic coordinates, metric ``4 / (1 + |x|^2/r^2)^2``."""
    if r <= 0:
        raise ValueError("radius must be positive")
    q = f"(x1^2 + x2^2 + x3^2 + x4^2) / {_fmt(r * r)}"
    truth = (("anti_self_dual", "true"), ("scalar_flat", "false"), ("einstein", "true"),
             ("hyperkahler", "false"), ("hermitian_section", "1, 0, 0"),
             ("scalar_curvature", _fmt(12.0 / (r * r))), ("tau", "0"), ("chi", "2"))
    name = "round_s4" if r == 1.0 else f"round_s4_r{_fmt(r)}"
    if presentation == "frame":
        return frame_chart(name, [R] * 4, _diag([f"(1 + {q}) / 2"] * 4), resolution=13, truth=truth)
    if presentation == "metric":
        return metric_chart(name, [R] * 4, _diag([f"4 / (1 + {q})^2"] * 4), resolution=13, truth=truth)
    raise ValueError("presentation is 'frame' or 'metric'")


def hyperbolic_h4() -> Chart:
    q = "(x1^2 + x2^2 + x3^2 + x4^2)"
    return frame_chart(
        "hyperbolic_h4", [Interval(-0.5, 0.5)] * 4, _diag([f"(1 - {q}) / 2"] * 4), resolution=8,
        truth=(("anti_self_dual", "true"), ("scalar_flat", "false"), ("einstein", "true"),
               ("hyperkahler", "false"), ("hermitian_section", "1, 0, 0"),
               ("scalar_curvature", "-12")),
    )


def _cp2_metric() -> list[list[str]]:
    # Fubini-Study on the affine chart z1 = x1 + i x2, z2 = x3 + i x4
    d = "(1 + x1^2 + x2^2 + x3^2 + x4^2)^2"
    p = f"-(x1*x3 + x2*x4) / {d}"
    q = f"(x1*x4 - x2*x3) / {d}"
    mq = f"-(x1*x4 - x2*x3) / {d}"
    a = f"(1 + x3^2 + x4^2) / {d}"
    b = f"(1 + x1^2 + x2^2) / {d}"
    return [
        [a, "0", p, mq],
        ["0", a, q, p],
        [p, q, b, "0"],
        [mq, p, "0", b],
    ]


def cp2_fs() -> Chart:
    return metric_chart(
        "cp2_fs", [R] * 4, _cp2_metric(), resolution=13,
        truth=(("anti_self_dual", "false"), ("scalar_flat", "false"), ("einstein", "true"),
               ("hyperkahler", "false"), ("kahler_section", "1, 0, 0"), ("theorem2_case", "B"),
               ("scalar_curvature", "24"), ("tau", "1"), ("chi", "3"), ("c1_selfintersection", "9")),
    )


def cp2_fs_reversed() -> Chart:
    return metric_chart(
        "cp2_fs_reversed", [R] * 4, _cp2_metric(), orientation=-1, resolution=13,
        truth=(("anti_self_dual", "true"), ("scalar_flat", "false"), ("einstein", "true"),
               ("hyperkahler", "false"), ("scalar_curvature", "24"), ("tau", "-1"), ("chi", "3")),
    )


def s2xh2() -> Chart:
    sphere = "(1 + x1^2 + x2^2) / 2"
    hyper = "(1 - x3^2 - x4^2) / 2"
    return frame_chart(
        "s2xh2", [R, R, Interval(-0.6, 0.6), Interval(-0.6, 0.6)],
        _diag([sphere, sphere, hyper, hyper]), resolution=8,
        truth=(("anti_self_dual", "true"), ("scalar_flat", "true"), ("einstein", "false"),
               ("hyperkahler", "false"), ("kahler_section", "1, 0, 0"), ("theorem2_case", "A")),
    )


_BUILDERS = {
    "flat_r4": (flat_r4, "Euclidean R^4"),
    "flat_torus": (flat_torus, "flat 4-torus, all coordinates of period 1"),
    "bielliptic": (bielliptic, "flat torus frame rotating in the (x3, x4) plane, with a free Z/2 action"),
    "round_s4": (round_s4, "unit round 4-sphere, stereographic chart"),
    "hyperbolic_h4": (hyperbolic_h4, "hyperbolic 4-space, Poincare ball chart"),
    "cp2_fs": (cp2_fs, "Fubini-Study CP^2, affine chart, complex orientation"),
    "cp2_fs_reversed": (cp2_fs_reversed, "Fubini-Study CP^2, affine chart, reversed orientation"),
    "s2xh2": (s2xh2, "product of the unit sphere and the hyperbolic plane"),
}


def names() -> list[str]:
    return list(_BUILDERS)


def get(name: str, **params) -> CatalogEntry:
    try:
        builder, description = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}") from None
    return CatalogEntry(name, builder(**params), description)


def entries() -> list[CatalogEntry]:
    return [get(name) for name in _BUILDERS]


def export(name: str) -> str:
    return export_chart(get(name).chart)
