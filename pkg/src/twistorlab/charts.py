"""Coordinate charts: a domain in R^4 carrying a frame field or a metric.

A frame-given chart lists the orthonormal frame vectors as columns
``E[a, i]`` (coordinate ``a`` of frame vector ``i``). A metric-given chart
lists ``g_ab`` and is orthonormalized by Gram-Schmidt in the order
d1, d2, d3, d4, carried out in jet arithmetic so derivatives stay exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .expr import COORDINATES, Expr, ExprSyntaxError, eval_jet2, evaluate, parse, to_text
from .jets import DomainError, Jet2, stack

DEGENERACY_TOL = 1e-10


class DegenerateError(DomainError):
    """Frame or metric is (numerically) singular at the requested point."""


class ChartFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    periodic: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")
        if self.periodic and not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("a periodic coordinate needs a finite period")

    @property
    def period(self) -> float | None:
        return self.hi - self.lo if self.periodic else None

    def text(self) -> str:
        tail = " periodic" if self.periodic else ""
        return f"({_bound_text(self.lo)}, {_bound_text(self.hi)}){tail}"


def _bound_text(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


@dataclass(frozen=True)
class Chart:
    name: str
    domain: tuple[Interval, Interval, Interval, Interval]
    frame: tuple[tuple[Expr, ...], ...] | None = None  # frame[a][i] = E[a, i]
    metric: tuple[tuple[Expr, ...], ...] | None = None  # metric[a][b] = g_ab
    orientation: int = 1
    resolution: int = 16
    truth: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        if (self.frame is None) == (self.metric is None):
            raise ValueError("a chart needs exactly one of frame or metric")
        if len(self.domain) != 4:
            raise ValueError("a chart domain has four coordinates")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.resolution < 1:
            raise ValueError("resolution must be positive")
        table = self.frame if self.frame is not None else self.metric
        if len(table) != 4 or any(len(row) != 4 for row in table):
            raise ValueError("frame/metric must be a 4x4 table of expressions")
        if self.metric is not None:
            for a in range(4):
                for b in range(a):
                    if self.metric[a][b] != self.metric[b][a]:
                        raise ValueError(f"metric entries g_{b + 1}{a + 1} and g_{a + 1}{b + 1} differ")

    @property
    def labels(self) -> dict[str, str]:
        return dict(self.truth)

    def label(self, key: str, default=None):
        return self.labels.get(key, default)

    @property
    def kahler_section(self) -> tuple[Expr, Expr, Expr] | None:
        raw = self.labels.get("kahler_section")
        if raw is None:
            return None
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 3:
            raise ChartFormatError("kahler_section needs three comma-separated expressions")
        return tuple(parse(p) for p in parts)

    @property
    def all_periodic(self) -> bool:
        return all(iv.periodic for iv in self.domain)


def frame_chart(name, domain, entries, **kw) -> Chart:
    """Build a frame-given chart from a 4x4 table of strings or expressions, ``entries[a][i]``."""
    return Chart(name, tuple(domain), frame=_table(entries), **kw)


def metric_chart(name, domain, entries, **kw) -> Chart:
    return Chart(name, tuple(domain), metric=_table(entries), **kw)


def _table(entries) -> tuple[tuple[Expr, ...], ...]:
    out = []
    for row in entries:
        out.append(tuple(parse(e) if isinstance(e, str) else e for e in row))
    return tuple(out)


# --- evaluation -------------------------------------------------------------


def normalize_point(chart: Chart, x) -> np.ndarray:
    """Wrap periodic coordinates into their period and reject points off the open domain."""
    x = np.array(x, dtype=float)
    if x.shape[-1] != 4:
        raise ValueError("points have four coordinates")
    for k, iv in enumerate(chart.domain):
        col = x[..., k]
        if iv.periodic:
            x[..., k] = iv.lo + np.mod(col - iv.lo, iv.hi - iv.lo)
        elif np.any(col <= iv.lo) or np.any(col >= iv.hi) or not np.all(np.isfinite(col)):
            raise DomainError(f"x{k + 1} outside the open interval {iv.text()} of chart {chart.name}")
    return x


def _jet_table(table, x) -> Jet2:
    cache: dict = {}
    jets = [[eval_jet2(table[a][b], x, cache) for b in range(4)] for a in range(4)]
    value = np.stack([np.stack([j.value for j in row], -1) for row in jets], -2)
    grad = np.stack([np.stack([j.grad for j in row], -2) for row in jets], -3)
    hess = np.stack([np.stack([j.hess for j in row], -3) for row in jets], -4)
    return Jet2(value, grad, hess)


def _flat_table(table, x):
    """Entry jets of a 4x4 expression table at flat points ``x (M, 4)`` as contiguous arrays."""
    cache: dict = {}
    m = x.shape[0]
    value = np.empty((m, 4, 4))
    grad = np.empty((m, 4, 4, 4))
    hess = np.empty((m, 4, 4, 4, 4))
    for a in range(4):
        for b in range(4):
            j = eval_jet2(table[a][b], x, cache)
            value[:, a, b] = j.value
            grad[:, a, b] = j.grad
            hess[:, a, b] = j.hess
    return value, grad, hess


def frame_arrays(chart: Chart, x):
    """Frame jet on the flattened points: ``(E, dE, d2E)`` with shapes ``(M, 4, 4)``,
    ``(M, 4, 4, 4)``, ``(M, 4, 4, 4, 4)``, plus the batch shape of ``x``."""
    x = normalize_point(chart, x)
    batch = x.shape[:-1]
    flat = np.ascontiguousarray(x.reshape(-1, 4))
    if chart.frame is not None:
        E, dE, d2E = _flat_table(chart.frame, flat)
        if np.any(np.abs(np.linalg.det(E)) <= DEGENERACY_TOL):
            raise DegenerateError(f"frame of chart {chart.name} is degenerate (|det| <= {DEGENERACY_TOL})")
    else:
        g, dg, d2g = _flat_table(chart.metric, flat)
        m = flat.shape[0]
        E, dE, d2E = np.empty((m, 4, 4)), np.empty((m, 4, 4, 4)), np.empty((m, 4, 4, 4, 4))
        step = _kernels.gram_schmidt(g, dg, d2g, E, dE, d2E, DEGENERACY_TOL)
        if step >= 0:
            raise DegenerateError(f"metric of chart {chart.name} is degenerate at Gram-Schmidt step {step + 1}")
    if chart.orientation != 1:
        for arr in (E, dE, d2E):
            arr[:, :, 3] *= -1.0
    return (E, dE, d2E), batch


def frame_jet(chart: Chart, x) -> Jet2:
    """Orthonormal frame as a jet: value ``(..., 4, 4)``, grad ``(..., 4, 4, 4)``, hess ``(..., 4, 4, 4, 4)``.

    The last one or two axes of grad/hess are coordinate derivative indices.
    """
    (E, dE, d2E), batch = frame_arrays(chart, x)
    return Jet2(E.reshape(batch + (4, 4)), dE.reshape(batch + (4, 4, 4)), d2E.reshape(batch + (4, 4, 4, 4)))


def section_jet(chart: Chart, x, exprs=None) -> Jet2:
    """Unit self-dual coefficients ``(a, b, c)`` of a section field, normalized in jet arithmetic.

    ``exprs`` defaults to the chart's ``kahler_section`` label.
    """
    exprs = chart.kahler_section if exprs is None else exprs
    if exprs is None:
        raise ValueError(f"chart {chart.name} has no kahler_section")
    exprs = [parse(e) if isinstance(e, str) else e for e in exprs]
    x = normalize_point(chart, x)
    cache: dict = {}
    comps = [eval_jet2(e, x, cache) for e in exprs]
    n2 = comps[0] * comps[0] + comps[1] * comps[1] + comps[2] * comps[2]
    if np.any(n2.value <= DEGENERACY_TOL):
        raise DegenerateError("section vanishes")
    inv = n2.sqrt().reciprocal()
    return stack([c * inv for c in comps], axis=-1)


def sample_box(chart: Chart, margin: float = 0.05, infinite_extent: float = 2.0):
    """Finite box ``(lo, hi)`` strictly inside the domain, used for random sampling."""
    lo, hi = np.empty(4), np.empty(4)
    for k, iv in enumerate(chart.domain):
        a = iv.lo if math.isfinite(iv.lo) else -infinite_extent
        b = iv.hi if math.isfinite(iv.hi) else infinite_extent
        if iv.periodic:
            lo[k], hi[k] = a, b
        else:
            w = b - a
            lo[k], hi[k] = a + margin * w, b - margin * w
    return lo, hi


def frame_at(chart: Chart, x):
    """``(E, dE, d2E)`` with ``dE[..., a, i, d] = d_d E[a, i]``."""
    E = frame_jet(chart, x)
    return E.value, E.grad, E.hess


def metric_at(chart: Chart, x) -> np.ndarray:
    """Coordinate metric ``g_ab`` at ``x``."""
    x = normalize_point(chart, x)
    if chart.metric is not None:
        return _jet_table(chart.metric, x).value
    E = frame_jet(chart, x).value
    return np.linalg.inv(E @ np.swapaxes(E, -1, -2))


def volume_density(chart: Chart, x) -> np.ndarray:
    """``sqrt(det g)``, equal to ``1/|det E|``."""
    E = frame_jet(chart, x).value
    return 1.0 / np.abs(np.linalg.det(E))


# --- chart files ------------------------------------------------------------

_COORD_LINE = re.compile(r"^(x[1-4])\s+in\s+\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)\s*(periodic)?\s*$")
_FRAME_KEY = re.compile(r"^e([1-4])_([1-4])$")
_METRIC_KEY = re.compile(r"^g_([1-4])([1-4])$")


def _parse_bound(text: str, line: int) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return math.inf
    if t == "-inf":
        return -math.inf
    try:
        return float(evaluate(parse(text), {}))
    except (ExprSyntaxError, KeyError) as exc:
        raise ChartFormatError(f"bad interval bound {text!r}: {exc}", line) from exc


def parse_chart(text: str) -> Chart:
    section = None
    header: dict[str, str] = {}
    coords: dict[int, Interval] = {}
    frame: dict[tuple[int, int], Expr] = {}
    metric: dict[tuple[int, int], Expr] = {}
    truth: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("chart", "frame", "metric", "truth"):
                raise ChartFormatError(f"unknown section [{section}]", lineno)
            continue
        if section is None:
            raise ChartFormatError("content before the first section", lineno)
        if section == "chart":
            m = _COORD_LINE.match(line)
            if m:
                k = int(m.group(1)[1]) - 1
                if k in coords:
                    raise ChartFormatError(f"{m.group(1)} declared twice", lineno)
                lo = _parse_bound(m.group(2), lineno)
                hi = _parse_bound(m.group(3), lineno)
                try:
                    coords[k] = Interval(lo, hi, m.group(4) is not None)
                except ValueError as exc:
                    raise ChartFormatError(str(exc), lineno) from exc
                continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ChartFormatError(f"expected key = value, got {line!r}", lineno)
        key, value = key.strip(), value.strip()
        if section == "chart":
            if key not in ("name", "orientation", "resolution"):
                raise ChartFormatError(f"unknown chart key {key!r}", lineno)
            header[key] = value
        elif section == "truth":
            truth.append((key, value))
        else:
            pattern, store = (_FRAME_KEY, frame) if section == "frame" else (_METRIC_KEY, metric)
            m = pattern.match(key)
            if not m:
                raise ChartFormatError(f"bad {section} key {key!r}", lineno)
            try:
                expr = parse(value)
            except ExprSyntaxError as exc:
                raise ChartFormatError(f"{key}: {exc}", lineno) from exc
            a, b = int(m.group(1)) - 1, int(m.group(2)) - 1
            if section == "frame":
                # e<i>_<a>: column i, coordinate a
                a, b = b, a
            store[(a, b)] = expr
    if "name" not in header:
        raise ChartFormatError("missing chart name")
    if sorted(coords) != [0, 1, 2, 3]:
        raise ChartFormatError("all four coordinate intervals x1..x4 are required")
    if frame and metric:
        raise ChartFormatError("a chart has a [frame] or a [metric] section, not both")
    orientation = int(header.get("orientation", "1"))
    resolution = int(header.get("resolution", "16"))
    domain = tuple(coords[k] for k in range(4))
    try:
        if frame:
            missing = [(a, i) for a in range(4) for i in range(4) if (a, i) not in frame]
            if missing:
                a, i = missing[0]
                raise ChartFormatError(f"missing frame entry e{i + 1}_{a + 1}")
            table = tuple(tuple(frame[(a, i)] for i in range(4)) for a in range(4))
            return Chart(header["name"], domain, frame=table, orientation=orientation,
                         resolution=resolution, truth=tuple(truth))
        if metric:
            full = {}
            for (a, b), e in metric.items():
                if (b, a) in full and full[(b, a)] != e:
                    raise ChartFormatError(f"g_{a + 1}{b + 1} and g_{b + 1}{a + 1} disagree")
                full[(a, b)] = full[(b, a)] = e
            missing = [(a, b) for a in range(4) for b in range(a, 4) if (a, b) not in full]
            if missing:
                a, b = missing[0]
                raise ChartFormatError(f"missing metric entry g_{a + 1}{b + 1}")
            table = tuple(tuple(full[(a, b)] for b in range(4)) for a in range(4))
            return Chart(header["name"], domain, metric=table, orientation=orientation,
                         resolution=resolution, truth=tuple(truth))
    except ValueError as exc:
        if isinstance(exc, ChartFormatError):
            raise
        raise ChartFormatError(str(exc)) from exc
    raise ChartFormatError("a chart needs a [frame] or [metric] section")


def load_chart(path) -> Chart:
    with open(path, encoding="utf-8") as fh:
        return parse_chart(fh.read())


def export_chart(chart: Chart) -> str:
    lines = ["[chart]", f"name = {chart.name}"]
    for k, iv in enumerate(chart.domain):
        lines.append(f"{COORDINATES[k]} in {iv.text()}")
    lines.append(f"orientation = {'+1' if chart.orientation == 1 else '-1'}")
    lines.append(f"resolution = {chart.resolution}")
    if chart.frame is not None:
        lines.append("[frame]")
        for i in range(4):
            for a in range(4):
                lines.append(f"e{i + 1}_{a + 1} = {to_text(chart.frame[a][i])}")
    else:
        lines.append("[metric]")
        for a in range(4):
            for b in range(a, 4):
                lines.append(f"g_{a + 1}{b + 1} = {to_text(chart.metric[a][b])}")
    if chart.truth:
        lines.append("[truth]")
        for key, value in chart.truth:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
