"""Curvature blocks of Riemannian 4-manifold charts and Nijenhuis tensors of
compatible almost complex structures on their twistor spaces."""

from .bivectors import UnitQ
from .catalog import get as catalog_entry
from .charts import Chart, Interval, frame_chart, load_chart, metric_chart, parse_chart
from .chern import CohClass, RingContext, gauss_bonnet, gauss_bonnet_number
from .curvature import CurvatureBlocks, curvature_operator, invariants
from .nijenhuis import NijenhuisReport, classify_theorem2, full_check, g_tensor
from .oracle import bruteforce_nijenhuis
from .twistor import TwistorPoint, parse_morphism, sample_points

__version__ = "0.1.0"

__all__ = [
    "Chart", "CohClass", "CurvatureBlocks", "Interval", "NijenhuisReport", "RingContext", "TwistorPoint",
    "UnitQ", "bruteforce_nijenhuis", "catalog_entry", "classify_theorem2", "curvature_operator",
    "frame_chart", "full_check", "g_tensor", "gauss_bonnet", "gauss_bonnet_number", "invariants",
    "load_chart", "metric_chart", "parse_chart", "parse_morphism", "sample_points",
]
