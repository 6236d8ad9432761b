"""Symbolic semiclassical quantization of 2D diagonal Riemannian metrics."""

from .analysis import classical_form_conditions, t_deformation_report, verify_qlc_family
from .classical import ClassicalData, GeometryError, Metric2D
from .expr import Expr, differentiate, normalize, render, substitute
from .oracle import OracleConfig, ZeroStatus, ZeroVerdict, is_zero
from .parser import ParseError, parse
from .quantum import ConnectionClass, QuantumData
from .report import RunConfig, run

__version__ = "0.1.0"

__all__ = [
    "ClassicalData",
    "ConnectionClass",
    "Expr",
    "GeometryError",
    "Metric2D",
    "OracleConfig",
    "ParseError",
    "QuantumData",
    "RunConfig",
    "ZeroStatus",
    "ZeroVerdict",
    "classical_form_conditions",
    "differentiate",
    "is_zero",
    "normalize",
    "parse",
    "render",
    "run",
    "substitute",
    "t_deformation_report",
    "verify_qlc_family",
]
