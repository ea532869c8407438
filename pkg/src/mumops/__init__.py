"""Exact arithmetic for MUM Picard-Fuchs operators, mirror maps and instanton numbers."""

from .series import RationalSeries, SeriesError
from .operators import LogSeries, ThetaOperator, ThetaPolynomial, parse_operator

__version__ = "0.1.0"

__all__ = [
    "LogSeries",
    "RationalSeries",
    "SeriesError",
    "ThetaOperator",
    "ThetaPolynomial",
    "parse_operator",
]
