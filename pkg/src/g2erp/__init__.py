"""Closed and extremally Ricci-pinched G2-structures on 7-dimensional Lie groups."""

from .scalars import EXACT, FLOAT, ExactScalar, parse_surd, format_surd

__version__ = "0.1.0"

__all__ = ["EXACT", "FLOAT", "ExactScalar", "format_surd", "parse_surd", "__version__"]
