"""Exact checks of triple and quadruple regularity for schemes from real MUBs,
linked symmetric designs and the binary codes they carry."""

from .exactnum import ExactMatrix, QuadNum, sqrt_int
from .scheme import AssociationScheme
from .regularity import quadruple_regular, triple_regular

__version__ = "0.1.0"

__all__ = ["AssociationScheme", "ExactMatrix", "QuadNum", "quadruple_regular", "sqrt_int",
           "triple_regular", "__version__"]
