"""Numerical harmonic analysis on SL(2,R), the Heisenberg group and the
Jacobi group: group laws, Haar quadrature, lifts, convolution, Fourier
transforms and a verification harness for the identities relating them."""

from .groups import DEFAULT_CONTEXT, GroupContext, iwasawa_compose, iwasawa_decompose
from .axioms import check_group_axioms
from .quadrature import Axis, Grid, circle_axis, integer_axis, line_axis, loga_axis
from .funcspace import Field, GridFunction, sample

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "DEFAULT_CONTEXT",
    "Field",
    "Grid",
    "GridFunction",
    "GroupContext",
    "check_group_axioms",
    "circle_axis",
    "integer_axis",
    "iwasawa_compose",
    "iwasawa_decompose",
    "line_axis",
    "loga_axis",
    "sample",
]
