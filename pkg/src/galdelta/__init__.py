"""Finite models of simplicial Galois categories.

Total categories of simplicial data of layered categories, their nerves and
homology, and the comparison between sheaves on a total category and
equivariant sheaves on an action groupoid.
"""
from .errors import GaldeltaError
from .exodromy import assemble, descend, enumerate_sheaves, verify_exodromy
from .fincat import FiniteCategory, Functor
from .shape import homology, hocolim_homology, shape_report
from .simplex import bar_datum, cyclic_group, symmetric_group
from .total import build_total

__all__ = [
    "GaldeltaError", "FiniteCategory", "Functor", "bar_datum", "cyclic_group", "symmetric_group",
    "build_total", "homology", "hocolim_homology", "shape_report", "enumerate_sheaves", "descend",
    "assemble", "verify_exodromy",
]
__version__ = "0.1.0"
