"""Computational workbench for finitely presented inverse monoids."""

from .tribool import Confirmed, Refuted, TriBool, Unknown
from .words import Alphabet, Word, free_reduce, invert

__version__ = "0.1.0"
