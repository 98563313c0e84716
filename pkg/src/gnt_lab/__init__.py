"""Generalized Newton transformations of endomorphism systems and integral formulas for distributions.

Subpackages are imported explicitly (``gnt_lab.gnt``, ``gnt_lab.torus`` ...)
so that the command line can configure thread limits before numpy loads.
"""

__version__ = "0.1.0"
