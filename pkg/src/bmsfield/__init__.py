"""Desk-scale BMS-invariant free scalar field theory.

Explicit truncations of the asymptotic symmetry group at null infinity, its
supermomentum orbits, a finite-dimensional white-noise calculus over chosen
supertranslation directions, the constrained field dynamics, and the induced
representations on momentum orbits. Every module exposes pure functions over
immutable values so identities can be checked numerically.
"""

from .config import Config, load_config

__version__ = "0.1.0"

__all__ = ["Config", "load_config", "__version__"]
