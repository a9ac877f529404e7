"""Exact linear-model computations for double normal bundles of immersion
squares and the flip isomorphism between them."""

from .symmetry import (ImmersionSquare, counterexample_square, corner_square, identity_square,
                       is_regular, random_regular_square, symmetry_iso)

__version__ = "0.1.0"

__all__ = ["ImmersionSquare", "counterexample_square", "corner_square", "identity_square",
           "is_regular", "random_regular_square", "symmetry_iso"]
