"""weylwalk: affine Weyl geometry, p-adic lattice buildings, and walk experiments."""

__version__ = "0.1.0"
