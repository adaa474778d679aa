"""Mod-p cohomology of finite p-groups: bar cochains, double complexes,
spectral sequences, ring truncations, zig-zag models and twisted groups."""
__version__ = "0.1.0"
