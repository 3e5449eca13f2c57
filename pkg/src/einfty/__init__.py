"""Cellular E-infinity operads from Fox-Neuwirth trees: trees with levels,
the free operad on them, the linear and full differentials, faces and
their signs, critical dimensions, tree-complex homology and the free Lie
algebra over the integers."""

__version__ = "0.1.0"
