"""
circle-lab: a numerical laboratory for discrete restriction estimates and
the Hardy-Littlewood circle method on curves and paraboloids.
"""

from circle_lab.version import __version__

__all__ = ["__version__"]
