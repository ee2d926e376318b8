"""
twistcube - random twisted hypercubes

Builds random twisted hypercubes under several coupling policies, routes
through them, measures their diameters and checks the deterministic ball and
subcube lemmas at desk scale.
"""

__version__ = "0.1.0"

from .core import CouplingPolicy, MatchingLevel, TwistedCube, alpha, build, neighbor, neighbors
from .models import CheckReport, DiameterReport, RouterParams, RoutePath, SweepRecord

__all__ = [
    "CouplingPolicy",
    "MatchingLevel",
    "TwistedCube",
    "alpha",
    "build",
    "neighbor",
    "neighbors",
    "CheckReport",
    "DiameterReport",
    "RouterParams",
    "RoutePath",
    "SweepRecord",
]
