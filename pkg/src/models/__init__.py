"""Domain types: graphs, path polytopes, games and run records."""

from src.models.game import CongestionGame, JointProfile, LoadDistribution
from src.models.graph import Dag, Path
from src.models.polytope import BoundedAwayView, FractionalStrategy, PathMix, PathPolytope
from src.models.records import AdversarySpec, DynamicsResult, RoundRecord

__all__ = [
    "AdversarySpec",
    "BoundedAwayView",
    "CongestionGame",
    "Dag",
    "DynamicsResult",
    "FractionalStrategy",
    "JointProfile",
    "LoadDistribution",
    "Path",
    "PathMix",
    "PathPolytope",
    "RoundRecord",
]
