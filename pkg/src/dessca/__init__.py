"""Density-estimation-based selection of episode initial states for RL training."""

from dessca.state_space import BoxBounds, normalize, denormalize
from dessca.kde import CoverageEstimator
from dessca.reference import ReferenceDensity, uniform_box, uniform_feasible
from dessca.pso import SwarmConfig, maximize
from dessca.engine import DesscaEngine, NoFeasibleProposal

__all__ = [
    "BoxBounds",
    "normalize",
    "denormalize",
    "CoverageEstimator",
    "ReferenceDensity",
    "uniform_box",
    "uniform_feasible",
    "SwarmConfig",
    "maximize",
    "DesscaEngine",
    "NoFeasibleProposal",
]
