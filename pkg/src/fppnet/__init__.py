"""First passage percolation on configuration models with very heavy tails.

Simulation and verification toolkit for minimal-weight routing on random
networks whose degree exponent lies in (1, 2): degree sampling, stub-paired
multigraphs and their erased versions, weighted shortest paths, the
Poisson-Dirichlet limit machinery, truncated limit networks with two
independent hopcount estimators, and robustness/fragility experiments.
"""
from .config import ConfigError, ExperimentConfig
from .degrees import DegreeLaw, DegreeSequence
from .cmgraph import MultiGraph, SimpleGraph
from .fpp import EdgeWeightLaw, WeightedGraph, PathResult
from .pdlaw import PDRealization
from .limitnet import LimitNetwork, PiEstimate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "DegreeLaw",
    "DegreeSequence",
    "MultiGraph",
    "SimpleGraph",
    "EdgeWeightLaw",
    "WeightedGraph",
    "PathResult",
    "PDRealization",
    "LimitNetwork",
    "PiEstimate",
    "__version__",
]
