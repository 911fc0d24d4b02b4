"""Simulation and closed-form analysis of copolymerization on the tree of monomer sequences."""

__version__ = "0.1.0"

from .model import (Attach, Detach, Polymer, RateSet, RegimeClass, monomer_counts,  # noqa: E402
                    total_exit_rate, validate_rates)
from .theory import TheorySummary, summarize  # noqa: E402
from .simulator import SimConfig, Trajectory, simulate  # noqa: E402
from .estimators import CopolymerSimulator, CopolymerTheory, TrajectoryEstimator  # noqa: E402

__all__ = [
    "Attach", "Detach", "Polymer", "RateSet", "RegimeClass", "monomer_counts",
    "total_exit_rate", "validate_rates", "TheorySummary", "summarize", "SimConfig",
    "Trajectory", "simulate", "CopolymerSimulator", "CopolymerTheory", "TrajectoryEstimator",
]
