"""
distfobs
========
Distributed functional observers for discrete-time LTI plants watched by a
sensor network: every node asymptotically reconstructs psi[k] = L x[k]
while only a set of leader nodes touches measurements.

Pipeline: leaderselect (feasible, minimal, functional leader sets) ->
decomp (reduced dynamics and multi-sensor staircase) -> observernet (gains,
spanning-tree consensus weights, update laws) -> simcli (reports,
simulation, CSV traces, command line).
"""

__version__ = "1.0.0"

from .core.graphkit import DiGraph
from .core.numkit import DEFAULT_TOLERANCES, ToleranceConfig
from .sysmodel import RowSelection, SystemModel

__all__ = ["DEFAULT_TOLERANCES", "DiGraph", "RowSelection", "SystemModel", "ToleranceConfig",
           "__version__"]
