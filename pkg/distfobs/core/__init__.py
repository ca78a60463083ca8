"""
distfobs.core
=============
Kernel helpers shared by the design pipeline: tolerance-aware linear algebra
(numkit), directed graphs (graphkit) and JSON seals / atomic writes (digest).
"""

from .numkit import DEFAULT_TOLERANCES, ToleranceConfig
from .graphkit import DiGraph, SpanningTree

__all__ = ["DEFAULT_TOLERANCES", "ToleranceConfig", "DiGraph", "SpanningTree"]
