"""
BRST quantum reduction and equivariant Kirwan map checks on the Hopf
scenarios C^(n+1) ⊃ S^(2n+1) → CP^n, n in {0, 1, 2}.
"""

from .config import Settings, load_settings
from .errors import ReductionError
from .scenario import Scenario, build_scenario

__all__ = ["ReductionError", "Scenario", "Settings", "build_scenario", "load_settings"]
