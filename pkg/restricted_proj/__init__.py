"""
restricted_proj: a numerical lab for restricted projections, truncated
energies and their realization inside SO(n, 1)
"""

__version__ = "0.1.0"

from .geometry import ProjectionFamily, factor_map, project
from .pointcloud import PointCloud, generate
from .experiment import ExperimentRunner
