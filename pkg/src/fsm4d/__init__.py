"""Near-field 4D Fresnel spatiotemporal multiplexing toolkit.

Angle, depth and velocity coordinates of a near-field aperture form a
discrete symbol manifold. The package models the geometry, the chirp-FFT
Fresnel precoder, time-varying channels for moving users, the evaluation
metrics, a matched-filter detector and the experiment runners.
"""

from .physics import ConfigError, DerivedGeometry, SystemConfig, derive_geometry, doppler_frequency
from .manifold import ManifoldGrid, Symbol4D, build_grid, channel_vector
from .dfnt import DfntOperator, dfnt_apply, precode
from .channel import Scheme, SchemeKind, TrajectoryUser
from ._kernels import backend

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DerivedGeometry",
    "SystemConfig",
    "derive_geometry",
    "doppler_frequency",
    "ManifoldGrid",
    "Symbol4D",
    "build_grid",
    "channel_vector",
    "DfntOperator",
    "dfnt_apply",
    "precode",
    "Scheme",
    "SchemeKind",
    "TrajectoryUser",
    "backend",
]
