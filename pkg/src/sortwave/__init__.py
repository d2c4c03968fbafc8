"""sortwave: invasion fronts with trait-dependent motility.

Numerical library for the minimal trait-structured invasion model

    dn/dt = theta * d2n/dx2 + r * n * (1 - rho) + alpha * d2n/dtheta2,
    rho(t, x) = integral of n over theta,

covering the dispersion spectral problem and minimal wave speed, full
(x, theta) time integration with front tracking, the explicit accelerating
phase solution and its obstacle eikonal equation, and the transport equation
for the locally selected trait.
"""

from .core import Grid1D, TridiagonalSystem, depressed_cubic_root, trapezoid, tridiag_solve
from .dispersion import (
    DispersionMode,
    MinimalSpeedResult,
    ModelParams,
    dispersion_mode,
    edge_diagnostics,
    minimal_speed,
    principal_mode,
    wave_speed,
)

__version__ = "0.1.0"

__all__ = [
    "Grid1D",
    "TridiagonalSystem",
    "tridiag_solve",
    "trapezoid",
    "depressed_cubic_root",
    "ModelParams",
    "DispersionMode",
    "MinimalSpeedResult",
    "principal_mode",
    "wave_speed",
    "dispersion_mode",
    "minimal_speed",
    "edge_diagnostics",
    "__version__",
]
