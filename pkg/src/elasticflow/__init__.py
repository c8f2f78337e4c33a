"""Free elastic flow of closed planar curves.

Simulator for ``gamma_t = -(k_ss + k^3/2) nu``, closed-form oracles, the
explicit stability constants for omega-circles and a verification harness.
"""

__version__ = "0.1.0"

from .constants import TheoryConstants, theory_constants  # noqa: E402
from .curve import (  # noqa: E402
    ClosedCurve,
    CurveError,
    GeometricQuantities,
    compute_geometry,
    diagnostics,
    poincare_margin,
    turning_number,
)
from .diagnostics import DiagnosticsRecord  # noqa: E402
from .exact import (  # noqa: E402
    CircleSolution,
    LemniscateSolution,
    circle_at,
    lemniscate_at,
    perturbed_circle,
)
from .flow import FlowConfig, FlowState, run, step  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "BACKEND", "CircleSolution", "ClosedCurve", "CurveError", "DiagnosticsRecord",
    "FlowConfig", "FlowState", "GeometricQuantities", "LemniscateSolution",
    "TheoryConstants", "circle_at", "compute_geometry", "diagnostics", "lemniscate_at",
    "perturbed_circle", "poincare_margin", "run", "step", "theory_constants",
    "turning_number",
]
