"""Boundary-integral simulator for injection-driven Hele-Shaw flow.

Star-shaped interfaces written as ``r = exp(eta(alpha))`` evolve under
the nonlocal parabolic equation driven by a point source at the origin.
The package assembles the boundary operators by Nystrom quadrature,
evaluates the Dirichlet-to-Neumann operator through a well-conditioned
second-kind solve, time-steps the (optionally viscosity-regularized)
interface equation, and ships the verification experiments for the
structural properties of the flow: maximum principles, Taylor sign,
symmetries, radial barriers, vanishing-viscosity limits and pressure
positivity.
"""

from . import _threads  # noqa: F401  (must run before numpy loads BLAS)

from .curve import (
    BoundaryCurve,
    CurveStats,
    curve_from_eta,
    curve_stats,
    read_curve_csv,
    write_curve_csv,
)
from .diagnostics import (
    CornerReport,
    PressureField,
    SuiteReport,
    corner_experiment,
    invariant_suite,
    reconstruct_pressure,
)
from .dtn import (
    DtNResult,
    apply_dtn,
    dtn_oracle_collocation,
    graph_dtn_oracle,
    solve_theta,
    taylor_sign_residual,
)
from .errors import (
    BlowUpError,
    ConfigError,
    ConventionError,
    GeometryError,
    HeliosError,
    InputError,
    OracleInconclusiveError,
    ParameterError,
    SolveError,
)
from .evolution import (
    EvolutionConfig,
    EvolutionRun,
    SweepReport,
    rhs,
    simulate,
    step,
    vanishing_viscosity_sweep,
)
from .grid import PeriodicGrid
from .kernels import OperatorSet, apply_kstar, assemble, double_layer_interior

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "BoundaryCurve",
    "ConfigError",
    "ConventionError",
    "CornerReport",
    "CurveStats",
    "DtNResult",
    "EvolutionConfig",
    "EvolutionRun",
    "GeometryError",
    "HeliosError",
    "InputError",
    "OperatorSet",
    "OracleInconclusiveError",
    "ParameterError",
    "PeriodicGrid",
    "PressureField",
    "SolveError",
    "SuiteReport",
    "SweepReport",
    "apply_dtn",
    "apply_kstar",
    "assemble",
    "corner_experiment",
    "curve_from_eta",
    "curve_stats",
    "double_layer_interior",
    "dtn_oracle_collocation",
    "graph_dtn_oracle",
    "invariant_suite",
    "read_curve_csv",
    "reconstruct_pressure",
    "rhs",
    "simulate",
    "solve_theta",
    "step",
    "taylor_sign_residual",
    "vanishing_viscosity_sweep",
    "write_curve_csv",
]
