"""Rigid mobility of closed-loop slender fibers in Stokes flow.

The package pairs two independent solvers for the same physical
question -- given a total force and torque on a rigid closed fiber, what
rigid velocities result? -- and tooling to compare them across tube radii:

* line solver: Keller-Rubinow slender-body operators on the centerline
  with total force/torque constraints (``sbt``, ``mobility``);
* surface solver: regularized-Stokeslet single layer on the actual tube
  surface (``reference``);
* sweep harness fitting the radius dependence of the velocity gap
  (``study``) plus a small CLI (``cli``).
"""

from .errors import ConditioningError, CurveError, FrameError, GeometryError
from .geometry import (
    CATALOG,
    ClosedCurve,
    GeometryConstants,
    MaterialFrame,
    SlenderGeometry,
    build_curve,
    build_frame,
    geometry_constants,
    surface_jacobian,
    surface_point,
    transform_curve,
)
from .sbt import SbtMatrix, assemble_sbt_matrix, local_lambda, nonlocal_kernel
from .mobility import (
    GrandMobility,
    RigidGram,
    RigidKinematics,
    equivariance_check,
    grand_mobility,
    rigid_motion_gram,
    solve_mobility,
)
from .reference import (
    SurfaceMesh,
    build_surface_mesh,
    reference_self_convergence,
    solve_reference_mobility,
)
from .study import StudyConfig, SweepRecord, error_metric, run_sweep, run_validate

__all__ = [
    "CATALOG",
    "ClosedCurve",
    "ConditioningError",
    "CurveError",
    "FrameError",
    "GeometryConstants",
    "GeometryError",
    "GrandMobility",
    "MaterialFrame",
    "RigidGram",
    "RigidKinematics",
    "SbtMatrix",
    "SlenderGeometry",
    "StudyConfig",
    "SurfaceMesh",
    "SweepRecord",
    "assemble_sbt_matrix",
    "build_curve",
    "build_frame",
    "build_surface_mesh",
    "equivariance_check",
    "error_metric",
    "geometry_constants",
    "grand_mobility",
    "local_lambda",
    "nonlocal_kernel",
    "reference_self_convergence",
    "rigid_motion_gram",
    "run_sweep",
    "run_validate",
    "solve_mobility",
    "solve_reference_mobility",
    "surface_jacobian",
    "surface_point",
    "transform_curve",
]
