"""Distance geometry and web solutions for -Δ∞u = 1 in the plane, with a grid solver."""

from .distgeo import (
    Arc,
    DistanceEval,
    GateReport,
    Superdifferential,
    distance,
    gate,
    high_ridge,
    inradius,
    singular_set,
    superdifferential,
)
from .domains import Disk, Point, Polygon, Stadium, contains, make_disk, make_polygon, make_stadium
from .errors import (
    DegenerateBoundary,
    EmptyBin,
    InfWebError,
    InvalidReach,
    NoInteriorNodes,
    NotConvergedWarning,
    NotInSuperdifferential,
    NotSingular,
    OutOfRange,
    OutsideDomain,
    ParseError,
    SingularDerivative,
)
from .estimate import EstimateCertificate, MarginReport, bound_value, certificate, verify_certificate
from .viscosity import (
    Grid,
    GridSolution,
    build_grid,
    compare_to_phi,
    discrete_inf_laplacian,
    local_update,
    residual,
    solve_dirichlet,
)
from .websol import C0, FittedProfile, WebProfile, fit_web_profile, phi, profile_eval, radial_solution

__version__ = "0.1.0"
