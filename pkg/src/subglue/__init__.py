"""subglue: grid-based construction and certification of glued subharmonic
functions, with discrete Green's functions, spherical means, Kelvin
transforms and a capacity/energy estimator."""

from .errors import (
    ConfigError,
    ConfigNameError,
    ConfigSyntaxError,
    ConfigValueError,
    ConvergenceError,
    PreconditionError,
    SubglueError,
    UndefinedOperation,
)
from .extreal import ExtReal, MINUS_INF, PLUS_INF
from .geometry import (
    Ball,
    Box,
    GridDomain,
    NodeSet,
    Point,
    as_point,
    dist_to_complement,
    inversion,
    parallel_set,
    rasterize,
    rasterize_ball,
    regularized_domain,
)
from .field import (
    ScalarField,
    VerificationReport,
    boundary_limsup,
    default_certification_tol,
    discrete_laplacian,
    extremal_constants,
    interpolate,
    is_harmonic,
    is_subharmonic,
    mean_inf_constant,
    spherical_mean,
)
from .kernels import kernel_K, kernel_field, kernel_k, kernel_k_inverse, kelvin_transform
from .harmonic import (
    ContinuationResult,
    GreenField,
    SolverParams,
    green_function,
    green_min_constant,
    harmonic_layer_continuation,
    solve_dirichlet,
)
from .gluing import (
    GlueConstants,
    GlueResult,
    glue_basic,
    glue_full,
    glue_green,
    glue_quantitative,
    glue_two,
    quantitative_v0,
)
from .capacity import (
    DiscreteMeasure,
    EnergyBreakdown,
    EnergyReport,
    EquilibriumResult,
    equilibrium_weights,
    fekete_capacity,
    mutual_energy,
)
from .fieldio import read_field, read_points, render_pgm, write_field, write_points
from .config import SceneConfig, parse_config, serialize_config

__version__ = "0.1.0"
