"""Reference-ball reconstruction of sound-soft obstacles from phaseless far-field data.

The package is organized bottom-up:

* :mod:`refball.specfun` -- cylinder functions used by every kernel
* :mod:`refball.geometry` -- star-like curves, the reference disk, grids
* :mod:`refball.forward` -- combined-potential far-field synthesis, Mie oracle, noise
* :mod:`refball.field_system` -- Nystrom single-layer field equations
* :mod:`refball.farfield` -- far-field operators, derivative kernels, residuals
* :mod:`refball.newton` -- regularized linearized update
* :mod:`refball.inversion` -- the iterative driver and named presets
* :mod:`refball.cli` -- command-line entry point
"""

from refball.errors import (
    ConditioningError,
    DegenerateCurveError,
    GeometryError,
    SynthesisError,
)
from refball.geometry import (
    ClosedFormCurve,
    Disk,
    ParamGrid,
    StarCurve,
    boundary_error,
    fit_star_curve,
)
from refball.forward import (
    FarFieldSamples,
    IncidentWave,
    PhaselessSamples,
    add_noise,
    mie_farfield,
    synthesize_farfield,
)
from refball.field_system import (
    DensityPair,
    FieldSystemMatrix,
    assemble_field_system,
    log_quadrature_weights,
    solve_densities,
)
from refball.farfield import (
    FrechetKernels,
    farfield_from_densities,
    frechet_kernels,
    phaseless_residual,
    stopping_error,
)
from refball.newton import (
    DesignMatrix,
    UpdateVector,
    apply_update,
    assemble_design,
    regularization_parameter,
    solve_update,
)
from refball.inversion import (
    PRESETS,
    IterationRecord,
    RunHistory,
    SolverConfig,
    reconstruct,
    run_preset,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedFormCurve",
    "ConditioningError",
    "DegenerateCurveError",
    "DensityPair",
    "DesignMatrix",
    "Disk",
    "FarFieldSamples",
    "FieldSystemMatrix",
    "FrechetKernels",
    "GeometryError",
    "IncidentWave",
    "IterationRecord",
    "PRESETS",
    "ParamGrid",
    "PhaselessSamples",
    "RunHistory",
    "SolverConfig",
    "StarCurve",
    "SynthesisError",
    "UpdateVector",
    "add_noise",
    "apply_update",
    "assemble_design",
    "assemble_field_system",
    "boundary_error",
    "farfield_from_densities",
    "fit_star_curve",
    "frechet_kernels",
    "log_quadrature_weights",
    "mie_farfield",
    "phaseless_residual",
    "reconstruct",
    "regularization_parameter",
    "run_preset",
    "solve_densities",
    "solve_update",
    "stopping_error",
    "synthesize_farfield",
]
