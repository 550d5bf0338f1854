"""# sunsebdf \n Variable-step BDF2/BDF3 time stepping with DOC kernels and ratio-based stability checks"""

from .numerics.constants import MU_STAR, PRNG_NAME
from .numerics.exceptions import *
from .numerics.mesh import (
    MeshStats,
    TimeMesh,
    build_graded,
    build_random,
    build_ratio_pattern,
    build_uniform,
    stats,
)
from .numerics.kernels import (
    DocTable,
    KernelTable,
    apply_bdf,
    build_doc_table,
    build_kernel_table,
    d_coeff,
    verify_orthogonality,
)
from .numerics.problem import OdeProblem, PerturbationRun, SolverOptions, Trajectory, model_problem
from ._integrator import (
    Integrator,
    PerturbedIntegrator,
    bdf_step,
    convergence_order,
    integrate,
    max_error,
    perturbed_run,
    sdirk3_start,
)
from .stability import (
    Companion2x2,
    HNormConfig,
    StabilityCertificate,
    decay_certificate,
    h_norm,
    threshold_roots,
    verify_lemmas,
)
