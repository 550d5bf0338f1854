"""Meshes, BDF and DOC kernels, and the solver primitives the integrators are built from."""

from .constants import MU_STAR, PRNG_NAME, SDIRK_TABLEAU_ID
from .exceptions import *
from .mesh import (
    MeshStats,
    TimeMesh,
    build_graded,
    build_random,
    build_ratio_pattern,
    build_uniform,
    stats,
)
from .kernels import (
    DocTable,
    KernelTable,
    abs_row_and_column_sums,
    apply_bdf,
    bdf2_doc_product,
    build_doc_table,
    build_kernel_table,
    d_coeff,
    doc_sum_bdf2,
    orthogonality_residuals,
    starting_effect,
    uniform_bdf3_doc,
    verify_orthogonality,
)
from .problem import OdeProblem, PerturbationRun, SolverOptions, Trajectory, model_problem
from .sdirk import SDIRK3, Tableau
