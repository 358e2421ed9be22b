"""Symmetric double saddle-point (S^3) systems: structure, factorization, bounds and preconditioning."""

from .analysis import (
    BoundReport,
    Interval,
    SpectralSummary,
    arrow_bounds,
    classical_sp_bounds,
    cubic_roots,
    eig_sym,
    r_matrix_bounds,
    spectral_summary,
    tridiag_bounds,
    verify_containment,
)
from .block_model import (
    BlockMatrix3,
    BlockSystem3,
    ConditionReport,
    Layout,
    MultiSaddleSystem,
    assemble_dense,
    block_scale,
    check_conditions,
    permute_23,
    red_black_permute,
)
from .errors import (
    BoundInapplicableError,
    ContractError,
    FactorizationError,
    ManifestError,
    S3Error,
    StructureError,
    UnsupportedLayoutError,
)
from .factor import Inertia, LdlFactorization, inertia_of, ldl_arrow, ldl_classical, ldl_tridiag, solve_with_ldl
from .krylov import SolveStats, gmres, minres
from .precond import Kind, Preconditioner, SpectrumVerdict, apply_inverse, build, preconditioned_spectrum, verify_theorem

__version__ = "0.1.0"
