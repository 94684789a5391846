"""Nash states of sets of quantum observables.

Subpackages cover dense operator algebra (``operators``), the stationarity
and optimality conditions (``conditions``), the real quadric variety solver
(``variety``), transverse-field Ising thermodynamics (``tfim``), the Quantum
Prisoner's Dilemma and multi-observable games (``qpd``), and a reproducible
experiment CLI (``cli``).  The quadric hot loops run on a compiled kernel
when available; see ``nashstates.kernel_backend()``.
"""

from . import _kernels

__version__ = "0.1.0"

from .operators import (  # noqa: F401
    DenseOperator,
    DensityMatrix,
    HermitianTag,
    InteractionGraph,
    PauliTerm,
    StateVector,
    commutator,
    diagonalize,
    embed,
    expectation,
    ket,
    maximally_mixed,
    random_hermitian,
    random_state,
    star_hamiltonians,
)
from .conditions import (  # noqa: F401
    LocalClass,
    LocalKind,
    NashInstance,
    NashResidual,
    bilinear_form_matrix,
    classify_local,
    dimension_counts,
    frustration_free_check,
    global_su2_check,
    is_epsilon_nash,
    nash_residual,
    single_qubit_instance,
)
from .variety import (  # noqa: F401
    QuadricSystem,
    TangentFrame,
    TraceResult,
    VarietyPoint,
    build_system,
    estimate_local_dimension,
    inverse_stereographic,
    newton_solve,
    random_start_search,
    stereographic,
    tilde_v_membership,
    trace_component,
)


def kernel_backend() -> str:
    """Name of the quadric-kernel backend selected at import time."""
    return _kernels.BACKEND
