"""Finite-truncation toolkit for uniform Roe algebras.

Measures locality of dense complex operators over finite metric spaces
and extracts bijective coarse equivalences from spatially implemented
isomorphisms, with certificates that can be re-checked independently.
"""

from . import errors, generators
from ._kernels import BACKEND as KERNEL_BACKEND
from .functions import (
    DiagonalFunction,
    flattened_indicator,
    separated_family,
    so_variation,
    sum_flattened,
)
from .iso import (
    SetSampler,
    SpatialIsomorphism,
    SupportFamily,
    apply,
    apply_inverse,
    epsilon_for_delta,
    from_bijection,
    goal_estimate,
    perturb,
    random_local_unitary,
    support_family,
    support_family_flattened,
    support_set,
)
from .operator import (
    LinearOperator,
    QuasiLocalProfile,
    block_norm,
    conditional_expectation,
    identity_operator,
    indicator,
    load_operator,
    numerical_rank,
    op_norm,
    propagation,
    quasi_local_profile,
    read_matrix,
    save_operator,
    write_matrix,
    zero_operator,
)
from .rigidity import (
    BijectionCertificate,
    ExtractParams,
    HallWitness,
    csb_combine,
    extract,
    hall_check,
    select_injection,
    verify_certificate,
)
from .space import (
    CoarseMap,
    ExpansionProfile,
    FiniteMetricSpace,
    ball,
    build_space,
    closeness,
    default_radii,
    expansion_profile,
    from_graph,
    growth,
    identity_map,
    load_space,
    save_space,
    verify_mutual_inverse,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
