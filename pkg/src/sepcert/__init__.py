"""sepcert: prove bipartite states separable and emit verifiable certificates.

The pipeline maps a known separable base state onto a target with a local
linear map found by linear solves or LMI feasibility; every positive verdict
ships an explicit product decomposition that an independent verifier checks.
An analytical eigenvalue criterion provides a solver-free fast path with a
fully constructive certificate.
"""

from .certificate import (
    Certificate,
    CertificateError,
    CriterionNotMet,
    NegativeFactor,
    ResidualTooLarge,
    build_from_eigenvalue_criterion,
    build_from_enhanced,
    build_from_map,
    verify_certificate,
)
from .criteria import (
    CriterionReport,
    SingularMarginal,
    eigenvalue_check,
    filter_normalize,
    gb_gap,
    gurvits_barnum_check,
    ppt_check,
    spiked_isotropic,
)
from .detector import (
    DetectionOutcome,
    assemble_linear_system,
    detect_auto,
    detect_basic_sdp,
    detect_enhanced,
    detect_linear,
    table_prune,
)
from .linalg import (
    BipartiteState,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    swap_operator,
    tensor_product,
)
from .maps import (
    ChoiMatrix,
    LocalMap,
    apply,
    apply_local_A,
    apply_local_B,
    apply_local_sum,
    choi_of_map,
    compose,
    identity_map,
    map_of_choi,
)
from .sdp import (
    FeasResult,
    InconsistentEqualities,
    LmiBlock,
    LmiProblem,
    eliminate_equalities,
    solve_feasibility,
)
from .states import (
    ProductEnsemble,
    assemble,
    faithfulness_operator,
    is_faithful,
    isotropic_base_ensemble,
    isotropic_state,
    maximally_entangled,
    maximally_mixed,
    random_separable,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
