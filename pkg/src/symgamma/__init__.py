"""Toeplitz operators and Gamma_n-contractions on the symmetrized polydisk, at finite truncation."""
from .errors import *  # noqa: F401,F403
from .partitions import (
    BasisWindow,
    Exponent,
    Side,
    StrictPartition,
    antisymmetrize_exponent,
    enumerate_window,
    orbit_of_exponent,
)
from .symfun import (
    Membership,
    eval_antisym,
    jacobian_at,
    membership_gamma,
    symmetrize_point,
)
from .symbols import (
    SymbolExpansion,
    conjugate_symbol,
    eval_symbol,
    load_symbol,
    multiply_symbols,
    quadrature_coeffs,
    save_symbol,
)
from .operators import (
    CoordinateTuple,
    TruncatedOperator,
    assemble_laurent,
    coordinate_tuple,
    dual_toeplitz,
    hankel,
    recover_symbol,
    split_blocks,
    toeplitz,
    u1_reindex,
    y_shift,
)
from .relations import (
    CheckReport,
    check_analytic_characterization,
    check_brown_halmos,
    check_gamma_isometry,
    check_gamma_unitary,
    check_product_identities,
)
from .asymptotics import (
    DecaySequence,
    asymptotic_toeplitz_diagnose,
    coefspace_projection_El,
    eta_map,
    finite_rank_Fl,
)
from .gamma import (
    ExtensionTriple,
    OperatorTuple,
    check_gamma_contraction_sampled,
    compute_Q,
    decay_check,
    extend_via_Q,
    fundamental_operators,
    gamma2_pi_embedding,
    generate_symmetrized_tuple,
    nonemptiness_check,
    q_membership_check,
)

__version__ = "0.1.0"
