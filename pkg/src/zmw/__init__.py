"""Shifted moments of the zeta function and divisor-sum correlations.

Library layout: shift sets and divisor-sum tables (shifts), analytic
utilities (special), Euler products and their local factors (euler),
the additive-divisor density chain (correlation), the swap-term moment
prediction (recipe), the empirical mean square and reports (moments),
the identity verification suites (identities), and the CLI (cli).
"""
from ._version import __version__
from ._kernels import set_threads
from .shifts import (
    ShiftSet,
    ShiftedTauTable,
    as_shift_set,
    tau_at,
    tau_prime_powers,
    tau_table,
)
from .special import (
    ArithmeticSieve,
    ContourSpec,
    SmoothWeight,
    build_sieve,
    build_weight,
    bump,
    laurent_coefficients,
    residue_at,
    zeta,
)
from .euler import (
    G_of,
    LocalFactor,
    Z_product,
    g_local,
    global_A,
    global_A_hat,
    local_A_factor,
    local_A_hat,
    primes_upto,
)
from .correlation import (
    CorrelationJob,
    D_empirical,
    P_density,
    correlation_rows,
    f_density,
    m_main,
    m_main_exact_powers,
    m_prime,
)
from .recipe import (
    ConjecturedMoment,
    OneSwapResult,
    conjectured_I,
    conjectured_detail,
    diagonal_term,
    one_swap_detail,
    one_swap_term,
    recipe_R,
    recipe_terms,
    swap_census,
)
from .moments import ExperimentReport, I_empirical, I_report
from .identities import (
    CheckResult,
    SuiteResult,
    check_G_closed_form,
    check_convolution_id,
    check_dirichlet_series,
    check_intermediate_telescoping,
    check_local_identity,
    check_tauid,
    check_translation_identity,
    identity_suite,
    translation_suite,
)

__all__ = [
    "__version__", "set_threads",
    "ShiftSet", "ShiftedTauTable", "as_shift_set", "tau_at",
    "tau_prime_powers", "tau_table",
    "ArithmeticSieve", "ContourSpec", "SmoothWeight", "build_sieve",
    "build_weight", "bump", "laurent_coefficients", "residue_at", "zeta",
    "G_of", "LocalFactor", "Z_product", "g_local", "global_A",
    "global_A_hat", "local_A_factor", "local_A_hat", "primes_upto",
    "CorrelationJob", "D_empirical", "P_density", "correlation_rows",
    "f_density", "m_main", "m_main_exact_powers", "m_prime",
    "ConjecturedMoment", "OneSwapResult", "conjectured_I",
    "conjectured_detail", "diagonal_term", "one_swap_detail",
    "one_swap_term", "recipe_R", "recipe_terms", "swap_census",
    "ExperimentReport", "I_empirical", "I_report",
    "CheckResult", "SuiteResult", "check_G_closed_form",
    "check_convolution_id", "check_dirichlet_series",
    "check_intermediate_telescoping", "check_local_identity",
    "check_tauid", "check_translation_identity", "identity_suite",
    "translation_suite",
]
