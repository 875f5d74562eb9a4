"""Numerical laboratory for the quantitative relative Szemeredi theorem.

Submodules:

zcore       density functions on Z_N, progression counts, exact r_k(N)
norms       cut norms and Gowers box norms
pseudo      linear forms condition, mixed-factor averages, strong linear forms
counting    marginals, dense and relative counting gaps, dense models
sieve       primes, W-trick, prime weights and a divisor-sum majorant
pipeline    end-to-end run on W-tricked primes
suites      seeded inequality suites
oracles     brute-force reference evaluations
cli         batch runner
"""

from .contract import ContractionBudgetExceeded, contract
from .counting import (
    CountingDiagnostics,
    MarginalTriple,
    dense_counting_gap,
    dense_model_greedy,
    dense_model_verify,
    marginals,
    relative_counting_gap,
)
from .hypergraph import WeightedHypergraph, clique_density
from .norms import (
    CutNormResult,
    NumericalConsistencyError,
    cut_norm_arithmetic,
    cut_norm_hypergraph,
    cut_norm_tuple,
    gowers_norm,
    gowers_norm_arithmetic,
)
from .pipeline import PipelineReport, run_pipeline
from .pseudo import (
    LfcPattern,
    LfcReport,
    MixedFactorAssignment,
    PreconditionError,
    lfc_delta,
    lfc_value_arithmetic,
    lfc_value_hypergraph,
    mixed_blowup_average,
    strong_lfc_lhs,
    uniformity_from_lfc,
)
from .sieve import (
    SieveParams,
    choose_residue,
    f_B_embed,
    gpy_majorant,
    lambda_weight,
    primes_up_to,
    w_trick_params,
)
from .suites import emit_inequality_suite
from .zcore import (
    DensityFunction,
    ExtremalRecord,
    alpha_inverse,
    ap_count,
    ap_trivial_part,
    dense_lower_bound,
    r_k_exact,
    rk_table,
)

__version__ = "0.1.0"
