"""Read-once branching programs for approximate counting: constructions,
exact verification, potential audits, closed-form bounds, a desk-scale
frontier oracle, and the Misra-Gries heavy-hitters summary."""

from .bounds import (
    BoundReport,
    gen_binom,
    kpar_lower_bound,
    lb_small_w,
    lb_standard,
    thm_main_feasible,
    tightness_report,
)
from .constructions import (
    RoundingPlan,
    TribesPlan,
    constant_program,
    exact_counter,
    rounded_counter,
    rounded_counter_width_bound,
    rounding_plan,
    tribes,
    tribes_plan,
)
from .labeling import (
    LabeledRobp,
    RectLabel,
    VerifyCertificate,
    compute_labels,
    minimal_error,
    verify,
)
from .oracle import (
    FrontierPoint,
    IntervalSystem,
    exhaustive_verify,
    frontier,
    frontier_brute_force,
    random_robp,
    system_to_robp,
)
from .potential import (
    AuditReport,
    PotentialProfile,
    audit_final_counter,
    audit_final_parallel,
    audit_growth_counter,
    audit_growth_parallel,
    phi_counter,
    phi_parallel,
    profile_counter,
    profile_parallel,
)
from .robp import (
    Alphabet,
    Robp,
    RobpParseError,
    ValidationReport,
    binary_alphabet,
    counter_alphabet,
    evaluate,
    parallel_alphabet,
    read_robp,
    validate,
    write_robp,
)
from .streaming import (
    HeavyHittersOutput,
    MgSummary,
    mg_finalize,
    mg_run,
    mg_update,
    to_approx_counts,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
