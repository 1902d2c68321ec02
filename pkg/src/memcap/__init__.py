"""Classical capacity of a qubit depolarizing channel with Markov-switched noise.

The capacity reduces to 1 minus the entropy rate of the hidden-Markov
error process; the entropy rate is evaluated by iterating a transfer
operator on atomic belief measures, cross-validated by an exact
block-entropy oracle and a Monte-Carlo filter-surprisal estimator.
"""

from .blackwell import (
    ATOM_BUDGET,
    MAX_ITER,
    MERGE_TOL,
    PRUNE_TOL,
    TOL,
    AtomBudgetError,
    AtomicMeasure,
    ConvergenceError,
    FilterSystem,
    build_filter_system,
    capacity,
    entropy_functional,
    entropy_rate_blackwell,
    fixed_points,
    initial_measure,
    iterate_measure,
)
from .channel import (
    CP_WINDOW,
    FORGETFUL_MARGIN,
    STATE_ORDER,
    ChannelParams,
    CPViolationError,
    Diagnostics,
    JointChainModel,
    NonForgetfulError,
    ParameterError,
    build_joint_chain,
    from_physical,
    from_raw,
    relabel,
    stationary_joint_distribution,
    stationary_switch_distribution,
    to_physical,
    validate,
)
from .oracle import (
    BLOCK_N_MAX,
    PATHSUM_MAX,
    EntropyEstimate,
    block_entropy,
    block_entropy_profile,
    entropy_rate_oracle,
    enumerate_words,
    mc_entropy_rate,
    parse_word,
    word_probability,
    word_probability_pathsum,
)
from .sweep import (
    AxisSpec,
    MethodComparison,
    RefCurves,
    ResultRow,
    SolverKnobs,
    SweepSpec,
    binary_entropy,
    compare_methods,
    preset_figure1,
    preset_figure2,
    preset_figure3,
    reference_curves,
    run_point,
    run_sweep,
    write_csv,
)

__version__ = "0.1.0"
