"""Variable-length binary chains under Bernoulli flip noise.

Exact laws of the hidden and observed chains, the threshold variant of the
algorithm Context, and the explicit recovery bounds.
"""

__version__ = "0.1.0"

from .tree import (
    ContextTree,
    TreeConstants,
    TreeFormatError,
    TreeValidationError,
    compute_constants,
    load_tree,
    longest_context,
    min_valid_depth,
    parse_tree,
    truncate,
)
from .chain import ChainLaw, MarkovEmbedding, SamplePath, embed, stationary
from .noise import (
    PerturbedLaw,
    exact_delta_window,
    lemma_bounds_check,
    perturb,
    q_conditional,
    q_marginal,
    q_min,
    theorem1_certify,
)
from .estimator import (
    CountTrie,
    EstimatedTree,
    build_counts,
    compare_truncated,
    count_naive,
    delta,
    empirical_conditional,
    estimate_tree,
)
from .bounds import (
    AdmissibilityError,
    Theorem2Params,
    theorem2_bound,
    theorem2_min_n,
    theoretical_delta_window,
)
from .experiments import ExperimentConfig, RecoveryReport, load_config, parse_config, run_recovery
