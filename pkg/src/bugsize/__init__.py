"""Size-biased Bayesian estimation of residual software bugs.

Fits a detection model to phased testing-campaign counts in which a bug's
chance of ever being found grows with its eventual size (the number of
inputs that would ever traverse it).  A Metropolis-within-Gibbs sampler
over an augmented candidate list yields posteriors for the total bug
count, per-bug sizes, the total size of the bugs testing missed, and the
release reliability Pr(remaining size < threshold).
"""

from .dataio import (
    build_assignment,
    build_report,
    read_campaign,
    read_draws,
    write_campaign,
    write_draws,
    write_report,
)
from .diagnostics import (
    PosteriorReport,
    effective_sample_size,
    split_rhat,
    summarize,
    trace_export,
)
from .model import (
    AugmentedState,
    BugAssignment,
    ModelConfig,
    TestCampaign,
    bug_log_likelihood,
    cell_probabilities,
    detection_prob,
    gamma_log_pdf,
    nb_log_pmf,
    phase_detection_prob,
)
from .reliability import (
    chain_reliability,
    reliability_at,
    reliability_curve,
    remaining_size,
)
from .sampler import (
    ChainDraws,
    ChainSet,
    SamplerConfig,
    draw_inclusion_prob,
    run_all,
    run_chain,
    update_inclusion,
    update_mean_sizes,
    update_sizes,
)
from .simulate import GroundTruth, StudyResult, generate_campaign, replicate_study

__version__ = "0.1.0"

__all__ = [
    "AugmentedState",
    "BugAssignment",
    "ChainDraws",
    "ChainSet",
    "GroundTruth",
    "ModelConfig",
    "PosteriorReport",
    "SamplerConfig",
    "StudyResult",
    "TestCampaign",
    "bug_log_likelihood",
    "build_assignment",
    "build_report",
    "cell_probabilities",
    "chain_reliability",
    "detection_prob",
    "draw_inclusion_prob",
    "effective_sample_size",
    "gamma_log_pdf",
    "generate_campaign",
    "nb_log_pmf",
    "phase_detection_prob",
    "read_campaign",
    "read_draws",
    "reliability_at",
    "reliability_curve",
    "remaining_size",
    "replicate_study",
    "run_all",
    "run_chain",
    "split_rhat",
    "summarize",
    "trace_export",
    "update_inclusion",
    "update_mean_sizes",
    "update_sizes",
    "write_campaign",
    "write_draws",
    "write_report",
]
