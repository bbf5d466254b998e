"""Segmented nearest-neighbor voting workbench."""

from .core import (
    LabeledDataset,
    OpCounter,
    SegmentDictionaries,
    SegmentationConfig,
    VoteOutcome,
    build_dictionaries,
    classify,
    segment_vector,
    segment_vote,
    squared_euclidean,
)
from .harness import (
    AccuracyTable,
    NuSweepResult,
    ProbEstimate,
    RateSlopeResult,
    RegimeReport,
    RuleSpec,
    accuracy_sweep,
    dictionary_size_sweep,
    estimate_misclassification,
    largest_divisor_at_most_sqrt,
    rate_slope,
    theorem_regime_report,
    wilson_interval,
)
from .dataio import (
    load_dataset,
    render_results,
    save_dataset,
    save_results,
    train_test_split,
)
from .models import (
    GeneratedInstance,
    ModelAParams,
    ModelBParams,
    ModelCParams,
    model_a_generate,
    model_b_generate,
    model_c_generate,
    spike_base_vectors,
)
from .rates import (
    DiscreteDist,
    RateResult,
    bernoulli_relative_entropy,
    cgf,
    model_a_coordinate_dist,
    model_a_segment_vote_dist,
    rate_zero,
)

__version__ = "0.1.0"
