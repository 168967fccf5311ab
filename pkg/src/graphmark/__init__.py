"""Graph watermarking toolkit.

Generates random graphs from two families, embeds and recovers structural
watermarks by keyed edge flipping, simulates edge-flipping adversaries, and
runs the end-to-end identification robustness experiment.
"""

from .adversary import (
    AttackBudget,
    AttackOutcome,
    budget_capped_attack,
    pair_count,
    random_flip_attack,
    uniform_pair_attack,
)
from .errors import (
    EdgeListParseError,
    GraphMarkError,
    KeygenInfeasibleError,
    LabelingFailure,
    MatchingFailure,
    ParameterError,
    ThresholdInfeasibleError,
    ValidationError,
)
from .experiment import ExperimentConfig, ExperimentResult, SweepPointResult, run_experiment
from .graph import (
    Graph,
    build_graph,
    edit_distance_exact,
    flip_edge,
    identity_distances,
    read_edge_list,
    read_edge_list_path,
    vertex_distance_exact,
    write_edge_list,
    write_edge_list_path,
)
from .metrics import (
    PowerLawFit,
    bootstrap_pvalue,
    dk2_deviation,
    dk2_series,
    fit_gamma,
    fit_power_law,
    select_xmin,
    synthetic_degree_samples,
)
from .models import (
    ErdosRenyiParams,
    PowerLawParams,
    degree_count_bracket,
    derive_constants,
    edge_probability,
    sample_er,
    sample_power_law,
)
from .separation import (
    LabelSet,
    SeparationThresholds,
    check_separation,
    er_thresholds,
    high_index_cutoff,
    label,
    medium_index_cutoff,
    neighborhood_distance,
    plg_thresholds,
    threshold_exponent,
    tune_medium_count,
)
from .watermark import (
    ConstantResample,
    IdentificationResult,
    MarkKey,
    MarkedCopy,
    ModelResample,
    WatermarkId,
    approximate_isomorphism,
    hamming,
    identify,
    keygen,
    mark,
)

__version__ = "0.1.0"
