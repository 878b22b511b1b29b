"""plantedlab: samplers, noise splitting, low-degree advantage bounds, and
one-sided detection experiments for planted inference models."""

__version__ = "0.1.0"

from .advantage import (
    AdvantageReport, adv2_angular_mc, adv2_angular_surrogate,
    adv2_graph_sum_binary, adv2_orth_mc, adv2_orth_surrogate,
    adv2_sbm_exact, adv2_submatrix_overlap, chain_expectation, exp_trunc,
    moment_interpolation_gap, omega_expectation,
)
from .detection import (
    ContiguityInputs, ContiguityVerdict, HiddenSampleReport, TestReport,
    contiguity_verdict, degree_estimator, hidden_sample_experiment,
    one_sided_statistic, oracle_estimator, pair_statistic_binary,
    pair_statistic_gaussian, run_one_sided_experiment, spectral_estimator,
    statistic_detector, wilson_interval,
)
from .graphs import (
    GraphStats, LabeledGraph, enumerate_edge_subsets, graph_stats,
)
from .models import (
    AngularSync, Instance, MultiLayerSBM, OrthSync, PlantedDenseSubgraph,
    PlantedSubmatrix, SBM, haar_orthogonal, instance_from_json,
    instance_to_json, sample_null, sample_planted,
)
from .projection import (
    ConstraintSetK, ProjectionResult, min_norm_correlated,
    project_entrywise_cap, project_psd_shift,
)
from .rng import RandomStream
from .splitting import (
    BernoulliSplitParams, GaussianSplitParams, SplitPair, bernoulli_pair_pmf,
    bernoulli_split, conditional_mean_b, gaussian_split,
    split_symmetric_binary,
)
from .thresholds import (
    ThresholdReport, TransferChainResult, ks_threshold, sigma_plus,
    transfer_chain_sum, transfer_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
