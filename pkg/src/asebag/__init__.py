"""Anomaly-score guided undersampling bagging for imbalanced binary classification.

An anomaly detector scores every training sample; the scores partition the
majority class into bins whose sizes and boundary proximity decide how many
samples each bin contributes to a member's training subset. Members are
weighted by how well their detector exposed the minority class and the
class-overlap region, then combined by weighted soft voting.
"""

from .anomaly import (
    AnomalyScoring,
    IsolationForestModel,
    KnnDetector,
    apply_contamination,
    fit_isolation_forest,
    fit_knn_detector,
    normalize_scores,
    raw_iforest_score,
)
from .core import (
    AsebagError,
    ConfusionMatrix,
    DataError,
    Dataset,
    MetricSet,
    Sample,
    auc_score,
    confusion,
    imbalance_ratio,
    metrics,
    stratified_split,
)
from .datasets import CsvSchema, SynthSpec, generate_synth, load_csv, summarize, write_csv
from .ensemble import (
    AseConfig,
    AseModel,
    WeightedMember,
    combine_scores,
    contamination_schedule,
    train_ablated,
    train_ase,
    train_underbagging,
)
from .learners import (
    DecisionTree,
    KnnClassifier,
    LogisticRegression,
    fit_knn_classifier,
    fit_logistic,
    fit_tree,
    score,
)
from .sampler import (
    BinPartition,
    build_subset,
    compute_asw,
    compute_d,
    compute_n,
    split_bins,
    split_bins_quantile,
)
from .weighting import CewBreakdown, cew, contamination_c, entropy_e

__version__ = "0.1.0"
