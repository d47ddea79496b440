"""Frugal active-learning display selection for binary change detection.

Builds displays of unlabeled samples by optimizing a representativity /
diversity / ambiguity mix on the probability simplex, adapts the mix and
the display size with stateless Q-learning, and learns a binary scorer
from oracle labels (human via the bundled web service, or simulated from
ground truth).
"""

from .clustering import Partition, kmeans, restrict
from .config import RunConfig, config_from_dict, load_config
from .kernels import backend
from .loop import (
    HumanOracle,
    RunLog,
    Session,
    SimulatedOracle,
    fully_supervised_eer,
    init_session,
    oracle_label,
    run_simulated,
    submit_labels,
)
from .policy import (
    ActionConfig,
    QTable,
    SizeLadder,
    apply_size_move,
    choose_action,
    compute_reward,
    decode_action,
    update_q,
)
from .pool import (
    Budget,
    LabeledSet,
    Pool,
    PoolItem,
    generate_synthetic,
    load_pool,
    sampling_rate,
    split_train_test,
)
from .scorer import (
    LogisticScorer,
    TrainingSettings,
    build_f_matrix,
    eer,
    score_batch,
    train_classifier,
)
from .selector import (
    CriterionWeights,
    RelevanceVector,
    maxmin_display,
    objective,
    random_display,
    select_display,
    solve_relevance,
    uncertainty_display,
)

__version__ = "0.1.0"
