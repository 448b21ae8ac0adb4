"""Membership-privacy-preserving classification via adversarial regularization.

Trains classifiers in a min-max game against their strongest membership
inference attacker, evaluates external attacks against frozen models, and
verifies the game's theory on discrete toy distributions.
"""

from .attack import (
    AttackTrainConfig,
    attack_accuracy,
    attack_report,
    thresholded_attack_accuracy,
    train_external_attacker,
)
from .data import (
    DataSplit,
    LabeledDataset,
    load_csv,
    one_hot,
    save_csv,
    split_dataset,
    synth_generate,
)
from .errors import (
    AdvRegError,
    ConfigError,
    DimensionError,
    FormatError,
    InputError,
    SplitError,
    StateError,
    TrainingError,
)
from .experiment import ExperimentConfig, run_experiment
from .metrics import (
    DistributionGap,
    distribution_gap,
    generalization_cdf,
    model_accuracy,
    normalized_entropy,
    per_class_generalization_error,
    prediction_accuracy,
)
from .models import (
    AttackModel,
    ClassifierModel,
    attack_forward,
    build_attack_model,
    build_classifier,
)
from .nn import (
    MlpParams,
    MlpSpec,
    OptimizerState,
    adam,
    cross_entropy,
    grad_check,
    mlp_backward,
    mlp_forward,
    optimizer_step,
    sgd,
    softmax,
)
from .objectives import (
    classification_loss,
    defender_objective,
    inference_gain,
    l2_penalty,
)
from .theory import (
    DiscreteGame,
    brute_force_attacker,
    discrete_gain,
    equilibrium_check,
    harvest_discrete_game,
    optimal_attacker,
)
from .trainer import (
    GameConfig,
    TrainTrace,
    attack_inner_step,
    defense_outer_step,
    train_minmax,
    train_plain,
)

__version__ = "0.1.0"
