"""Zero- and low-shot image classification in embedding space.

Fuses frozen zero-shot predictions with a small trainable adapter head over
self-supervised features, with the blending weight picked automatically from
prediction confidence, swept on a validation split, or fixed.
"""

from .adapters import (
    AdapterParams,
    ClipAdapterParams,
    LinearProbeParams,
    TrainConfig,
    predict_clip_adapter,
    predict_linear_probe,
    predict_svl_adapter,
    train_clip_adapter,
    train_linear_probe,
    train_svl_adapter,
)
from .errors import BlendshotError
from .fusion import FusionResult, fuse_predictions, lambda_grid, sweep_lambda
from .pseudolabel import PseudoLabelSet, select_pseudolabels, zero_shot_adapt
from .report import RunResult, aggregate_runs, emit_report, top1_accuracy
from .store import (
    ClassSpace,
    Dataset,
    EmbeddingTable,
    Episode,
    LabelVector,
    load_dataset,
    read_matrix,
    sample_episode,
    split_validation,
    write_matrix,
)
from .zeroshot import (
    LambdaEstimate,
    ProbabilityMatrix,
    confidence_histogram,
    estimate_lambda,
    zero_shot_probs,
)

__version__ = "0.1.0"
