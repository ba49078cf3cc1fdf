"""Data-free, one-shot block pruning for transformer checkpoints."""

__version__ = "0.1.0"

from .blocks import BlockModel, BlockPattern, block_values, partition_blocks  # noqa: E402
from .estimator import BlockScorer, GardenerPruner  # noqa: E402
from .oracle import OracleTable, RankComparison, compare, kendall, load_oracle, spearman  # noqa: E402
from .pruner import CostConfig, PruningPlan, apply_plan, estimate_cost, make_plan  # noqa: E402
from .ranking import (  # noqa: E402
    Criterion,
    PruneSet,
    ScoreTable,
    external_rank,
    gardener_select,
    random_select,
    rank_scores,
)
from .scoring import compute_block_statistics, score_blocks  # noqa: E402
from .stats import (  # noqa: E402
    BasicStats,
    Histogram,
    basic_stats,
    build_histogram,
    magnitude_weighted_entropy,
    mi_number,
    mi_value,
    minmax_normalize,
    weight_number_entropy,
)
from .tensor_store import Checkpoint, TensorRecord, read_checkpoint, tensor_as_f64, write_checkpoint  # noqa: E402

__all__ = [
    "BasicStats",
    "BlockModel",
    "BlockPattern",
    "BlockScorer",
    "Checkpoint",
    "CostConfig",
    "Criterion",
    "GardenerPruner",
    "Histogram",
    "OracleTable",
    "PruneSet",
    "PruningPlan",
    "RankComparison",
    "ScoreTable",
    "TensorRecord",
    "apply_plan",
    "basic_stats",
    "block_values",
    "build_histogram",
    "compare",
    "compute_block_statistics",
    "estimate_cost",
    "external_rank",
    "gardener_select",
    "kendall",
    "load_oracle",
    "magnitude_weighted_entropy",
    "make_plan",
    "mi_number",
    "mi_value",
    "minmax_normalize",
    "partition_blocks",
    "random_select",
    "rank_scores",
    "read_checkpoint",
    "score_blocks",
    "spearman",
    "tensor_as_f64",
    "weight_number_entropy",
    "write_checkpoint",
]
