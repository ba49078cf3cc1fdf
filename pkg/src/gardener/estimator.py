"""scikit-learn style front end.

``BlockScorer`` fits a ScoreTable to a checkpoint; ``GardenerPruner`` fits a
prune set and transforms a checkpoint into its pruned version. Both support
``get_params``/``set_params``/``clone`` like any sklearn estimator.

>>> pruner = GardenerPruner(criterion="entropy_number", ratio=0.25)
>>> pruned = pruner.fit_transform("model.safetensors")    # doctest: +SKIP
>>> pruner.prune_set_.block_ids                            # doctest: +SKIP
[10, 11, 12]
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import __version__
from .blocks import DEFAULT_BLOCK_PATTERN, BlockPattern, partition_blocks
from .exceptions import PlanConflict
from .pruner import apply_plan, make_plan
from .ranking import as_criterion, explicit_select, gardener_select, random_select
from .scoring import score_blocks
from .stats import DEFAULT_BINS
from .validation import check_checkpoint, check_count, check_n_bins, check_ratio


class BlockScorer(BaseEstimator):
    def __init__(
        self,
        criterion="entropy_number",
        n_bins=DEFAULT_BINS,
        binning="per_block",
        log_base=None,
        block_pattern=DEFAULT_BLOCK_PATTERN,
        index_base=0,
        direction=None,
    ):
        self.criterion = criterion
        self.n_bins = n_bins
        self.binning = binning
        self.log_base = log_base
        self.block_pattern = block_pattern
        self.index_base = index_base
        self.direction = direction

    def fit(self, X, y=None):
        ckpt = check_checkpoint(X)
        self.block_model_ = partition_blocks(ckpt, BlockPattern(self.block_pattern, self.index_base))
        self.score_table_ = score_blocks(
            self.block_model_,
            ckpt,
            self.criterion,
            n_bins=check_n_bins(self.n_bins),
            binning=self.binning,
            log_base=self.log_base,
            direction=self.direction,
        )
        blocks = self.block_model_.block_ids
        self.n_blocks_ = len(blocks)
        self.scores_ = np.array([self.score_table_.raw[b] for b in blocks])
        self.normalized_scores_ = np.array([self.score_table_.normalized[b] for b in blocks])
        self.ranks_ = np.array([self.score_table_.rank[b] for b in blocks])
        return self

    def transform(self, X=None):
        """Normalized scores in block order (the fitted checkpoint's)."""
        check_is_fitted(self, "score_table_")
        return self.normalized_scores_.copy()

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class GardenerPruner(TransformerMixin, BaseEstimator):
    """Select blocks one-shot and remove them.

    Exactly one source decides the prune set: ``blocks`` (explicit ids), the
    ``random`` criterion (seeded), or a weight criterion ranked from the
    fitted checkpoint. ``n_remove`` takes precedence over ``ratio``.
    """

    def __init__(
        self,
        criterion="entropy_number",
        ratio=0.25,
        n_remove=None,
        blocks=None,
        seed=0,
        n_bins=DEFAULT_BINS,
        binning="per_block",
        log_base=None,
        block_pattern=DEFAULT_BLOCK_PATTERN,
        index_base=0,
        direction=None,
    ):
        self.criterion = criterion
        self.ratio = ratio
        self.n_remove = n_remove
        self.blocks = blocks
        self.seed = seed
        self.n_bins = n_bins
        self.binning = binning
        self.log_base = log_base
        self.block_pattern = block_pattern
        self.index_base = index_base
        self.direction = direction

    def fit(self, X, y=None):
        ckpt = check_checkpoint(X)
        model = partition_blocks(ckpt, BlockPattern(self.block_pattern, self.index_base))
        count = check_count(self.n_remove) if self.n_remove is not None else None
        ratio = check_ratio(self.ratio) if count is None and self.blocks is None else self.ratio

        self.score_table_ = None
        if self.blocks is not None:
            self.prune_set_ = explicit_select(self.blocks, model.L)
        elif as_criterion(self.criterion).name == "random":
            self.prune_set_ = random_select(model.L, ratio, seed=self.seed, count=count)
        else:
            self.score_table_ = score_blocks(
                model, ckpt, self.criterion, check_n_bins(self.n_bins), self.binning, self.log_base, self.direction
            )
            self.prune_set_ = gardener_select(self.score_table_, ratio, count)
        self.block_model_ = model
        self.plan_ = make_plan(model, self.prune_set_)
        return self

    def transform(self, X):
        check_is_fitted(self, "plan_")
        ckpt = check_checkpoint(X)
        missing = [n for n in (*self.plan_.drop, *self.plan_.rename) if n not in ckpt.tensors]
        if missing:
            raise PlanConflict(f"checkpoint does not match the fitted block layout; missing {missing[:3]}")
        provenance = {
            "criterion": self.prune_set_.criterion,
            "ratio": "" if self.prune_set_.ratio is None else repr(self.prune_set_.ratio),
            "tool": f"gardener {__version__}",
        }
        if self.prune_set_.seed is not None:
            provenance["seed"] = str(self.prune_set_.seed)
        return apply_plan(ckpt, self.plan_, provenance)
