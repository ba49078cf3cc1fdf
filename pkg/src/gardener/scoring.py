"""One pass over a checkpoint's blocks producing every per-block criterion."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockModel, block_values, iter_block_arrays
from .exceptions import DegenerateKurtosis, DegenerateMagnitude, GardenerError, UsageError
from .ranking import WEIGHT_CRITERIA, ScoreTable, as_criterion, rank_scores
from .stats import (
    DEFAULT_BINS,
    Histogram,
    MomentAccumulator,
    bin_edges,
    bin_indices,
    entropy_of_masses,
    mutual_information,
    value_range,
)
from .tensor_store import Checkpoint

BINNING_MODES = ("per_block", "global")
_MI_CRITERIA = ("mi_number", "mi_value")


@dataclass
class BlockStatistics:
    """Everything computed for one model: raw criterion values plus histograms."""

    values: dict[str, dict[int, float]]
    errors: dict[str, GardenerError]
    histograms: dict[int, Histogram]
    basic: dict[int, dict]
    n_bins: int
    binning: str
    log_base: float | None
    global_range: tuple[float, float] | None = None
    passes: int = 1


def _normalize_binning(binning: str) -> str:
    b = binning.replace("-", "_")
    if b not in BINNING_MODES:
        raise UsageError(f"binning must be one of {BINNING_MODES}, got {binning!r}")
    return b


def _global_range(model: BlockModel, ckpt: Checkpoint) -> tuple[float, float]:
    lo, hi = math.inf, -math.inf
    for b in model.block_ids:
        for arr in iter_block_arrays(model, ckpt, b):
            if arr.size:
                t_lo, t_hi = value_range(arr)
                lo, hi = min(lo, t_lo), max(hi, t_hi)
    return lo, hi


def compute_block_statistics(
    model: BlockModel,
    ckpt: Checkpoint,
    criteria=WEIGHT_CRITERIA,
    n_bins: int = DEFAULT_BINS,
    binning: str = "per_block",
    log_base: float | None = None,
) -> BlockStatistics:
    """Score every block under every requested weight criterion.

    Each block's values are read once. MI criteria and global binning need
    the range over all blocks first, which costs one extra min/max scan.
    """
    criteria = [as_criterion(c).name for c in criteria]
    bad = [c for c in criteria if c not in WEIGHT_CRITERIA]
    if bad:
        raise UsageError(f"criteria {bad} cannot be computed from weights")
    binning = _normalize_binning(binning)
    want_mi = any(c in _MI_CRITERIA for c in criteria)
    grange = _global_range(model, ckpt) if (want_mi or binning == "global") else None

    hists: dict[int, Histogram] = {}
    mags: dict[int, np.ndarray] = {}
    shared_counts: dict[int, np.ndarray] = {}
    shared_mags: dict[int, np.ndarray] = {}
    basic: dict[int, dict] = {}

    for b in model.block_ids:
        vals = block_values(model, ckpt, b)
        lo, hi = grange if binning == "global" else value_range(vals)
        idx = bin_indices(vals, lo, hi, n_bins)
        absv = np.abs(vals)
        counts = np.bincount(idx, minlength=n_bins).astype(np.int64)
        hists[b] = Histogram(counts, bin_edges(lo, hi, n_bins), int(vals.size))
        mags[b] = np.bincount(idx, weights=absv, minlength=n_bins)
        if want_mi:
            if binning == "global":
                shared_counts[b], shared_mags[b] = counts, mags[b]
            else:
                sidx = bin_indices(vals, grange[0], grange[1], n_bins)
                shared_counts[b] = np.bincount(sidx, minlength=n_bins).astype(np.int64)
                shared_mags[b] = np.bincount(sidx, weights=absv, minlength=n_bins)
        basic[b] = MomentAccumulator().add(vals).finalize().as_dict()
        del vals, idx, absv

    values: dict[str, dict[int, float]] = {}
    errors: dict[str, GardenerError] = {}

    def put(name, fn):
        if name not in criteria:
            return
        try:
            values[name] = {b: float(fn(b)) for b in model.block_ids}
        except GardenerError as exc:
            errors[name] = exc

    def _kurt(b):
        k = basic[b]["kurtosis"]
        if k is None:
            raise DegenerateKurtosis(f"block {b} has zero variance")
        return k

    def _entropy_value(b):
        if not mags[b].sum() > 0:
            raise DegenerateMagnitude(f"block {b} is all zeros")
        return entropy_of_masses(mags[b], log_base)

    put("entropy_number", lambda b: entropy_of_masses(hists[b].counts, log_base))
    put("entropy_value", _entropy_value)
    if want_mi:
        total_c = sum(shared_counts.values())
        total_m = sum(shared_mags.values())
        put("mi_number", lambda b: mutual_information(
            np.column_stack([shared_counts[b], total_c - shared_counts[b]]), log_base))
        put("mi_value", lambda b: mutual_information(
            np.column_stack([shared_mags[b], np.clip(total_m - shared_mags[b], 0, None)]), log_base))
    put("mean", lambda b: basic[b]["mean_abs"])
    put("variance", lambda b: basic[b]["variance"])
    put("std", lambda b: basic[b]["std"])
    put("l1", lambda b: basic[b]["l1"])
    put("l2", lambda b: basic[b]["l2"])
    put("max", lambda b: basic[b]["max_abs"])
    put("kurtosis", _kurt)

    return BlockStatistics(
        values=values,
        errors=errors,
        histograms=hists,
        basic=basic,
        n_bins=n_bins,
        binning=binning,
        log_base=log_base,
        global_range=grange,
        passes=2 if grange is not None else 1,
    )


def score_blocks(
    model: BlockModel,
    ckpt: Checkpoint,
    criterion="entropy_number",
    n_bins: int = DEFAULT_BINS,
    binning: str = "per_block",
    log_base: float | None = None,
    direction: str | None = None,
) -> ScoreTable:
    crit = as_criterion(criterion, direction)
    if crit.name not in WEIGHT_CRITERIA:
        raise UsageError(f"criterion {crit.name!r} is not computed from weights")
    stats = compute_block_statistics(model, ckpt, [crit.name], n_bins, binning, log_base)
    if crit.name in stats.errors:
        raise stats.errors[crit.name]
    return rank_scores(crit, stats.values[crit.name])
