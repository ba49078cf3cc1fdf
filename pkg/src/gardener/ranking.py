"""Importance ranking of blocks and one-shot prune-set selection.

Rank 1 is the most important block (pruned last); rank L is pruned first.
Equal scores are broken toward pruning the deeper block first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .exceptions import (
    BlockNotFound,
    EmptySelection,
    FullModelPrune,
    IncompleteOracle,
    UnknownCriterion,
    UsageError,
)
from .prng import XorShift64Star
from .stats import minmax_normalize

LOWEST_FIRST = "lowest_first"
HIGHEST_FIRST = "highest_first"

DEFAULT_DIRECTIONS = {
    "entropy_number": LOWEST_FIRST,
    "entropy_value": LOWEST_FIRST,
    "mi_number": LOWEST_FIRST,
    "mi_value": LOWEST_FIRST,
    "mean": LOWEST_FIRST,
    "variance": LOWEST_FIRST,
    "std": LOWEST_FIRST,
    "l1": LOWEST_FIRST,
    "l2": LOWEST_FIRST,
    "max": LOWEST_FIRST,
    "kurtosis": HIGHEST_FIRST,
    "random": LOWEST_FIRST,
    "external": LOWEST_FIRST,
}

# criteria computable from weights alone
WEIGHT_CRITERIA = tuple(c for c in DEFAULT_DIRECTIONS if c not in ("random", "external"))

ALIASES = {
    "entropy": "entropy_number",
    "information_entropy": "entropy_number",
    "mutual_information": "mi_value",
    "l1_norm": "l1",
    "l2_norm": "l2",
    "standard_deviation": "std",
    "sensitivity": "external",
}

_RATIO_EPS = 1e-9


def canonical_criterion(name: str) -> str:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    key = ALIASES.get(key, key)
    if key not in DEFAULT_DIRECTIONS:
        raise UnknownCriterion(f"unknown criterion {name!r}; choose from {sorted(DEFAULT_DIRECTIONS)}")
    return key


def _direction(value: str) -> str:
    v = value.lower()
    if v in ("lowest", LOWEST_FIRST):
        return LOWEST_FIRST
    if v in ("highest", HIGHEST_FIRST):
        return HIGHEST_FIRST
    raise UsageError(f"prune direction must be 'lowest' or 'highest', got {value!r}")


@dataclass(frozen=True)
class Criterion:
    name: str
    prune_direction: str = ""

    def __post_init__(self):
        object.__setattr__(self, "name", canonical_criterion(self.name))
        direction = self.prune_direction or DEFAULT_DIRECTIONS[self.name]
        object.__setattr__(self, "prune_direction", _direction(direction))


def as_criterion(criterion, direction: str | None = None) -> Criterion:
    if isinstance(criterion, Criterion):
        return Criterion(criterion.name, direction) if direction else criterion
    return Criterion(criterion, direction or "")


@dataclass
class ScoreTable:
    criterion: Criterion
    raw: dict[int, float]
    normalized: dict[int, float]
    rank: dict[int, int]

    @property
    def L(self) -> int:
        return len(self.rank)

    def prune_order(self) -> list[int]:
        """Block ids from first-pruned to last-pruned."""
        return sorted(self.rank, key=lambda b: -self.rank[b])

    def rank_list(self) -> list[int]:
        return [self.rank[b] for b in sorted(self.rank)]

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion.name,
            "prune_direction": self.criterion.prune_direction,
            "raw": {str(b): self.raw[b] for b in sorted(self.raw)},
            "normalized": {str(b): self.normalized[b] for b in sorted(self.normalized)},
            "rank": {str(b): self.rank[b] for b in sorted(self.rank)},
        }


@dataclass
class PruneSet:
    block_ids: list[int]
    ratio: float | None
    criterion: str
    L: int
    seed: int | None = None
    order: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "block_ids": list(self.block_ids),
            "ratio": self.ratio,
            "criterion": self.criterion,
            "L": self.L,
            "seed": self.seed,
        }


def rank_scores(criterion, raw: Mapping[int, float], direction: str | None = None) -> ScoreTable:
    """Build a ScoreTable from raw per-block scores (normalize, then rank)."""
    crit = as_criterion(criterion, direction)
    raw = {int(b): float(v) for b, v in raw.items()}
    if any(math.isnan(v) for v in raw.values()):
        raise UsageError(f"{crit.name}: scores contain NaN")
    normalized = minmax_normalize(raw)
    sign = 1.0 if crit.prune_direction == LOWEST_FIRST else -1.0
    # first pruned = most extreme score in the prune direction; ties -> deeper block first
    order = sorted(raw, key=lambda b: (sign * raw[b], -b))
    L = len(order)
    rank = {b: L - i for i, b in enumerate(order)}
    return ScoreTable(crit, raw, normalized, rank)


def prune_count(L: int, ratio: float | None = None, count: int | None = None) -> int:
    if count is not None:
        n = int(count)
    else:
        if ratio is None or not 0 < ratio < 1:
            raise UsageError(f"pruning ratio must lie in (0, 1), got {ratio!r}")
        # floor(r L); the epsilon absorbs float noise in ratios such as 7/12
        n = math.floor(ratio * L + _RATIO_EPS)
    if n <= 0:
        raise EmptySelection(f"selection of {n} blocks out of {L} is empty")
    if n >= L:
        raise FullModelPrune(f"refusing to remove {n} of {L} blocks")
    return n


def gardener_select(table: ScoreTable, ratio: float | None = None, count: int | None = None) -> PruneSet:
    """Remove the floor(ratio * L) blocks with the worst importance ranks."""
    n = prune_count(table.L, ratio, count)
    order = table.prune_order()[:n]
    return PruneSet(sorted(order), ratio, table.criterion.name, table.L, order=order)


def random_select(L: int, ratio: float | None = None, seed: int = 0, count: int | None = None) -> PruneSet:
    n = prune_count(L, ratio, count)
    chosen = XorShift64Star(seed).sample(list(range(1, L + 1)), n)
    return PruneSet(sorted(chosen), ratio, "random", L, seed=seed, order=chosen)


def external_rank(drops: Mapping[int, float], n_blocks: int | None = None) -> ScoreTable:
    """Rank blocks by externally measured accuracy drop: the largest drop is rank 1."""
    drops = {int(b): float(v) for b, v in drops.items()}
    L = n_blocks if n_blocks is not None else (max(drops) if drops else 0)
    missing = sorted(set(range(1, L + 1)) - set(drops))
    extra = sorted(set(drops) - set(range(1, L + 1)))
    if missing or extra or L == 0:
        raise IncompleteOracle(f"oracle must cover blocks 1..{L}; missing {missing}, unexpected {extra}")
    return rank_scores(Criterion("external", LOWEST_FIRST), drops)


def explicit_select(block_ids, L: int, criterion: str = "explicit") -> PruneSet:
    ids = sorted({int(b) for b in block_ids})
    bad = [b for b in ids if not 1 <= b <= L]
    if bad:
        raise BlockNotFound(f"blocks {bad} not in 1..{L}")
    if not ids:
        raise EmptySelection("no blocks given")
    if len(ids) >= L:
        raise FullModelPrune(f"refusing to remove all {L} blocks")
    return PruneSet(ids, None, criterion, L, order=ids)
