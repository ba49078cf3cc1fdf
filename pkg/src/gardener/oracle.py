"""Oracle sensitivity tables and rank-agreement measures."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import DuplicateOracleRow, IoError, NoBaseline, ParseError, ShapeError, UsageError
from .ranking import ScoreTable, external_rank


@dataclass(frozen=True)
class OracleEntry:
    war: float
    drop: float


@dataclass(frozen=True)
class OracleTable:
    baseline_war: float
    per_block: dict[int, OracleEntry]

    @classmethod
    def from_wars(cls, baseline_war: float, wars: dict[int, float]) -> "OracleTable":
        return cls(float(baseline_war), {int(b): OracleEntry(float(w), float(baseline_war) - float(w)) for b, w in wars.items()})

    def drops(self) -> dict[int, float]:
        return {b: e.drop for b, e in sorted(self.per_block.items())}

    def score_table(self, n_blocks: int | None = None) -> ScoreTable:
        return external_rank(self.drops(), n_blocks)


def load_oracle(path) -> OracleTable:
    """Read a ``block_id,war`` CSV; the row with block_id 0 is the unpruned baseline."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read oracle file {path}: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None or not {"block_id", "war"} <= {f.strip() for f in reader.fieldnames}:
        raise ParseError(f"{path}: oracle CSV needs columns block_id,war (got {reader.fieldnames})")
    wars: dict[int, float] = {}
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
        try:
            block, war = int(row["block_id"]), float(row["war"])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad oracle row {row}") from exc
        if block < 0 or not math.isfinite(war):
            raise ParseError(f"{path}:{lineno}: bad oracle row {row}")
        if block in wars:
            raise DuplicateOracleRow(f"{path}:{lineno}: block {block} listed twice")
        wars[block] = war
    if 0 not in wars:
        raise NoBaseline(f"{path}: no baseline row (block_id 0)")
    baseline = wars.pop(0)
    return OracleTable.from_wars(baseline, wars)


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties sharing the mean of the positions they occupy."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _paired(a, b):
    if len(a) != len(b):
        raise ShapeError(f"rank vectors differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ShapeError("need at least two items to correlate")
    return average_ranks(a), average_ranks(b)


def spearman(rank_a: Sequence[float], rank_b: Sequence[float]) -> float:
    """Spearman's rho. Exact permutation formula when tie-free, else Pearson on average ranks."""
    ra, rb = _paired(rank_a, rank_b)
    n = len(ra)
    tie_free = len(set(ra)) == n and len(set(rb)) == n
    if tie_free:
        # integer ranks: one correctly rounded division of exact integers
        d2 = int(((ra - rb) ** 2).sum())
        denom = n * (n * n - 1)
        return (denom - 6 * d2) / denom
    da, db = ra - ra.mean(), rb - rb.mean()
    denom = math.sqrt(float((da * da).sum() * (db * db).sum()))
    return float((da * db).sum() / denom) if denom else math.nan


def kendall(rank_a: Sequence[float], rank_b: Sequence[float]) -> float:
    """Kendall's tau-a: (concordant - discordant) / all pairs; tied pairs count zero."""
    ra, rb = _paired(rank_a, rank_b)
    n = len(ra)
    sa = np.sign(ra[:, None] - ra[None, :])
    sb = np.sign(rb[:, None] - rb[None, :])
    s = float(np.triu(sa * sb, k=1).sum())
    return s / (n * (n - 1) / 2)


@dataclass
class RankComparison:
    criterion: str
    spearman_rho: float
    kendall_tau: float
    top_k_most: dict[int, float]
    top_k_least: dict[int, float]
    rank_table: list[dict]

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "spearman_rho": self.spearman_rho,
            "kendall_tau": self.kendall_tau,
            "top_k_overlap_most_important": {str(k): v for k, v in sorted(self.top_k_most.items())},
            "top_k_overlap_least_important": {str(k): v for k, v in sorted(self.top_k_least.items())},
            "rank_table": self.rank_table,
        }


def compare(table: ScoreTable, oracle: OracleTable | ScoreTable, ks: Sequence[int] = (1, 3, 5)) -> RankComparison:
    oracle_table = oracle if isinstance(oracle, ScoreTable) else oracle.score_table(table.L)
    if sorted(table.rank) != sorted(oracle_table.rank):
        raise ShapeError(
            f"criterion covers blocks {sorted(table.rank)}, oracle covers {sorted(oracle_table.rank)}"
        )
    blocks = sorted(table.rank)
    L = len(blocks)
    a = [table.rank[b] for b in blocks]
    o = [oracle_table.rank[b] for b in blocks]

    most, least = {}, {}
    for k in ks:
        if not 1 <= k <= L:
            raise UsageError(f"k={k} outside 1..{L}")
        top_c = {b for b in blocks if table.rank[b] <= k}
        top_o = {b for b in blocks if oracle_table.rank[b] <= k}
        bot_c = {b for b in blocks if table.rank[b] > L - k}
        bot_o = {b for b in blocks if oracle_table.rank[b] > L - k}
        most[k] = len(top_c & top_o) / k
        least[k] = len(bot_c & bot_o) / k

    rows = []
    for b in blocks:
        row = {"block": b, "criterion_score": table.raw[b], "criterion_rank": table.rank[b], "oracle_rank": oracle_table.rank[b]}
        if isinstance(oracle, OracleTable):
            row["war"] = oracle.per_block[b].war
            row["drop"] = oracle.per_block[b].drop
        rows.append(row)
    return RankComparison(table.criterion.name, spearman(a, o), kendall(a, o), most, least, rows)
