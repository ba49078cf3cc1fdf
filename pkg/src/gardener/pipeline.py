"""Command-level operations shared by the CLI and tests."""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

from .blocks import BlockModel, BlockPattern, partition_blocks
from .config import GardenerConfig
from .exceptions import InputError, IoError, ParseError, UsageError
from .oracle import OracleTable
from .ranking import (
    WEIGHT_CRITERIA,
    ScoreTable,
    canonical_criterion,
    gardener_select,
    prune_count,
    random_select,
    rank_scores,
)
from .report import AnalysisReport
from .scoring import compute_block_statistics
from .tensor_store import Checkpoint, read_checkpoint


def parse_criteria(text: str | None) -> list[str]:
    if text is None or text.strip() == "":
        raise UsageError("at least one criterion is required")
    if text.strip() == "all":
        return list(WEIGHT_CRITERIA)
    out = []
    for part in text.split(","):
        if part.strip():
            c = canonical_criterion(part)
            if c not in out:
                out.append(c)
    if not out:
        raise UsageError("at least one criterion is required")
    return out


def parse_ratio(text) -> float:
    try:
        value = float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad ratio {text!r}") from exc
    if not 0 < value < 1:
        raise UsageError(f"ratio must lie in (0, 1), got {text!r}")
    return value


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def open_model(path, config: GardenerConfig) -> tuple[Checkpoint, BlockModel]:
    ckpt = read_checkpoint(path)
    return ckpt, partition_blocks(ckpt, BlockPattern(config.block_pattern, config.index_base))


def tables_from_scores(scores: dict[str, dict[int, float]], config: GardenerConfig, directions=None) -> dict[str, ScoreTable]:
    directions = {**(directions or {}), **config.directions}
    out = {}
    for name, raw in scores.items():
        out[name] = rank_scores(name, raw, directions.get(name))
    return out


def analyze(ckpt: Checkpoint, model: BlockModel, criteria, config: GardenerConfig) -> AnalysisReport:
    stats = compute_block_statistics(model, ckpt, criteria, config.n_bins, config.binning, config.log_base)
    tables = tables_from_scores(stats.values, config)
    return AnalysisReport.build(model, stats, tables, config.to_dict())


def load_scores_file(path) -> tuple[dict[str, dict[int, float]], dict[str, str]]:
    """Per-criterion block scores from JSON.

    Accepts an analysis report (``score_tables``), ``{"scores": ..., "directions": ...}``,
    or a bare ``{criterion: {block: score}}`` map.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read scores file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"scores file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"scores file {path} must hold a JSON object")
    directions: dict[str, str] = {}
    if "score_tables" in data:
        raw_tables = {}
        for name, t in data["score_tables"].items():
            raw_tables[name] = t["raw"]
            if "prune_direction" in t:
                directions[canonical_criterion(name)] = t["prune_direction"]
    elif "scores" in data:
        raw_tables = data["scores"]
        directions = {canonical_criterion(k): v for k, v in data.get("directions", {}).items()}
    else:
        raw_tables = data
    scores = {}
    for name, raw in raw_tables.items():
        try:
            scores[canonical_criterion(name)] = {int(b): float(v) for b, v in raw.items()}
        except (AttributeError, TypeError, ValueError) as exc:
            raise ParseError(f"scores for {name!r} must map block ids to numbers") from exc
    return scores, directions


def load_measured(path) -> dict[tuple[str, int], float]:
    """Measured WAR after multi-block pruning: CSV ``criterion,n_removed,war``."""
    try:
        rows = list(csv.DictReader(Path(path).read_text(encoding="utf-8").splitlines()))
    except OSError as exc:
        raise IoError(f"cannot read measured-WAR file {path}: {exc}") from exc
    out = {}
    for i, row in enumerate(rows, start=2):
        try:
            key = (canonical_criterion(row["criterion"]), int(row["n_removed"]))
            out[key] = float(row["war"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"{path}:{i}: need criterion,n_removed,war; got {row}") from exc
    return out


def curve_rows(
    tables: dict[str, ScoreTable],
    criteria: list[str],
    ratios: list[float],
    oracle: OracleTable,
    L: int,
    seed: int = 0,
    measured: dict | None = None,
) -> list[dict]:
    """Selection schedule per (ratio, criterion) with oracle-implied metrics."""
    if not criteria:
        raise UsageError("at least one criterion is required")
    sens = oracle.score_table(L)
    drops = oracle.drops()
    rows = []
    for ratio in ratios:
        n = prune_count(L, ratio)
        sens_sel = set(gardener_select(sens, count=n).block_ids)
        for crit in criteria:
            if crit == "external":
                sel = gardener_select(sens, count=n)
            elif crit == "random":
                sel = random_select(L, count=n, seed=seed)
            else:
                if crit not in tables:
                    raise InputError(f"no scores available for criterion {crit!r}")
                sel = gardener_select(tables[crit], count=n)
            war = (measured or {}).get((crit, n))
            rows.append(
                {
                    "ratio": ratio,
                    "n_removed": n,
                    "criterion": crit,
                    "removed_blocks": sel.block_ids,
                    "oracle_drop_sum": sum(drops[b] for b in sel.block_ids),
                    "oracle_overlap": len(sens_sel & set(sel.block_ids)) / n,
                    "measured_war": war,
                    "measured_delta": None if war is None else oracle.baseline_war - war,
                }
            )
    return rows
