"""Turn a prune set into a re-indexed checkpoint, plus a linear cost estimate."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .blocks import BlockModel
from .exceptions import BlockNotFound, EmptySelection, FullModelPrune, InputError, PlanConflict
from .ranking import PruneSet
from .tensor_store import Checkpoint

META_PREFIX = "gardener."


@dataclass(frozen=True)
class PruningPlan:
    remove: tuple[int, ...]
    rename: dict[str, str]
    drop: tuple[str, ...]
    kept_L: int
    L: int

    def to_dict(self) -> dict:
        return {
            "remove": list(self.remove),
            "kept_L": self.kept_L,
            "L": self.L,
            "drop": list(self.drop),
            "rename": dict(self.rename),
        }


def make_plan(model: BlockModel, prune_set: PruneSet | list[int]) -> PruningPlan:
    ids = prune_set.block_ids if isinstance(prune_set, PruneSet) else list(prune_set)
    remove = sorted({int(b) for b in ids})
    if not remove:
        raise EmptySelection("prune set is empty")
    bad = [b for b in remove if not 1 <= b <= model.L]
    if bad:
        raise BlockNotFound(f"blocks {bad} not in 1..{model.L}")
    if len(remove) >= model.L:
        raise FullModelPrune(f"refusing to remove all {model.L} blocks")

    pat = model.pattern
    drop: list[str] = []
    rename: dict[str, str] = {}
    new_pos = 0
    for block_id, names in model.blocks:
        if block_id in remove:
            drop.extend(names)
            continue
        new_index = pat.index_base + new_pos
        new_pos += 1
        for name in names:
            _, (start, end) = pat.match(name)
            rename[name] = f"{name[:start]}{new_index}{name[end:]}"
    return PruningPlan(tuple(remove), rename, tuple(drop), new_pos, model.L)


def apply_plan(ckpt: Checkpoint, plan: PruningPlan, provenance: dict | None = None) -> Checkpoint:
    """Drop and rename tensors; surviving bytes are shared, never rewritten."""
    known = set(ckpt.names)
    unknown = [n for n in (*plan.drop, *plan.rename) if n not in known]
    if unknown:
        raise PlanConflict(f"plan references tensors missing from checkpoint: {unknown[:5]}")
    dropped = set(plan.drop)
    out = {}
    for rec in ckpt:
        if rec.name in dropped:
            continue
        new_name = plan.rename.get(rec.name, rec.name)
        if new_name in out:
            raise PlanConflict(f"renaming {rec.name!r} -> {new_name!r} collides with an existing tensor")
        out[new_name] = rec if new_name == rec.name else rec.renamed(new_name)

    metadata = dict(ckpt.metadata or {})
    metadata[META_PREFIX + "removed_blocks"] = ",".join(str(b) for b in plan.remove)
    metadata[META_PREFIX + "original_L"] = str(plan.L)
    metadata[META_PREFIX + "kept_L"] = str(plan.kept_L)
    for k, v in (provenance or {}).items():
        metadata[META_PREFIX + k] = v if isinstance(v, str) else json.dumps(v, sort_keys=True)
    return Checkpoint(out, metadata)


@dataclass(frozen=True)
class CostConfig:
    """Linear GFLOPs model ``base + per_block * kept_blocks``.

    Defaults are the least-squares fit to VideoMAE-B's reported
    (blocks kept, GFLOPs) pairs: (12, 180), (11, 166), (9, 139), (7, 112),
    (5, 84), (3, 57), (1, 30). Sizes default to 4 bytes per parameter (F32).
    """

    base_flops: float = 16.1813
    per_block_flops: float = 13.6402
    bytes_per_param: float = 4.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not isinstance(v, (int, float)) or v < 0:
                raise InputError(f"cost config {k} must be a non-negative number, got {v!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "CostConfig":
        unknown = set(d) - {"base_flops", "per_block_flops", "bytes_per_param"}
        if unknown:
            raise InputError(f"unknown cost config keys {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    @classmethod
    def from_file(cls, path) -> "CostConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise InputError(f"cannot read cost config {path}: {exc}") from exc


def estimate_cost(model: BlockModel, prune_set: PruneSet | list[int], cfg: CostConfig | None = None) -> dict:
    cfg = cfg or CostConfig()
    ids = prune_set.block_ids if isinstance(prune_set, PruneSet) else list(prune_set)
    removed = sorted(set(ids))
    bad = [b for b in removed if not 1 <= b <= model.L]
    if bad:
        raise BlockNotFound(f"blocks {bad} not in 1..{model.L}")
    before = model.total_count
    after = before - sum(model.param_counts[b] for b in removed)
    kept = model.L - len(removed)
    return {
        "params_before": before,
        "params_after": after,
        "flops_before": cfg.base_flops + cfg.per_block_flops * model.L,
        "flops_after": cfg.base_flops + cfg.per_block_flops * kept,
        "size_bytes_before": before * cfg.bytes_per_param,
        "size_bytes_after": after * cfg.bytes_per_param,
    }
