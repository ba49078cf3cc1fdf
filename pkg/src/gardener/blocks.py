"""Grouping checkpoint tensors into indexed transformer blocks."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .exceptions import BlockNotFound, NoBlocksFound, NonContiguousBlocks, UsageError
from .tensor_store import Checkpoint, tensor_as_f64

DEFAULT_BLOCK_PATTERN = r"blocks\.(\d+)\."


@dataclass(frozen=True)
class BlockPattern:
    regex: str = DEFAULT_BLOCK_PATTERN
    index_base: int = 0

    def __post_init__(self):
        try:
            compiled = re.compile(self.regex)
        except re.error as exc:
            raise UsageError(f"invalid block pattern {self.regex!r}: {exc}") from exc
        if compiled.groups != 1:
            raise UsageError(f"block pattern {self.regex!r} must have exactly one capture group")
        if self.index_base not in (0, 1):
            raise UsageError(f"index_base must be 0 or 1, got {self.index_base}")

    @property
    def compiled(self) -> re.Pattern:
        return re.compile(self.regex)

    def match(self, name: str):
        """Return ``(native_index, (start, end))`` of the captured index, or None."""
        m = self.compiled.search(name)
        if m is None:
            return None
        text = m.group(1)
        if text is None or not text.isdigit():
            raise UsageError(f"block pattern captured non-integer {text!r} from tensor {name!r}")
        return int(text), m.span(1)


@dataclass(frozen=True)
class BlockModel:
    """Blocks are 1-based in user-facing ids; ``pattern`` remembers native numbering."""

    blocks: tuple[tuple[int, tuple[str, ...]], ...]
    residual: tuple[str, ...]
    param_counts: dict[int, int] = field(hash=False)
    residual_count: int
    pattern: BlockPattern

    @property
    def L(self) -> int:
        return len(self.blocks)

    @property
    def block_ids(self) -> list[int]:
        return [b for b, _ in self.blocks]

    def tensor_names(self, block_id: int) -> tuple[str, ...]:
        if not 1 <= block_id <= self.L:
            raise BlockNotFound(f"block {block_id} not in 1..{self.L}")
        return self.blocks[block_id - 1][1]

    @property
    def total_count(self) -> int:
        return sum(self.param_counts.values()) + self.residual_count

    def summary(self) -> dict:
        return {
            "L": self.L,
            "total_params": self.total_count,
            "residual_params": self.residual_count,
            "param_counts": {str(b): self.param_counts[b] for b in self.block_ids},
            "blocks": {str(b): list(names) for b, names in self.blocks},
            "residual": list(self.residual),
            "block_pattern": self.pattern.regex,
            "index_base": self.pattern.index_base,
        }


def partition_blocks(ckpt: Checkpoint, pat: BlockPattern | None = None) -> BlockModel:
    pat = pat or BlockPattern()
    grouped: dict[int, list[str]] = {}
    residual: list[str] = []
    for name in ckpt.names:
        hit = pat.match(name)
        if hit is None:
            residual.append(name)
        else:
            grouped.setdefault(hit[0], []).append(name)

    if not grouped:
        raise NoBlocksFound(f"no tensor name matches block pattern {pat.regex!r}")
    indices = sorted(grouped)
    expected = list(range(pat.index_base, pat.index_base + len(indices)))
    if indices != expected:
        missing = sorted(set(range(pat.index_base, indices[-1] + 1)) - set(indices))
        raise NonContiguousBlocks(
            f"block indices {indices} are not contiguous from {pat.index_base}; missing {missing}"
        )

    blocks = tuple((i - pat.index_base + 1, tuple(grouped[i])) for i in indices)
    counts = {b: sum(ckpt[n].numel for n in names) for b, names in blocks}
    empty = [b for b, c in counts.items() if c == 0]
    if empty:
        raise NoBlocksFound(f"blocks {empty} contain no scalars")
    return BlockModel(
        blocks=blocks,
        residual=tuple(residual),
        param_counts=counts,
        residual_count=sum(ckpt[n].numel for n in residual),
        pattern=pat,
    )


def iter_block_arrays(model: BlockModel, ckpt: Checkpoint, block_id: int) -> Iterator[np.ndarray]:
    """Yield the block's tensors one at a time as float64 arrays."""
    for name in model.tensor_names(block_id):
        yield tensor_as_f64(ckpt[name])


def block_values(model: BlockModel, ckpt: Checkpoint, block_id: int) -> np.ndarray:
    parts = list(iter_block_arrays(model, ckpt, block_id))
    return np.concatenate(parts) if parts else np.empty(0)
