import numpy as np
import pytest

from gardener.blocks import BlockPattern, block_values, partition_blocks
from gardener.exceptions import BlockNotFound, NoBlocksFound, NonContiguousBlocks, UsageError
from gardener.tensor_store import checkpoint_from_arrays


def _ckpt(names):
    return checkpoint_from_arrays({n: np.ones(2) for n in names})


def test_partition_groups_and_residual():
    ck = _ckpt(["cls_token", "blocks.0.a", "blocks.1.a", "blocks.0.b", "head.w"])
    m = partition_blocks(ck)
    assert m.L == 2
    assert m.tensor_names(1) == ("blocks.0.a", "blocks.0.b")
    assert m.residual == ("cls_token", "head.w")
    assert m.param_counts == {1: 4, 2: 2}
    assert m.residual_count == 4 and m.total_count == 10


def test_block_ids_are_one_based_for_either_native_base():
    zero = partition_blocks(_ckpt(["blocks.0.x", "blocks.1.x"]))
    one = partition_blocks(_ckpt(["layer.1.x", "layer.2.x"]), BlockPattern(r"layer\.(\d+)\.", 1))
    assert zero.block_ids == one.block_ids == [1, 2]


def test_numeric_not_lexicographic_order():
    names = [f"blocks.{i}.w" for i in (10, 2, 0, 1, 3, 4, 5, 6, 7, 8, 9, 11)]
    m = partition_blocks(_ckpt(names))
    assert [m.tensor_names(b)[0] for b in (1, 3, 11, 12)] == ["blocks.0.w", "blocks.2.w", "blocks.10.w", "blocks.11.w"]


def test_missing_index_is_an_error():
    with pytest.raises(NonContiguousBlocks, match=r"missing \[1\]"):
        partition_blocks(_ckpt(["blocks.0.x", "blocks.2.x"]))


def test_wrong_base_is_an_error():
    with pytest.raises(NonContiguousBlocks):
        partition_blocks(_ckpt(["blocks.1.x", "blocks.2.x"]))


def test_no_match():
    with pytest.raises(NoBlocksFound):
        partition_blocks(_ckpt(["encoder.w"]))


def test_pattern_validation():
    with pytest.raises(UsageError):
        BlockPattern(r"blocks\.\d+\.")
    with pytest.raises(UsageError):
        BlockPattern(r"(a)(b)")
    with pytest.raises(UsageError):
        BlockPattern(index_base=2)


def test_unknown_block():
    m = partition_blocks(_ckpt(["blocks.0.x"]))
    with pytest.raises(BlockNotFound):
        m.tensor_names(2)


def test_block_values_concatenates_in_storage_order():
    ck = checkpoint_from_arrays({"blocks.0.a": np.array([1.0, 2.0]), "blocks.0.b": np.array([[3.0]])})
    m = partition_blocks(ck)
    assert block_values(m, ck, 1).tolist() == [1.0, 2.0, 3.0]
