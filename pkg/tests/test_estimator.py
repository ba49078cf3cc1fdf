import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gardener import BlockScorer, GardenerPruner, partition_blocks, write_checkpoint
from gardener.exceptions import PlanConflict, UnknownCriterion

from conftest import entropy_ordered_checkpoint, make_block_checkpoint

ENTROPY_RANKS = [1, 2, 5, 3, 6, 4, 8, 7, 9, 11, 10, 12]


@pytest.fixture(scope="module")
def ordered():
    return entropy_ordered_checkpoint(ENTROPY_RANKS)


def test_get_params_and_clone():
    p = GardenerPruner(criterion="kurtosis", ratio=0.5, seed=3)
    params = p.get_params()
    assert params["criterion"] == "kurtosis" and params["ratio"] == 0.5 and params["seed"] == 3
    q = clone(p).set_params(ratio=0.25)
    assert q.ratio == 0.25 and p.ratio == 0.5


def test_scorer_recovers_entropy_order(ordered):
    s = BlockScorer().fit(ordered)
    assert s.n_blocks_ == 12
    assert s.ranks_.tolist() == ENTROPY_RANKS
    out = s.transform()
    assert out.min() == 0.0 and out.max() == 1.0


def test_pruner_fit_transform(ordered, tmp_path):
    path = tmp_path / "m.st"
    write_checkpoint(ordered, path)
    p = GardenerPruner(ratio=0.25)
    pruned = p.fit_transform(str(path))
    assert p.prune_set_.block_ids == [10, 11, 12]
    assert partition_blocks(pruned).L == 9
    assert pruned.metadata["gardener.criterion"] == "entropy_number"


def test_pruner_random_and_explicit(ordered):
    r = GardenerPruner(criterion="random", n_remove=4, seed=11).fit(ordered)
    assert len(r.prune_set_.block_ids) == 4 and r.score_table_ is None
    e = GardenerPruner(blocks=[2, 5]).fit(ordered)
    assert e.prune_set_.block_ids == [2, 5]


def test_not_fitted_and_bad_inputs(ordered):
    with pytest.raises(NotFittedError):
        GardenerPruner().transform(ordered)
    with pytest.raises(UnknownCriterion):
        GardenerPruner(criterion="nope").fit(ordered)
    with pytest.raises(TypeError):
        BlockScorer().fit(np.zeros(3))
    p = GardenerPruner(n_remove=1).fit(ordered)
    with pytest.raises(PlanConflict):
        p.transform(make_block_checkpoint(4))
