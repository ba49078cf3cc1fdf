import math
import random

import pytest

from gardener.exceptions import DuplicateOracleRow, NoBaseline, ParseError, ShapeError
from gardener.oracle import OracleTable, average_ranks, compare, kendall, load_oracle, spearman
from gardener.ranking import gardener_select, rank_scores

from oracles import kendall_pairs, spearman_exact


def test_load_oracle(single_block_csv):
    o = load_oracle(single_block_csv)
    assert o.baseline_war == 91.78
    assert sorted(o.per_block) == list(range(1, 13))
    assert o.drops()[1] == pytest.approx(91.78 - o.per_block[1].war)


@pytest.mark.parametrize(
    "text,exc",
    [
        ("block_id,war\n0,90\n1,80\n1,81\n", DuplicateOracleRow),
        ("block_id,war\n1,80\n2,81\n", NoBaseline),
        ("block_id,war\n0,90\n1,abc\n", ParseError),
        ("id,score\n0,90\n", ParseError),
    ],
)
def test_load_oracle_errors(tmp_path, text, exc):
    p = tmp_path / "o.csv"
    p.write_text(text)
    with pytest.raises(exc):
        load_oracle(p)


def test_reference_rank_correlations_match_oracle(reference):
    ent = reference["entropy_rank"]
    sens = reference["sensitivity_rank"]
    rho = spearman(ent, sens)
    tau = kendall(ent, sens)
    assert rho == pytest.approx(float(spearman_exact(ent, sens)), abs=1e-12)
    assert rho == pytest.approx(108 / 143, abs=1e-12)
    assert tau == pytest.approx(float(kendall_pairs(ent, sens)), abs=1e-12)
    assert tau == pytest.approx(2 / 3, abs=1e-12)


def test_small_permutations_match_exhaustive_oracles():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(2, 6)
        a = rng.sample(range(1, n + 1), n)
        b = rng.sample(range(1, n + 1), n)
        assert spearman(a, b) == float(spearman_exact(a, b))
        assert kendall(a, b) == float(kendall_pairs(a, b))


def test_identity_and_reversal():
    a = list(range(1, 8))
    assert spearman(a, a) == 1.0 and kendall(a, a) == 1.0
    assert spearman(a, a[::-1]) == -1.0 and kendall(a, a[::-1]) == -1.0


def test_ties_use_average_ranks():
    assert average_ranks([3, 1, 3, 2]).tolist() == [3.5, 1.0, 3.5, 2.0]
    assert kendall([1, 1, 2], [1, 2, 3]) == pytest.approx(2 / 3)
    assert math.isnan(spearman([1, 1, 1], [1, 2, 3]))


def test_shape_errors():
    with pytest.raises(ShapeError):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(ShapeError):
        kendall([1], [1])


def test_compare_top_k_overlaps(reference):
    wars = {int(b): v for b, v in reference["single_block_war"].items()}
    oracle = OracleTable.from_wars(wars.pop(0), wars)
    ent = reference["entropy_rank"]
    table = rank_scores("entropy_number", {b: 13.0 - r for b, r in enumerate(ent, start=1)})
    res = compare(table, oracle, ks=(1, 3))
    assert res.top_k_most[1] == 1.0
    assert res.top_k_least[3] == pytest.approx(2 / 3)
    assert res.spearman_rho == pytest.approx(108 / 143, abs=1e-12)
    assert res.rank_table[0]["oracle_rank"] == 1
    assert res.to_dict()["top_k_overlap_least_important"]["3"] == pytest.approx(2 / 3)


def test_sorted_drops_reproduce_reported_sensitivity_selections(reference):
    wars = {int(b): v for b, v in reference["single_block_war"].items()}
    table = OracleTable.from_wars(wars.pop(0), wars).score_table(12)
    for n, expected in reference["sensitivity_selections"].items():
        assert gardener_select(table, count=int(n)).block_ids == sorted(expected)
