"""
Tests for recovery indices, ordinal ranking and the normalized score
"""
import sys

import numpy as np
import pandas as pd

from app.errors import DimensionMismatch, InvalidParameter
from app.evaluation import ConfusionCounts, confusion, evaluate, indices, rank_measures, score, score_table
from app.systems import chain_coupling


def test_worked_example_indices():
    report = indices(ConfusionCounts(TP=6, FP=2, FN=0, TN=12))
    print(f"MCC={report.MCC:.4f} spec={report.spec:.4f} FM={report.FM:.4f}")
    assert report.sens == 1.0
    assert abs(report.spec - 12 / 14) < 1e-12
    assert abs(report.prec - 0.75) < 1e-12
    assert abs(report.MCC - 0.80) < 0.005
    assert abs(report.FM - 12 / 14) < 1e-12
    assert report.HD == 2


def test_confusion_from_networks():
    truth = chain_coupling(5).adjacency
    est = truth.copy()
    est[0, 4] = est[4, 0] = 1
    c = confusion(truth, est)
    assert (c.TP, c.FP, c.FN, c.TN) == (6, 2, 0, 12)
    assert c.total == 20


def test_complement_and_empty_estimates():
    truth = chain_coupling(5).adjacency
    complement = 1 - truth
    np.fill_diagonal(complement, 0)
    c = confusion(truth, complement)
    assert c.TP == 0 and c.TN == 0
    assert evaluate(truth, complement).MCC == -1.0
    empty = evaluate(truth, np.zeros((5, 5), dtype=int))
    assert empty.MCC == 0.0 and empty.prec == 0.0 and empty.sens == 0.0 and empty.spec == 1.0


def test_mcc_is_pearson_correlation():
    rng = np.random.default_rng(0)
    off = ~np.eye(5, dtype=bool)
    checked = 0
    for _ in range(30):
        t = rng.integers(0, 2, (5, 5))
        e = rng.integers(0, 2, (5, 5))
        np.fill_diagonal(t, 0)
        np.fill_diagonal(e, 0)
        if t[off].std() == 0 or e[off].std() == 0:
            continue
        r = np.corrcoef(t[off], e[off])[0, 1]
        assert abs(evaluate(t, e).MCC - r) < 1e-12
        checked += 1
    assert checked > 20


def test_dimension_mismatch():
    try:
        confusion(np.zeros((3, 3)), np.zeros((4, 4)))
    except DimensionMismatch:
        return
    raise AssertionError("mismatched shapes accepted")


def test_rank_measures():
    assert rank_measures({"a": 0.9, "b": 0.5, "c": 0.7}) == {"a": 1, "b": 3, "c": 2}
    tied = {"x": 0.4, "y": 0.4, "z": 0.4}
    ranks = rank_measures(tied, seed=3)
    assert sorted(ranks.values()) == [1, 2, 3]
    assert ranks == rank_measures(tied, seed=3)
    try:
        rank_measures({"only": 1.0})
    except InvalidParameter:
        return
    raise AssertionError("single measure ranked")


def test_score():
    assert score([1, 1, 1], 5) == (1.0, 1.0)
    assert score([5, 5], 5) == (5.0, 0.0)
    assert score([1, 2], 2) == (1.5, 0.5)
    assert score([1], 1)[1] == 1.0


def test_score_table_independent_of_row_order():
    ranks = pd.DataFrame({
        "cell": ["h"] * 4 + ["m"] * 4,
        "C": [0.1, 0.1, 0.2, 0.2] * 2,
        "unit": ["A", "B"] * 4,
        "rank": [1, 2, 1, 2, 2, 1, 1, 2],
    })
    table = score_table(ranks)
    shuffled = score_table(ranks.sample(frac=1.0, random_state=0))
    assert table.N == 2
    assert table.overall.to_dict() == shuffled.overall.to_dict()
    assert abs(table.overall["A"] - 0.75) < 1e-12
    assert abs(table.overall["B"] - 0.25) < 1e-12


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"✅ {name}")
            except Exception as e:
                failed += 1
                print(f"❌ {name}: {e}")
    sys.exit(1 if failed else 0)
