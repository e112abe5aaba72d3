"""
Long-running recovery checks on the simulated systems.

Skipped unless RUN_SLOW_TESTS=1; expect minutes to tens of minutes.
"""
import os
import sys

import numpy as np
from scipy.stats import kurtosis

from app.evaluation import evaluate
from app.measures import compute_measure
from app.significance import binarize_density, binarize_pmime, binarize_significance, surrogate_pvalues
from app.systems import NeuralMassParams, SparseVarSpec, gen_henon, gen_mackey_glass, gen_neural_mass, gen_sparse_var
from app.timeseries import standardize

SLOW = os.getenv("RUN_SLOW_TESTS") == "1"
REALIZATIONS = 10


def slow(fn):
    """Runs the check only with RUN_SLOW_TESTS=1."""
    def wrapper():
        if not SLOW:
            print(f"skipped {fn.__name__} (RUN_SLOW_TESTS != 1)")
            return
        fn()
    wrapper.__name__ = fn.__name__
    return wrapper


def _henon(K, n, r, C=0.2):
    ts, graph = gen_henon(K, C, n, seed=r)
    return standardize(ts), graph


@slow
def test_pmime_recovers_henon_chain():
    reports = []
    for r in range(REALIZATIONS):
        ts, graph = _henon(5, 512, r)
        reports.append(evaluate(graph.adjacency, binarize_pmime(compute_measure("PMIME", ts, {"L": 5}))))
    mcc = np.mean([rep.MCC for rep in reports])
    hd = np.median([rep.HD for rep in reports])
    print(f"PMIME Henon K=5: mean MCC {mcc:.3f}, median HD {hd}")
    assert hd == 0 and mcc >= 0.9


@slow
def test_te_with_true_density():
    exact = 0
    for r in range(REALIZATIONS):
        ts, graph = _henon(5, 512, r)
        est = binarize_density(compute_measure("TE", ts, {"m": 2, "tau": 1}), 6)
        exact += evaluate(graph.adjacency, est).HD == 0
    print(f"TE density=6: exact structure in {exact}/{REALIZATIONS}")
    assert exact >= 7


@slow
def test_pmime_large_henon():
    reports = []
    for r in range(REALIZATIONS):
        ts, graph = _henon(25, 2048, r)
        reports.append(evaluate(graph.adjacency, binarize_pmime(compute_measure("PMIME", ts, {"L": 5}))))
    mcc = np.mean([rep.MCC for rep in reports])
    spec = np.mean([rep.spec for rep in reports])
    print(f"PMIME Henon K=25: mean MCC {mcc:.3f}, spec {spec:.3f}")
    assert abs(mcc - 0.86) <= 0.10 and spec >= 0.95


@slow
def test_restricted_linear_on_sparse_var():
    scores = {"RCGCI": [], "RGPDC": []}
    for r in range(REALIZATIONS):
        ts, graph, _ = gen_sparse_var(SparseVarSpec(seed=r))
        ts = standardize(ts)
        for name, params in (("RCGCI", {"p": 3}), ("RGPDC", {"p": 3, "band": "alpha"})):
            pvals = surrogate_pvalues(name, ts, params, M=100, seed=r)
            scores[name].append(evaluate(graph.adjacency, binarize_significance(pvals, 0.01)).MCC)
    means = {k: float(np.mean(v)) for k, v in scores.items()}
    print("sparse VAR mean MCC:", means)
    assert abs(means["RCGCI"] - 0.93) <= 0.07
    assert abs(means["RGPDC"] - 0.94) <= 0.07


@slow
def test_null_rejection_rate():
    rng = np.random.default_rng(0)
    for name, params in (("GCI", {"p": 2}), ("TE", {"m": 2, "tau": 1}), ("PDC", {"p": 2, "band": "alpha"})):
        rejected, total = 0, 0
        for r in range(10):
            data = rng.standard_normal((1024, 5))
            pvals = surrogate_pvalues(name, data, params, M=100, seed=r)
            off = ~np.eye(5, dtype=bool)
            rejected += int((pvals[off] < 0.05).sum())
            total += int(off.sum())
        rate = rejected / total
        print(f"{name}: null rejection rate {rate:.3f} over {total} pairs")
        assert 0.01 <= rate <= 0.10


@slow
def test_mackey_glass_smoke():
    mcc = []
    for r in range(REALIZATIONS):
        ts, graph = gen_mackey_glass(5, 0.2, 100.0, 1024, seed=r)
        ts = standardize(ts)
        pvals = surrogate_pvalues("RCGCI", ts, {"p": 20}, M=100, seed=r)
        mcc.append(evaluate(graph.adjacency, binarize_significance(pvals, 0.05)).MCC)
    print(f"Mackey-Glass RCGCI(p=20): mean MCC {np.mean(mcc):.3f}")
    assert np.mean(mcc) >= 0.6



@slow
def test_neural_mass_spikes_at_high_excitation():
    calm, spiky = [], []
    for r in range(5):
        ts, _ = gen_neural_mass(3, 0.0, NeuralMassParams(A=3.45), n=4096, seed=r)
        calm.append(np.mean(kurtosis(np.asarray(ts.data), axis=0)))
        ts, _ = gen_neural_mass(3, 0.0, NeuralMassParams(A=3.7), n=4096, seed=r)
        spiky.append(np.mean(kurtosis(np.asarray(ts.data), axis=0)))
    print(f"neural mass kurtosis: A=3.45 {np.mean(calm):.2f}, A=3.7 {np.mean(spiky):.2f}")
    assert np.mean(spiky) > np.mean(calm)
@slow
def test_mackey_glass_longer_delay_decorrelates_faster():
    def acf_memory(x, max_lag=500):
        x = (x - x.mean()) / x.std()
        return np.mean([abs(np.mean(x[:-k] * x[k:])) for k in range(1, max_lag + 1)])

    memory = {100.0: [], 300.0: []}
    for r in range(REALIZATIONS):
        for delta in memory:
            ts, _ = gen_mackey_glass(5, 0.0, delta, 4096, seed=r)
            memory[delta].append(np.mean([acf_memory(ts.data[:, k]) for k in range(ts.K)]))
    print(f"mean |ACF| over 500 lags: delta=100 {np.mean(memory[100.0]):.3f}, delta=300 {np.mean(memory[300.0]):.3f}")
    assert np.mean(memory[300.0]) < np.mean(memory[100.0])



if __name__ == "__main__":
    if not SLOW:
        print("set RUN_SLOW_TESTS=1 to run the slow recovery checks")
        sys.exit(0)
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
