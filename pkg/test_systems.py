"""
Tests for the simulated benchmark systems and their ground-truth graphs
"""
import sys

import numpy as np

from app.errors import InvalidParameter, KTooSmall
from app.systems import (
    NeuralMassParams,
    SparseVarSpec,
    chain_coupling,
    gen_henon,
    gen_mackey_glass,
    gen_neural_mass,
    gen_sparse_var,
    generate_system,
    mackey_glass_coupling,
    simulate_mackey_glass,
    sparse_var_coefficients,
)
from app.var_engine import is_stable


def test_chain_coupling():
    assert chain_coupling(5).density == 6
    assert chain_coupling(25).density == 46
    assert chain_coupling(3).edges() == [(1, 2), (3, 2)]
    try:
        chain_coupling(2)
    except KTooSmall:
        pass
    else:
        raise AssertionError("K=2 chain accepted")


def test_henon_shape_and_determinism():
    ts, graph = gen_henon(5, 0.2, 512, seed=1)
    again, _ = gen_henon(5, 0.2, 512, seed=1)
    assert ts.data.shape == (512, 5)
    assert graph.density == 6
    assert np.array_equal(ts.data, again.data)
    assert np.all(np.isfinite(ts.data))


def test_henon_uncoupled_stays_on_attractor():
    ts, _ = gen_henon(4, 0.0, 1000, seed=2)
    assert np.max(np.abs(ts.data)) < 1.9


def test_henon_rejects_strength():
    try:
        gen_henon(5, 0.7, 100, seed=0)
    except InvalidParameter:
        return
    raise AssertionError("C=0.7 accepted")


def test_mackey_glass_single_is_bounded():
    data = simulate_mackey_glass(np.array([[0.2]]), 100.0, 500, np.random.default_rng(0))
    assert data.shape == (500, 1)
    assert 0.0 < data.min() and data.max() < 1.5
    assert np.std(data) > 0.05


def test_mackey_glass_coupled():
    W = mackey_glass_coupling(3, 0.2)
    assert np.allclose(np.diag(W), 0.2) and W[0, 1] == 0.2 and W[0, 2] == 0.0
    ts, graph = gen_mackey_glass(3, 0.2, 20.0, 300, seed=4)
    again, _ = gen_mackey_glass(3, 0.2, 20.0, 300, seed=4)
    assert ts.data.shape == (300, 3) and ts.dt == 4.0
    assert np.array_equal(ts.data, again.data)
    assert graph.edges() == [(1, 2), (3, 2)]


def test_neural_mass_runs():
    ts, graph = gen_neural_mass(3, 100.0, NeuralMassParams(), n=256, seed=0)
    assert ts.data.shape == (256, 3)
    assert np.all(np.isfinite(ts.data))
    assert np.all(np.std(ts.data, axis=0) > 0)


def test_sparse_var_is_stable_and_sparse():
    spec = SparseVarSpec()
    coefs = sparse_var_coefficients(spec, np.random.default_rng(0))
    assert coefs.shape == (3, 25, 25) and coefs.size == 1875
    assert is_stable(coefs)
    ts, graph, model = gen_sparse_var(spec)
    print(f"sparse VAR edges: {graph.density}")
    # 8% of the 600 ordered pairs
    assert graph.density == 48
    assert int((coefs != 0).sum()) == 75 + 25
    assert ts.data.shape == (512, 25)
    assert np.all(np.diag(graph.adjacency) == 0)
    off_diag = model.coefs * (1 - np.eye(25))
    assert 0 < np.max(np.abs(off_diag)) < 0.9
    assert np.array_equal((np.abs(off_diag).sum(axis=0).T > 0).astype(int), graph.adjacency)
    # every coupled pair acts at lag one
    assert np.all(model.coefs[0].T[graph.adjacency == 1] != 0)


def test_generate_system_dispatch():
    ts, graph = generate_system("sparse_var", 6, 0.0, 300, seed=3, order=2)
    assert ts.K == 6 and graph.K == 6
    try:
        generate_system("lorenz", 5, 0.1, 100, 0)
    except InvalidParameter:
        return
    raise AssertionError("unknown system accepted")

def _cross_correlation(x, y, max_lag):
    x = (x - x.mean()) / x.std()
    y = (y - y.mean()) / y.std()
    n = len(x)
    return np.array([np.mean(x[max(0, -k): n - max(0, k)] * y[max(0, k): n - max(0, -k)])
                     for k in range(-max_lag, max_lag + 1)])


def test_mackey_glass_uncoupled_channels_are_uncorrelated():
    ccf = []
    for seed in range(10):
        ts, _ = gen_mackey_glass(3, 0.0, 100.0, 1024, seed=seed)
        ccf.append(_cross_correlation(ts.data[:, 0], ts.data[:, 1], 50))
    mean_ccf = np.mean(ccf, axis=0)
    print(f"Mackey-Glass C=0: max |mean cross-correlation| {np.max(np.abs(mean_ccf)):.3f}")
    assert np.max(np.abs(mean_ccf)) <= 0.2


def test_neural_mass_uncoupled_channels_are_independent():
    corr = []
    for seed in range(10):
        ts, _ = gen_neural_mass(3, 0.0, NeuralMassParams(), n=1024, seed=seed)
        c = np.corrcoef(np.asarray(ts.data).T)
        corr.append(np.abs(c[np.triu_indices(3, 1)]).mean())
    print(f"neural mass C=0: mean |lag-0 correlation| {np.mean(corr):.3f}")
    assert np.mean(corr) <= 0.2



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
