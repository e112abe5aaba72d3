"""
Tests for VAR fitting, restricted selection, stability and spectral transforms
"""
import sys

import numpy as np

from app.errors import IllConditioned, SeriesTooShort
from app.timeseries import LagSet, lagged_design
from app.var_engine import (
    VarModel,
    companion_matrix,
    fit_restricted_var,
    fit_var_ols,
    frequency_grid,
    is_stable,
    residual_variance,
    simulate_var,
    spectral_transforms,
)

A1 = np.array([[[0.5, 0.0], [0.4, 0.5]]])   # X1 -> X2 at lag 1


def test_ols_recovers_coefficients():
    data, _ = simulate_var(A1, 5000, np.random.default_rng(0))
    model = fit_var_ols(data, 1)
    print("estimated A1:\n", model.coefs[0])
    assert np.allclose(model.coefs[0], A1[0], atol=0.05)
    assert np.allclose(model.sigma, np.eye(2), atol=0.1)


def test_ols_subset_of_equations():
    data, _ = simulate_var(A1, 2000, np.random.default_rng(1))
    full = fit_var_ols(data, 2)
    one = fit_var_ols(data, 2, equations=[1])
    assert one.equations == (1,)
    assert np.allclose(one.coefs[:, 1, :], full.coefs[:, 1, :])
    assert np.all(one.coefs[:, 0, :] == 0)


def test_ols_guards():
    try:
        fit_var_ols(np.random.default_rng(2).normal(size=(19, 3)), 3)
    except SeriesTooShort:
        pass
    else:
        raise AssertionError("short series was fitted")
    x = np.random.default_rng(3).normal(size=500)
    try:
        fit_var_ols(np.column_stack([x, x]), 2)
    except IllConditioned:
        pass
    else:
        raise AssertionError("collinear design was fitted")


def test_companion_and_stability():
    C = companion_matrix(np.array([[[0.5]], [[0.2]]]))
    assert C.shape == (2, 2)
    assert C[0].tolist() == [0.5, 0.2] and C[1].tolist() == [1.0, 0.0]
    assert is_stable(A1)
    assert not is_stable(np.array([[[1.1]]]))


def test_simulation_is_seeded():
    a, _ = simulate_var(A1, 100, np.random.default_rng(7))
    b, _ = simulate_var(A1, 100, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_restricted_var_picks_true_driver():
    data, _ = simulate_var(A1, 2000, np.random.default_rng(4))
    model = fit_restricted_var(data, 3)
    print("selections:", [s.terms for s in model.selections])
    assert 0 in model.selected_drivers(1)
    assert (0, 1) in model.selections[1].terms
    # unselected terms are zero
    for j, sel in enumerate(model.selections):
        chosen = set(sel.terms)
        for lag in range(1, 4):
            for v in range(2):
                if (v, lag) not in chosen:
                    assert model.coefs[lag - 1, j, v] == 0.0


def test_restricted_variance_matches_refit():
    data, _ = simulate_var(A1, 1000, np.random.default_rng(5))
    model = fit_restricted_var(data, 2)
    for j in range(2):
        v = residual_variance(data, LagSet(model.selections[j].terms), j, maxlag=2)
        assert abs(v - model.residual_variances[j]) < 1e-10


def test_frequency_grid_and_transfer_inverse():
    f = frequency_grid(128)
    assert f.shape == (128,) and f[0] == 1 / 256 and f[-1] == 0.5
    spec = spectral_transforms(VarModel(coefs=A1, sigma=np.eye(2), residuals=np.zeros((1, 2))))
    prod = spec.abar @ spec.transfer
    assert np.allclose(prod, np.eye(2)[None], atol=1e-10)
    # the spectrum is Hermitian
    assert np.allclose(spec.spectrum, np.conj(np.transpose(spec.spectrum, (0, 2, 1))))

def test_ols_residuals_orthogonal_to_regressors():
    data, _ = simulate_var(A1, 1000, np.random.default_rng(11))
    data = (data - data.mean(axis=0)) / data.std(axis=0)
    model = fit_var_ols(data, 3)
    X, _ = lagged_design(data, LagSet.full(range(2), 3), 0, maxlag=3)
    assert np.max(np.abs(X.T @ model.residuals)) < 1e-8



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
