# app/measures/time_linear.py
"""
Time-domain linear Granger measures: GCI, CGCI, PGCI and RCGCI.

All variances are ML estimates RSS / n_eff on rows t = p .. n-1, so nested
models are compared on the same samples. Negative log ratios are kept.
"""
from typing import Iterable, Optional

import numpy as np

from app.errors import InvalidParameter, SingularConditioningBlock
from app.measures.matrix import CausalityMatrix, check_pair, empty_values, pairs
from app.timeseries import LagSet, _as_matrix, lagged_design
from app.var_engine import check_conditioning, fit_restricted_var, ols_residuals, residual_variance


def gci(ts, i: int, j: int, p: int) -> float:
    """ln(s_R^2 / s_U^2): own-lag AR(p) of X_j against the bivariate VAR(p) on (X_i, X_j)."""
    data = _as_matrix(ts)
    check_pair(data.shape[1], i, j)
    restricted = residual_variance(data, LagSet.full([j], p), j, p)
    unrestricted = residual_variance(data, LagSet.full(sorted((i, j)), p), j, p)
    return float(np.log(restricted / unrestricted))


def cgci(ts, i: int, j: int, p: int) -> float:
    """GCI conditioned on every other observed variable; equals gci when K = 2."""
    data = _as_matrix(ts)
    K = data.shape[1]
    check_pair(K, i, j)
    full = LagSet.full(range(K), p)
    unrestricted = residual_variance(data, full, j, p)
    restricted = residual_variance(data, full.without(i), j, p, check=False)
    return float(np.log(restricted / unrestricted))


def _ml_residuals(data: np.ndarray, variables, p: int) -> np.ndarray:
    """Residuals (n - p, len(variables)) of the VAR(p) restricted to ``variables``."""
    lags = LagSet.full(variables, p)
    X, _ = lagged_design(data, lags, variables[0], maxlag=p)
    check_conditioning(X)
    _, E = ols_residuals(X, data[p:, list(variables)])
    return E


def _partial_variance(E: np.ndarray, y: int, z) -> float:
    """Var(e_y | e_z) from the ML residual covariance."""
    S = E.T @ E / E.shape[0]
    if not len(z):
        return float(S[y, y])
    z = list(z)
    S_zz = S[np.ix_(z, z)]
    if np.linalg.cond(S_zz) > 1e12:
        raise SingularConditioningBlock("conditioning block of the residual covariance is singular")
    try:
        solved = np.linalg.solve(S_zz, S[z, y])
    except np.linalg.LinAlgError as e:
        raise SingularConditioningBlock(f"conditioning block not invertible: {e}")
    return float(S[y, y] - S[y, z] @ solved)


def _pgci_from(E_full: np.ndarray, E_without: np.ndarray, K: int, i: int, j: int) -> float:
    # E_full columns are 0..K-1; E_without drops column i
    rest = [v for v in range(K) if v not in (i, j)]
    without_idx = [v for v in range(K) if v != i]
    pos = {v: c for c, v in enumerate(without_idx)}
    num = _partial_variance(E_without, pos[j], [pos[v] for v in rest])
    den = _partial_variance(E_full, j, rest)
    return float(np.log(num / den))


def pgci(ts, i: int, j: int, p: int) -> float:
    """
    Partial GCI: residual covariances of the VAR without X_i (S) and of the
    full VAR (Sigma), each partialled on the equations of the other variables.
    """
    data = _as_matrix(ts)
    K = data.shape[1]
    if K < 3:
        raise InvalidParameter(f"PGCI needs K >= 3, got {K}")
    check_pair(K, i, j)
    E_full = _ml_residuals(data, list(range(K)), p)
    E_without = _ml_residuals(data, [v for v in range(K) if v != i], p)
    return _pgci_from(E_full, E_without, K, i, j)


# ---------------------------------------
#  MATRIX DRIVERS
# ---------------------------------------
def gci_matrix(ts, p: int, drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    K = data.shape[1]
    values = empty_values(K)
    own = [residual_variance(data, LagSet.full([j], p), j, p) for j in range(K)]
    for i, j in pairs(K, drivers):
        values[i, j] = np.log(own[j] / residual_variance(data, LagSet.full(sorted((i, j)), p), j, p))
    return CausalityMatrix(values, "GCI", {"p": p})


def cgci_matrix(ts, p: int, drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    K = data.shape[1]
    full = LagSet.full(range(K), p)
    values = empty_values(K)
    with_all = {}
    for i, j in pairs(K, drivers):
        if j not in with_all:
            with_all[j] = residual_variance(data, full, j, p)
        values[i, j] = np.log(residual_variance(data, full.without(i), j, p, check=False) / with_all[j])
    return CausalityMatrix(values, "CGCI", {"p": p})


def pgci_matrix(ts, p: int, drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    K = data.shape[1]
    if K < 3:
        raise InvalidParameter(f"PGCI needs K >= 3, got {K}")
    E_full = _ml_residuals(data, list(range(K)), p)
    values = empty_values(K)
    cache = {}
    for i, j in pairs(K, drivers):
        if i not in cache:
            cache[i] = _ml_residuals(data, [v for v in range(K) if v != i], p)
        values[i, j] = _pgci_from(E_full, cache[i], K, i, j)
    return CausalityMatrix(values, "PGCI", {"p": p})


def rcgci(ts, p_max: int, drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    """
    Restricted CGCI on the BIC-selected sparse VAR.

    An entry is exactly 0 when no lag of the driver was selected in the
    response's equation; otherwise ln(s_without^2 / s_with^2), refitting the
    response's selected terms minus the driver's lags on the same rows.
    """
    data = _as_matrix(ts)
    K = data.shape[1]
    model = fit_restricted_var(data, p_max)
    values = empty_values(K)
    for i, j in pairs(K, drivers):
        selection = model.selections[j]
        if i not in selection.variables():
            values[i, j] = 0.0
            continue
        without = residual_variance(data, selection.without(i), j, p_max, check=False)
        values[i, j] = np.log(without / model.residual_variances[j])
    return CausalityMatrix(values, "RCGCI", {"p": p_max})
