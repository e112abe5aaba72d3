# app/var_engine.py
"""
VAR backbone of the linear time and frequency measures.

Coefficient convention throughout: ``coefs[k - 1][j, i]`` is the lag-k
effect of variable i on variable j, i.e. x_t = sum_k A_k x_{t-k} + e_t.
No intercepts: series are standardized before fitting.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from app.errors import IllConditioned, InvalidParameter, SeriesTooShort, SingularAtFrequency
from app.timeseries import LagSet, TimeSeriesSet, _as_matrix, lagged_design
from app.utils.run_logger import agent_log

CONDITION_LIMIT = 1e12
DEFAULT_GRID = 128


@dataclass(frozen=True, eq=False)
class VarModel:
    coefs: np.ndarray          # (p, K, K)
    sigma: np.ndarray          # residual covariance over `equations`
    residuals: np.ndarray      # (n_eff, len(equations))
    equations: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.equations:
            object.__setattr__(self, "equations", tuple(range(self.coefs.shape[1])))

    @property
    def order(self) -> int:
        return self.coefs.shape[0]

    @property
    def K(self) -> int:
        return self.coefs.shape[1]

    @property
    def noise_variances(self) -> np.ndarray:
        return np.diag(self.sigma).copy()


@dataclass(frozen=True, eq=False)
class RestrictedVarModel:
    selections: Tuple[LagSet, ...]     # per equation, in selection order
    coefs: np.ndarray                  # (p_max, K, K); unselected terms are 0
    residual_variances: np.ndarray     # RSS / n_eff per equation
    residuals: np.ndarray              # (n_eff, K)
    sigma: np.ndarray                  # residuals' covariance, divided by n_eff

    @property
    def order(self) -> int:
        return self.coefs.shape[0]

    @property
    def K(self) -> int:
        return self.coefs.shape[1]

    def selected_drivers(self, j: int) -> Tuple[int, ...]:
        return self.selections[j].variables()


@dataclass(frozen=True, eq=False)
class SpectralModel:
    freqs: np.ndarray       # (F,) cycles/sample in (0, 0.5]
    abar: np.ndarray        # (F, K, K)
    transfer: np.ndarray    # (F, K, K), H = Abar^-1
    spectrum: np.ndarray    # (F, K, K), S = H Sigma H*
    sigma: np.ndarray       # (K, K)


AnyVar = Union[VarModel, RestrictedVarModel]


# ---------------------------------------
#  LEAST SQUARES HELPERS
# ---------------------------------------
def check_conditioning(X: np.ndarray):
    """Raise IllConditioned when the normal equations X'X are numerically singular."""
    if X.shape[1] == 0:
        return
    cond = np.linalg.cond(X.T @ X)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditioned(
            f"normal equations condition number {cond:.3g} exceeds {CONDITION_LIMIT:.0e}; "
            f"order too large for {X.shape[0]} samples"
        )


def ols_residuals(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients and residuals of y on X (no intercept); empty X leaves y untouched."""
    if X.shape[1] == 0:
        return np.zeros((0,) + y.shape[1:]), y.copy()
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta, y - X @ beta


def residual_variance(ts, lags: LagSet, target: int, maxlag: int, check: bool = True) -> float:
    """ML residual variance RSS / n_eff of ``target`` regressed on ``lags``."""
    X, y = lagged_design(ts, lags, target, maxlag=maxlag)
    if check:
        check_conditioning(X)
    _, resid = ols_residuals(X, y)
    return float(resid @ resid) / len(y)


# ---------------------------------------
#  OLS VAR
# ---------------------------------------
def fit_var_ols(ts: Union[TimeSeriesSet, np.ndarray], p: int, equations: Optional[Sequence[int]] = None) -> VarModel:
    """
    Equation-by-equation OLS on lags 1..p of all K variables.

    With ``equations`` only those rows of the coefficient tensor are fitted
    (the rest stay 0) and sigma/residuals are indexed by position in it.
    """
    data = _as_matrix(ts)
    n, K = data.shape
    if p < 1:
        raise InvalidParameter(f"VAR order must be >= 1, got {p}")
    if n <= K * p + 10:
        raise SeriesTooShort(f"n={n} too short for a VAR({p}) on {K} variables")
    eqs = tuple(range(K)) if equations is None else tuple(int(e) for e in equations)

    lags = LagSet.full(range(K), p)
    X, _ = lagged_design(data, lags, 0, maxlag=p)
    check_conditioning(X)
    Y = data[p:, list(eqs)]
    B, E = ols_residuals(X, Y)

    coefs = np.zeros((p, K, K))
    # B rows are variable-major: row v*p + (l-1)
    coefs[:, list(eqs), :] = B.reshape(K, p, len(eqs)).transpose(1, 2, 0)
    dof = max(E.shape[0] - K * p, 1)
    sigma = E.T @ E / dof
    sigma = 0.5 * (sigma + sigma.T)
    return VarModel(coefs=coefs, sigma=sigma, residuals=E, equations=eqs)


# ---------------------------------------
#  RESTRICTED VAR (progressive forward selection)
# ---------------------------------------
def _bic(rss: float, n_eff: int, q: int) -> float:
    return n_eff * np.log(max(rss, 1e-300) / n_eff) + q * np.log(n_eff)


def _select_equation(full_X: np.ndarray, y: np.ndarray, K: int, p_max: int) -> LagSet:
    n_eff = len(y)
    selected = []           # (variable, lag) in selection order
    next_lag = [1] * K      # smallest not-yet-selected lag per variable
    current = _bic(float(y @ y), n_eff, 0)

    while True:
        best = None
        for v in range(K):
            lag = next_lag[v]
            if lag > p_max:
                continue
            cols = [tv * p_max + tl - 1 for tv, tl in selected] + [v * p_max + lag - 1]
            _, resid = ols_residuals(full_X[:, cols], y)
            score = _bic(float(resid @ resid), n_eff, len(cols))
            # strict < keeps the lowest variable index on ties
            if best is None or score < best[0]:
                best = (score, v, lag)
        if best is None or not best[0] < current:
            break
        current, v, lag = best
        selected.append((v, lag))
        next_lag[v] += 1
    return LagSet(tuple(selected))


def fit_restricted_var(ts: Union[TimeSeriesSet, np.ndarray], p_max: int) -> RestrictedVarModel:
    """
    Dimension-reduced VAR: per response, add one lagged term at a time by BIC.

    A lag l+1 of a variable only becomes a candidate once its lag l is in.
    Selection stops when no candidate lowers BIC; an empty selection is legal.
    """
    data = _as_matrix(ts)
    n, K = data.shape
    if p_max < 1:
        raise InvalidParameter(f"p_max must be >= 1, got {p_max}")
    if n <= p_max + 10:
        raise SeriesTooShort(f"n={n} too short for p_max={p_max}")

    all_lags = LagSet.full(range(K), p_max)
    n_eff = n - p_max
    coefs = np.zeros((p_max, K, K))
    residuals = np.empty((n_eff, K))
    variances = np.empty(K)
    selections = []

    for j in range(K):
        full_X, y = lagged_design(data, all_lags, j, maxlag=p_max)
        chosen = _select_equation(full_X, y, K, p_max)
        X, _ = lagged_design(data, chosen, j, maxlag=p_max)
        beta, resid = ols_residuals(X, y)
        for (v, lag), b in zip(chosen, beta):
            coefs[lag - 1, j, v] = b
        residuals[:, j] = resid
        variances[j] = float(resid @ resid) / n_eff
        selections.append(chosen)

    sigma = residuals.T @ residuals / n_eff
    return RestrictedVarModel(
        selections=tuple(selections),
        coefs=coefs,
        residual_variances=variances,
        residuals=residuals,
        sigma=0.5 * (sigma + sigma.T),
    )


# ---------------------------------------
#  STABILITY
# ---------------------------------------
def companion_matrix(coefs: np.ndarray) -> np.ndarray:
    p, K, _ = coefs.shape
    C = np.zeros((K * p, K * p))
    C[:K, :] = np.hstack(list(coefs))
    if p > 1:
        C[K:, :-K] = np.eye(K * (p - 1))
    return C


def spectral_radius(coefs: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(coefs)))))


def is_stable(model: Union[AnyVar, np.ndarray]) -> bool:
    coefs = model if isinstance(model, np.ndarray) else model.coefs
    return spectral_radius(coefs) < 1.0


def simulate_var(coefs: np.ndarray, n: int, rng: np.random.Generator,
                 sigma: Optional[np.ndarray] = None, burn_in: int = 500) -> Tuple[np.ndarray, np.ndarray]:
    """Simulate x_t = sum_k A_k x_{t-k} + e_t; returns (data, innovations) of n rows."""
    p, K, _ = coefs.shape
    total = n + burn_in
    eps = rng.standard_normal((total, K))
    if sigma is not None:
        eps = eps @ np.linalg.cholesky(sigma).T
    x = np.zeros((total, K))
    for t in range(total):
        acc = eps[t].copy()
        for k in range(min(p, t)):
            acc += coefs[k] @ x[t - k - 1]
        x[t] = acc
    return x[burn_in:], eps[burn_in:]


# ---------------------------------------
#  FREQUENCY DOMAIN
# ---------------------------------------
def frequency_grid(F: int = DEFAULT_GRID) -> np.ndarray:
    """F equally spaced frequencies in (0, 0.5], Nyquist included."""
    return np.arange(1, F + 1) / (2.0 * F)


def spectral_transforms(model: AnyVar, F: int = DEFAULT_GRID) -> SpectralModel:
    """Abar(f) = I - sum_k A_k e^{-i 2 pi f k}, H(f) = Abar(f)^-1, S(f) = H Sigma H*."""
    coefs = model.coefs
    p, K, _ = coefs.shape
    if not is_stable(model):
        agent_log("system", f"spectral transform of an unstable VAR({p}), radius={spectral_radius(coefs):.4f}",
                  agent="var_engine", level="WARNING")
    sigma = np.asarray(model.sigma, dtype=float)
    if sigma.shape != (K, K):
        raise InvalidParameter(f"spectral transform needs a full {K}x{K} residual covariance")

    freqs = frequency_grid(F)
    phase = np.exp(-2j * np.pi * np.outer(freqs, np.arange(1, p + 1)))   # (F, p)
    abar = np.eye(K)[None, :, :] - np.einsum("fk,kij->fij", phase, coefs)
    try:
        transfer = np.linalg.inv(abar)
    except np.linalg.LinAlgError as e:
        raise SingularAtFrequency(f"Abar(f) not invertible: {e}")
    if not np.all(np.isfinite(transfer)):
        raise SingularAtFrequency("Abar(f) inversion produced non-finite values")
    spectrum = transfer @ sigma[None, :, :] @ np.conj(np.transpose(transfer, (0, 2, 1)))
    return SpectralModel(freqs=freqs, abar=abar, transfer=transfer, spectrum=spectrum, sigma=sigma)
