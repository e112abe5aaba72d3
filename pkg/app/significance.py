# app/significance.py
"""
From weighted causality matrices to binary networks: time-shifted surrogate
tests, density thresholds, magnitude thresholds and the PMIME rule.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from app.errors import InvalidParameter, SeriesTooShort
from app.measures import compute_measure
from app.measures.matrix import CausalityMatrix
from app.timeseries import _as_matrix
from app.utils.run_logger import agent_log

DEFAULT_SURROGATES = 100
MIN_SURROGATES = 19
SHIFT_GUARD = 20
MIN_SURROGATE_LENGTH = 100


@dataclass(frozen=True, eq=False)
class SurrogateTestResult:
    original: float
    surrogates: np.ndarray
    rank: int
    pvalue: float


@dataclass(frozen=True, eq=False)
class AdjacencyNetwork:
    """adjacency[i, j] = 1 iff an edge X_i -> X_j; criterion like {'kind': 'alpha', 'value': 0.05}."""

    adjacency: np.ndarray
    criterion: Dict[str, object]

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=int).copy()
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidParameter(f"adjacency must be square, got {a.shape}")
        np.fill_diagonal(a, 0)
        if not np.isin(a, (0, 1)).all():
            raise InvalidParameter("adjacency entries must be 0 or 1")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def K(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edges(self) -> int:
        return int(self.adjacency.sum())

    @property
    def label(self) -> str:
        return f"{self.criterion.get('kind')}={self.criterion.get('value')}"


# ---------------------------------------
#  SURROGATES AND P-VALUES
# ---------------------------------------
def _rng(seed: Union[int, np.random.Generator, np.random.SeedSequence]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replica_seed(seed: int, driver: int, replica: int) -> np.random.SeedSequence:
    """Seed of surrogate ``replica`` of ``driver``; independent of evaluation order."""
    return np.random.SeedSequence([int(seed), int(driver), int(replica)])


def time_shift_surrogate(x, seed) -> np.ndarray:
    """Cyclic rotation of x by w drawn uniformly from {20, ..., n-20}."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < MIN_SURROGATE_LENGTH:
        raise SeriesTooShort(f"time-shift surrogates need n >= {MIN_SURROGATE_LENGTH}, got {n}")
    w = int(_rng(seed).integers(SHIFT_GUARD, n - SHIFT_GUARD + 1))
    return np.roll(x, -w)


def surrogate_rank(original: float, surrogates: np.ndarray) -> int:
    """Ascending rank of the original among the M+1 values; tied surrogates rank above it."""
    return 1 + int(np.sum(np.asarray(surrogates) < original))


def rank_pvalue(rank: int, M: int) -> float:
    """p = 1 - (r0 - 0.326) / (M + 1 + 0.348)"""
    if not 1 <= rank <= M + 1:
        raise InvalidParameter(f"rank {rank} outside 1..{M + 1}")
    return 1.0 - (rank - 0.326) / (M + 1 + 0.348)


def _check_M(M: int):
    if M < MIN_SURROGATES:
        raise InvalidParameter(f"need at least {MIN_SURROGATES} surrogates, got {M}")


def surrogate_test(evaluator: Callable[[np.ndarray, int, int], float], ts, i: int, j: int,
                   M: int = DEFAULT_SURROGATES, seed: int = 0) -> SurrogateTestResult:
    """
    One-sided randomization test of R(X_i -> X_j).

    Args:
        evaluator: f(data, i, j) -> measure value
        ts: TimeSeriesSet or n x K array
        i, j: driver and response (0-based)
        M: number of surrogates of the driver
        seed: base seed; replica m uses replica_seed(seed, i, m)

    Returns:
        SurrogateTestResult with the p-value of the original value
    """
    _check_M(M)
    data = np.array(_as_matrix(ts), copy=True)
    original = float(evaluator(data, i, j))
    values = np.empty(M)
    driver = data[:, i].copy()
    for m in range(M):
        data[:, i] = time_shift_surrogate(driver, replica_seed(seed, i, m))
        values[m] = evaluator(data, i, j)
    rank = surrogate_rank(original, values)
    return SurrogateTestResult(original, values, rank, rank_pvalue(rank, M))


def surrogate_pvalues(measure: str, ts, params: dict, M: int = DEFAULT_SURROGATES, seed: int = 0,
                      original: Optional[CausalityMatrix] = None, run_id: str = "system") -> np.ndarray:
    """
    K x K p-values of every pair: one surrogate of driver i per replica feeds
    all pairs (i, j); only row i is recomputed on the surrogate data.
    """
    _check_M(M)
    data = np.array(_as_matrix(ts), copy=True)
    K = data.shape[1]
    if original is None:
        original = compute_measure(measure, data, params)
    pvals = np.full((K, K), np.nan)
    for i in range(K):
        driver = data[:, i].copy()
        rows = np.empty((M, K))
        for m in range(M):
            data[:, i] = time_shift_surrogate(driver, replica_seed(seed, i, m))
            rows[m] = compute_measure(measure, data, params, drivers=[i]).values[i]
        data[:, i] = driver
        for j in range(K):
            if j != i:
                pvals[i, j] = rank_pvalue(surrogate_rank(original.values[i, j], rows[:, j]), M)
    agent_log(run_id, f"{measure} {params}: {M} surrogates per driver done", agent="significance")
    return pvals


# ---------------------------------------
#  BINARIZATION
# ---------------------------------------
def _off_diagonal(K: int) -> np.ndarray:
    return ~np.eye(K, dtype=bool)


def _values(R) -> np.ndarray:
    return R.values if isinstance(R, CausalityMatrix) else np.asarray(R, dtype=float)


def binarize_significance(pvals: np.ndarray, alpha: float) -> AdjacencyNetwork:
    if not 0 < alpha < 1:
        raise InvalidParameter(f"alpha must be in (0, 1), got {alpha}")
    pvals = np.asarray(pvals, dtype=float)
    adj = (np.nan_to_num(pvals, nan=1.0) < alpha) & _off_diagonal(pvals.shape[0])
    return AdjacencyNetwork(adj, {"kind": "alpha", "value": alpha})


def binarize_density(R, rho: int) -> AdjacencyNetwork:
    """The rho largest off-diagonal entries; ties go to the lower (i, j)."""
    values = _values(R)
    K = values.shape[0]
    if not 1 <= rho <= K * (K - 1):
        raise InvalidParameter(f"density {rho} outside 1..{K * (K - 1)}")
    rows, cols = np.nonzero(_off_diagonal(K))
    v = np.nan_to_num(values[rows, cols], nan=-np.inf)
    order = np.lexsort((cols, rows, -v))
    adj = np.zeros((K, K), dtype=int)
    adj[rows[order[:rho]], cols[order[:rho]]] = 1
    return AdjacencyNetwork(adj, {"kind": "density", "value": rho})


def binarize_magnitude(R, th: float) -> AdjacencyNetwork:
    """
    Edges where R >= th. The comparison is inclusive rather than strict so a
    threshold read off one matrix (its rho-th largest value) keeps exactly rho
    edges; a strict comparison would drop the edge sitting at the threshold.
    """
    values = _values(R)
    adj = (np.nan_to_num(values, nan=-np.inf) >= th) & _off_diagonal(values.shape[0])
    return AdjacencyNetwork(adj, {"kind": "magnitude", "value": float(th)})


def threshold_from_density(realizations: Sequence, rho: int) -> float:
    """Mean over realizations of the rho-th largest off-diagonal value."""
    if not len(realizations):
        raise InvalidParameter("need at least one realization")
    ths = []
    for R in realizations:
        values = _values(R)
        K = values.shape[0]
        if not 1 <= rho <= K * (K - 1):
            raise InvalidParameter(f"density {rho} outside 1..{K * (K - 1)}")
        off = np.sort(np.nan_to_num(values[_off_diagonal(K)], nan=-np.inf))[::-1]
        ths.append(off[rho - 1])
    return float(np.mean(ths))


def binarize_pmime(R) -> AdjacencyNetwork:
    values = _values(R)
    adj = (np.nan_to_num(values, nan=0.0) > 0) & _off_diagonal(values.shape[0])
    return AdjacencyNetwork(adj, {"kind": "pmime", "value": 0})
