# app/measures/information.py
"""
Nearest-neighbour information measures: TE, PTE and PMIME.

Estimators follow the Kraskov / Frenzel-Pompe construction with max-norm
neighbour searches in sklearn KD-trees. A tiny jitter drawn from a fixed
seed breaks distance ties, so results depend on the data only.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import digamma
from sklearn.neighbors import KDTree

from app.errors import InvalidParameter, TooFewSamples
from app.measures.matrix import CausalityMatrix, check_pair, driver_rows, empty_values, pairs
from app.timeseries import EmbeddingSpec, LagSet, _as_matrix, delay_embed

MIN_SAMPLES = 50
PMIME_STOP = 0.95
PARTIAL_COUNT = 3
FULL_CONDITIONING_K = 5


@dataclass(frozen=True)
class KnnConfig:
    k: int = 10
    jitter: float = 1e-10

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter(f"k must be >= 1, got {self.k}")
        if self.jitter < 0:
            raise InvalidParameter("jitter must be >= 0")


@dataclass(frozen=True)
class MixedEmbedding:
    """Greedy mixed embedding of one response; gains follow selection order."""

    response: int
    selected: LagSet
    gains: Tuple[float, ...]
    total: float


# ---------------------------------------
#  KSG ESTIMATORS
# ---------------------------------------
def _block(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _jittered(blocks: Sequence[np.ndarray], cfg: KnnConfig) -> List[np.ndarray]:
    joint = np.hstack(blocks)
    if cfg.jitter > 0:
        scale = joint.std(axis=0)
        scale[~(scale > 0)] = 1.0
        joint = joint + cfg.jitter * scale * np.random.default_rng(0).standard_normal(joint.shape)
    cuts = np.cumsum([b.shape[1] for b in blocks])[:-1]
    return np.split(joint, cuts, axis=1)


def _check_samples(n: int, cfg: KnnConfig, *blocks):
    if any(b.shape[0] != n for b in blocks):
        raise InvalidParameter("samples must have equal length")
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"{n} samples, need at least {MIN_SAMPLES}")
    if cfg.k >= n:
        raise InvalidParameter(f"k={cfg.k} must be below the sample count {n}")


def _kth_distance(points: np.ndarray, k: int) -> np.ndarray:
    return KDTree(points, metric="chebyshev").query(points, k=k + 1)[0][:, k]


def _avg_digamma(points: np.ndarray, radius: np.ndarray) -> float:
    """<psi(count)>, count = points strictly inside ``radius`` including the point itself."""
    tree = KDTree(points, metric="chebyshev")
    counts = tree.query_radius(points, np.nextafter(radius, 0.0), count_only=True)
    return float(np.mean(digamma(counts)))


def knn_mi(x, y, cfg: KnnConfig = KnnConfig()) -> float:
    """Kraskov estimate of I(x; y) in nats."""
    x, y = _block(x), _block(y)
    n = x.shape[0]
    _check_samples(n, cfg, y)
    x, y = _jittered([x, y], cfg)
    eps = _kth_distance(np.hstack([x, y]), cfg.k)
    return float(digamma(cfg.k) + digamma(n) - _avg_digamma(x, eps) - _avg_digamma(y, eps))


def knn_cmi(x, y, z=None, cfg: KnnConfig = KnnConfig()) -> float:
    """Frenzel-Pompe estimate of I(x; y | z) in nats; reduces to knn_mi for empty z."""
    z = None if z is None else _block(z)
    if z is None or z.shape[1] == 0:
        return knn_mi(x, y, cfg)
    x, y = _block(x), _block(y)
    n = x.shape[0]
    _check_samples(n, cfg, y, z)
    x, y, z = _jittered([x, y, z], cfg)
    eps = _kth_distance(np.hstack([x, y, z]), cfg.k)
    return float(
        digamma(cfg.k)
        - _avg_digamma(np.hstack([x, z]), eps)
        - _avg_digamma(np.hstack([y, z]), eps)
        + _avg_digamma(z, eps)
    )


# ---------------------------------------
#  TRANSFER ENTROPY
# ---------------------------------------
def te_samples(data: np.ndarray, i: int, j: int, spec: EmbeddingSpec, conditioning: Sequence[int] = ()):
    """
    Aligned (future, driver embedding, conditioning embeddings) for
    t = span .. n-2: y_{t+1}, x_t^(m,tau) and y_t^(m,tau) plus each z_t^(m,tau).
    """
    future = data[spec.span + 1:, j]
    driver = delay_embed(data[:, i], spec)[:-1]
    cond = [delay_embed(data[:, j], spec)[:-1]] + [delay_embed(data[:, v], spec)[:-1] for v in conditioning]
    return future, driver, np.hstack(cond)


def te(ts, i: int, j: int, spec: EmbeddingSpec = EmbeddingSpec(), cfg: KnnConfig = KnnConfig()) -> float:
    data = _as_matrix(ts)
    check_pair(data.shape[1], i, j)
    future, driver, cond = te_samples(data, i, j, spec)
    return knn_cmi(future, driver, cond, cfg)


def pte(ts, i: int, j: int, spec: EmbeddingSpec = EmbeddingSpec(), cfg: KnnConfig = KnnConfig(),
        conditioning: Sequence[int] = ()) -> float:
    data = _as_matrix(ts)
    check_pair(data.shape[1], i, j)
    conditioning = list(conditioning)
    if i in conditioning or j in conditioning:
        raise InvalidParameter("conditioning set must exclude the driver and the response")
    future, driver, cond = te_samples(data, i, j, spec, conditioning)
    return knn_cmi(future, driver, cond, cfg)


def select_conditioning(ts, i: int, j: int, count: int = PARTIAL_COUNT, cfg: KnnConfig = KnnConfig()) -> List[int]:
    """The ``count`` remaining variables with the largest MI to the driver; ties to the lower index."""
    data = _as_matrix(ts)
    K = data.shape[1]
    check_pair(K, i, j)
    rest = [v for v in range(K) if v not in (i, j)]
    if len(rest) <= count:
        return rest
    scores = [(-knn_mi(data[:, i], data[:, v], cfg), v) for v in rest]
    return sorted(v for _, v in sorted(scores)[:count])


def conditioning_for(data: np.ndarray, i: int, j: int, cfg: KnnConfig = KnnConfig()) -> List[int]:
    """All remaining variables for small networks, the three most relevant otherwise."""
    K = data.shape[1]
    if K <= FULL_CONDITIONING_K:
        return [v for v in range(K) if v not in (i, j)]
    return select_conditioning(data, i, j, PARTIAL_COUNT, cfg)


def te_matrix(ts, m: int = 2, tau: int = 1, k: int = 10,
              drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    spec, cfg = EmbeddingSpec(m, tau), KnnConfig(k)
    values = empty_values(data.shape[1])
    for i, j in pairs(data.shape[1], drivers):
        values[i, j] = te(data, i, j, spec, cfg)
    return CausalityMatrix(values, "TE", {"m": m, "tau": tau})


def pte_matrix(ts, m: int = 2, tau: int = 1, k: int = 10,
               drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    spec, cfg = EmbeddingSpec(m, tau), KnnConfig(k)
    values = empty_values(data.shape[1])
    for i, j in pairs(data.shape[1], drivers):
        values[i, j] = pte(data, i, j, spec, cfg, conditioning_for(data, i, j, cfg))
    return CausalityMatrix(values, "PTE", {"m": m, "tau": tau})


# ---------------------------------------
#  PMIME
# ---------------------------------------
def _candidates(data: np.ndarray, L_max: int):
    """Future y_{t+1} rows and candidate columns X_{v, t-l+1} for t = L_max-1 .. n-2."""
    n, K = data.shape
    terms = [(v, l) for v in range(K) for l in range(1, L_max + 1)]
    columns = {(v, l): data[L_max - l: n - l, v] for v, l in terms}
    return terms, columns


def mixed_embedding(ts, j: int, L_max: int, cfg: KnnConfig = KnnConfig(),
                    A_stop: float = PMIME_STOP) -> MixedEmbedding:
    """
    Greedy selection of the lagged terms most informative about y_{t+1}.

    Each step adds the candidate of largest I(y; c | selected); selection
    stops once I(y; old) / I(y; new) >= A_stop, the joint information stops
    being positive, or the pool is exhausted.
    """
    data = _as_matrix(ts)
    n, K = data.shape
    if L_max < 1:
        raise InvalidParameter(f"L_max must be >= 1, got {L_max}")
    if not 0 < A_stop <= 1:
        raise InvalidParameter(f"A_stop must be in (0, 1], got {A_stop}")
    if n - L_max < MIN_SAMPLES:
        raise TooFewSamples(f"n={n} leaves fewer than {MIN_SAMPLES} samples for L_max={L_max}")
    future = data[L_max:, j]
    pool, columns = _candidates(data, L_max)
    selected: List[Tuple[int, int]] = []
    gains: List[float] = []
    total = 0.0

    while pool:
        cond = np.column_stack([columns[t] for t in selected]) if selected else None
        scores = [knn_cmi(future, columns[t], cond, cfg) for t in pool]
        best = int(np.argmax(scores))
        term = pool[best]
        # chain rule: I(y; old + c) = I(y; old) + I(y; c | old)
        new_total = total + float(scores[best])
        if selected and (new_total <= 0 or total / new_total >= A_stop):
            break
        selected.append(term)
        gains.append(float(scores[best]))
        pool.pop(best)
        total = new_total
        if total <= 0:
            break
    return MixedEmbedding(response=j, selected=LagSet(tuple(selected)), gains=tuple(gains), total=total)


def pmime_row(data: np.ndarray, embedding: MixedEmbedding, L_max: int, cfg: KnnConfig) -> np.ndarray:
    """R(X_i -> X_j) for every i given the response's mixed embedding; 0 where X_i is absent."""
    K = data.shape[1]
    j = embedding.response
    row = np.zeros(K)
    selected = list(embedding.selected)
    if not selected or embedding.total <= 0:
        return row
    future = data[L_max:, j]
    _, columns = _candidates(data, L_max)
    for i in embedding.selected.variables():
        if i == j:
            continue
        own = np.column_stack([columns[t] for t in selected if t[0] == i])
        others = [t for t in selected if t[0] != i]
        rest = np.column_stack([columns[t] for t in others]) if others else None
        row[i] = max(knn_cmi(future, own, rest, cfg) / embedding.total, 0.0)
    return row


def pmime(ts, L_max: int = 5, k: int = 10, A_stop: float = PMIME_STOP,
          drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    """
    Partial mutual information from mixed embedding.

    Entries are exactly 0 for drivers without a selected lag, so the matrix
    binarizes without a surrogate test.
    """
    data = _as_matrix(ts)
    K = data.shape[1]
    cfg = KnnConfig(k)
    values = np.zeros((K, K))
    for j in range(K):
        values[:, j] = pmime_row(data, mixed_embedding(data, j, L_max, cfg, A_stop), L_max, cfg)
    if drivers is not None:
        rows = driver_rows(K, drivers)
        masked = np.full((K, K), np.nan)
        masked[rows] = values[rows]
        values = masked
    return CausalityMatrix(values, "PMIME", {"L": L_max})
