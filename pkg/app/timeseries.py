# app/timeseries.py
"""
Time-series containers and the lag bookkeeping shared by every estimator.

Node indices are 0-based here; reports and files shown to users are 1-based.
"""
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.errors import ConstantChannel, InvalidParameter, SeriesTooShort


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeriesSet:
    """n x K observations; column k is network node k."""

    data: np.ndarray
    labels: Tuple[str, ...] = ()
    dt: float = 1.0
    standardized: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise InvalidParameter(f"data must be a 2-D matrix, got shape {data.shape}")
        n, K = data.shape
        if n < 2 or K < 2:
            raise InvalidParameter(f"need n >= 2 and K >= 2, got n={n}, K={K}")
        if not np.all(np.isfinite(data)):
            raise InvalidParameter("time series contains NaN or Inf")
        labels = tuple(self.labels) if self.labels else tuple(f"X{k + 1}" for k in range(K))
        if len(labels) != K:
            raise InvalidParameter(f"{len(labels)} labels for {K} channels")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def K(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class EmbeddingSpec:
    m: int = 2
    tau: int = 1

    def __post_init__(self):
        if self.m < 1 or self.tau < 1:
            raise InvalidParameter(f"embedding needs m >= 1 and tau >= 1, got m={self.m}, tau={self.tau}")

    @property
    def span(self) -> int:
        """(m-1)*tau: samples consumed before the first full vector."""
        return (self.m - 1) * self.tau


@dataclass(frozen=True)
class LagSet:
    """Ordered (variable, lag) terms of a regression or mixed embedding."""

    terms: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple((int(v), int(l)) for v, l in self.terms)
        if any(l < 1 for _, l in terms):
            raise InvalidParameter("lags must be >= 1")
        if len(set(terms)) != len(terms):
            raise InvalidParameter(f"duplicate terms in {terms}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def full(cls, variables: Iterable[int], p: int) -> "LagSet":
        """All lags 1..p of each variable, variable-major."""
        return cls(tuple((v, l) for v in variables for l in range(1, p + 1)))

    @property
    def maxlag(self) -> int:
        return max((l for _, l in self.terms), default=0)

    def variables(self) -> Tuple[int, ...]:
        return tuple(sorted({v for v, _ in self.terms}))

    def without(self, variable: int) -> "LagSet":
        return LagSet(tuple(t for t in self.terms if t[0] != variable))

    def of(self, variable: int) -> "LagSet":
        return LagSet(tuple(t for t in self.terms if t[0] == variable))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)


def _as_matrix(ts: Union[TimeSeriesSet, np.ndarray]) -> np.ndarray:
    if isinstance(ts, TimeSeriesSet):
        return ts.data
    a = np.asarray(ts, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def standardize(ts: TimeSeriesSet) -> TimeSeriesSet:
    """Zero mean, unit sample variance per column."""
    data = ts.data
    mean = data.mean(axis=0)
    std = data.std(axis=0, ddof=1)
    constant = np.flatnonzero(np.ptp(data, axis=0) == 0)
    if constant.size:
        names = ", ".join(ts.labels[k] for k in constant)
        raise ConstantChannel(f"zero variance in channel(s): {names}")
    return TimeSeriesSet((data - mean) / std, ts.labels, ts.dt, standardized=True)


def delay_embed(x: Sequence[float], spec: EmbeddingSpec) -> np.ndarray:
    """
    Rows (x_t, x_{t-tau}, ..., x_{t-(m-1)tau}) for t = (m-1)tau .. n-1.

    Row r belongs to time t = spec.span + r.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n <= spec.span:
        raise SeriesTooShort(f"series of length {n} too short for m={spec.m}, tau={spec.tau}")
    rows = n - spec.span
    cols = [x[spec.span - c * spec.tau: spec.span - c * spec.tau + rows] for c in range(spec.m)]
    return np.column_stack(cols)


def lagged_design(
    ts: Union[TimeSeriesSet, np.ndarray],
    lags: LagSet,
    target: int,
    maxlag: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Predictor matrix and response for regressing ``target`` on ``lags``.

    Rows are times t = maxlag .. n-1 (0-based). Passing a common ``maxlag``
    aligns nested models on the same rows.
    """
    data = _as_matrix(ts)
    n = data.shape[0]
    maxlag = lags.maxlag if maxlag is None else max(maxlag, lags.maxlag)
    if maxlag >= n:
        raise SeriesTooShort(f"lag {maxlag} needs more than {n} samples")
    rows = n - maxlag
    X = np.empty((rows, len(lags)))
    for c, (v, l) in enumerate(lags):
        X[:, c] = data[maxlag - l: n - l, v]
    y = data[maxlag:, target].copy()
    return X, y


def _first_row(path: str) -> Tuple[int, str]:
    """Raw line index and text of the first non-blank, non-comment line."""
    with open(path, "r", encoding="utf-8") as f:
        for idx, line in enumerate(f):
            text = line.split("#", 1)[0].strip()
            if text:
                return idx, text
    raise InvalidParameter(f"{path} holds no data")


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_timeseries(path: str, standardize_input: bool = True) -> TimeSeriesSet:
    """
    Read a plain-text matrix: one row per time point, whitespace or comma
    delimited, optional header line of labels. Values parse bit-exactly.
    """
    idx, first = _first_row(path)
    sep = "," if "," in first else r"\s+"
    tokens = [t.strip() for t in (first.split(",") if sep == "," else first.split())]
    tokens = [t for t in tokens if t]
    labels: Tuple[str, ...] = ()
    skip = idx
    if not all(_is_number(t) for t in tokens):
        labels = tuple(tokens)
        skip = idx + 1
    try:
        df = pd.read_csv(path, sep=sep, header=None, skiprows=skip, comment="#",
                         skipinitialspace=True, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as e:
        raise InvalidParameter(f"cannot parse {path}: {e}") from e
    df = df.dropna(axis=1, how="all")
    try:
        data = df.to_numpy(dtype=float)
    except ValueError as e:
        raise InvalidParameter(f"non-numeric value in {path}: {e}") from e
    ts = TimeSeriesSet(data, labels)
    return standardize(ts) if standardize_input else ts


def save_timeseries(path: str, ts: TimeSeriesSet, header: bool = True):
    df = pd.DataFrame(ts.data, columns=list(ts.labels))
    df.to_csv(path, sep=" ", index=False, header=header, float_format="%.17g")
    return path
