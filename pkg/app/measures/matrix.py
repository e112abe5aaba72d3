# app/measures/matrix.py
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.errors import InvalidParameter


@dataclass(frozen=True, eq=False)
class CausalityMatrix:
    """values[i, j] = R(X_i -> X_j); the diagonal is NaN."""

    values: np.ndarray
    measure: str
    params: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidParameter(f"causality matrix must be square, got {v.shape}")
        np.fill_diagonal(v, np.nan)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return self.values.shape[0]

    def off_diagonal(self) -> np.ndarray:
        return self.values[~np.eye(self.K, dtype=bool)]


def check_pair(K: int, i: int, j: int):
    if i == j:
        raise InvalidParameter(f"driver and response must differ, got i=j={i}")
    if not (0 <= i < K and 0 <= j < K):
        raise InvalidParameter(f"pair ({i}, {j}) out of range for K={K}")


def driver_rows(K: int, drivers: Optional[Iterable[int]]) -> List[int]:
    """Rows to compute; entries of other rows stay NaN."""
    if drivers is None:
        return list(range(K))
    rows = sorted({int(d) for d in drivers})
    if any(d < 0 or d >= K for d in rows):
        raise InvalidParameter(f"driver index out of range for K={K}: {rows}")
    return rows


def pairs(K: int, drivers: Optional[Iterable[int]] = None) -> List[Tuple[int, int]]:
    return [(i, j) for i in driver_rows(K, drivers) for j in range(K) if i != j]


def empty_values(K: int) -> np.ndarray:
    return np.full((K, K), np.nan)
