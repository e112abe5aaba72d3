# app/measures/symbolic.py
"""
Rank-pattern transfer entropies: STE, TERV and their partial forms PSTE, PTERV.

Embedding vectors become ordinal patterns and the conditional mutual
information is a plug-in estimate over symbol frequencies.
"""
from typing import Iterable, Optional, Sequence

import numpy as np

from app.errors import InvalidParameter
from app.measures.information import KnnConfig, conditioning_for
from app.measures.matrix import CausalityMatrix, check_pair, empty_values, pairs
from app.timeseries import EmbeddingSpec, _as_matrix, delay_embed
from app.utils.run_logger import agent_log

SYMBOLIC_VARIANTS = ("STE", "TERV")
MIN_PER_CELL = 5


def ordinal_patterns(x, spec: EmbeddingSpec) -> np.ndarray:
    """
    Integer code of the rank order of each chronological embedding vector.

    Equal values rank by time: the earlier sample ranks lower.
    """
    emb = delay_embed(x, spec)[:, ::-1]            # oldest sample first
    ranks = np.argsort(np.argsort(emb, axis=1, kind="stable"), axis=1, kind="stable")
    weights = spec.m ** np.arange(spec.m)
    return ranks @ weights


def join_symbols(*columns: np.ndarray) -> np.ndarray:
    """One integer symbol per row for the tuple of input symbols."""
    stacked = np.column_stack(columns)
    _, inverse = np.unique(stacked, axis=0, return_inverse=True)
    return np.asarray(inverse).reshape(-1)


def _entropy(*columns: np.ndarray) -> float:
    _, counts = np.unique(np.column_stack(columns), axis=0, return_counts=True)
    prob = counts / counts.sum()
    return float(-(prob * np.log(prob)).sum())


def plugin_cmi(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """I(a; b | c) = H(a,c) + H(b,c) - H(a,b,c) - H(c) from symbol counts."""
    return _entropy(a, c) + _entropy(b, c) - _entropy(a, b, c) - _entropy(c)


def rank_of_next(y: np.ndarray, spec: EmbeddingSpec) -> np.ndarray:
    """Rank of y_{t+1} within the current y embedding extended by y_{t+1}, in 1..m+1."""
    emb = delay_embed(y, spec)[:-1]
    nxt = y[spec.span + 1:]
    return (emb <= nxt[:, None]).sum(axis=1) + 1


def symbolic_te(ts, i: int, j: int, spec: EmbeddingSpec = EmbeddingSpec(), variant: str = "STE",
                conditioning: Optional[Sequence[int]] = None) -> float:
    """
    Symbolic transfer entropy of X_i -> X_j.

    STE takes the pattern of the y embedding at t+1 as the future symbol,
    TERV the rank of y_{t+1} in the extended window. A ``conditioning`` set
    gives the partial forms.
    """
    data = _as_matrix(ts)
    check_pair(data.shape[1], i, j)
    if spec.m < 2:
        raise InvalidParameter(f"rank patterns need m >= 2, got {spec.m}")
    if variant not in SYMBOLIC_VARIANTS:
        raise InvalidParameter(f"unknown symbolic variant '{variant}', expected one of {SYMBOLIC_VARIANTS}")

    y_codes = ordinal_patterns(data[:, j], spec)
    x_now = ordinal_patterns(data[:, i], spec)[:-1]
    y_now = y_codes[:-1]
    future = y_codes[1:] if variant == "STE" else rank_of_next(data[:, j], spec)
    cond = [y_now] + [ordinal_patterns(data[:, v], spec)[:-1] for v in (conditioning or ())]
    c = join_symbols(*cond) if len(cond) > 1 else y_now

    cells = len(np.unique(np.column_stack([future, x_now, c]), axis=0))
    if len(future) < MIN_PER_CELL * cells:
        agent_log("system", f"{variant} {i}->{j}: {len(future)} samples for {cells} symbol cells",
                  agent="measures", level="WARNING")
    return plugin_cmi(future, x_now, c)


def symbolic_matrix(ts, variant: str = "STE", m: int = 2, tau: int = 1, partial: bool = False,
                    drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    spec = EmbeddingSpec(m, tau)
    cfg = KnnConfig()
    values = empty_values(data.shape[1])
    for i, j in pairs(data.shape[1], drivers):
        cond = conditioning_for(data, i, j, cfg) if partial else None
        values[i, j] = symbolic_te(data, i, j, spec, variant, cond)
    name = ("P" if partial else "") + variant
    return CausalityMatrix(values, name, {"m": m, "tau": tau})
