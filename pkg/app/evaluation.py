# app/evaluation.py
"""
Network recovery indices, per-scenario ordinal ranking and the normalized score.
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from app.errors import DimensionMismatch, InvalidParameter
from app.significance import AdjacencyNetwork


@dataclass(frozen=True)
class ConfusionCounts:
    TP: int
    FP: int
    FN: int
    TN: int

    @property
    def total(self) -> int:
        return self.TP + self.FP + self.FN + self.TN


@dataclass(frozen=True)
class EvaluationReport:
    sens: float
    spec: float
    prec: float
    MCC: float
    FM: float
    HD: int
    counts: ConfusionCounts
    metadata: Dict[str, object] = field(default_factory=dict)

    def as_row(self) -> dict:
        row = dict(self.metadata)
        row.update(asdict(self.counts))
        row.update({"sens": self.sens, "spec": self.spec, "prec": self.prec,
                    "MCC": self.MCC, "FM": self.FM, "HD": self.HD})
        return row


@dataclass
class ScoreTable:
    """per_cell: cell, unit, P, s rows; overall: unit -> mean s over cells."""

    per_cell: pd.DataFrame
    overall: pd.Series
    N: int


def _adjacency(net) -> np.ndarray:
    return net.adjacency if isinstance(net, AdjacencyNetwork) else np.asarray(net, dtype=int)


def confusion(truth, est) -> ConfusionCounts:
    """Counts over the K(K-1) ordered off-diagonal pairs."""
    t, e = _adjacency(truth), _adjacency(est)
    if t.shape != e.shape or t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionMismatch(f"truth {t.shape} and estimate {e.shape} differ")
    off = ~np.eye(t.shape[0], dtype=bool)
    tn, fp, fn, tp = confusion_matrix(t[off], e[off], labels=[0, 1]).ravel()
    return ConfusionCounts(TP=int(tp), FP=int(fp), FN=int(fn), TN=int(tn))


def _ratio(num: float, den: float) -> float:
    return float(num / den) if den else 0.0


def indices(c: ConfusionCounts, metadata: Optional[dict] = None) -> EvaluationReport:
    """Zero denominators give 0 for the affected index."""
    tp, fp, fn, tn = c.TP, c.FP, c.FN, c.TN
    den = np.sqrt(float(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    return EvaluationReport(
        sens=_ratio(tp, tp + fn),
        spec=_ratio(tn, tn + fp),
        prec=_ratio(tp, tp + fp),
        MCC=_ratio(tp * tn - fp * fn, den),
        FM=_ratio(2 * tp, 2 * tp + fn + fp),
        HD=fp + fn,
        counts=c,
        metadata=dict(metadata or {}),
    )


def evaluate(truth, est, metadata: Optional[dict] = None) -> EvaluationReport:
    return indices(confusion(truth, est), metadata)


# ---------------------------------------
#  RANKING AND SCORE
# ---------------------------------------
def rank_measures(mcc: Mapping[str, float], seed: int = 0) -> Dict[str, int]:
    """
    Ordinal ("1234") ranking: rank 1 = highest mean MCC; tied measures get
    distinct consecutive ranks in a seeded random order.
    """
    if len(mcc) < 2:
        raise InvalidParameter("ranking needs at least two measures")
    names = sorted(mcc)
    shuffled = [names[k] for k in np.random.default_rng(seed).permutation(len(names))]
    ordered = sorted(shuffled, key=lambda name: -float(mcc[name]))
    return {name: rank for rank, name in enumerate(ordered, start=1)}


def score(ranks: Sequence[float], N: int):
    """(P, s): mean rank over coupling strengths and s = (N - P) / (N - 1)."""
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    P = float(np.mean(ranks))
    return P, (1.0 if N == 1 else (N - P) / (N - 1))


def score_table(ranks: pd.DataFrame, cell: str = "cell", unit: str = "unit", rank: str = "rank") -> ScoreTable:
    """
    Args:
        ranks: one row per (cell, coupling strength, unit) with its rank
        cell, unit, rank: column names

    Returns:
        ScoreTable with per-cell P and s, and the overall mean of s per unit
    """
    sizes = ranks.groupby([cell] + [c for c in ranks.columns if c not in (cell, unit, rank)])[unit].nunique()
    if sizes.nunique() > 1:
        raise InvalidParameter(f"inconsistent number of ranked units across scenarios: {sorted(sizes.unique())}")
    N = int(sizes.iloc[0]) if len(sizes) else 0
    rows = []
    for (c, u), group in ranks.groupby([cell, unit], sort=True):
        P, s = score(group[rank].to_numpy(), N)
        rows.append({cell: c, unit: u, "P": P, "s": s})
    per_cell = pd.DataFrame(rows, columns=[cell, unit, "P", "s"])
    overall = per_cell.groupby(unit)["s"].mean().sort_values(ascending=False)
    return ScoreTable(per_cell=per_cell, overall=overall, N=N)
