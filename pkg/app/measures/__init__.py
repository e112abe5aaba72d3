# app/measures/__init__.py
"""
Measure catalogue: one entry per causality measure, dispatched by name.

Usage:
    cm = compute_measure("TE", ts, {"m": 2, "tau": 1})
    measure_id("PDC", {"p": 3, "band": "alpha"})  # 'PDC(p=3,alpha)'
"""
from typing import Callable, Dict, Iterable, Optional

from app.errors import InvalidParameter
from app.measures.frequency import BANDS, ggc_matrix, rgpdc, spectral_matrix
from app.measures.information import pmime, pte_matrix, te_matrix
from app.measures.matrix import CausalityMatrix
from app.measures.symbolic import symbolic_matrix
from app.measures.time_linear import cgci_matrix, gci_matrix, pgci_matrix, rcgci

MODEL_BASED = "model-based"
INFORMATION = "information"
FREQUENCY = "frequency"


def _band(params):
    return params.get("band", "all")


_DRIVERS: Dict[str, Callable] = {
    "GCI": lambda ts, p, d: gci_matrix(ts, p["p"], d),
    "CGCI": lambda ts, p, d: cgci_matrix(ts, p["p"], d),
    "PGCI": lambda ts, p, d: pgci_matrix(ts, p["p"], d),
    "RCGCI": lambda ts, p, d: rcgci(ts, p["p"], d),
    "PDC": lambda ts, p, d: spectral_matrix(ts, "PDC", p["p"], _band(p), drivers=d),
    "GPDC": lambda ts, p, d: spectral_matrix(ts, "GPDC", p["p"], _band(p), drivers=d),
    "DTF": lambda ts, p, d: spectral_matrix(ts, "DTF", p["p"], _band(p), drivers=d),
    "dDTF": lambda ts, p, d: spectral_matrix(ts, "dDTF", p["p"], _band(p), drivers=d),
    "GGC": lambda ts, p, d: ggc_matrix(ts, p["p"], _band(p), drivers=d),
    "RGPDC": lambda ts, p, d: rgpdc(ts, p["p"], _band(p), drivers=d),
    "TE": lambda ts, p, d: te_matrix(ts, p["m"], p.get("tau", 1), p.get("k", 10), d),
    "PTE": lambda ts, p, d: pte_matrix(ts, p["m"], p.get("tau", 1), p.get("k", 10), d),
    "STE": lambda ts, p, d: symbolic_matrix(ts, "STE", p["m"], p.get("tau", 1), False, d),
    "PSTE": lambda ts, p, d: symbolic_matrix(ts, "STE", p["m"], p.get("tau", 1), True, d),
    "TERV": lambda ts, p, d: symbolic_matrix(ts, "TERV", p["m"], p.get("tau", 1), False, d),
    "PTERV": lambda ts, p, d: symbolic_matrix(ts, "TERV", p["m"], p.get("tau", 1), True, d),
    "PMIME": lambda ts, p, d: pmime(ts, p["L"], p.get("k", 10), p.get("A_stop", 0.95), d),
}

_CLASSES = {
    **{name: MODEL_BASED for name in ("GCI", "CGCI", "PGCI", "RCGCI")},
    **{name: FREQUENCY for name in ("PDC", "GPDC", "DTF", "dDTF", "GGC", "RGPDC")},
    **{name: INFORMATION for name in ("TE", "PTE", "STE", "PSTE", "TERV", "PTERV", "PMIME")},
}

_REQUIRED = {
    MODEL_BASED: ("p",),
    FREQUENCY: ("p",),
}

MEASURES = tuple(_DRIVERS)
BIVARIATE = ("GCI", "GGC", "TE", "STE", "TERV")


def _required(name: str):
    if name == "PMIME":
        return ("L",)
    return _REQUIRED.get(_CLASSES[name], ("m",))


def check_measure(name: str, params: dict):
    if name not in _DRIVERS:
        raise InvalidParameter(f"unknown measure '{name}', expected one of {list(MEASURES)}")
    missing = [key for key in _required(name) if key not in params]
    if missing:
        raise InvalidParameter(f"measure {name} missing parameter(s): {', '.join(missing)}")
    band = params.get("band")
    if band is not None and band != "all" and band not in BANDS:
        raise InvalidParameter(f"unknown band '{band}'")


def measure_family(name: str) -> str:
    if name not in _DRIVERS:
        raise InvalidParameter(f"unknown measure '{name}'")
    return name


def measure_class(name: str) -> str:
    if name not in _CLASSES:
        raise InvalidParameter(f"unknown measure '{name}'")
    return _CLASSES[name]


def measure_id(name: str, params: dict) -> str:
    """Canonical label such as TE(m=2,tau=1), PDC(p=3,alpha) or PMIME(L=5)."""
    check_measure(name, params)
    if name == "PMIME":
        return f"PMIME(L={params['L']})"
    cls = _CLASSES[name]
    if cls == INFORMATION:
        return f"{name}(m={params['m']},tau={params.get('tau', 1)})"
    if cls == FREQUENCY:
        return f"{name}(p={params['p']},{params.get('band') or 'all'})"
    return f"{name}(p={params['p']})"


def compute_measure(name: str, ts, params: dict, drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    """Full causality matrix of ``name``; ``drivers`` limits the computed rows."""
    check_measure(name, params)
    return _DRIVERS[name](ts, params, drivers)


def catalogue() -> list:
    return [{"name": name, "family": measure_family(name), "class": _CLASSES[name],
             "bivariate": name in BIVARIATE, "params": list(_required(name))}
            for name in MEASURES]


__all__ = [
    "CausalityMatrix",
    "BIVARIATE",
    "MEASURES",
    "catalogue",
    "check_measure",
    "compute_measure",
    "measure_class",
    "measure_family",
    "measure_id",
]
