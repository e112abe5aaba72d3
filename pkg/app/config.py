# app/config.py
"""
Environment settings and the experiment configuration schema.

Environment (read from .env when present):
    ARTIFACT_DIR    artifact and log directory (default: artifacts)
    DATA_DIR        generated data directory (default: data)
    DB_PATH         sqlite file of the bench service (default: runs.db)
    THREAD_POOL_SIZE  service executor size (default: 2)
    BENCH_WORKERS   default sweep worker count (default: 1)
"""
import json
import os
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.errors import ConfigError
from app.measures import check_measure

ARTIFACT_DIR = os.getenv("ARTIFACT_DIR", "artifacts")
DATA_DIR = os.getenv("DATA_DIR", "data")
DB_PATH = os.getenv("DB_PATH", "runs.db")
THREAD_POOL_SIZE = int(os.getenv("THREAD_POOL_SIZE", "2"))
BENCH_WORKERS = int(os.getenv("BENCH_WORKERS", "1"))

SystemName = Literal["henon", "mackey_glass", "neural_mass", "sparse_var"]

# coupling sweeps from zero to strong coupling
DEFAULT_STRENGTHS = {
    "henon": [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
    "mackey_glass": [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
    "neural_mass": [0.0, 20.0, 40.0, 80.0, 120.0, 160.0, 200.0],
    "sparse_var": [0.0],
}

# VAR orders, embedding dimensions and maximum PMIME lag per system
PRESETS = {
    "henon": {"p": [2, 5], "m": [2, 3], "L": 5},
    "sparse_var": {"p": [3, 5], "m": [3, 5], "L": 5},
    "mackey_glass": {"p": [5, 10, 20], "m": [5, 10, 15], "L": 20},
    "neural_mass": {"p": [5, 10, 20], "m": [5, 10, 15], "L": 20},
}


class SystemConfig(BaseModel):
    system: SystemName
    K: int = Field(5, ge=2)
    n: int = Field(512, ge=100)
    C: List[float] = Field(default_factory=list)
    delta: float = 100.0      # Mackey-Glass delay
    A: float = 3.45           # neural mass excitation
    order: int = Field(3, ge=1)

    @model_validator(mode="after")
    def _fill_strengths(self):
        if not self.C:
            self.C = list(DEFAULT_STRENGTHS[self.system])
        if any(c < 0 for c in self.C):
            raise ValueError("coupling strengths must be >= 0")
        if self.system == "henon" and any(c > 0.5 for c in self.C):
            raise ValueError("Henon coupling must be within [0, 0.5]")
        if self.system != "sparse_var" and self.K < 3:
            raise ValueError(f"{self.system} needs K >= 3 for its chain coupling")
        return self

    def cell_label(self) -> str:
        extra = {"mackey_glass": f",delta={self.delta:g}", "neural_mass": f",A={self.A:g}"}.get(self.system, "")
        return f"{self.system}(K={self.K},n={self.n}{extra})"


class MeasureConfig(BaseModel):
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _known(self):
        check_measure(self.name, self.params)
        return self


class CriterionConfig(BaseModel):
    """alpha: significance level; density and magnitude: multiple of the true edge count."""

    kind: Literal["alpha", "density", "magnitude"]
    value: float

    @model_validator(mode="after")
    def _range(self):
        if self.kind == "alpha" and not 0 < self.value < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.value}")
        if self.kind != "alpha" and not self.value > 0:
            raise ValueError(f"{self.kind} multiple must be positive, got {self.value}")
        return self

    @property
    def label(self) -> str:
        return f"{self.kind}={self.value:g}"


def default_criteria() -> List[CriterionConfig]:
    out = [CriterionConfig(kind="alpha", value=a) for a in (0.01, 0.05, 0.1)]
    for kind in ("density", "magnitude"):
        out += [CriterionConfig(kind=kind, value=v) for v in (0.6, 0.8, 1.0, 1.2, 1.4)]
    return out


def default_measures(system: str) -> List[MeasureConfig]:
    preset = PRESETS[system]
    out = []
    for name in ("GCI", "CGCI", "PGCI", "RCGCI", "PDC", "GPDC", "DTF", "dDTF", "GGC", "RGPDC"):
        out += [MeasureConfig(name=name, params={"p": p}) for p in preset["p"]]
    for name in ("TE", "PTE", "STE", "PSTE", "TERV", "PTERV"):
        out += [MeasureConfig(name=name, params={"m": m, "tau": 1}) for m in preset["m"]]
    out.append(MeasureConfig(name="PMIME", params={"L": preset["L"]}))
    return out


class ExperimentConfig(BaseModel):
    name: str = "experiment"
    systems: List[SystemConfig]
    measures: List[MeasureConfig] = Field(default_factory=list)
    criteria: List[CriterionConfig] = Field(default_factory=default_criteria)
    realizations: int = Field(10, ge=1)
    surrogates: int = Field(100, ge=19)
    seed: int = 0
    workers: int = Field(default_factory=lambda: BENCH_WORKERS, ge=1)
    output_dir: Optional[str] = None

    @field_validator("systems")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one system is required")
        return v

    def measures_for(self, system: SystemConfig) -> List[MeasureConfig]:
        """Explicit measures if configured, else the per-system presets."""
        if self.measures:
            return list(self.measures)
        return default_measures(system.system)


def parse_config(payload: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {e}")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    return parse_config(payload)
