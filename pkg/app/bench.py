# app/bench.py
"""
Benchmark sweep: systems x coupling strengths x realizations x measures x criteria.

Every (scenario, realization) task generates its data, computes each
measure's matrix and, for significance criteria, its surrogate p-values.
Matrices are cached with joblib so an interrupted sweep resumes. Rows are
written in canonical order, so identical configs give identical tables.
"""
import hashlib
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import joblib
import numpy as np
import pandas as pd

from app.config import ARTIFACT_DIR, CriterionConfig, ExperimentConfig, SystemConfig
from app.errors import CausalityError
from app.evaluation import evaluate, rank_measures, score_table
from app.measures import compute_measure, measure_class, measure_family, measure_id
from app.significance import (
    binarize_density,
    binarize_magnitude,
    binarize_pmime,
    binarize_significance,
    surrogate_pvalues,
    threshold_from_density,
)
from app.storage import save_artifact
from app.systems import generate_system
from app.timeseries import standardize
from app.utils.run_logger import agent_log

SCENARIO_FIELDS = ["system", "K", "n", "delta", "A", "C"]
INDEX_FIELDS = ["TP", "FP", "FN", "TN", "sens", "spec", "prec", "MCC", "FM", "HD"]
RESULT_COLUMNS = SCENARIO_FIELDS + ["measure", "criterion", "realization"] + INDEX_FIELDS + ["error"]


@dataclass
class Outcome:
    """Matrices of one realization; errors hold the code of failed measures."""

    truth: Optional[np.ndarray]
    values: Dict[str, np.ndarray]
    pvalues: Dict[str, np.ndarray]
    errors: Dict[str, str]


def data_seed(master_seed: int, realization: int) -> int:
    return int(master_seed) ^ int(realization)


def _scenario(system: SystemConfig, C: float) -> dict:
    return {"system": system.system, "K": system.K, "n": system.n,
            "delta": system.delta if system.system == "mackey_glass" else np.nan,
            "A": system.A if system.system == "neural_mass" else np.nan, "C": C}


def _cache_path(run_id: str, *parts) -> str:
    key = hashlib.sha1("|".join(str(p) for p in parts).encode("utf-8")).hexdigest()[:20]
    folder = os.path.join(ARTIFACT_DIR, f"{run_id}_cache")
    os.makedirs(folder, exist_ok=True)
    return os.path.join(folder, f"{key}.joblib")


def _cached(path: str, compute):
    if os.path.exists(path):
        return joblib.load(path)
    value = compute()
    joblib.dump(value, path)
    return value


def _needs_pvalues(cfg: ExperimentConfig, name: str) -> bool:
    return name != "PMIME" and any(c.kind == "alpha" for c in cfg.criteria)


# ---------------------------------------
#  ONE REALIZATION
# ---------------------------------------
def run_realization(run_id: str, cfg: ExperimentConfig, system: SystemConfig, C: float,
                    realization: int) -> Outcome:
    seed = data_seed(cfg.seed, realization)
    label = f"{system.cell_label()} C={C:g} r={realization}"
    try:
        ts, graph = generate_system(system.system, system.K, C, system.n, seed,
                                    delta=system.delta, A=system.A, order=system.order)
        ts = standardize(ts)
    except CausalityError as e:
        agent_log(run_id, f"{label}: generation failed: {e}", agent="bench", level="ERROR")
        return Outcome(None, {}, {}, {"*": e.code})

    outcome = Outcome(graph.adjacency, {}, {}, {})
    for mc in cfg.measures_for(system):
        mid = measure_id(mc.name, mc.params)
        try:
            key = (label, system.order, seed, mc.name, sorted(mc.params.items()))
            path = _cache_path(run_id, *key)
            outcome.values[mid] = _cached(path, lambda: compute_measure(mc.name, ts, mc.params).values)
            if _needs_pvalues(cfg, mc.name):
                ppath = _cache_path(run_id, *key, "p", cfg.surrogates)
                outcome.pvalues[mid] = _cached(ppath, lambda: surrogate_pvalues(
                    mc.name, ts, mc.params, cfg.surrogates, seed, run_id=run_id))
        except CausalityError as e:
            outcome.errors[mid] = e.code
            agent_log(run_id, f"{label} {mid}: {e.code}: {e}", agent="bench", level="ERROR")
        except Exception as e:
            outcome.errors[mid] = type(e).__name__
            agent_log(run_id, f"{label} {mid}: unexpected error {e}\n{traceback.format_exc()}",
                      agent="bench", level="ERROR")
    agent_log(run_id, f"{label}: {len(outcome.values)} matrices, {len(outcome.errors)} failures", agent="bench")
    return outcome


# ---------------------------------------
#  CRITERIA -> ROWS
# ---------------------------------------
def _criteria_for(cfg: ExperimentConfig, name: str) -> List[Tuple[str, Optional[CriterionConfig]]]:
    """PMIME replaces every significance level with its own positive-value rule."""
    out = []
    for c in cfg.criteria:
        if c.kind == "alpha" and name == "PMIME":
            if ("pmime", None) not in out:
                out.append(("pmime", None))
        else:
            out.append((c.label, c))
    return out


def _edge_count(multiple: float, rho0: int, K: int) -> int:
    return int(min(max(round(multiple * rho0), 1), K * (K - 1)))


def scenario_rows(cfg: ExperimentConfig, system: SystemConfig, C: float,
                  outcomes: List[Outcome]) -> List[dict]:
    base = _scenario(system, C)
    rows = []
    for mc in cfg.measures_for(system):
        mid = measure_id(mc.name, mc.params)
        ok = [o for o in outcomes if mid in o.values]
        for label, crit in _criteria_for(cfg, mc.name):
            th = None
            if crit is not None and crit.kind == "magnitude" and ok:
                rho0 = int(round(np.mean([o.truth.sum() for o in ok])))
                rho = _edge_count(crit.value, rho0, system.K)
                th = threshold_from_density([o.values[mid] for o in ok], rho)
            for r, o in enumerate(outcomes):
                row = dict(base, measure=mid, criterion=label, realization=r, error="")
                error = o.errors.get("*") or o.errors.get(mid)
                if error:
                    rows.append(dict(row, **{k: np.nan for k in INDEX_FIELDS}, error=error))
                    continue
                values = o.values[mid]
                if crit is None:
                    est = binarize_pmime(values)
                elif crit.kind == "alpha":
                    est = binarize_significance(o.pvalues[mid], crit.value)
                elif crit.kind == "density":
                    est = binarize_density(values, _edge_count(crit.value, int(o.truth.sum()), system.K))
                else:
                    est = binarize_magnitude(values, th)
                report = evaluate(o.truth, est)
                rows.append(dict(row, **{k: v for k, v in report.as_row().items() if k in INDEX_FIELDS}))
    return rows


# ---------------------------------------
#  SWEEP
# ---------------------------------------
def run_experiment(cfg: ExperimentConfig, run_id: str = "bench") -> pd.DataFrame:
    """
    Runs the whole sweep and returns the result table.

    Scenario realizations run on up to ``cfg.workers`` threads; the table
    order does not depend on completion order.
    """
    agent_log(run_id, f"Experiment '{cfg.name}' started: {len(cfg.systems)} system cell(s), "
                      f"{cfg.realizations} realizations, M={cfg.surrogates}", agent="bench")
    jobs = [(s_idx, c_idx, r) for s_idx, system in enumerate(cfg.systems)
            for c_idx, _ in enumerate(system.C) for r in range(cfg.realizations)]

    def task(job):
        s_idx, c_idx, r = job
        system = cfg.systems[s_idx]
        return run_realization(run_id, cfg, system, system.C[c_idx], r)

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        outcomes = dict(zip(jobs, pool.map(task, jobs)))

    rows = []
    for s_idx, system in enumerate(cfg.systems):
        for c_idx, C in enumerate(system.C):
            cell = [outcomes[(s_idx, c_idx, r)] for r in range(cfg.realizations)]
            rows += scenario_rows(cfg, system, C, cell)
    table = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    agent_log(run_id, f"Experiment '{cfg.name}' finished: {len(table)} rows, "
                      f"{int((table['error'] != '').sum())} failed", agent="bench")
    return table


def write_results(table: pd.DataFrame, run_id: str, output_dir: Optional[str] = None) -> str:
    csv = table.to_csv(index=False, float_format="%.6f", na_rep="")
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        path = os.path.join(output_dir, "results.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(csv)
        return path
    return save_artifact(run_id, "results.csv", csv)


def read_results(path: str) -> pd.DataFrame:
    table = pd.read_csv(path, keep_default_na=True)
    table["error"] = table["error"].fillna("")
    return table


# ---------------------------------------
#  REPORTS
# ---------------------------------------
def _cell_label(row) -> str:
    extra = ""
    if row["system"] == "mackey_glass":
        extra = f",delta={row['delta']:g}"
    elif row["system"] == "neural_mass":
        extra = f",A={row['A']:g}"
    return f"{row['system']}(K={int(row['K'])},n={int(row['n'])}{extra})"


def _family(measure: str) -> str:
    return measure_family(measure.split("(", 1)[0])


def scenario_rankings(table: pd.DataFrame, seed: int = 0) -> pd.DataFrame:
    """Mean indices per (scenario, measure, criterion) with the ordinal MCC rank inside each scenario."""
    t = table.copy()
    t["cell"] = t.apply(_cell_label, axis=1)
    t["unit"] = t["measure"] + " | " + t["criterion"]
    # failed realizations count as chance-level recovery
    t["MCC"] = t["MCC"].fillna(0.0)
    means = (t.groupby(["cell", "C", "unit"], sort=True)[["MCC", "sens", "spec", "FM", "HD"]]
             .mean().reset_index())
    ranked = []
    for (_, _), group in means.groupby(["cell", "C"], sort=True):
        ranks = (rank_measures(dict(zip(group["unit"], group["MCC"])), seed)
                 if len(group) > 1 else {group["unit"].iloc[0]: 1})
        ranked.append(group.assign(rank=group["unit"].map(ranks)).sort_values("rank"))
    return pd.concat(ranked, ignore_index=True)


def report_rankings(table: pd.DataFrame, seed: int = 0, top: Optional[int] = None) -> str:
    """
    Plain-text report: per-scenario rankings by mean MCC, per-system score
    tables, and the overall score keeping each family's best parameterization.
    """
    if table.empty:
        raise ValueError("result table is empty")
    ranked = scenario_rankings(table, seed)
    lines = []
    for (cell, C), group in ranked.groupby(["cell", "C"], sort=True):
        shown = group if top is None else group.head(top)
        lines.append(f"== {cell} C={C:g} ==")
        lines.append(shown[["rank", "unit", "MCC", "sens", "spec", "FM", "HD"]]
                     .to_string(index=False, float_format=lambda v: f"{v:.3f}"))
        lines.append("")

    scores = score_table(ranked[["cell", "C", "unit", "rank"]])
    for cell, group in scores.per_cell.groupby("cell", sort=True):
        lines.append(f"== score {cell} (N={scores.N}) ==")
        lines.append(group.sort_values(["s", "unit"], ascending=[False, True])[["unit", "P", "s"]]
                     .to_string(index=False, float_format=lambda v: f"{v:.3f}"))
        lines.append("")

    overall = scores.overall.rename("s").reset_index()
    overall["family"] = overall["unit"].map(lambda u: _family(u.split(" | ")[0]))
    overall["class"] = overall["family"].map(measure_class)
    best = (overall.sort_values(["s", "unit"], ascending=[False, True])
            .groupby("family", sort=False).head(1).reset_index(drop=True))
    lines.append("== overall score (best parameterization per family) ==")
    lines.append(best[["family", "class", "unit", "s"]].to_string(index=False, float_format=lambda v: f"{v:.3f}"))
    return "\n".join(lines) + "\n"
