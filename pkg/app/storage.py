# app/storage.py
import os
import shutil
from typing import Optional, Union

import numpy as np
import pandas as pd

from app.errors import DimensionMismatch, InvalidParameter
from app.utils.run_logger import logger

ARTIFACT_DIR = os.environ.get("ARTIFACT_DIR", "artifacts")
DATA_DIR = os.environ.get("DATA_DIR", "data")


def ensure_dirs():
    """Create necessary directories if they don't exist"""
    os.makedirs(ARTIFACT_DIR, exist_ok=True)
    os.makedirs(DATA_DIR, exist_ok=True)


def save_artifact(run_id: str, name: str, content: Union[str, bytes]) -> str:
    """
    Save artifact to disk.

    Args:
        run_id: Unique run identifier
        name: Artifact filename
        content: Content to save (string or bytes)

    Returns:
        Path to saved artifact
    """
    ensure_dirs()
    path = get_artifact_path(run_id, name)

    try:
        if isinstance(content, bytes):
            with open(path, "wb") as f:
                f.write(content)
        else:
            with open(path, "w", encoding="utf-8") as f:
                f.write(content)
        return path
    except Exception as e:
        raise IOError(f"Failed to save artifact {name}: {e}")


def get_artifact_path(run_id: str, name: str) -> str:
    """Get path to artifact file"""
    return os.path.join(ARTIFACT_DIR, f"{run_id}_{name}")


def artifact_exists(run_id: str, name: str) -> bool:
    """Check if artifact exists"""
    return os.path.exists(get_artifact_path(run_id, name))


def list_artifacts(run_id: str) -> list:
    """List all artifacts for a run"""
    ensure_dirs()
    prefix = f"{run_id}_"
    try:
        return sorted(f for f in os.listdir(ARTIFACT_DIR) if f.startswith(prefix))
    except Exception as e:
        logger.warning("cannot list artifacts of %s: %s", run_id, e)
        return []


def cleanup_run_artifacts(run_id: str):
    """Delete all artifacts for a specific run"""
    for artifact in list_artifacts(run_id):
        try:
            os.remove(os.path.join(ARTIFACT_DIR, artifact))
        except Exception as e:
            logger.warning("cannot delete %s: %s", artifact, e)


def get_disk_usage() -> dict:
    """Get disk usage statistics for artifact directory"""
    try:
        total, used, free = shutil.disk_usage(ARTIFACT_DIR)
        return {
            "total_gb": total / (1024**3),
            "used_gb": used / (1024**3),
            "free_gb": free / (1024**3),
            "percent_used": (used / total) * 100,
        }
    except Exception as e:
        return {"error": str(e)}


# ---------------------------------------
#  K x K MATRIX TEXT FORMATS
# ---------------------------------------
def write_matrix(path: str, values: np.ndarray) -> str:
    """Row-major, space-delimited; the unused diagonal is written as nan."""
    values = np.asarray(values, dtype=float)
    np.savetxt(path, values, fmt="%.17g", delimiter=" ")
    return path


def read_matrix(path: str) -> np.ndarray:
    try:
        values = pd.read_csv(path, sep=r"\s+", header=None, float_precision="round_trip").to_numpy(dtype=float)
    except (OSError, ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidParameter(f"{path}: not a readable numeric matrix ({e})") from e
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DimensionMismatch(f"{path}: expected a square matrix, got shape {values.shape}")
    return values


def write_adjacency(path: str, adjacency: np.ndarray) -> str:
    """K lines of K space-separated 0/1."""
    np.savetxt(path, np.asarray(adjacency, dtype=int), fmt="%d", delimiter=" ")
    return path


def read_adjacency(path: str) -> np.ndarray:
    return read_matrix(path).astype(int)


def sidecar_path(path: str, suffix: str = "adj") -> str:
    """data.txt -> data.adj.txt"""
    root, ext = os.path.splitext(path)
    return f"{root}.{suffix}{ext or '.txt'}"


def matrix_path(out_dir: Optional[str], name: str) -> str:
    out_dir = out_dir or DATA_DIR
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)
