# app/utils/run_logger.py
import glob
import logging
import os
import threading
import time
from datetime import datetime
from typing import List, Optional

ARTIFACT_DIR = os.environ.get("ARTIFACT_DIR", "artifacts")
os.makedirs(ARTIFACT_DIR, exist_ok=True)

logger = logging.getLogger("causalnet")

_log_lock = threading.Lock()
_LEVELS = {"DEBUG": logging.DEBUG, "INFO": logging.INFO, "WARNING": logging.WARNING, "ERROR": logging.ERROR}


def _log_path(run_id: str, stage: str) -> str:
    return os.path.join(ARTIFACT_DIR, f"{run_id}_{stage}_log.txt")


def agent_log(run_id: str, message: str, agent: str = "system", level: str = "INFO"):
    """
    Append a line to artifacts/<run_id>_<agent>_log.txt and mirror it to the
    ``causalnet.<agent>`` logger.

    Args:
        run_id: Run identifier (``system`` for library calls outside a run)
        message: Log message
        agent: Stage name (systems, var_engine, measures, significance, bench, cli, orchestrator)
        level: DEBUG, INFO, WARNING or ERROR
    """
    run_id = run_id or "system"
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    logger.getChild(agent).log(_LEVELS.get(level, logging.INFO), "[%s] %s", run_id, message)

    path = _log_path(run_id, agent)
    try:
        with _log_lock:
            os.makedirs(ARTIFACT_DIR, exist_ok=True)
            with open(path, "a", encoding="utf-8") as f:
                f.write(f"[{timestamp}] [{level}] [{agent}] {message}\n")
    except OSError as e:
        logger.error("cannot write %s: %s", path, e)


def run_log_files(run_id: str) -> List[str]:
    return sorted(glob.glob(os.path.join(ARTIFACT_DIR, f"{glob.escape(run_id)}_*_log.txt")))


def get_log_tail(run_id: str, agent: Optional[str] = None, lines: int = 200) -> str:
    """
    Last ``lines`` log lines of a run. Without ``agent`` every stage log of the
    run is merged in timestamp order.
    """
    paths = [_log_path(run_id, agent)] if agent else run_log_files(run_id)
    merged = []
    for path in paths:
        if not os.path.exists(path):
            continue
        try:
            with open(path, "r", encoding="utf-8") as f:
                merged.extend(f.readlines())
        except OSError as e:
            merged.append(f"[error reading {os.path.basename(path)}: {e}]\n")
    # lines start with "[YYYY-mm-dd HH:MM:SS]" so a stable sort keeps per-file order
    merged.sort(key=lambda line: line[:21])
    return "".join(merged[-lines:])


def clear_old_logs(days: int = 90) -> int:
    """Delete log files older than ``days``; returns the number removed."""
    cutoff = time.time() - days * 24 * 60 * 60
    removed = 0
    for path in glob.glob(os.path.join(ARTIFACT_DIR, "*_log.txt")):
        try:
            if os.path.getmtime(path) < cutoff:
                os.remove(path)
                removed += 1
        except OSError as e:
            logger.warning("cannot remove %s: %s", path, e)
    return removed
