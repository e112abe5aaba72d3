import math

import numpy as np


def clean_for_json(x):
    """Make run state JSON-safe: numpy scalars/arrays to Python, NaN/Inf to None."""
    if isinstance(x, dict):
        return {str(k): clean_for_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean_for_json(v) for v in x]
    if isinstance(x, np.ndarray):
        return clean_for_json(x.tolist())
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x
