# app/measures/frequency.py
"""
VAR-spectral causality: PDC, GPDC, DTF, dDTF, bivariate GGC and restricted GPDC.

Per-frequency arrays are indexed ``[f, i, j]`` = value for X_i -> X_j, and
collapsed to one number per pair with ``band_aggregate``.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from app.errors import EmptyBand, InvalidParameter, SingularAtFrequency
from app.measures.matrix import CausalityMatrix, check_pair, driver_rows
from app.timeseries import _as_matrix
from app.var_engine import (
    DEFAULT_GRID,
    SpectralModel,
    fit_restricted_var,
    fit_var_ols,
    frequency_grid,
    spectral_transforms,
)

SPECTRAL_KINDS = ("PDC", "GPDC", "DTF", "dDTF")


@dataclass(frozen=True)
class BandSpec:
    """Band edges as fractions of the Nyquist frequency."""

    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower < self.upper <= 1.0:
            raise InvalidParameter(f"band {self.name}: need 0 <= lower < upper <= 1")

    def contains(self, fraction: np.ndarray) -> np.ndarray:
        inside = (fraction >= self.lower) & (fraction < self.upper)
        if self.upper >= 1.0:
            inside |= np.isclose(fraction, 1.0)
        return inside


# 0.5-4, 4-8, 8-13, 13-30 and 30-50 Hz at 100 Hz sampling
BANDS: Dict[str, BandSpec] = {
    "delta": BandSpec("delta", 0.01, 0.08),
    "theta": BandSpec("theta", 0.08, 0.16),
    "alpha": BandSpec("alpha", 0.16, 0.26),
    "beta": BandSpec("beta", 0.26, 0.60),
    "gamma": BandSpec("gamma", 0.60, 1.0),
}
FULL_BAND = BandSpec("all", 0.0, 1.0)


def get_band(band) -> BandSpec:
    if band is None:
        return FULL_BAND
    if isinstance(band, BandSpec):
        return band
    if band in BANDS:
        return BANDS[band]
    if band == FULL_BAND.name:
        return FULL_BAND
    raise InvalidParameter(f"unknown band '{band}', expected one of {list(BANDS)} or 'all'")


def band_aggregate(values: np.ndarray, band, freqs: Optional[np.ndarray] = None):
    """
    Mean over grid frequencies inside the band.

    Args:
        values: per-frequency values, frequency on axis 0
        band: BandSpec, band name or None for the whole grid
        freqs: grid in cycles/sample; defaults to frequency_grid(len(values))

    Returns:
        float for 1-D input, otherwise the mean array over axis 0
    """
    band = get_band(band)
    values = np.asarray(values)
    freqs = frequency_grid(values.shape[0]) if freqs is None else np.asarray(freqs)
    inside = band.contains(freqs / 0.5)
    if not inside.any():
        raise EmptyBand(f"no grid frequency falls inside band {band.name} [{band.lower}, {band.upper})")
    out = values[inside].mean(axis=0)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------
#  PER-FREQUENCY MEASURES (all pairs at once)
# ---------------------------------------
def _pdc_all(abar: np.ndarray, scale: Optional[np.ndarray] = None) -> np.ndarray:
    mag = np.abs(abar)                             # [f, j, i]
    if scale is not None:
        mag = mag / scale[None, :, None]
    den = np.sqrt((mag ** 2).sum(axis=1))          # [f, i], column norms
    return np.transpose(mag / den[:, None, :], (0, 2, 1))


def _dtf_all(transfer: np.ndarray) -> np.ndarray:
    mag = np.abs(transfer)                         # [f, j, i]
    den = np.sqrt((mag ** 2).sum(axis=2))          # [f, j], row norms
    return np.transpose(mag / den[:, :, None], (0, 2, 1))


def _ddtf_all(spectral: SpectralModel) -> np.ndarray:
    mag = np.abs(spectral.transfer)
    eta = mag / np.sqrt((mag ** 2).sum(axis=(0, 2)))[None, :, None]
    try:
        P = np.linalg.inv(spectral.spectrum)
    except np.linalg.LinAlgError as e:
        raise SingularAtFrequency(f"spectral matrix not invertible: {e}")
    diag = np.real(np.diagonal(P, axis1=1, axis2=2))   # [f, k]
    kappa = np.abs(P) / np.sqrt(np.abs(diag[:, :, None] * diag[:, None, :]))
    return np.transpose(eta * kappa, (0, 2, 1))


def spectral_all(spectral: SpectralModel, kind: str, keep_diagonal: bool = False) -> np.ndarray:
    """(F, K, K) array of ``kind`` for every ordered pair; the diagonal is NaN unless kept."""
    if kind == "PDC":
        out = _pdc_all(spectral.abar)
    elif kind == "GPDC":
        out = _pdc_all(spectral.abar, np.sqrt(np.diag(spectral.sigma)))
    elif kind == "DTF":
        out = _dtf_all(spectral.transfer)
    elif kind == "dDTF":
        out = _ddtf_all(spectral)
    else:
        raise InvalidParameter(f"unknown spectral measure '{kind}', expected one of {SPECTRAL_KINDS}")
    out = np.clip(out, 0.0, 1.0)
    if keep_diagonal:
        return out
    idx = np.arange(out.shape[1])
    out[:, idx, idx] = np.nan
    return out


def spectral_measure(spectral: SpectralModel, kind: str, i: int, j: int) -> np.ndarray:
    check_pair(spectral.abar.shape[1], i, j)
    return spectral_all(spectral, kind)[:, i, j]


def spectral_matrix(ts, kind: str, p: int, band=None, F: int = DEFAULT_GRID,
                    drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    spectral = spectral_transforms(fit_var_ols(ts, p), F)
    values = band_aggregate(spectral_all(spectral, kind), band, spectral.freqs)
    return _restrict(CausalityMatrix(values, kind, {"p": p, "band": get_band(band).name}), drivers)


def _restrict(matrix: CausalityMatrix, drivers) -> CausalityMatrix:
    if drivers is None:
        return matrix
    values = np.full_like(matrix.values, np.nan)
    rows = driver_rows(matrix.K, drivers)
    values[rows] = matrix.values[rows]
    return CausalityMatrix(values, matrix.measure, matrix.params)


# ---------------------------------------
#  GEWEKE AND RESTRICTED GPDC
# ---------------------------------------
def ggc(ts, i: int, j: int, p: int, F: int = DEFAULT_GRID) -> np.ndarray:
    """Bivariate Geweke spectral causality f_{i->j}(f) on the grid, >= 0."""
    data = _as_matrix(ts)
    check_pair(data.shape[1], i, j)
    spectral = spectral_transforms(fit_var_ols(data[:, [i, j]], p), F)
    sigma = spectral.sigma          # index 0 = X_i, 1 = X_j
    S_jj = np.real(spectral.spectrum[:, 1, 1])
    partial = sigma[0, 0] - sigma[0, 1] ** 2 / sigma[1, 1]
    explained = partial * np.abs(spectral.transfer[:, 1, 0]) ** 2
    return np.log(S_jj / (S_jj - explained))


def ggc_matrix(ts, p: int, band=None, F: int = DEFAULT_GRID,
               drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    data = _as_matrix(ts)
    K = data.shape[1]
    values = np.full((K, K), np.nan)
    freqs = frequency_grid(F)
    for i in driver_rows(K, drivers):
        for j in range(K):
            if i != j:
                values[i, j] = band_aggregate(ggc(data, i, j, p, F), band, freqs)
    return CausalityMatrix(values, "GGC", {"p": p, "band": get_band(band).name})


def rgpdc(ts, p_max: int, band=None, F: int = DEFAULT_GRID,
          drivers: Optional[Iterable[int]] = None) -> CausalityMatrix:
    """GPDC of the restricted VAR; exactly 0 where the driver has no selected lag."""
    model = fit_restricted_var(ts, p_max)
    spectral = spectral_transforms(model, F)
    values = band_aggregate(spectral_all(spectral, "GPDC"), band, spectral.freqs)
    return _restrict(CausalityMatrix(values, "RGPDC", {"p": p_max, "band": get_band(band).name}), drivers)
