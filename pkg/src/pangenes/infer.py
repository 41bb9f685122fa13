"""Least-squares estimation of (theta, rho, g_c) from a gene frequency spectrum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .geneprocess import ModelParams
from .stats import SpectrumCounts
from .theory import spectrum


class FitError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FitResult:
    theta_hat: float
    rho_hat: float
    gc_hat: float
    sse: float
    residuals: np.ndarray
    predicted: np.ndarray
    clamped: bool = False
    weighted: bool = False

    @property
    def gc_rounded(self) -> int:
        return int(round(self.gc_hat))

    def rows(self):
        return [("theta", self.theta_hat), ("rho", self.rho_hat),
                ("g_c", self.gc_hat), ("g_c_rounded", self.gc_rounded),
                ("sse", self.sse), ("clamped", int(self.clamped))]


def predicted_spectrum(n: int, params: ModelParams) -> np.ndarray:
    """Expected spectrum including ``g_c`` core genes in class ``n``."""
    if params.rho <= 0:
        raise ValueError("rho must be > 0")
    out = spectrum(n, params.theta, params.rho)
    out[-1] += params.g_c
    return out


def _profile(y, w, rho):
    """Optimal ``(theta, g_c, sse, clamped)`` at fixed ``rho``."""
    n = len(y)
    f = spectrum(n, 1.0, rho)
    fs, ys, ws = f[:-1], y[:-1], w[:-1]
    theta = np.dot(ws * fs, ys) / np.dot(ws * fs, fs)
    gc = y[-1] - theta * f[-1]
    clamped = gc < 0
    if clamped:
        gc = 0.0
        theta = np.dot(w * f, y) / np.dot(w * f, f)
    resid = y - theta * f
    resid[-1] -= gc
    return theta, gc, float(np.dot(w, resid**2)), clamped


def fit_params(observed, rho_min: float = 0.01, rho_max: float = 100.0,
               grid_points: int = 64, refine_tol: float = 1e-6,
               weighted: bool = False) -> FitResult:
    """Fit ``theta``, ``rho`` and ``g_c`` to a spectrum that includes core genes.

    ``theta`` and ``g_c`` enter linearly and are profiled out for each
    ``rho``; ``rho`` is found on a log grid and refined with a bounded
    scalar minimizer in ``log rho`` between the grid neighbours of the best
    point.  ``weighted`` uses ``1/max(G_k, 1)`` weights.

    ``observed`` is a :class:`SpectrumCounts` or any sequence of class
    values ``G_1..G_n`` (non-integer expected spectra are fine).
    """
    counts = observed.counts if isinstance(observed, SpectrumCounts) else observed
    y = np.asarray(counts, dtype=float)
    if y.ndim != 1 or not np.all(np.isfinite(y)) or np.any(y < 0):
        raise ValueError("spectrum must be a finite nonnegative vector")
    n = len(y)
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0 < rho_min < rho_max:
        raise ValueError("need 0 < rho_min < rho_max")
    if grid_points < 3:
        raise ValueError("need at least 3 grid points")
    if np.count_nonzero(y) < 2:
        raise FitError("spectrum needs at least two nonzero classes")
    w = 1.0 / np.maximum(y, 1.0) if weighted else np.ones(n)

    def objective(log_rho):
        return _profile(y, w, np.exp(log_rho))[2]

    grid = np.linspace(np.log(rho_min), np.log(rho_max), grid_points)
    values = np.array([objective(x) for x in grid])
    best = int(np.argmin(values))  # first minimum, i.e. smallest rho on ties
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid_points - 1)]
    res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                   options={"xatol": refine_tol})
    log_rho = res.x if res.fun <= values[best] else grid[best]
    rho = float(np.exp(log_rho))
    theta, gc, sse, clamped = _profile(y, w, rho)
    if not theta > 0:
        raise FitError("no positive theta fits this spectrum")
    pred = predicted_spectrum(n, ModelParams(theta, rho, 0))
    pred[-1] += gc
    return FitResult(float(theta), rho, float(gc), sse, y - pred, pred,
                     bool(clamped), weighted)
