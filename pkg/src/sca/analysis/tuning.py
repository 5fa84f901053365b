"""Force-constant tuning for stationary oscillator states."""
from __future__ import annotations

import math

import numpy as np

from ..evolution import iter_run, make_plan
from ..hamiltonian import FieldConfig
from ..lattice import Grid
from ..waveforms import harmonic_state

GOLDEN = (math.sqrt(5) - 1) / 2


class TuningError(RuntimeError):
    def __init__(self, message: str, samples: list[tuple[float, float]]):
        super().__init__(message)
        self.samples = samples


def harmonic_potential(grid: Grid, theta: float, kappa: float, x_c: float) -> np.ndarray:
    """v(x) in units of delta_m for V = kappa/2 (x - x_c)^2 (kappa in absolute units).

    Blocks sample v at their leading cell, which shifts the effective
    potential by half a cell; the painted center compensates for that.
    """
    if grid.ndim != 1:
        raise ValueError("harmonic_potential is one-dimensional")
    x = np.arange(grid.sizes[0], dtype=float)
    return 0.5 * kappa * (x - (x_c - 0.5)) ** 2 / theta


def stationarity_residual(grid: Grid, theta: float, rho: float, n: int, kappa: float,
                          x_c: float | None = None, window: int | None = None,
                          every: int = 8) -> float:
    """max over the window of sum_x | |psi(x,t)|^2 - |psi(x,0)|^2 |.

    The default window is pi / omega, the breathing period of a mismatched state.
    """
    x_c = grid.sizes[0] / 2 if x_c is None else x_c
    fields = FieldConfig.free(grid)
    fields.v[...] = harmonic_potential(grid, theta, kappa, x_c)
    plan = make_plan(grid, theta, fields)
    field = harmonic_state(grid, x_c, rho, n)
    p0 = np.abs(field.psi) ** 2
    if window is None:
        window = int(math.ceil(math.pi / math.sqrt(2 * theta * kappa)))
    r = 0.0
    for snap in iter_run(field, plan, window, every):
        r = max(r, float(np.sum(np.abs(np.abs(snap.field.psi) ** 2 - p0))))
    return r


def tune_kappa(grid: Grid, theta: float, rho: float, n: int, guess: float,
               x_c: float | None = None, rtol: float = 2e-3, n_coarse: int = 7,
               every: int = 8) -> float:
    """Golden-section search for the kappa that keeps harmonic_state(n) stationary.

    The bracket is [guess/2, 2 guess]. A coarse log-spaced scan checks that the
    residual is unimodal there first; otherwise TuningError carries the samples.
    """
    if guess <= 0:
        raise ValueError("initial kappa guess must be positive")
    # one window for every kappa keeps the objective comparable across the bracket
    window = int(math.ceil(math.pi / math.sqrt(2 * theta * guess)))

    def R(kappa: float) -> float:
        return stationarity_residual(grid, theta, rho, n, kappa, x_c, window, every)

    grid_k = guess * np.logspace(-1, 1, n_coarse, base=2.0)
    samples = [(float(k), R(float(k))) for k in grid_k]
    vals = np.array([r for _, r in samples])
    j = int(np.argmin(vals))
    diffs = np.diff(vals)
    if not (np.all(diffs[:j] < 0) and np.all(diffs[j:] > 0)):
        raise TuningError("stationarity residual is not unimodal in the bracket", samples)
    if j == 0 or j == len(vals) - 1:
        raise TuningError("residual minimum lies on the bracket edge", samples)
    a, b = float(grid_k[j - 1]), float(grid_k[j + 1])
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = R(c), R(d)
    while (b - a) > rtol * (a + b) / 2:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = R(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = R(d)
    return (a + b) / 2
