"""Initial states. Every constructor returns a field normalized to total probability 1.

Per-axis parameters accept a scalar (used for every axis) or a sequence with
one value per axis; multi-dimensional states are separable products.
"""
from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from .lattice import Grid, WaveField

MAX_HERMITE_ORDER = 64


class WaveformError(ValueError):
    pass


class UndersampledWarning(UserWarning):
    pass


def _per_axis(value, ndim: int, name: str) -> list[float]:
    if np.ndim(value) == 0:
        return [float(value)] * ndim
    value = [float(x) for x in value]
    if len(value) != ndim:
        raise WaveformError(f"{name} needs {ndim} values, got {len(value)}")
    return value


def _normalize(grid: Grid, psi: np.ndarray) -> WaveField:
    norm = math.sqrt(float(np.sum(psi.real ** 2 + psi.imag ** 2)))
    if norm == 0.0 or not math.isfinite(norm):
        raise WaveformError("waveform is identically zero on this grid")
    return WaveField(grid, psi / norm)


def plane_wave(grid: Grid, k, x0=0.0) -> WaveField:
    """exp(i k.(x - x0)) with magnitude 1/sqrt(N) per cell."""
    ks = _per_axis(k, grid.ndim, "k")
    x0s = _per_axis(x0, grid.ndim, "x0")
    phase = sum(kk * (x - c) for kk, x, c in zip(ks, grid.coords(), x0s))
    psi = np.exp(1j * np.broadcast_to(phase, grid.shape))
    return WaveField(grid, psi / math.sqrt(grid.n_cells))


def gaussian_packet(grid: Grid, k, x0, sigma) -> WaveField:
    """Separable Gaussian envelope times a plane wave, centered at ``x0``.

    ``sigma`` may be ``inf`` on an axis to get a plane wave along it.
    """
    ks = _per_axis(k, grid.ndim, "k")
    x0s = _per_axis(x0, grid.ndim, "x0")
    sigmas = _per_axis(sigma, grid.ndim, "sigma")
    if any(s <= 0 for s in sigmas):
        raise WaveformError("sigma must be positive")
    psi = np.ones(grid.shape, dtype=np.complex128)
    for kk, x, c, s in zip(ks, grid.coords(), x0s, sigmas):
        u = x - c
        envelope = np.ones_like(u, dtype=float) if math.isinf(s) else np.exp(-0.5 * (u / s) ** 2)
        psi = psi * (envelope * np.exp(1j * kk * u))
    field = _normalize(grid, psi)
    peak = float(np.max(np.abs(field.psi) ** 2))
    if peak > 0.1:
        warnings.warn(f"packet is undersampled: {peak:.1%} of the probability sits in one cell",
                      UndersampledWarning, stacklevel=2)
    return field


def _box_1d(x: np.ndarray, x_c: float, L: int, n: int) -> np.ndarray:
    n = int(n) % (2 * L)  # sampling alias: n and 2L + n give identical cells
    u = x - x_c + L / 2.0
    inside = (u > 0) & (u < L)
    vals = np.where(inside, np.sin(n * math.pi / L * u), 0.0)
    return vals


def box_state(grid: Grid, x_c, L, n) -> WaveField:
    """Infinite-well eigenstate sin(n pi (x - x_c + L/2) / L) inside the well.

    Cells with ``x_c - L/2 < x < x_c + L/2`` are inside; all others are zero.
    """
    ndim = grid.ndim
    x_cs = _per_axis(x_c, ndim, "x_c")
    Ls = [int(v) for v in _per_axis(L, ndim, "L")]
    ns = [int(v) for v in _per_axis(n, ndim, "n")]
    psi = np.ones(grid.shape)
    for x, c, L_, n_ in zip(grid.coords(), x_cs, Ls, ns):
        if n_ < 0:
            raise WaveformError("box state number must be >= 0")
        if L_ < 1 or c - L_ / 2.0 < -1 or c + L_ / 2.0 > x.size:
            raise WaveformError(f"well of length {L_} centered at {c} does not fit the grid")
        offset_integral = float(c - L_ / 2.0).is_integer()
        if n_ % L_ == 0 and offset_integral:
            raise WaveformError(f"box state n={n_} vanishes on every cell of a well with L={L_}")
        psi = psi * _box_1d(x, c, L_, n_)
    return _normalize(grid, psi.astype(np.complex128))


def hermite(n: int, xi: np.ndarray) -> np.ndarray:
    """Physicists' Hermite polynomial by the three-term recurrence."""
    if n < 0:
        raise WaveformError("Hermite order must be >= 0")
    if n > MAX_HERMITE_ORDER:
        raise WaveformError(f"Hermite order {n} exceeds the validated range (<= {MAX_HERMITE_ORDER})")
    h_prev = np.ones_like(xi, dtype=float)
    if n == 0:
        return h_prev
    h = 2.0 * xi
    for m in range(1, n):
        h_prev, h = h, 2.0 * xi * h - 2.0 * m * h_prev
    return h


def harmonic_state(grid: Grid, x_c, rho, n) -> WaveField:
    """Oscillator eigenstate H_n(xi) exp(-xi^2/2) with xi = (x - x_c) / rho."""
    ndim = grid.ndim
    x_cs = _per_axis(x_c, ndim, "x_c")
    rhos = _per_axis(rho, ndim, "rho")
    ns = [int(v) for v in _per_axis(n, ndim, "n")]
    if any(r <= 0 for r in rhos):
        raise WaveformError("rho must be positive")
    psi = np.ones(grid.shape)
    for x, c, r, n_ in zip(grid.coords(), x_cs, rhos, ns):
        xi = (x - c) / r
        psi = psi * (hermite(n_, xi) * np.exp(-0.5 * xi ** 2))
    if not np.all(np.isfinite(psi)):
        raise WaveformError("Hermite recurrence overflowed")
    return _normalize(grid, psi.astype(np.complex128))


def superpose(*fields: WaveField, weights: Sequence[complex] | None = None) -> WaveField:
    weights = weights or [1.0] * len(fields)
    psi = sum(w * f.psi for w, f in zip(weights, fields))
    return _normalize(fields[0].grid, psi)
