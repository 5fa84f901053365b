"""Measurements on evolved states: velocities, I(t), oscillation periods."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks, medfilt

from ..evolution import EvolutionPlan, Schedule, Snapshot, iter_run
from ..lattice import WaveField
from .spectrum import imag_mass_spectrum
from .theory import group_velocity_theory, phase_velocity_theory


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class VelocityReport:
    k: float
    theta: float
    v_p: float | None  # None when k == 0
    v_g: float
    v_p_theory: float | None = None
    v_g_theory: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _psi(s) -> np.ndarray:
    if isinstance(s, Snapshot):
        s = s.field
    if isinstance(s, WaveField):
        return s.psi
    return np.asarray(s)


def _times(snapshots) -> list[int] | None:
    if snapshots and isinstance(snapshots[0], Snapshot):
        return [s.t for s in snapshots]
    return None


def wavenumber_1d(psi: np.ndarray) -> float:
    """Dominant wavenumber in [-pi, pi) from the nearest-neighbour phase gradient."""
    return float(np.angle(np.sum(np.conj(psi) * np.roll(psi, -1))))


def measure_phase_velocity(snapshots: Sequence, k: float | None = None,
                           max_envelope_cv: float = 0.2) -> float:
    """Phase velocity from the phase drift between states two cycles apart.

    ``snapshots`` are consecutive cycles of a 1D plane-wave evolution (Snapshot,
    WaveField or arrays). For each pair (t, t+2) the argument of
    sum(conj(psi_t) psi_{t+2}) is -2 omega; half of it, divided by k, is the
    per-cycle phase displacement. Pairs are averaged.
    """
    psis = [_psi(s) for s in snapshots]
    if len(psis) < 3:
        raise MeasurementError("need at least three consecutive snapshots")
    times = _times(list(snapshots))
    if times is not None and any(b - a != 1 for a, b in zip(times, times[1:])):
        raise MeasurementError("snapshots must be one cycle apart")
    for p in psis:
        mag = np.abs(p)
        mean = mag.mean()
        if mean == 0 or mag.std() / mean > max_envelope_cv:
            raise MeasurementError("input is not a plane wave (envelope varies across the lattice)")
    if k is None:
        k = wavenumber_1d(psis[0])
    k = (k + math.pi) % (2 * math.pi) - math.pi
    if abs(k) < 1e-12:
        raise MeasurementError("phase velocity is undefined for k = 0")
    phases = [np.angle(np.vdot(a, b)) for a, b in zip(psis[:-2], psis[2:])]
    omega = -float(np.mean(phases)) / 2.0
    return omega / k


def _centroid(prob: np.ndarray, center_guess: float, half_width: float) -> float:
    n = prob.size
    offs = np.arange(-math.ceil(half_width), math.ceil(half_width) + 1)
    idx = (int(round(center_guess)) + offs) % n
    w = prob[idx]
    if w.sum() == 0:
        raise MeasurementError("empty centroid window")
    return float(round(center_guess) + np.sum(offs * w) / w.sum())


def packet_center(psi: np.ndarray) -> tuple[float, float]:
    """Windowed centroid of |psi|^2 on a periodic 1D lattice; returns (center, sigma_est)."""
    prob = np.abs(psi) ** 2
    n = prob.size
    peak = int(np.argmax(prob))
    # circular second moment around the peak
    offs = (np.arange(n) - peak + n // 2) % n - n // 2
    w = prob / prob.sum()
    mu = float(np.sum(offs * w))
    # |psi|^2 of a Gaussian packet has width sigma / sqrt(2)
    sigma_est = math.sqrt(max(float(np.sum((offs - mu) ** 2 * w)), 0.25)) * math.sqrt(2)
    c = _centroid(prob, peak, 3 * sigma_est)
    return c % n, sigma_est


def measure_group_velocity(snapshots: Sequence, times: Sequence[int] | None = None) -> float:
    """Envelope velocity from the first and last snapshot, in cells per cycle.

    Intermediate snapshots are used to unwrap the periodic displacement.
    """
    snapshots = list(snapshots)
    if len(snapshots) < 2:
        raise MeasurementError("need at least two snapshots")
    times = list(times) if times is not None else _times(snapshots)
    if times is None:
        raise MeasurementError("snapshot times are required")
    psis = [_psi(s) for s in snapshots]
    n = psis[0].size
    centers = [packet_center(p)[0] for p in psis]
    total = 0.0
    for a, b in zip(centers, centers[1:]):
        d = (b - a + n / 2) % n - n / 2
        if abs(abs(d) - n / 2) < 1.0:
            raise MeasurementError("packet displacement between snapshots is ambiguous (about N/2)")
        total += d
    elapsed = times[-1] - times[0]
    if elapsed <= 0:
        raise MeasurementError("snapshots must span a positive time")
    return total / elapsed


def imag_mass(psi: np.ndarray) -> float:
    return float(np.sum(np.abs(psi.imag)))


def imag_mass_series(snapshots: Sequence) -> np.ndarray:
    """I(t) = sum_x |Im psi(x, t)| for each snapshot."""
    return np.array([imag_mass(_psi(s)) for s in snapshots])


def imag_mass_run(field: WaveField, plan: EvolutionPlan, n_cycles: int,
                  schedule: Schedule | None = None) -> np.ndarray:
    """Evolve and record I(t) every cycle, t = 0..n_cycles."""
    return np.array([imag_mass(s.field.psi)
                     for s in iter_run(field, plan, n_cycles, 1, schedule)])


def find_minima(series, smooth: int = 5, min_separation: int = 1,
                prominence: float = 0.0) -> np.ndarray:
    """Local minima after median smoothing.

    Plateaus count once, at their middle. ``min_separation`` (samples) and
    ``prominence`` (fraction of the smoothed series' range) suppress ripple.
    """
    x = np.asarray(series, dtype=float)
    if smooth > 1:
        x = medfilt(x, smooth)
    span = float(x.max() - x.min()) if x.size else 0.0
    idx, _ = find_peaks(-x, distance=max(int(min_separation), 1),
                        prominence=prominence * span if prominence > 0 else None)
    return idx.astype(int)


def period_from_minima(series, smooth: int = 5, min_separation: int = 1,
                       prominence: float = 0.0) -> list[tuple[float, float]]:
    """Pairs (T_i, omega_i): T_i is the time of the i-th interval end, omega_i = pi / t_i."""
    mins = find_minima(series, smooth, min_separation, prominence)
    if mins.size < 3:
        raise MeasurementError(f"only {mins.size} minima found; the series is too polluted to time")
    intervals = np.diff(mins).astype(float)
    ends = mins[1:].astype(float)
    return [(float(T), math.pi / t) for T, t in zip(ends, intervals)]


def mean_period_from_minima(series, smooth: int = 5, min_separation: int = 1,
                            prominence: float = 0.0) -> float:
    """Oscillation period 2 pi / omega using the median minima interval."""
    pairs = period_from_minima(series, smooth, min_separation, prominence)
    omega = float(np.median([w for _, w in pairs]))
    return 2 * math.pi / omega


def period_from_spectrum(series, t0: int = 0, t1: int | None = None,
                         min_freq: float = 0.0) -> float:
    """Oscillation period from the fundamental of the I(t) spectrum."""
    omega = imag_mass_spectrum(series, t0, t1).fundamental(min_freq)
    if omega <= 0:
        raise MeasurementError("no positive fundamental in the spectrum")
    return 2 * math.pi / omega


def velocity_report(theta: float, k: float, v_p: float | None, v_g: float) -> VelocityReport:
    vpt = None if abs((k + math.pi) % (2 * math.pi) - math.pi) < 1e-12 else phase_velocity_theory(theta, k)
    return VelocityReport(k=k, theta=theta, v_p=v_p, v_g=v_g,
                          v_p_theory=vpt, v_g_theory=group_velocity_theory(theta, k))
