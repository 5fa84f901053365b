"""Slit diffraction: detector slices and Fraunhofer reference curves."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..lattice import WaveField
from .theory import fraunhofer_narrow, fraunhofer_wide


class DiffractionError(ValueError):
    pass


@dataclass(frozen=True)
class DiffractionReport:
    y: np.ndarray
    intensity: np.ndarray
    sin_phi: np.ndarray
    narrow: np.ndarray
    wide: np.ndarray
    window: tuple[int, int]  # y-range [lo, hi) of the three central peaks
    column: int

    def minima(self) -> np.ndarray:
        """y positions of local minima of the observed intensity inside the window."""
        lo, hi = self.window
        seg = self.intensity[lo:hi]
        idx = np.flatnonzero((seg[1:-1] < seg[:-2]) & (seg[1:-1] <= seg[2:])) + 1
        return self.y[lo + idx]

    def centroid(self) -> float:
        w = self.intensity
        return float(np.sum(self.y * w) / np.sum(w))

    def fringe_centroid(self) -> float:
        """Intensity centroid of the heaviest fringe between consecutive minima in the window."""
        mins = self.minima().astype(int)
        if mins.size < 2:
            raise DiffractionError("fewer than two fringe minima inside the central window")
        w = self.intensity
        lobes = [slice(a, b + 1) for a, b in zip(mins[:-1], mins[1:])]
        best = max(lobes, key=lambda sl: float(w[sl].sum()))
        return float(np.sum(self.y[best] * w[best]) / np.sum(w[best]))

    def to_dict(self) -> dict:
        return {"column": self.column, "window": list(self.window),
                "y": self.y.tolist(), "intensity": self.intensity.tolist(),
                "sin_phi": self.sin_phi.tolist(), "narrow": self.narrow.tolist(),
                "wide": self.wide.tolist()}


def accumulate_column(snapshots: Iterable, column: int) -> np.ndarray:
    """Time-summed |psi(column, y)|^2 over snapshots of a 2D run."""
    total = None
    for s in snapshots:
        psi = s.field.psi if hasattr(s, "field") else (s.psi if isinstance(s, WaveField) else s)
        col = np.abs(psi[column, :]) ** 2
        total = col if total is None else total + col
    if total is None:
        raise DiffractionError("no snapshots to accumulate")
    return total


def sin_phi_geometry(y, y_mid: float, x_det: float, x_screen: float) -> np.ndarray:
    dy = np.asarray(y, dtype=float) - y_mid
    return dy / np.sqrt(dy ** 2 + (x_det - x_screen) ** 2)


def fraunhofer_reference(sin_phi, d: float, b: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized narrow- and wide-slit curves."""
    return fraunhofer_narrow(sin_phi, d, lam), fraunhofer_wide(sin_phi, d, b, lam)


def central_window(sin_phi: np.ndarray, d: float, lam: float) -> tuple[int, int]:
    """Index range spanning the three central cos^2 peaks (between the second zeros)."""
    edge = 1.5 * lam / d
    inside = np.flatnonzero(np.abs(sin_phi) <= edge)
    if inside.size == 0:
        raise DiffractionError("detector column too close to resolve the central peaks")
    return int(inside[0]), int(inside[-1]) + 1


def diffraction_slice(data, column: int, y_mid: float, x_screen: float,
                      d: float, b: float, lam: float) -> DiffractionReport:
    """Intensity along ``column`` with both Fraunhofer curves normalized to it.

    ``data`` is a 2D WaveField (instantaneous |psi|^2) or a 1D array of
    already accumulated column intensities. The reference curves are scaled
    so that each carries the observed weight over the three central peaks.
    """
    if isinstance(data, WaveField):
        if data.grid.ndim != 2:
            raise DiffractionError("diffraction needs a 2D field")
        intensity = np.abs(data.psi[column, :]) ** 2
    else:
        intensity = np.asarray(data, dtype=float)
        if intensity.ndim != 1:
            raise DiffractionError("expected a 1D column intensity")
    if not np.any(intensity > 0):
        raise DiffractionError(f"column {column} is empty; the wave has not reached it")
    y = np.arange(intensity.size, dtype=float)
    s = sin_phi_geometry(y, y_mid, column, x_screen)
    narrow, wide = fraunhofer_reference(s, d, b, lam)
    lo, hi = central_window(s, d, lam)
    obs = float(intensity[lo:hi].sum())
    narrow = narrow * obs / float(narrow[lo:hi].sum())
    wide = wide * obs / float(wide[lo:hi].sum())
    return DiffractionReport(y, intensity, s, narrow, wide, (lo, hi), column)


def cos2_zeros(report: DiffractionReport, d: float, lam: float) -> np.ndarray:
    """y positions (interpolated) of the narrow-slit zeros inside the window."""
    lo, hi = report.window
    s = report.sin_phi[lo:hi]
    y = report.y[lo:hi]
    targets = [(m + 0.5) * lam / d for m in range(-2, 2)]
    out = [float(np.interp(t, s, y)) for t in targets if s[0] <= t <= s[-1]]
    return np.array(out)


def fringe_spacing(report: DiffractionReport, d: float, lam: float) -> float:
    """Local fringe spacing in cells near the pattern center."""
    z = cos2_zeros(report, d, lam)
    return float(np.mean(np.diff(z))) if z.size > 1 else math.nan


def peak_ratio(report: DiffractionReport, d: float, lam: float) -> dict:
    """Observed, narrow and wide values at the three central peak positions."""
    lo, hi = report.window
    s = report.sin_phi[lo:hi]
    y = report.y[lo:hi]
    out = {}
    for m in (-1, 0, 1):
        yp = float(np.interp(m * lam / d, s, y))
        half = max(1, int(0.25 * fringe_spacing(report, d, lam)))
        j = int(round(yp))
        sl = slice(max(j - half, 0), j + half + 1)
        out[m] = {"y": yp,
                  "observed": float(report.intensity[sl].max()),
                  "narrow": float(np.interp(yp, report.y, report.narrow)),
                  "wide": float(np.interp(yp, report.y, report.wide))}
    return out


def envelope_check(report: DiffractionReport, d: float, lam: float) -> dict:
    """Peak values with all three curves normalized across the three central peaks.

    Each curve is scaled so its values at m = -1, 0, 1 sum to the observed sum;
    ``bounded`` tells whether every observed peak lies between narrow and wide.
    """
    peaks = peak_ratio(report, d, lam)
    sums = {c: sum(peaks[m][c] for m in peaks) for c in ("observed", "narrow", "wide")}
    if min(sums.values()) <= 0:
        raise DiffractionError("a curve vanishes at the central peaks")
    out = {}
    ok = True
    for m, row in peaks.items():
        vals = {c: row[c] * sums["observed"] / sums[c] for c in ("observed", "narrow", "wide")}
        lo, hi = sorted((vals["narrow"], vals["wide"]))
        inside = lo - 1e-12 <= vals["observed"] <= hi + 1e-12
        ok &= inside
        out[m] = {**vals, "y": row["y"], "bounded": bool(inside)}
    return {"peaks": out, "bounded": bool(ok),
            "side_ratio": 0.5 * (peaks[-1]["observed"] + peaks[1]["observed"]) / peaks[0]["observed"]}
