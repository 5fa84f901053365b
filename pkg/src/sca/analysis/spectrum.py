"""Radix-2 FFT and the spectra of I(t) series."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (int(n) - 1).bit_length()


def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft_radix2(x) -> np.ndarray:
    """Iterative decimation-in-time FFT; len(x) must be a power of two."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    if n == 0 or n & (n - 1):
        raise ValueError(f"radix-2 FFT needs a power-of-two length, got {n}")
    a = x[_bit_reverse(n)]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * math.pi * np.arange(half) / size)
        blocks = a.reshape(-1, size)
        even = blocks[:, :half].copy()
        odd = blocks[:, half:] * tw
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
        size *= 2
    return a


@dataclass(frozen=True)
class SpectrumReport:
    frequencies: np.ndarray  # rad/cycle
    magnitudes: np.ndarray
    length: int  # samples in the window before padding
    dc_removed: bool

    def fundamental(self, min_freq: float = 0.0) -> float:
        """Frequency of the largest magnitude above ``min_freq``, refined parabolically."""
        mask = self.frequencies > min_freq
        idx = np.flatnonzero(mask)
        j = idx[np.argmax(self.magnitudes[idx])]
        f = self.frequencies
        if 0 < j < len(f) - 1:
            y0, y1, y2 = self.magnitudes[j - 1:j + 2]
            den = y0 - 2 * y1 + y2
            if den != 0:
                return float(f[j] + 0.5 * (y0 - y2) / den * (f[1] - f[0]))
        return float(f[j])

    def to_dict(self) -> dict:
        return {"frequencies": self.frequencies.tolist(),
                "magnitudes": self.magnitudes.tolist(),
                "length": self.length, "dc_removed": self.dc_removed}


def fft_spectrum(series, t0: int = 0, t1: int | None = None,
                 max_freq: float | None = None, scale: float = 1.0) -> SpectrumReport:
    """Magnitude spectrum of ``series[t0:t1]`` after removing its mean.

    The window is zero-padded to a power of two. Frequencies are
    ``scale * 2 pi j / n_pad``; only bins up to ``max_freq`` are kept.
    """
    series = np.asarray(series, dtype=float)
    t1 = len(series) if t1 is None else t1
    if not 0 <= t0 < t1 <= len(series):
        raise ValueError(f"window [{t0}, {t1}) outside a series of length {len(series)}")
    w = series[t0:t1]
    w = w - w.mean()
    n_pad = next_pow2(len(w))
    spec = fft_radix2(np.concatenate([w, np.zeros(n_pad - len(w))]))
    half = n_pad // 2 + 1
    freqs = scale * 2 * math.pi * np.arange(half) / n_pad
    mags = np.abs(spec[:half])
    if max_freq is not None:
        keep = freqs <= max_freq
        freqs, mags = freqs[keep], mags[keep]
    return SpectrumReport(freqs, mags, len(w), True)


def imag_mass_spectrum(series, t0: int = 0, t1: int | None = None,
                       max_freq: float | None = None) -> SpectrumReport:
    """Spectrum of I(t) on the state-frequency axis.

    I(t) ~ |sin(omega t)| repeats every pi / omega, so a component of I at
    angular frequency f corresponds to a state frequency f / 2. This is the
    same convention as omega_i = pi / t_i for the minima intervals.
    """
    return fft_spectrum(series, t0, t1, max_freq, scale=0.5)
