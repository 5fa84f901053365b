"""Heatmaps as binary PPM (P6) images."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..hamiltonian import FieldConfig

BACKDROP = np.array([200, 230, 250], dtype=float)  # light blue
WHITE = np.array([255, 255, 255], dtype=float)
BLUE = np.array([40, 70, 200], dtype=float)
RED = np.array([200, 40, 40], dtype=float)
GRAY = np.array([150, 150, 150], dtype=float)


def _ramp(t: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)[..., None]
    return lo + t * (hi - lo)


def colorize(psi: np.ndarray, mode: str = "prob") -> np.ndarray:
    """RGB floats for a 2D field; 1D fields are drawn as a single row."""
    psi = np.atleast_2d(psi)
    if mode == "prob":
        p = np.abs(psi) ** 2
        top = p.max()
        # square root stretches faint structure, as a qualitative map should
        return _ramp(np.sqrt(p / top) if top > 0 else p, BACKDROP, WHITE)
    if mode == "real":
        r = psi.real
        top = np.abs(r).max()
        t = r / top if top > 0 else r
        rgb = np.empty(r.shape + (3,))
        pos = t >= 0
        rgb[pos] = _ramp(t[pos], WHITE, RED)
        rgb[~pos] = _ramp(-t[~pos], WHITE, BLUE)
        return rgb
    raise ValueError(f"unknown render mode {mode!r}")


def overlay(rgb: np.ndarray, fields: FieldConfig | None) -> np.ndarray:
    if fields is None:
        return rgb
    out = rgb.copy()
    v = np.atleast_2d(fields.v)
    out[v != 0] = 0.5 * out[v != 0] + 0.5 * GRAY
    out[np.atleast_2d(fields.reflect)] = 0.0
    return out


def to_image(psi: np.ndarray, mode: str = "prob", fields: FieldConfig | None = None) -> np.ndarray:
    """uint8 image with the first axis horizontal and the second axis pointing up."""
    rgb = overlay(colorize(psi, mode), fields)
    # row-major storage has axis 0 as x; images want rows = y from the top
    img = np.transpose(rgb, (1, 0, 2))[::-1]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def encode_ppm(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only 8-bit PPM is supported")
    pixels = data[len(data) - w * h * 3:]
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w, 3)


def write_ppm(path, psi: np.ndarray, mode: str = "prob", fields: FieldConfig | None = None) -> None:
    Path(path).write_bytes(encode_ppm(to_image(psi, mode, fields)))
