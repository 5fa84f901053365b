"""Lattice geometry, wave-function storage and staggered cell pairing.

The lattice is always periodic. Axis 0 is X, axis 1 is Y, axis 2 is Z, and
amplitudes are stored row-major with the last axis fastest, so a 2D field is
indexed as ``psi[x, y]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EVEN = 0
ODD = 1


class LatticeError(ValueError):
    """Raised for an invalid grid, axis or parity."""


@dataclass(frozen=True)
class Grid:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not 1 <= len(sizes) <= 3:
            raise LatticeError(f"grid must have 1 to 3 axes, got {len(sizes)}")
        for axis, n in enumerate(sizes):
            if n < 4 or n % 2:
                raise LatticeError(
                    f"axis {axis} has {n} cells; every axis needs an even count >= 4")

    @classmethod
    def of(cls, *sizes: int) -> "Grid":
        return cls(tuple(sizes))

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.sizes))

    def coords(self) -> list[np.ndarray]:
        """Broadcastable integer coordinate arrays, one per axis."""
        return list(np.meshgrid(*[np.arange(n) for n in self.sizes],
                                indexing="ij", sparse=True))

    def check_axis(self, axis: int) -> None:
        if not 0 <= axis < self.ndim:
            raise LatticeError(f"axis {axis} out of range for a {self.ndim}D grid")


@dataclass
class WaveField:
    """Complex amplitude per cell (complex128, interleaved re/im)."""

    grid: Grid
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        psi = np.ascontiguousarray(self.psi, dtype=np.complex128)
        if psi.shape != self.grid.shape:
            raise LatticeError(
                f"amplitude shape {psi.shape} does not match grid {self.grid.shape}")
        self.psi = psi

    @classmethod
    def zeros(cls, grid: Grid) -> "WaveField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.psi.copy())

    def normalized(self) -> "WaveField":
        norm = np.sqrt(np.sum(np.abs(self.psi) ** 2))
        if norm == 0.0:
            raise LatticeError("cannot normalize an all-zero field")
        return WaveField(self.grid, self.psi / norm)

    def __len__(self) -> int:
        return self.psi.size


@dataclass(frozen=True)
class CellPairing:
    axis: int
    parity: int
    pairs: np.ndarray  # (n_pairs, 2) flat indices, leading cell first


def born_probability(field: WaveField) -> tuple[np.ndarray, float]:
    """Per-cell probability |psi|^2 and its total."""
    p = field.psi.real ** 2 + field.psi.imag ** 2
    return p, float(np.sum(p))


def pair_slices(grid: Grid, axis: int, parity: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis leading and partner coordinates for one parity.

    Leading cells are ``2j + parity``; partners are the next cell along the
    axis, wrapping around for the odd parity.
    """
    grid.check_axis(axis)
    if parity not in (EVEN, ODD):
        raise LatticeError(f"parity must be 0 (even) or 1 (odd), got {parity}")
    n = grid.sizes[axis]
    lead = np.arange(parity, n, 2)
    return lead, (lead + 1) % n


def pairings(grid: Grid, axis: int, parity: int) -> CellPairing:
    """All cell pairs for one (axis, parity) sub-step.

    Ordering is by line (the other axes, row-major) and then by pair index
    along the axis.
    """
    lead, partner = pair_slices(grid, axis, parity)
    other = [n for a, n in enumerate(grid.sizes) if a != axis]
    lines = np.indices(other).reshape(len(other), -1).T if other else np.zeros((1, 0), int)
    out = np.empty((len(lines) * len(lead), 2), dtype=np.int64)
    row = 0
    for line in lines:
        for p, q in zip(lead, partner):
            a = list(line)
            b = list(line)
            a.insert(axis, p)
            b.insert(axis, q)
            out[row] = (np.ravel_multi_index(a, grid.sizes),
                        np.ravel_multi_index(b, grid.sizes))
            row += 1
    return CellPairing(axis, parity, out)


def axis_take(a: np.ndarray, axis: int, index) -> tuple:
    """Index tuple selecting ``index`` along ``axis`` and everything elsewhere."""
    sl = [slice(None)] * a.ndim
    sl[axis] = index
    return tuple(sl)


def as_grid(sizes: int | Sequence[int] | Grid) -> Grid:
    if isinstance(sizes, Grid):
        return sizes
    if isinstance(sizes, (int, np.integer)):
        return Grid((int(sizes),))
    return Grid(tuple(sizes))
