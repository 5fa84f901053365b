"""Physical parameters, field configuration and the 2x2 block operators.

Units: hbar = tau = a = 1, so the kinetic energy scale delta_m equals theta and
the particle mass is 1 / (2 theta). Scalar potentials ``v`` are given in units
of delta_m (v = V / delta_m) and vector potentials ``g`` are dimensionless
(g = q a A / hbar).

Blocks act on a cell pair (leading cell, partner) along one axis and sample all
fields at the leading cell. The discrete Coulomb-gauge condition on ``g`` is not
enforced; ``g`` is used as given.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Grid, LatticeError, axis_take, pair_slices


@dataclass(frozen=True)
class PhysicalParams:
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi / 2:
            raise ValueError(f"theta must lie in (0, pi/2), got {self.theta!r}")

    @property
    def delta_m(self) -> float:
        return self.theta

    @property
    def mass(self) -> float:
        return 1.0 / (2.0 * self.theta)

    def potential_units(self, energy):
        """Convert an absolute lattice energy to units of delta_m."""
        return np.asarray(energy) / self.theta


@dataclass
class FieldConfig:
    grid: Grid
    v: np.ndarray = None
    g: np.ndarray = None
    reflect: np.ndarray = None

    def __post_init__(self):
        shape = self.grid.shape
        if self.v is None:
            self.v = np.zeros(shape)
        if self.g is None:
            self.g = np.zeros(shape + (self.grid.ndim,))
        if self.reflect is None:
            self.reflect = np.zeros(shape, dtype=bool)
        self.v = np.asarray(self.v, dtype=np.float64)
        self.g = np.asarray(self.g, dtype=np.float64)
        self.reflect = np.asarray(self.reflect, dtype=bool)
        if self.v.shape != shape:
            raise LatticeError(f"v has shape {self.v.shape}, grid is {shape}")
        if self.g.shape != shape + (self.grid.ndim,):
            raise LatticeError(f"g has shape {self.g.shape}, expected {shape + (self.grid.ndim,)}")
        if self.reflect.shape != shape:
            raise LatticeError(f"reflect has shape {self.reflect.shape}, grid is {shape}")

    @classmethod
    def free(cls, grid: Grid) -> "FieldConfig":
        return cls(grid)

    def copy(self) -> "FieldConfig":
        return FieldConfig(self.grid, self.v.copy(), self.g.copy(), self.reflect.copy())

    def with_potential_scale(self, s: float) -> "FieldConfig":
        return FieldConfig(self.grid, self.v * s, self.g, self.reflect)

    def digest(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(repr(self.grid.sizes).encode())
        for arr in (self.v, self.g, self.reflect):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class BlockHamiltonian:
    """Hermitian block [[c, d], [conj(d), c]] in units of delta_m."""

    c: float | np.ndarray
    d: complex | np.ndarray

    def matrix(self) -> np.ndarray:
        c, d = complex(self.c), complex(self.d)
        return np.array([[c, d], [d.conjugate(), c]])


@dataclass(frozen=True)
class BlockUnitary:
    u00: complex | np.ndarray
    u01: complex | np.ndarray
    u10: complex | np.ndarray
    u11: complex | np.ndarray

    def matrix(self) -> np.ndarray:
        return np.array([[complex(self.u00), complex(self.u01)],
                         [complex(self.u10), complex(self.u11)]])


def _coefficients(v, g_sq, g_axis, ndim: int):
    c = 1.0 + (v + g_sq) / (2.0 * ndim)
    d = -1.0 - 2j * g_axis
    return c, d


def block_hamiltonian(pair: tuple[int, int], axis: int, params: PhysicalParams,
                      fields: FieldConfig) -> BlockHamiltonian:
    """Block Hamiltonian for one pair given as flat cell indices."""
    grid = fields.grid
    grid.check_axis(axis)
    lead = np.unravel_index(pair[0], grid.shape)
    g = fields.g[lead]
    c, d = _coefficients(fields.v[lead], float(np.dot(g, g)), g[axis], grid.ndim)
    return BlockHamiltonian(float(c), complex(d))


def block_hamiltonians(fields: FieldConfig, axis: int, parity: int,
                       potential_scale: float = 1.0) -> BlockHamiltonian:
    """Vectorized block Hamiltonians for every pair of one sub-step.

    Arrays have the grid shape with ``axis`` halved; entry ``j`` along the axis
    belongs to the pair led by cell ``2j + parity``.
    """
    lead, _ = pair_slices(fields.grid, axis, parity)
    sel = axis_take(fields.v, axis, lead)
    v = fields.v[sel] * potential_scale
    g = fields.g[sel]
    c, d = _coefficients(v, np.sum(g * g, axis=-1), g[..., axis], fields.grid.ndim)
    return BlockHamiltonian(c, d)


def block_unitary(bh: BlockHamiltonian, theta) -> BlockUnitary:
    """Exact exp(-i theta B) for B = c I + Re(d) sx - Im(d) sy.

    Works elementwise on arrays; ``theta`` may be a scalar or an array
    congruent with the block arrays.
    """
    c = np.asarray(bh.c, dtype=np.float64)
    d = np.asarray(bh.d, dtype=np.complex128)
    theta = np.asarray(theta, dtype=np.float64)
    r = np.abs(d)
    phase = np.exp(-1j * theta * c)
    cos = phase * np.cos(theta * r)
    # sin(theta r) / r, finite at r = 0
    s = -1j * phase * theta * np.sinc(theta * r / np.pi)
    u = BlockUnitary(cos, s * d, s * np.conj(d), cos)
    if np.ndim(u.u00) == 0:
        return BlockUnitary(*(complex(x) for x in (u.u00, u.u01, u.u10, u.u11)))
    return u


def reflective_block(theta: float = 0.0) -> BlockUnitary:
    """Decoupling block -exp(-i theta) I used for pairs touching a reflector.

    The exp(-i theta) factor is the same global prefactor every free block
    carries, which keeps walls Dirichlet-like (node on the reflector cell) and
    preserves the |psi_n| = |psi_(L-n)| well symmetry. ``theta=0`` gives -I.
    """
    z = -complex(np.exp(-1j * theta))
    return BlockUnitary(z, 0j, 0j, z)


def free_block_unitary(theta: float) -> BlockUnitary:
    """exp(-i theta) [[cos, i sin], [i sin, cos]]."""
    ph = np.exp(-1j * theta)
    return BlockUnitary(ph * math.cos(theta), ph * 1j * math.sin(theta),
                        ph * 1j * math.sin(theta), ph * math.cos(theta))
