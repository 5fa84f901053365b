"""Staggered block-unitary evolution.

One cycle applies, for every axis, the even-parity sub-step followed by the
odd-parity one (U1 U0 per axis). Odd cycles apply the exact reverse sequence,
so consecutive cycles alternate U1 U0 and U0 U1 and the pair is accurate to
third order in theta.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .hamiltonian import (BlockUnitary, FieldConfig, PhysicalParams,
                          block_hamiltonians, block_unitary)
from .lattice import EVEN, ODD, Grid, WaveField, axis_take, pair_slices


class StaleCacheError(RuntimeError):
    """Sub-step called while the block cache does not match the fields."""


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear potential multiplier s(t), clamped to [0, s_max]."""

    t_s: int = 0
    alpha: float = 0.0
    s_max: float = 1.0
    cadence: int = 10

    def __post_init__(self):
        if self.cadence < 1:
            raise ValueError("schedule cadence must be >= 1")

    def __call__(self, t) -> float:
        return min(max(1.0 + self.alpha * (t - self.t_s), 0.0), self.s_max)


class EvolutionPlan:
    """Cached block unitaries for every (axis, parity) plus the cycle counter."""

    def __init__(self, grid: Grid, params: PhysicalParams,
                 fields: FieldConfig | None = None,
                 theta_override: np.ndarray | None = None):
        self.grid = grid
        self.params = params
        self.fields = fields if fields is not None else FieldConfig.free(grid)
        if self.fields.grid != grid:
            raise ValueError("field configuration does not match the grid")
        self.theta_override = None
        self.potential_scale = 1.0
        self.cycle = 0
        self._cache: dict | None = None
        self.set_theta_override(theta_override)

    def set_fields(self, fields: FieldConfig) -> None:
        if fields.grid != self.grid:
            raise ValueError("field configuration does not match the grid")
        self.fields = fields
        self._cache = None

    def set_theta_override(self, theta: np.ndarray | None) -> None:
        if theta is not None:
            theta = np.asarray(theta, dtype=np.float64)
            if theta.shape != self.grid.shape:
                raise ValueError(f"theta override has shape {theta.shape}, grid is {self.grid.shape}")
        self.theta_override = theta
        self._cache = None

    def set_potential_scale(self, s: float) -> None:
        if s != self.potential_scale:
            self.potential_scale = float(s)
            self._cache = None

    def invalidate(self) -> None:
        self._cache = None

    @property
    def cache_valid(self) -> bool:
        return self._cache is not None

    def ensure_cache(self) -> None:
        if self._cache is None:
            self._cache = {(axis, parity): self._build(axis, parity)
                           for axis in range(self.grid.ndim) for parity in (EVEN, ODD)}

    def blocks(self, axis: int, parity: int) -> BlockUnitary:
        if self._cache is None:
            raise StaleCacheError("block cache is stale; call ensure_cache() first")
        return self._cache[(axis, parity)]

    def _build(self, axis: int, parity: int) -> BlockUnitary:
        lead, partner = pair_slices(self.grid, axis, parity)
        if self.theta_override is None:
            theta = self.params.theta
        else:
            theta = self.theta_override[axis_take(self.theta_override, axis, lead)]
        bh = block_hamiltonians(self.fields, axis, parity, self.potential_scale)
        u = block_unitary(bh, theta)
        refl = self.fields.reflect
        mask = refl[axis_take(refl, axis, lead)] | refl[axis_take(refl, axis, partner)]
        entries = [np.broadcast_to(x, mask.shape).copy() for x in (u.u00, u.u01, u.u10, u.u11)]
        if mask.any():
            wall = -np.exp(-1j * np.broadcast_to(theta, mask.shape)[mask])
            entries[0][mask] = wall
            entries[3][mask] = wall
            entries[1][mask] = 0.0
            entries[2][mask] = 0.0
        # uniform blocks collapse to scalars, which is much faster for small grids
        if all(np.all(e == e.flat[0]) for e in entries):
            entries = [complex(e.flat[0]) for e in entries]
        return BlockUnitary(*entries)

    def sequence(self, cycle: int | None = None) -> list[tuple[int, int]]:
        """Sub-step order (axis, parity) for a cycle."""
        cycle = self.cycle if cycle is None else cycle
        seq = [(axis, parity) for axis in range(self.grid.ndim) for parity in (EVEN, ODD)]
        return seq if cycle % 2 == 0 else seq[::-1]


def substep(field: WaveField, plan: EvolutionPlan, axis: int, parity: int) -> None:
    """Apply the cached 2x2 blocks of one (axis, parity) partition in place."""
    u = plan.blocks(axis, parity)
    psi = field.psi
    even = axis_take(psi, axis, slice(0, None, 2))
    odd = axis_take(psi, axis, slice(1, None, 2))
    if parity == EVEN:
        a = psi[even].copy()
        b = psi[odd]
        psi[even] = u.u00 * a + u.u01 * b
        psi[odd] = u.u10 * a + u.u11 * b
    else:
        a = psi[odd]
        b = np.roll(psi[even], -1, axis=axis)
        new_b = u.u10 * a + u.u11 * b
        psi[odd] = u.u00 * a + u.u01 * b
        psi[even] = np.roll(new_b, 1, axis=axis)


def step(field: WaveField, plan: EvolutionPlan) -> None:
    """One full cycle; advances the plan's cycle counter."""
    plan.ensure_cache()
    for axis, parity in plan.sequence():
        substep(field, plan, axis, parity)
    plan.cycle += 1


def evolve(field: WaveField, plan: EvolutionPlan, n_cycles: int) -> None:
    for _ in range(n_cycles):
        step(field, plan)


@dataclass(frozen=True)
class Snapshot:
    t: int
    field: WaveField


def iter_run(field: WaveField, plan: EvolutionPlan, n_cycles: int, every: int = 1,
             schedule: Schedule | None = None) -> Iterator[Snapshot]:
    """Evolve ``n_cycles`` cycles, yielding a deep copy every ``every`` cycles.

    The first snapshot is the state before evolution. With a schedule the
    potential multiplier is refreshed every ``schedule.cadence`` cycles, using
    the plan's absolute cycle counter as time.
    """
    if n_cycles < 0:
        raise ValueError("n_cycles must be >= 0")
    if every < 1:
        raise ValueError("snapshot cadence must be >= 1")
    if schedule is not None:
        plan.set_potential_scale(schedule(plan.cycle))
    yield Snapshot(0, field.copy())
    for i in range(1, n_cycles + 1):
        advance(field, plan, schedule)
        if i % every == 0:
            yield Snapshot(i, field.copy())


def advance(field: WaveField, plan: EvolutionPlan, schedule: Schedule | None = None) -> None:
    """One cycle, refreshing the scheduled potential multiplier when it is due."""
    if schedule is not None and plan.cycle % schedule.cadence == 0:
        plan.set_potential_scale(schedule(plan.cycle))
    step(field, plan)


def run(field: WaveField, plan: EvolutionPlan, n_cycles: int, every: int = 1,
        schedule: Schedule | None = None) -> list[Snapshot]:
    return list(iter_run(field, plan, n_cycles, every, schedule))


def make_plan(grid: Grid, theta: float, fields: FieldConfig | None = None,
              theta_override: np.ndarray | None = None) -> EvolutionPlan:
    return EvolutionPlan(grid, PhysicalParams(theta), fields, theta_override)
