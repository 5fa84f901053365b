"""Dense small-lattice ground truth for checking the sweep evolution.

Everything here builds explicit N x N matrices in the same row-major
vectorization the lattice uses, so ``op @ field.psi.ravel()`` is directly
comparable with a sweep result.
"""
from __future__ import annotations

import numpy as np

from .evolution import EvolutionPlan
from .hamiltonian import FieldConfig, PhysicalParams
from .lattice import EVEN, ODD, Grid, pairings

MAX_DENSE_CELLS = 4096


class OracleSizeError(ValueError):
    pass


def _check_size(n: int) -> None:
    if n > MAX_DENSE_CELLS:
        raise OracleSizeError(f"dense operators are limited to {MAX_DENSE_CELLS} cells, got {n}")


def dense_hamiltonian(grid: Grid, params: PhysicalParams | None = None,
                      fields: FieldConfig | None = None) -> np.ndarray:
    """Full discrete Hamiltonian in units of delta_m.

    Each axis contributes the -1, 2, -1 stencil through both partitions; block
    entries follow the same leading-cell sampling as the sweep. Reflector cells
    keep their diagonal but lose every coupling.
    """
    _check_size(grid.n_cells)
    fields = fields if fields is not None else FieldConfig.free(grid)
    n = grid.n_cells
    H = np.zeros((n, n), dtype=np.complex128)
    v = fields.v.ravel()
    g = fields.g.reshape(n, grid.ndim)
    refl = fields.reflect.ravel()
    for axis in range(grid.ndim):
        for parity in (EVEN, ODD):
            for p, q in pairings(grid, axis, parity).pairs:
                c = 1.0 + (v[p] + g[p] @ g[p]) / (2.0 * grid.ndim)
                d = -1.0 - 2j * g[p, axis]
                H[p, p] += c
                H[q, q] += c
                if not (refl[p] or refl[q]):
                    H[p, q] += d
                    H[q, p] += np.conj(d)
    return H


def hermitian_eig(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigh(H)


def exact_step(H: np.ndarray, theta) -> np.ndarray:
    """exp(-i theta H) via H = Q diag(lam) Q^H."""
    lam, Q = hermitian_eig(H)
    return (Q * np.exp(-1j * theta * lam)) @ Q.conj().T


def kron_operator(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor acts on axis 0 (the slowest index)."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    _check_size(out.shape[0])
    return out


def substep_operator(plan: EvolutionPlan, axis: int, parity: int) -> np.ndarray:
    """Dense matrix of one cached sub-step, assembled pair by pair."""
    grid = plan.grid
    _check_size(grid.n_cells)
    plan.ensure_cache()
    u = plan.blocks(axis, parity)
    half = list(grid.shape)
    half[axis] //= 2
    ents = [np.broadcast_to(x, half) for x in (u.u00, u.u01, u.u10, u.u11)]
    U = np.zeros((grid.n_cells, grid.n_cells), dtype=np.complex128)
    for p, q in pairings(grid, axis, parity).pairs:
        idx = list(np.unravel_index(p, grid.shape))
        idx[axis] //= 2
        j = tuple(idx)
        U[p, p], U[p, q], U[q, p], U[q, q] = (e[j] for e in ents)
    return U


def cycle_operator(plan: EvolutionPlan, cycle: int) -> np.ndarray:
    U = np.eye(plan.grid.n_cells, dtype=np.complex128)
    for axis, parity in plan.sequence(cycle):
        U = substep_operator(plan, axis, parity) @ U
    return U


def free_1d_step(n: int, theta: float) -> np.ndarray:
    """U1 U0 for an n-cell free ring, built from the circular shift S."""
    C = np.exp(-1j * theta) * np.array([[np.cos(theta), 1j * np.sin(theta)],
                                        [1j * np.sin(theta), np.cos(theta)]])
    U0 = np.kron(np.eye(n // 2), C)
    S = np.roll(np.eye(n), 1, axis=0)
    U1 = S.T @ U0 @ S
    return U1 @ U0


def grossing_step(theta: float, n_cells: int) -> np.ndarray:
    """First-order operator I - i theta (H - 2I): local but not unitary."""
    _check_size(n_cells)
    H = dense_hamiltonian(Grid((n_cells,)))
    return np.eye(n_cells) - 1j * theta * (H - 2.0 * np.eye(n_cells))


def operator_norm_error(A: np.ndarray, B: np.ndarray, rtol: float = 1e-6,
                        max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of A - B by power iteration on (A-B)^H (A-B)."""
    if A.shape != B.shape:
        raise ValueError("operands differ in shape")
    D = A - B
    M = D.conj().T @ D
    if not np.any(M):
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(M.shape[0]) + 1j * rng.standard_normal(M.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = M @ x
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return 0.0
        x = y / new
        if abs(new - lam) <= rtol * new:
            lam = new
            break
        lam = new
    return float(np.sqrt(lam))
