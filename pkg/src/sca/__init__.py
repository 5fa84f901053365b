"""Schrödinger cellular automata: unitary staggered block evolution on lattices."""
from .evolution import (EvolutionPlan, Schedule, Snapshot, advance, evolve, iter_run, make_plan,
                        run, step, substep)
from .hamiltonian import (BlockHamiltonian, BlockUnitary, FieldConfig, PhysicalParams,
                          block_hamiltonian, block_unitary, reflective_block)
from .lattice import EVEN, ODD, CellPairing, Grid, WaveField, born_probability, pairings
from .waveforms import box_state, gaussian_packet, harmonic_state, plane_wave

__version__ = "0.1.0"
