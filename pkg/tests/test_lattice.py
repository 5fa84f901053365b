import numpy as np
import pytest
from hypothesis import given, strategies as st

from sca import EVEN, ODD, Grid, WaveField, born_probability, pairings
from sca.lattice import LatticeError, as_grid, pair_slices


def as_pairs(cp):
    return [tuple(int(i) for i in row) for row in cp.pairs]


def test_even_pairs_on_8_cells():
    assert as_pairs(pairings(Grid((8,)), 0, EVEN)) == [(0, 1), (2, 3), (4, 5), (6, 7)]


def test_odd_pairs_wrap_around():
    assert as_pairs(pairings(Grid((8,)), 0, ODD)) == [(1, 2), (3, 4), (5, 6), (7, 0)]
    assert as_pairs(pairings(Grid((4,)), 0, ODD)) == [(1, 2), (3, 0)]


@pytest.mark.parametrize("sizes", [(3,), (2,), (6, 5), (4, 4, 7), (4, 4, 4, 4), ()])
def test_invalid_grids(sizes):
    with pytest.raises(LatticeError):
        Grid(sizes)


def test_bad_axis_and_parity():
    g = Grid((4, 6))
    with pytest.raises(LatticeError):
        pairings(g, 2, EVEN)
    with pytest.raises(LatticeError):
        pair_slices(g, 0, 2)


@given(st.lists(st.sampled_from([4, 6, 8]), min_size=1, max_size=3),
       st.integers(0, 2), st.integers(0, 1))
def test_pairings_partition_every_cell(sizes, axis, parity):
    g = Grid(tuple(sizes))
    axis = axis % g.ndim
    pairs = pairings(g, axis, parity).pairs
    assert sorted(pairs.ravel().tolist()) == list(range(g.n_cells))
    # partners are neighbors along the axis
    for p, q in pairs:
        a = np.array(np.unravel_index(p, g.shape))
        b = np.array(np.unravel_index(q, g.shape))
        d = (b - a) % np.array(g.shape)
        assert d[axis] == 1 and d.sum() == 1


def test_born_probability():
    g = Grid((8,))
    f = WaveField(g, np.full(8, 1 / np.sqrt(8)))
    p, total = born_probability(f)
    assert np.allclose(p, 1 / 8) and abs(total - 1) < 1e-15
    f = WaveField.zeros(g)
    f.psi[3] = 1.0
    p, total = born_probability(f)
    assert total == 1.0 and p[3] == 1.0 and p.sum() == 1.0


def test_wavefield_shape_check_and_normalize():
    with pytest.raises(LatticeError):
        WaveField(Grid((4,)), np.zeros(6))
    with pytest.raises(LatticeError):
        WaveField.zeros(Grid((4,))).normalized()
    f = WaveField(Grid((4,)), np.array([3, 4, 0, 0])).normalized()
    assert abs(born_probability(f)[1] - 1) < 1e-15


def test_as_grid():
    assert as_grid(8) == Grid((8,))
    assert as_grid([4, 6]).shape == (4, 6)
    g = Grid.of(4, 4)
    assert as_grid(g) is g
