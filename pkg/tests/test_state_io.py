import numpy as np
import pytest

from core.errors import ConstraintError
from propagator.grid import SpectralGrid
from propagator.state import CSV_MAX_POINTS, SpectralState, read_state


def random_state(grid, alpha=None, shift=()):
    rng = np.random.default_rng(11)
    parts = [rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape) for _ in range(2)]
    return SpectralState(grid, parts[0], parts[1], alpha, shift)


@pytest.mark.parametrize("alpha, shift", [(None, ()), (0.25, (3.5,))])
def test_binary_container_is_exact(tmp_path, small_grid, alpha, shift):
    state = random_state(small_grid, alpha, shift)
    path = tmp_path / "state.kgss"
    state.to_binary(path)
    back = read_state(path)
    assert back.grid == small_grid
    assert back.alpha == alpha
    assert back.momentum_shift == (shift or (0.0,))
    np.testing.assert_array_equal(back.phi1, state.phi1)
    np.testing.assert_array_equal(back.phi2, state.phi2)


def test_binary_container_two_dimensional(tmp_path):
    grid = SpectralGrid((4.0, 8.0), (16, 32))
    state = random_state(grid, -0.5, (1.0, -2.0))
    path = tmp_path / "state2d.kgss"
    state.to_binary(path)
    back = read_state(path)
    assert back.grid.points == (16, 32)
    assert back.momentum_shift == (1.0, -2.0)
    np.testing.assert_array_equal(back.phi2, state.phi2)


def test_read_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.kgss"
    path.write_bytes(b"NOPE" + bytes(200))
    with pytest.raises(ConstraintError):
        read_state(path)


def test_csv_columns(tmp_path):
    grid = SpectralGrid((2.0,), (8,))
    state = random_state(grid)
    path = tmp_path / "state.csv"
    assert state.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,re1,im1,re2,im2"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 0], grid.x_axis(0))
    np.testing.assert_array_equal(data[:, 3] + 1j * data[:, 4], state.phi2)


def test_csv_skipped_for_large_grids(tmp_path):
    grid = SpectralGrid((1.0, 1.0), (512, 256))
    assert grid.points[0] * grid.points[1] > CSV_MAX_POINTS
    state = SpectralState(grid, np.zeros(grid.shape, complex), np.zeros(grid.shape, complex))
    assert not state.to_csv(tmp_path / "big.csv")
    assert not (tmp_path / "big.csv").exists()
