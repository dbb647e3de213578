import math

import numpy as np
import pytest

from interplab.grids import GridFunction, GridMismatchError, LogGrid


def test_quadrature_of_constant_matches_interval_length(grid):
    total = grid.quadrature(np.ones(grid.n_nodes))
    assert abs(total - (grid.t_max - grid.t_min)) <= 1e-12 * grid.t_max


def test_nodes_strictly_increasing(grid):
    assert (np.diff(grid.nodes) > 0).all()
    assert grid.nodes[0] == grid.t_min
    assert grid.nodes[-1] == grid.t_max


@pytest.mark.parametrize("bad", [
    dict(t_min=0.0, t_max=1.0, n_nodes=4),
    dict(t_min=2.0, t_max=1.0, n_nodes=4),
    dict(t_min=1e-3, t_max=1.0, n_nodes=1),
])
def test_grid_validation(bad):
    with pytest.raises(ValueError):
        LogGrid(**bad)


def test_octave_grid_shift_structure():
    g = LogGrid.octave(2.0 ** -10, 12, per_octave=8)
    # doubling a node lands on the node 8 indices later
    assert np.allclose(2.0 * g.nodes[:-8], g.nodes[8:], rtol=1e-13)


def test_gridfunction_rejects_bad_values(grid):
    with pytest.raises(ValueError):
        GridFunction(grid, np.full(grid.n_nodes, -1.0))
    bad = np.ones(grid.n_nodes)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        GridFunction(grid, bad)
    with pytest.raises(GridMismatchError):
        GridFunction(grid, np.ones(7))


def test_gridfunction_immutable(grid):
    f = GridFunction.constant(grid, 1.0)
    with pytest.raises(AttributeError):
        f.values = np.zeros(grid.n_nodes)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_infinity_absorbing_under_addition(grid):
    f = GridFunction.constant(grid, 1.0)
    vals = np.ones(grid.n_nodes)
    vals[5] = np.inf
    g = GridFunction(grid, vals)
    assert np.isinf((f + g).values[5])
    # 0 * inf = 0 convention under scaling
    assert g.scale(0.0).values[5] == 0.0


def test_addition_requires_matching_window(grid):
    f = GridFunction.constant(grid, 1.0).truncate(0, 1.0)
    g = GridFunction.constant(grid, 1.0).truncate(0, 2.0)
    with pytest.raises(GridMismatchError):
        f + g


def test_indicator_integral_exact(grid):
    # integral of chi_(0,tau) over (0,t) is min(t,tau), independent of nodes
    tau = 0.37
    f = GridFunction.indicator(grid, 0.0, tau)
    ts = np.array([1e-7, 1e-3, 0.1, tau, 1.0, 50.0])
    assert np.allclose(f.integral_to(ts), np.minimum(ts, tau), atol=1e-15)


def test_linear_function_integral(grid):
    # f(t) = t on its grid support integrates to (t^2 - t_min^2)/2 plus the
    # frozen left tail t_min * t_min
    f = GridFunction(grid, grid.nodes.copy())
    t = 1.0
    exact = (t ** 2 - grid.t_min ** 2) / 2 + grid.t_min ** 2
    assert abs(f.integral_to(t) - exact) <= 1e-12


def test_truncate_empty_window_raises(grid):
    f = GridFunction.constant(grid, 1.0)
    with pytest.raises(ValueError):
        f.truncate(2.0, 1.0)


def test_csv_roundtrip_with_infinity(tmp_path, coarse_grid):
    vals = np.ones(coarse_grid.n_nodes)
    vals[0] = np.inf
    f = GridFunction(coarse_grid, vals)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    text = path.read_text()
    assert ",inf" in text.splitlines()[1]
    g = GridFunction.from_csv(path)
    assert np.isinf(g.values[0])
    assert np.allclose(g.grid.nodes, coarse_grid.nodes, rtol=1e-12)


def test_extension_semantics(grid):
    f = GridFunction(grid, grid.nodes.copy())
    assert f.extension_at(grid.t_min / 10) == grid.t_min
    assert f.extension_at(grid.t_max * 10) == grid.t_max
    # windowed call is zero outside the support
    g = f.truncate(1.0, 2.0)
    assert g(0.5) == 0.0 and g(1.5) > 0.0
