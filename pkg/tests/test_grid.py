import json

import numpy as np
import pytest

from fraclap.grid import Grid, build_grid


def test_four_cells_on_symmetric_interval():
    g = build_grid(-1, 1, 4)
    np.testing.assert_allclose(g.nodes, [-0.5, 0.0, 0.5])
    assert g.h == 0.5


def test_boundary_distance():
    g = build_grid(-1, 1, 8)
    i = int(np.argmin(np.abs(g.nodes + 0.75)))
    assert g.nodes[i] == -0.75
    assert g.boundary_dist[i] == pytest.approx(0.25)


def test_unit_interval_nodes():
    np.testing.assert_allclose(build_grid(0, 1, 4).nodes, [0.25, 0.5, 0.75])


@pytest.mark.parametrize("a,b,n", [(0, 1, 3), (1, 1, 8), (2, 1, 8), (0, 1, 7.5)])
def test_rejects_degenerate(a, b, n):
    with pytest.raises(ValueError):
        build_grid(a, b, n)


@pytest.mark.parametrize("n", [4, 7, 64, 1000])
def test_quadrature_weight_sum(n):
    g = build_grid(-1.5, 2.0, n)
    assert g.h * g.size == pytest.approx(3.5 * (n - 1) / n, rel=1e-14)


def test_refinement_is_nested():
    g = build_grid(-1, 1, 16)
    f = g.refine()
    assert f.n == 32
    np.testing.assert_array_equal(f.nodes[g.coarse_index(f)], g.nodes)


def test_json_round_trip():
    g = build_grid(0.0, 2.0, 10)
    d = json.loads(g.to_json())
    assert set(d) == {"a", "b", "n", "h", "nodes"}
    assert len(d["nodes"]) == 9
    assert Grid.from_dict(d) == g


def test_immutable():
    g = build_grid(0, 1, 8)
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0
