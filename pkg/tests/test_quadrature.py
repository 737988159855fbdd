import math

import numpy as np
import pytest

from gammalab.quadrature import geometric_edges, gauss_legendre, graded_edges, integrate_pieces


def test_gauss_legendre_on_unit_interval():
    nodes, weights = gauss_legendre(5)
    assert weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all((nodes > 0.0) & (nodes < 1.0))
    # 5점 규칙은 9차 다항식까지 정확
    assert float(weights @ nodes ** 9) == pytest.approx(0.1, abs=1e-15)


def test_graded_edges_halve_towards_lower_end():
    assert graded_edges(0.0, 1.0, 0.1, 10) == [0.0, 0.0625, 0.125, 0.25, 0.5, 1.0]
    assert len(graded_edges(0.0, 1.0, 0.0, 3)) == 5


def test_geometric_edges_ratio():
    edges = geometric_edges(1.0, 10.0)
    assert edges[0] == 1.0 and edges[-1] == 10.0
    assert max(b / a for a, b in zip(edges, edges[1:])) <= 2.0 + 1e-12
    assert geometric_edges(0.0, 1.0) == [0.0, 1.0]
    assert geometric_edges(1.0, 1.5) == [1.0, 1.5]


def test_smooth_integrand():
    result = integrate_pieces(np.exp, [(0.0, 1.0)], 10, 1e-12, 0.0, 10)
    assert result.converged
    assert result.value == pytest.approx(math.e - 1.0, rel=1e-13)


def test_endpoint_singularity_with_graded_pieces():
    edges = graded_edges(0.0, 1.0, 1e-9, 40)
    pieces = list(zip(edges, edges[1:]))
    result = integrate_pieces(np.sqrt, pieces, 10, 1e-10, 1e-15, 12)
    assert result.value == pytest.approx(2.0 / 3.0, rel=1e-9)


def test_bisection_resolves_kink():
    result = integrate_pieces(lambda x: np.abs(x - 1.0 / 3.0), [(0.0, 1.0)], 8, 1e-10, 1e-14, 30)
    assert result.value == pytest.approx((1.0 / 9.0 + 4.0 / 9.0) / 2.0, rel=1e-9)
    assert result.pieces > 1


def test_depth_limit_reports_not_converged():
    result = integrate_pieces(lambda x: np.where(x < 1.0 / 3.0, 0.0, 1.0), [(0.0, 1.0)], 10, 1e-12, 0.0, 0)
    assert not result.converged
    assert result.pieces == 1


def test_empty_piece_list():
    result = integrate_pieces(np.exp, [], 10, 1e-9, 0.0, 5)
    assert result.value == 0.0 and result.converged
