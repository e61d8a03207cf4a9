import numpy as np
import pytest

from lrcone.errors import InvalidArgumentError
from lrcone.geometry import (ball_count, build_chain, build_custom, build_grid, certificate_holds, eccentricity,
                             fit_growth_constant, fit_shell_constant, lattice_dimension, neighborhood,
                             realized_distances, set_diameter, set_distance, shell_count, GrowthCertificate)


def test_chain_distances():
    space = build_chain(5)
    assert space.n_sites == 5
    assert space.dist(0, 4) == 4.0
    assert space.dist(3, 1) == 2.0
    assert list(realized_distances(space)) == [0.0, 1.0, 2.0, 3.0, 4.0]


def test_grid_uses_l1_distance():
    space = build_grid(2, 3)
    assert space.n_sites == 9
    corner, opposite = space.index_of((0, 0)), space.index_of((2, 2))
    assert space.dist(corner, opposite) == 4.0
    assert lattice_dimension(space) == 2
    assert lattice_dimension(build_chain(3)) == 1


def test_unknown_site_is_rejected():
    space = build_chain(3)
    with pytest.raises(InvalidArgumentError):
        space.dist(0, 3)
    with pytest.raises(InvalidArgumentError):
        space.index_of("nowhere")


@pytest.mark.parametrize("table", [
    [[0, 1], [2, 0]],                      # asymmetric
    [[1, 1], [1, 0]],                      # nonzero diagonal
    [[0, 0], [0, 0]],                      # zero off-diagonal
    [[0, 1, 5], [1, 0, 1], [5, 1, 0]],     # triangle inequality
])
def test_custom_table_must_be_a_metric(table):
    with pytest.raises(InvalidArgumentError):
        build_custom(table)


def test_custom_space_keeps_labels():
    space = build_custom([[0, 2], [2, 0]], labels=["a", "b"])
    assert space.index_of("b") == 1
    assert space.dist(0, 1) == 2.0
    assert lattice_dimension(space) is None


def test_balls_shells_and_neighborhoods():
    space = build_chain(7)
    assert ball_count(space, 3, 0) == 1
    assert ball_count(space, 3, 2) == 5
    assert ball_count(space, 0, 2.5) == 3
    assert shell_count(space, 3, 2) == 2
    assert shell_count(space, 0, 6) == 1
    assert shell_count(space, 3, 0) == 1
    assert eccentricity(space, 0) == 6.0
    assert neighborhood(space, [0, 6], 1) == frozenset({0, 1, 5, 6})
    assert set_distance(space, [0, 1], [4, 6]) == 3.0
    assert set_diameter(space, [2, 5, 3]) == 3.0


def test_negative_radius_is_rejected():
    with pytest.raises(InvalidArgumentError):
        ball_count(build_chain(3), 0, -1.0)


@pytest.mark.parametrize("L, D, expected", [
    (7, 1.0, 1.75),
    (5, 1.0, 5.0 / 3.0),
    (5, 2.0, 1.0),
])
def test_fit_growth_constant(L, D, expected):
    cert = fit_growth_constant(build_chain(L), D)
    assert cert.C == pytest.approx(expected, rel=1e-12)
    assert cert.D == D


def test_fitted_certificate_holds_everywhere():
    space = build_grid(2, 3)
    cert = fit_growth_constant(space, 2.0)
    assert certificate_holds(space, cert)
    assert certificate_holds(space, cert, radii=np.linspace(0.0, 5.0, 51))
    assert not certificate_holds(space, GrowthCertificate(C=cert.C * 0.9, D=2.0))


def test_shell_constant_on_a_chain():
    # unit shells on a chain hold at most two sites
    cert = fit_shell_constant(build_chain(8), 0.0)
    assert cert.C == 2.0
    assert cert.D == 0.0


def test_growth_exponent_must_be_positive():
    with pytest.raises(InvalidArgumentError):
        fit_growth_constant(build_chain(3), 0.0)


@pytest.mark.parametrize("space", [build_chain(7), build_grid(2, 3)], ids=["chain", "grid"])
@pytest.mark.parametrize("X", [[0], [0, 2], [1, 3, 4]])
@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0, 3.5])
def test_neighborhood_is_bounded_by_growth(space, X, r):
    cert = fit_growth_constant(space, float(lattice_dimension(space)))
    assert len(neighborhood(space, X, r)) <= len(X) * cert.g(r) + 1e-12


@pytest.mark.parametrize("X", [[0], [2, 3], [0, 6]])
def test_neighborhood_grows_with_r(X):
    space = build_chain(7)
    hoods = [neighborhood(space, X, r) for r in (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 6.0)]
    assert hoods[0] == frozenset(X)
    assert all(inner <= outer for inner, outer in zip(hoods, hoods[1:]))
    assert hoods[-1] == frozenset(space.sites)


@pytest.mark.parametrize("X, Y", [
    ([0], [0]),
    ([0, 3], [3, 5]),
    ([1], [2]),
    ([0, 1], [4, 6]),
    ([2, 4], [3]),
])
def test_set_distance_vanishes_exactly_on_overlap(X, Y):
    space = build_chain(7)
    d = set_distance(space, X, Y)
    assert (d == 0.0) == bool(set(X) & set(Y))
    assert d == set_distance(space, Y, X)
