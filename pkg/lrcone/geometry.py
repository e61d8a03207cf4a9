"""
Finite metric site sets.

Sites are dense integer indices 0..n-1; every space also carries a label per
site (the coordinate tuple on a grid, the index itself on a chain). The index
order is the tensor-product order used by `lrcone.quantum`.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from lrcone.errors import InvalidArgumentError

# --- Configuration ---
CONFIG = {
    # Distances are compared with this slack so float tables built from
    # integer graph distances behave exactly.
    "DIST_TOL": 1e-12,
}
# --- End Configuration ---


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A finite site set with a metric, stored as a dense distance table."""
    labels: tuple
    distances: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        self.distances.setflags(write=False)

    @property
    def n_sites(self) -> int:
        return len(self.labels)

    @property
    def sites(self) -> range:
        return range(self.n_sites)

    def dist(self, x: int, y: int) -> float:
        self._check_site(x)
        self._check_site(y)
        return float(self.distances[x, y])

    def index_of(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidArgumentError(f"Unknown site label: {label!r}") from None

    def _check_site(self, x) -> None:
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self.n_sites:
            raise InvalidArgumentError(f"Unknown site: {x!r} (space has {self.n_sites} sites)")


@dataclass(frozen=True)
class GrowthCertificate:
    """The polynomial volume bound g(r) = C(1+r)^D."""
    C: float
    D: float

    def g(self, r: float) -> float:
        return self.C * (1.0 + r) ** self.D

    __call__ = g


# --- Builders ---

def build_chain(L: int) -> MetricSpace:
    """Open path graph with L sites."""
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise InvalidArgumentError(f"Chain length must be a positive integer, got {L!r}")
    idx = np.arange(L)
    distances = np.abs(idx[:, None] - idx[None, :]).astype(float)
    return MetricSpace(labels=tuple(range(L)), distances=distances, kind="chain")


def build_grid(D: int, side: int) -> MetricSpace:
    """Open hypercubic grid {0..side-1}^D with the l1 graph distance."""
    if not isinstance(D, (int, np.integer)) or D < 1:
        raise InvalidArgumentError(f"Grid dimension must be a positive integer, got {D!r}")
    if not isinstance(side, (int, np.integer)) or side < 1:
        raise InvalidArgumentError(f"Grid side must be a positive integer, got {side!r}")
    coords = list(itertools.product(range(side), repeat=D))
    arr = np.array(coords, dtype=float).reshape(len(coords), D)
    distances = np.abs(arr[:, None, :] - arr[None, :, :]).sum(axis=2)
    return MetricSpace(labels=tuple(coords), distances=distances, kind="grid")


def build_custom(distance_table: Sequence[Sequence[float]], labels: Sequence[Hashable] | None = None) -> MetricSpace:
    """
    Builds a space from an explicit distance table.

    Validates the metric axioms eagerly; the triangle inequality check is
    O(n^3) in time and memory, which is fine at the sizes the quantum layer
    can handle anyway.
    """
    d = np.asarray(distance_table, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise InvalidArgumentError(f"Distance table must be a nonempty square matrix, got shape {d.shape}")
    n = d.shape[0]
    tol = CONFIG["DIST_TOL"]
    if not np.all(np.isfinite(d)):
        raise InvalidArgumentError("Distance table contains non-finite entries")
    if np.any(np.abs(np.diag(d)) > tol):
        raise InvalidArgumentError("dist(x,x) must be 0 for every site")
    if not np.allclose(d, d.T, atol=tol, rtol=0.0):
        raise InvalidArgumentError("Distance table is not symmetric")
    off_diag = d[~np.eye(n, dtype=bool)]
    if np.any(off_diag <= 0.0):
        raise InvalidArgumentError("dist(x,y) must be positive for x != y")
    # d[x,z] <= d[x,y] + d[y,z], indexed as (x, y, z)
    if not np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + tol):
        raise InvalidArgumentError("Distance table violates the triangle inequality")

    if labels is None:
        labels = tuple(range(n))
    labels = tuple(tuple(l) if isinstance(l, list) else l for l in labels)
    if len(labels) != n or len(set(labels)) != n:
        raise InvalidArgumentError("Labels must be distinct and match the table size")
    return MetricSpace(labels=labels, distances=d.copy(), kind="custom")


# --- Balls, neighborhoods, diameters ---

def _as_site_set(space: MetricSpace, X: Iterable[int], name: str) -> list[int]:
    sites = sorted(set(int(x) for x in X))
    if not sites:
        raise InvalidArgumentError(f"{name} must be a nonempty site set")
    for x in sites:
        space._check_site(x)
    return sites


def ball_count(space: MetricSpace, x: int, r: float) -> int:
    """#{y | d(x,y) <= r}."""
    space._check_site(x)
    if r < 0:
        raise InvalidArgumentError(f"Radius must be nonnegative, got {r}")
    return int(np.count_nonzero(space.distances[x] <= r + CONFIG["DIST_TOL"]))


def shell_count(space: MetricSpace, x: int, rho: float) -> int:
    """#{y | rho-1 < d(x,y) <= rho}: the unit-width annulus ending at rho."""
    space._check_site(x)
    row = space.distances[x]
    tol = CONFIG["DIST_TOL"]
    return int(np.count_nonzero((row > rho - 1.0 + tol) & (row <= rho + tol)))


def eccentricity(space: MetricSpace, x: int) -> float:
    space._check_site(x)
    return float(space.distances[x].max())


def realized_distances(space: MetricSpace) -> np.ndarray:
    """Sorted distinct distances occurring in the space (0 included)."""
    return np.unique(space.distances)


def set_distance_to_site(space: MetricSpace, X: Iterable[int], y: int) -> float:
    sites = _as_site_set(space, X, "X")
    space._check_site(y)
    return float(space.distances[sites, y].min())


def neighborhood(space: MetricSpace, X: Iterable[int], r: float) -> frozenset[int]:
    """The r-neighborhood {x | d(x, X) <= r}."""
    sites = _as_site_set(space, X, "X")
    if r < 0:
        raise InvalidArgumentError(f"Radius must be nonnegative, got {r}")
    to_X = space.distances[sites, :].min(axis=0)
    return frozenset(int(i) for i in np.flatnonzero(to_X <= r + CONFIG["DIST_TOL"]))


def set_distance(space: MetricSpace, X: Iterable[int], Y: Iterable[int]) -> float:
    xs = _as_site_set(space, X, "X")
    ys = _as_site_set(space, Y, "Y")
    return float(space.distances[np.ix_(xs, ys)].min())


def set_diameter(space: MetricSpace, Z: Iterable[int]) -> float:
    zs = _as_site_set(space, Z, "Z")
    return float(space.distances[np.ix_(zs, zs)].max())


# --- Growth certificates ---

def fit_growth_constant(space: MetricSpace, D: float) -> GrowthCertificate:
    """
    Minimal C with ball_count(x, r) <= C(1+r)^D for every site and every r >= 0.

    Ball counts are right-continuous steps that only jump at realized
    distances, and (1+r)^D increases, so the supremum over r is attained at a
    realized distance.
    """
    if D <= 0:
        raise InvalidArgumentError(f"Growth exponent D must be positive, got {D}")
    radii = realized_distances(space)
    best = 0.0
    for x in space.sites:
        row = space.distances[x]
        for r in radii:
            count = np.count_nonzero(row <= r + CONFIG["DIST_TOL"])
            best = max(best, count / (1.0 + r) ** D)
    return GrowthCertificate(C=float(best), D=float(D))


def fit_shell_constant(space: MetricSpace, exponent: float) -> GrowthCertificate:
    """
    Minimal C_s with shell_count(x, rho) <= C_s(1+rho)^exponent for all rho >= 0.

    Shell counts are steps that jump at d and d+1 for every realized
    distance d; the supremum over each step sits at its left end.
    """
    if exponent < 0:
        raise InvalidArgumentError(f"Shell exponent must be nonnegative, got {exponent}")
    radii = realized_distances(space)
    breakpoints = np.unique(np.concatenate([[0.0], radii, radii + 1.0]))
    best = 0.0
    for x in space.sites:
        for rho in breakpoints:
            best = max(best, shell_count(space, x, rho) / (1.0 + rho) ** exponent)
    return GrowthCertificate(C=float(best), D=float(exponent))


def certificate_holds(space: MetricSpace, certificate: GrowthCertificate, radii: Iterable[float] | None = None) -> bool:
    """Checks ball_count(x, r) <= g(r) on a validation grid (realized distances by default)."""
    grid = realized_distances(space) if radii is None else radii
    slack = 1e-12
    return all(
        ball_count(space, x, r) <= certificate.g(r) * (1.0 + slack)
        for x in space.sites for r in grid
    )


def lattice_dimension(space: MetricSpace) -> int | None:
    """The natural D of a chain or grid; None for custom spaces."""
    if space.kind == "chain":
        return 1
    if space.kind == "grid":
        label = space.labels[0]
        return len(label) if isinstance(label, tuple) else 1
    return None


def is_integer_exponent(D: float) -> bool:
    return float(D).is_integer() and D >= 0 and math.isfinite(D)
