"""
Interaction families {h_Z}, the decay quantities f(R) and C0, and the
short-range / long-range split at a cutoff R.

Term matrices are stored over their own support only; embedding into the
full Hilbert space happens in `lrcone.quantum`.
"""
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal, Sequence

import numpy as np

from lrcone.errors import InvalidArgumentError
from lrcone.geometry import MetricSpace, set_diameter, realized_distances

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG = {
    "HERMITIAN_TOL": 1e-12,
    "DEFAULT_LOCAL_DIM": 2,
}
# --- End Configuration ---

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS = {"i": PAULI_I, "x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def _normalized(matrix: np.ndarray) -> np.ndarray:
    return matrix / np.linalg.norm(matrix, 2)


COUPLING_PATTERNS: dict[str, np.ndarray] = {
    "ising": _normalized(np.kron(PAULI_Z, PAULI_Z)),
    "xx": _normalized(np.kron(PAULI_X, PAULI_X)),
    "xy": _normalized(np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y)),
    "heisenberg": _normalized(np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)),
}


@dataclass(frozen=True, eq=False)
class InteractionTerm:
    """A Hermitian local term h_Z acting on the sites of `support` (ascending order)."""
    support: tuple[int, ...]
    matrix: np.ndarray
    norm: float

    @classmethod
    def from_matrix(cls, support: Iterable[int], matrix) -> 'InteractionTerm':
        support = tuple(int(s) for s in support)
        if not support:
            raise InvalidArgumentError("Interaction term support must be nonempty")
        if len(set(support)) != len(support):
            raise InvalidArgumentError(f"Repeated site in support {support}")
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidArgumentError(f"Term matrix on {support} must be square, got {matrix.shape}")
        scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
        if np.abs(matrix - matrix.conj().T).max(initial=0.0) > CONFIG["HERMITIAN_TOL"] * scale:
            raise InvalidArgumentError(f"Term matrix on {support} is not Hermitian")
        # Reorder tensor factors so the support is stored ascending.
        order = np.argsort(support)
        if not np.all(order == np.arange(len(support))):
            matrix = _permute_factors(matrix, len(support), order)
            support = tuple(support[i] for i in order)
        matrix.setflags(write=False)
        return cls(support=support, matrix=matrix, norm=float(np.linalg.norm(matrix, 2)))

    def diameter(self, space: MetricSpace) -> float:
        return set_diameter(space, self.support)


def _permute_factors(matrix: np.ndarray, n_factors: int, order: Sequence[int]) -> np.ndarray:
    dim = matrix.shape[0]
    local = round(dim ** (1.0 / n_factors))
    if local ** n_factors != dim:
        raise InvalidArgumentError("Cannot reorder a term whose factors have unequal dimensions")
    tensor = matrix.reshape([local] * (2 * n_factors))
    axes = list(order) + [n_factors + i for i in order]
    return np.ascontiguousarray(tensor.transpose(axes).reshape(dim, dim))


@dataclass(frozen=True, eq=False)
class Interaction:
    """The formal sum H = sum_Z h_Z over a finite space, at most one term per support."""
    space: MetricSpace
    local_dims: tuple[int, ...]
    terms: tuple[InteractionTerm, ...] = ()

    def __post_init__(self):
        if len(self.local_dims) != self.space.n_sites:
            raise InvalidArgumentError(
                f"Expected {self.space.n_sites} local dimensions, got {len(self.local_dims)}")
        seen = set()
        for term in self.terms:
            for s in term.support:
                self.space._check_site(s)
            if term.support in seen:
                raise InvalidArgumentError(f"Duplicate term on support {term.support}")
            seen.add(term.support)
            expected = int(np.prod([self.local_dims[s] for s in term.support]))
            if term.matrix.shape[0] != expected:
                raise InvalidArgumentError(
                    f"Term on {term.support} has dimension {term.matrix.shape[0]}, expected {expected}")

    @classmethod
    def empty(cls, space: MetricSpace, local_dim: int = CONFIG["DEFAULT_LOCAL_DIM"]) -> 'Interaction':
        return cls(space=space, local_dims=(local_dim,) * space.n_sites)

    @cached_property
    def diameters(self) -> np.ndarray:
        return np.array([t.diameter(self.space) for t in self.terms], dtype=float)

    @cached_property
    def norms(self) -> np.ndarray:
        return np.array([t.norm for t in self.terms], dtype=float)

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean (n_sites, n_terms) table: incidence[x, k] iff x is in support k."""
        table = np.zeros((self.space.n_sites, len(self.terms)), dtype=bool)
        for k, term in enumerate(self.terms):
            table[list(term.support), k] = True
        return table

    def with_terms(self, terms: Iterable[InteractionTerm]) -> 'Interaction':
        return Interaction(space=self.space, local_dims=self.local_dims, terms=tuple(terms))


@dataclass(frozen=True, eq=False)
class DecayProfile:
    """
    A decreasing bound f(R) on the uniform tail of the interaction.

    `empirical` evaluates the tail of a concrete interaction exactly;
    `power_law` is f(R) = C'(1+R)^(-alpha).
    """
    kind: Literal["empirical", "power_law"]
    C_prime: float | None = None
    alpha: float | None = None
    interaction: Interaction | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "power_law":
            if self.C_prime is None or self.C_prime <= 0 or self.alpha is None or self.alpha <= 0:
                raise InvalidArgumentError("power_law profile needs positive C_prime and alpha")
        elif self.kind == "empirical":
            if self.interaction is None:
                raise InvalidArgumentError("empirical profile needs an interaction")
        else:
            raise InvalidArgumentError(f"Unknown decay profile kind: {self.kind!r}")

    @classmethod
    def empirical(cls, interaction: Interaction) -> 'DecayProfile':
        return cls(kind="empirical", interaction=interaction)

    @classmethod
    def power_law(cls, C_prime: float, alpha: float) -> 'DecayProfile':
        return cls(kind="power_law", C_prime=C_prime, alpha=alpha)

    def f(self, R: float) -> float:
        if self.kind == "power_law":
            return self.C_prime * (1.0 + R) ** (-self.alpha)
        return empirical_f(self.interaction, R)

    __call__ = f

    def dominates(self, interaction: Interaction, R_grid: Iterable[float] | None = None) -> bool:
        """f(R) >= empirical_f(R) on the grid (realized diameters and 0 by default)."""
        grid = _tail_breakpoints(interaction) if R_grid is None else R_grid
        return all(self.f(R) >= empirical_f(interaction, R) * (1.0 - 1e-12) for R in grid)


# --- Builders ---

def build_power_law_two_body(space: MetricSpace, C1: float, alpha: float, D: float,
                             pattern: str | np.ndarray = "ising") -> Interaction:
    """
    One two-site term per unordered pair, scaled so that
    ||h_{x,y}|| = C1 [1 + d(x,y)]^-(alpha + D).
    """
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    if C1 <= 0:
        raise InvalidArgumentError(f"C1 must be positive, got {C1}")
    if D <= 0:
        raise InvalidArgumentError(f"D must be positive, got {D}")
    if isinstance(pattern, str):
        try:
            base = COUPLING_PATTERNS[pattern]
        except KeyError:
            raise InvalidArgumentError(
                f"Unknown coupling pattern '{pattern}'. Known: {', '.join(sorted(COUPLING_PATTERNS))}") from None
    else:
        base = np.asarray(pattern, dtype=complex)
        if base.shape != (4, 4):
            raise InvalidArgumentError(f"Coupling pattern must be 4x4, got {base.shape}")
        base = _normalized(base)

    terms = []
    for x, y in itertools.combinations(space.sites, 2):
        strength = C1 * (1.0 + space.dist(x, y)) ** (-(alpha + D))
        terms.append(InteractionTerm.from_matrix((x, y), strength * base))
    return Interaction(space=space, local_dims=(2,) * space.n_sites, terms=tuple(terms))


# --- Decay quantities ---

def empirical_f(interaction: Interaction, R: float) -> float:
    """sup_x sum_{Z containing x, diam(Z) >= R} ||h_Z||, evaluated exactly."""
    if not interaction.terms:
        return 0.0
    tail = interaction.norms * (interaction.diameters >= R)
    return float((interaction.incidence @ tail).max())


def compute_C0(interaction: Interaction) -> float:
    """
    sup_x sum_y sum_{Z containing x,y} ||h_Z||.

    y runs over all sites including x, so each term is counted once per site
    of its support: the inner double sum equals sum_{Z containing x} |Z| ||h_Z||.
    """
    if not interaction.terms:
        return 0.0
    sizes = np.array([len(t.support) for t in interaction.terms], dtype=float)
    return float((interaction.incidence @ (sizes * interaction.norms)).max())


def decompose(interaction: Interaction, R: float) -> tuple[Interaction, Interaction]:
    """Splits into (terms with diam < R, terms with diam >= R); each term goes wholly to one side."""
    if R <= 0:
        raise InvalidArgumentError(f"Cutoff R must be positive, got {R}")
    short, long = [], []
    for term, diam in zip(interaction.terms, interaction.diameters):
        (short if diam < R else long).append(term)
    return interaction.with_terms(short), interaction.with_terms(long)


def verify_sr_condition(long: Interaction, profile: DecayProfile, R: float) -> bool:
    """sup_x sum_{Z containing x} ||h_Z^(>=R)|| <= f(R)."""
    lhs = float((long.incidence @ long.norms).max()) if long.terms else 0.0
    rhs = profile.f(R)
    return lhs <= rhs * (1.0 + 1e-12) + 1e-15


def _tail_breakpoints(interaction: Interaction) -> list[float]:
    return sorted({0.0, *(float(d) for d in interaction.diameters)})


def admissible_power_law_profile(interaction: Interaction, alpha: float) -> DecayProfile:
    """
    Smallest C' with C'(1+R)^-alpha >= empirical_f(R) for every R >= 0.

    empirical_f is a left-continuous step that drops just after each realized
    diameter, so the worst R on each step is its right end, a diameter.
    """
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    best = max((empirical_f(interaction, R) * (1.0 + R) ** alpha for R in _tail_breakpoints(interaction)),
               default=0.0)
    if best <= 0.0:
        logger.warning("Interaction has no terms; using C'=1 for the power-law profile.")
        best = 1.0
    return DecayProfile.power_law(C_prime=best, alpha=alpha)


def max_diameter(interaction: Interaction) -> float:
    return float(interaction.diameters.max()) if interaction.terms else 0.0


def distance_levels(space: MetricSpace) -> list[float]:
    """Realized distances, the natural R grid for f(R) tables."""
    return [float(d) for d in realized_distances(space)]
