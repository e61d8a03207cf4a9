"""
Exact finite-dimensional operator algebra.

Everything is dense. A Hamiltonian is diagonalized once and the
decomposition is reused for every time, so Heisenberg evolution is an
elementwise phase multiply in the eigenbasis. Tensor factors follow the site
index order of the metric space.
"""
import logging
import os
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np
import scipy.linalg

from lrcone.errors import InvalidArgumentError, ResourceLimitError, NumericFailureError
from lrcone.model import Interaction, PAULIS

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG = {
    "DEFAULT_DIM_CAP": 4096,
    "DIM_CAP_ENV": "LRCONE_DIM_CAP",
    "DECOMPOSITION_TOL": 1e-10,
    "POWER_ITER_TOL": 1e-10,
    "POWER_ITER_MAX": 10_000,
}
# --- End Configuration ---

NormMethod = Literal["svd", "power"]


def dimension_cap(override: int | None = None) -> int:
    """The Hilbert-dimension cap: explicit override, then $LRCONE_DIM_CAP, then the default."""
    if override is not None:
        return int(override)
    raw = os.environ.get(CONFIG["DIM_CAP_ENV"])
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise InvalidArgumentError(f"{CONFIG['DIM_CAP_ENV']} must be an integer, got {raw!r}") from None
    return CONFIG["DEFAULT_DIM_CAP"]


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor product of the local spaces, in site-index order."""
    dims: tuple[int, ...]
    cap: int = CONFIG["DEFAULT_DIM_CAP"]

    def __post_init__(self):
        if not self.dims or any(d < 1 for d in self.dims):
            raise InvalidArgumentError(f"Local dimensions must be positive, got {self.dims}")
        if self.total_dim > self.cap:
            raise ResourceLimitError(
                f"Hilbert dimension {self.total_dim} exceeds the cap {self.cap} "
                f"(set {CONFIG['DIM_CAP_ENV']} to raise it)")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @classmethod
    def for_interaction(cls, interaction: Interaction, cap: int | None = None) -> 'HilbertSpace':
        return cls(dims=tuple(interaction.local_dims), cap=dimension_cap(cap))


@dataclass(frozen=True, eq=False)
class Observable:
    """A local operator on `support` (ascending site order), stored over the support only."""
    support: tuple[int, ...]
    matrix: np.ndarray
    norm: float

    @classmethod
    def from_matrix(cls, support: Iterable[int], matrix) -> 'Observable':
        support = tuple(int(s) for s in support)
        if not support or list(support) != sorted(set(support)):
            raise InvalidArgumentError(f"Observable support must be nonempty and ascending, got {support}")
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidArgumentError(f"Observable matrix must be square, got {matrix.shape}")
        matrix.setflags(write=False)
        return cls(support=support, matrix=matrix, norm=spectral_norm(matrix))

    @classmethod
    def pauli(cls, kind: str, site: int) -> 'Observable':
        try:
            matrix = PAULIS[kind.lower()]
        except KeyError:
            raise InvalidArgumentError(f"Unknown single-site operator '{kind}'") from None
        return cls.from_matrix((site,), matrix)


@dataclass(frozen=True, eq=False)
class SpectralHamiltonian:
    """H together with its eigendecomposition H = V diag(eigenvalues) V^dagger."""
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    symmetrization_defect: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_eigenbasis(self, A: np.ndarray) -> np.ndarray:
        V = self.eigenvectors
        return V.conj().T @ A @ V

    def from_eigenbasis(self, A_eig: np.ndarray) -> np.ndarray:
        V = self.eigenvectors
        return V @ A_eig @ V.conj().T

    def propagator(self, t: float) -> np.ndarray:
        """e^{-itH}."""
        V = self.eigenvectors
        return (V * np.exp(-1j * t * self.eigenvalues)) @ V.conj().T

    def phases(self, t: float) -> np.ndarray:
        """Elementwise factor exp(i t (E_j - E_k)) that evolves an operator in the eigenbasis."""
        e = np.exp(1j * t * self.eigenvalues)
        return np.outer(e, e.conj())


class HeisenbergPropagator:
    """
    An observable rotated once into the eigenbasis of H, evaluated at many
    times without repeating the basis change on the way in.
    """

    def __init__(self, H: SpectralHamiltonian, A: np.ndarray):
        _check_same_dim(H.matrix, A)
        self.H = H
        self._A = A
        self._A_eig = H.to_eigenbasis(A)

    def at(self, t: float) -> np.ndarray:
        if t == 0:
            return self._A
        return self.H.from_eigenbasis(self._A_eig * self.H.phases(t))


# --- Operations ---

def _check_same_dim(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"Dimension mismatch: {A.shape} vs {B.shape}")


def embed_matrix(matrix: np.ndarray, support: tuple[int, ...], hilbert: HilbertSpace) -> np.ndarray:
    """matrix (over `support`, ascending) tensored with the identity on the remaining sites."""
    n = len(hilbert.dims)
    if any(not 0 <= s < n for s in support):
        raise InvalidArgumentError(f"Support {support} is outside the {n}-site space")
    sub_dims = [hilbert.dims[s] for s in support]
    if matrix.shape != (int(np.prod(sub_dims)),) * 2:
        raise InvalidArgumentError(
            f"Operator of shape {matrix.shape} does not match support dimensions {sub_dims}")
    rest = [s for s in range(n) if s not in support]
    rest_dim = int(np.prod([hilbert.dims[s] for s in rest], dtype=np.int64))
    full = np.kron(matrix, np.eye(rest_dim, dtype=complex))
    order = list(support) + rest
    shape = [hilbert.dims[s] for s in order]
    tensor = full.reshape(shape + shape)
    # axis i of `tensor` belongs to site order[i]; move every site back to its own axis
    perm = [order.index(site) for site in range(n)]
    tensor = tensor.transpose(perm + [p + n for p in perm])
    D = hilbert.total_dim
    return np.ascontiguousarray(tensor.reshape(D, D))


def embed(observable: Observable, hilbert: HilbertSpace) -> np.ndarray:
    return embed_matrix(observable.matrix, observable.support, hilbert)


def assemble_hamiltonian(interaction: Interaction, cap: int | None = None) -> SpectralHamiltonian:
    """Sums the embedded terms, symmetrizes, and diagonalizes."""
    hilbert = HilbertSpace.for_interaction(interaction, cap)
    D = hilbert.total_dim
    H = np.zeros((D, D), dtype=complex)
    for term in interaction.terms:
        H += embed_matrix(term.matrix, term.support, hilbert)
    H_sym = (H + H.conj().T) / 2
    defect = float(np.abs(H - H_sym).max(initial=0.0))
    if defect > 0:
        logger.debug("Symmetrization defect of assembled Hamiltonian: %.3e", defect)
    return diagonalize(H_sym, symmetrization_defect=defect)


def diagonalize(H: np.ndarray, symmetrization_defect: float = 0.0) -> SpectralHamiltonian:
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(H)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericFailureError("Hermitian eigensolver failed", {
            "dim": H.shape[0],
            "max_abs_entry": float(np.abs(H).max(initial=0.0)),
            "error": str(e),
        }) from e

    scale = max(1.0, float(np.linalg.norm(H, 2))) if H.size else 1.0
    tol = CONFIG["DECOMPOSITION_TOL"]
    reconstruction = float(np.linalg.norm(H - (eigenvectors * eigenvalues) @ eigenvectors.conj().T, 2))
    orthonormality = float(np.linalg.norm(eigenvectors.conj().T @ eigenvectors - np.eye(H.shape[0]), 2))
    if reconstruction > tol * scale or orthonormality > tol:
        raise NumericFailureError("Eigendecomposition failed its consistency check", {
            "dim": H.shape[0],
            "reconstruction_error": reconstruction,
            "orthonormality_error": orthonormality,
        })
    for arr in (H, eigenvalues, eigenvectors):
        arr.setflags(write=False)
    return SpectralHamiltonian(H, eigenvalues, eigenvectors, symmetrization_defect)


def evolve(H: SpectralHamiltonian, A: np.ndarray, t: float) -> np.ndarray:
    """tau_t(A) = e^{itH} A e^{-itH}."""
    return HeisenbergPropagator(H, A).at(t)


def spectral_norm(M: np.ndarray, method: NormMethod = "svd") -> float:
    """Largest singular value; `power` iterates on M^dagger M for hot loops."""
    if M.size == 0:
        return 0.0
    if method == "svd":
        return float(scipy.linalg.svdvals(M)[0])
    if method == "power":
        return _power_iteration_norm(M)
    raise InvalidArgumentError(f"Unknown norm method '{method}'")


def _power_iteration_norm(M: np.ndarray) -> float:
    rng = np.random.default_rng(0)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(CONFIG["POWER_ITER_MAX"]):
        w = M.conj().T @ (M @ v)
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            return 0.0
        new_estimate = float(np.sqrt(w_norm))
        v = w / w_norm
        if abs(new_estimate - estimate) <= CONFIG["POWER_ITER_TOL"] * max(new_estimate, 1.0):
            return new_estimate
        estimate = new_estimate
    logger.warning("Power iteration hit %d iterations; falling back to SVD", CONFIG["POWER_ITER_MAX"])
    return float(scipy.linalg.svdvals(M)[0])


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def commutator_norm(A: np.ndarray, B: np.ndarray, method: NormMethod = "svd") -> float:
    _check_same_dim(A, B)
    return spectral_norm(commutator(A, B), method)


def interaction_picture_unitary(H_short: SpectralHamiltonian, H_full: SpectralHamiltonian, t: float) -> np.ndarray:
    """U^R(t) = e^{itH_short} e^{-itH_full}."""
    _check_same_dim(H_short.matrix, H_full.matrix)
    return H_short.propagator(-t) @ H_full.propagator(t)


def verify_conjugation_identity(H_short: SpectralHamiltonian, H_full: SpectralHamiltonian,
                                A: np.ndarray, B: np.ndarray, t: float) -> float:
    """| ||[tau_t(A), B]|| - ||[tau_t^(<R)(A), U B U*]|| |."""
    lhs = commutator_norm(evolve(H_full, A, t), B)
    U = interaction_picture_unitary(H_short, H_full, t)
    rhs = commutator_norm(evolve(H_short, A, t), U @ B @ U.conj().T)
    return abs(lhs - rhs)


def unitarity_defect(U: np.ndarray) -> float:
    return spectral_norm(U.conj().T @ U - np.eye(U.shape[0]))


def pauli_observable(kind: str, site: int) -> Observable:
    """Single-site Pauli operator; kind is one of i, x, y, z."""
    return Observable.pauli(kind, site)
