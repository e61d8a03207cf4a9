import numpy as np
import pytest
import scipy.linalg

from lrcone.errors import InvalidArgumentError, ResourceLimitError
from lrcone.model import PAULI_X, PAULI_Y, PAULI_Z, decompose
from lrcone.quantum import (HeisenbergPropagator, HilbertSpace, Observable, assemble_hamiltonian, commutator_norm,
                            diagonalize, dimension_cap, embed, embed_matrix, evolve, interaction_picture_unitary,
                            pauli_observable, spectral_norm, unitarity_defect, verify_conjugation_identity)

tol = 1e-10


def test_dimension_cap(monkeypatch):
    monkeypatch.delenv("LRCONE_DIM_CAP", raising=False)
    assert dimension_cap() == 4096
    monkeypatch.setenv("LRCONE_DIM_CAP", "64")
    assert dimension_cap() == 64
    assert dimension_cap(8) == 8
    monkeypatch.setenv("LRCONE_DIM_CAP", "lots")
    with pytest.raises(InvalidArgumentError):
        dimension_cap()


def test_hilbert_space_respects_the_cap():
    assert HilbertSpace((2, 2, 2)).total_dim == 8
    with pytest.raises(ResourceLimitError):
        HilbertSpace((2,) * 5, cap=16)


def test_embedding_follows_site_order():
    hilbert = HilbertSpace((2, 2, 2))
    I2 = np.eye(2)
    assert np.allclose(embed(pauli_observable("x", 0), hilbert), np.kron(np.kron(PAULI_X, I2), I2))
    assert np.allclose(embed(pauli_observable("x", 2), hilbert), np.kron(np.kron(I2, I2), PAULI_X))
    zz = embed_matrix(np.kron(PAULI_Z, PAULI_X), (0, 2), hilbert)
    assert np.allclose(zz, np.kron(np.kron(PAULI_Z, I2), PAULI_X))


def test_embedding_rejects_mismatched_operators():
    hilbert = HilbertSpace((2, 2))
    with pytest.raises(InvalidArgumentError):
        embed_matrix(np.eye(4), (0,), hilbert)
    with pytest.raises(InvalidArgumentError):
        embed_matrix(np.eye(2), (3,), hilbert)


def test_observable_validation():
    obs = Observable.from_matrix((1,), PAULI_Y)
    assert obs.norm == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        Observable.from_matrix((2, 1), np.eye(4))
    with pytest.raises(InvalidArgumentError):
        pauli_observable("w", 0)


def test_evolution_matches_matrix_exponential(chain5):
    H = assemble_hamiltonian(chain5)
    A = embed(pauli_observable("x", 0), HilbertSpace.for_interaction(chain5))
    t = 0.7
    U = scipy.linalg.expm(-1j * t * H.matrix)
    expected = U.conj().T @ A @ U
    assert np.allclose(evolve(H, A, t), expected, atol=tol)
    assert np.allclose(H.propagator(t), U, atol=tol)


def test_evolution_at_zero_is_the_identity_map(chain5):
    H = assemble_hamiltonian(chain5)
    A = embed(pauli_observable("z", 2), HilbertSpace.for_interaction(chain5))
    assert np.array_equal(HeisenbergPropagator(H, A).at(0.0), A)


def test_group_law(chain5):
    H = assemble_hamiltonian(chain5)
    A = embed(pauli_observable("x", 1), HilbertSpace.for_interaction(chain5))
    assert np.allclose(evolve(H, evolve(H, A, 0.3), 0.4), evolve(H, A, 0.7), atol=tol)


def test_diagonalize_sets_arrays_read_only():
    H = diagonalize(np.kron(PAULI_Z, PAULI_Z).astype(complex))
    assert np.allclose(H.eigenvalues, [-1, -1, 1, 1])
    with pytest.raises(ValueError):
        H.eigenvalues[0] = 0.0


def test_spectral_norm_methods_agree():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    assert spectral_norm(M, "power") == pytest.approx(spectral_norm(M, "svd"), rel=1e-8)
    assert spectral_norm(np.zeros((0, 0))) == 0.0
    with pytest.raises(InvalidArgumentError):
        spectral_norm(M, "frobenius")


def test_pauli_commutator_norm():
    assert commutator_norm(PAULI_X, PAULI_Z) == pytest.approx(2.0)
    assert commutator_norm(PAULI_X, PAULI_X) == pytest.approx(0.0)
    with pytest.raises(InvalidArgumentError):
        commutator_norm(PAULI_X, np.eye(4))


@pytest.mark.parametrize("R, t", [(1.5, 0.5), (2.5, 1.0), (1.5, 2.0)])
def test_conjugation_identity(chain5, R, t):
    hilbert = HilbertSpace.for_interaction(chain5)
    short, _ = decompose(chain5, R)
    H_full = assemble_hamiltonian(chain5)
    H_short = assemble_hamiltonian(short)
    A = embed(pauli_observable("x", 0), hilbert)
    B = embed(pauli_observable("x", 4), hilbert)
    assert verify_conjugation_identity(H_short, H_full, A, B, t) < 1e-9
    assert unitarity_defect(interaction_picture_unitary(H_short, H_full, t)) < 1e-9
