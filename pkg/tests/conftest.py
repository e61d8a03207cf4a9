import copy

import pytest

from lrcone.geometry import build_chain
from lrcone.model import build_power_law_two_body

# A verification campaign small enough to run in a few seconds.
TINY_RUN = {
    "lattice": {"kind": "chain", "size": 4},
    "interaction": {"type": "power_law_two_body", "C1": 1.0, "alpha": 2.0},
    "sweep": {"t_grid": {"start": 0.0, "stop": 1.0, "step": 0.5}},
    "limits": {"series_max_sites": 4, "series_max_n": 2},
    "verify": {
        "identity_sizes": [3, 4],
        "identity_R": [1.5],
        "identity_t": [0.5],
        "finite_range_size": 4,
        "finite_range_t": [0.0, 0.5, 1.0],
        "lemma_size": 4,
        "lemma_r": [1.0],
        "lemma_t": [0.5],
        "theorem_sizes": [4],
        "theorem_t": [0.0, 0.5, 1.0],
        "theorem_R": [1.5],
        "series_R": [1.5, 2.5],
        "quantum_samples": 2,
        "lightcone_t": [1.0, 10.0, 20.0, 50.0, 100.0],
        "determinism_size": 4,
        "determinism_workers": [1, 2],
    },
}


@pytest.fixture
def tiny_run():
    return copy.deepcopy(TINY_RUN)


@pytest.fixture
def chain5():
    """Ising chain of 5 sites, ||h_xy|| = (1 + |x-y|)^-3."""
    return build_power_law_two_body(build_chain(5), C1=1.0, alpha=2.0, D=1.0)
