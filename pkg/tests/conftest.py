import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from cqa_fermi import fock
from cqa_fermi.core import PBC, ModelParams


@pytest.fixture(autouse=True)
def _silence_odd_pbc_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=UserWarning)
        yield


def dark_pair_operator(system: fock.DoubledSystem, bc: str) -> sp.csr_matrix:
    """Delocalized nearest-neighbor pair raiser on the dark modes."""
    dark = system.dark_ops()
    L = system.L
    dim = 1 << (2 * L)
    B = sp.csr_matrix((dim, dim), dtype=complex)
    for j in range(L if bc == PBC else L - 1):
        B = B + dark[j].dag().matrix @ dark[(j + 1) % L].dag().matrix
    return B


def fock_expectation(psi: np.ndarray, op: sp.spmatrix) -> complex:
    return complex(np.vdot(psi, op @ psi))


def cqa_state_and_system(params: ModelParams):
    system = fock.build_doubled_system(params)
    psi = fock.build_cqa_state(params, system=system)
    return psi, system
