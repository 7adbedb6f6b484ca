"""Exact steady states of a lossy p-wave pairing chain with charging energy.

Modules
-------
core          parameters, validation, log-domain complex scalars
combinatorics exact dimer-covering counts (three routes)
steadystate   coefficient tables and closed-form observables
thermo        effective free energy, wells, first-order boundary
meanfield     self-consistency, bistability, equal-area construction
pseudospin    momentum-pair moment dynamics and the spin mapping
fock          brute-force Lindblad exact-diagonalization oracle
cli           reproducible data-file front end (``cqa-fermi``)
kernels       numba/numpy dual-backend hot loops
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    OBC,
    PBC,
    LogComplex,
    ModelParams,
    PairingMatrix,
    log_product,
    log_sum,
    nearest_neighbor_pairing,
    validate_params,
)
from .steadystate import (  # noqa: F401
    CoefficientTable,
    build_coefficients,
    mean_density,
)
