"""dilres: truncated atom-photon Hamiltonians under complex dilation.

Builds finite matrix realizations of dipole-coupled atom-field models,
diagonalizes them at complex dilation angles, and verifies symmetry,
degeneracy, analyticity, and resolvent-bound properties numerically.
"""

__version__ = "0.1.0"

from . import atom, checks, fock, hamiltonian, modes, spectral, symmetry  # noqa: E402,F401
