"""Thermodynamics of reversible computing on finite-dimensional systems.

Modules, roughly bottom-up:

- qlinalg: Hilbert-Schmidt linear algebra and column-stacking vectorization
- qstate: density matrices, Gibbs states, entropies, free energies
- compmodel: basis partitions and the computational/noncomputational split
- compops: classical stochastic operations and reversibility criteria
- channels: dilations, Kraus extraction, reset protocols, heat bookkeeping
- resource: thermomajorization and free-energy feasibility checks
- gksl: Lindblad generators, their spectra, and asymptotic projections
- adiabatic: dissipation model for adiabatically switched logic
- cli: the `revtherm` scenario runner

Entropic quantities are in nats with Boltzmann's constant set to one.
"""

from . import (
    adiabatic,
    channels,
    compmodel,
    compops,
    gksl,
    qlinalg,
    qstate,
    resource,
)
from .errors import ContractError, NonDiagonalizable, NumericHealthError, ShapeError

__version__ = "0.1.0"

__all__ = [
    "adiabatic",
    "channels",
    "compmodel",
    "compops",
    "gksl",
    "qlinalg",
    "qstate",
    "resource",
    "ContractError",
    "NonDiagonalizable",
    "NumericHealthError",
    "ShapeError",
    "__version__",
]
