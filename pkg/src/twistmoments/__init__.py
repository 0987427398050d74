"""Central values of twisted modular L-functions and their mollified moments
over families of primitive Dirichlet characters, at moduli small enough to
check every identity directly.

Modules:
    arith       sieves, multiplicative helpers, phi_star
    hecke       eigenform coefficient tables (built-in Ramanujan tau)
    characters  Dirichlet character groups, Gauss/Kloosterman sums
    weights     the two smoothing kernels of the functional equations
    sums        compensated reductions
    lvalues     central values by approximate functional equation
    mollifier   parameter ladder, prime segments, polynomial tower
    moments     family moments and inequality audits
    cli         command-line front end
"""

from . import arith, characters, hecke, lvalues, moments, mollifier, sums, weights

__version__ = "0.1.0"

__all__ = [
    "arith", "characters", "hecke", "lvalues", "moments", "mollifier",
    "sums", "weights", "__version__",
]
