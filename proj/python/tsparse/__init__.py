"""Sparse signal recovery in a transform domain.

Thin python surface over the C++ core: operator constructors, incoherence
profiles and sampling densities, the ADMM solvers, the dual-certificate
machinery, and the Monte Carlo grid runner.
"""

from ._tsparse import *  # noqa: F401,F403
from ._tsparse import __doc__ as _core_doc  # noqa: F401
