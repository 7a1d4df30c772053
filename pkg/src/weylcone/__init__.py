"""weylcone: exact geometry of Weyl-chamber truncation.

Subpackages cover exact rational polyhedra with integration oracles, root-datum
combinatorics with truncation indicator functions, parametric-polytope chamber
integrals, canonical polynomial-exponential ("t-finite") functions, the
weight-driven region decomposition of the positive chamber, and a
one-dimensional asymptotic toy model.
"""

__version__ = "0.1.0"
