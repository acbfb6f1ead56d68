"""niltri: exact matrix calculus for nil graded algebras encoded by
strictly lower triangular matrices.

Submodules: fields (exact scalars), tmatrix (matrices and invariants),
eto (elementary operations and orbits), algebra (the graded algebra and
isomorphism testing), classify4 (the n = 4 classification), cli.
"""

from ._kernel import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
