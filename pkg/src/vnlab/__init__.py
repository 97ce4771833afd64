"""vnlab: numerical laboratory for bilinear control systems whose drift and
control operators live in block-diagonal operator algebras with a normalized
trace.

Subpackages cover dense (skew-)Hermitian linear algebra with a Jacobi
eigensolver (numba-jitted with a pure-numpy fallback, see vnlab.backends),
block-algebra structure theory, the spectral drift-approximation scheme,
dynamical Lie algebras, time evolution and product formulas, truncated
Koopman models of torus rotations, and the example systems.
"""

__version__ = "0.1.0"
