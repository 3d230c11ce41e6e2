"""Exact ribbon-graph summation for the noncommutative Batalin-Vilkovisky equation.

The package turns a finite-dimensional graded associative (or cyclic
A-infinity) algebra with an odd invariant pairing, an odd symmetry, and a
homotopy with idempotent defect into the full graph expansion of the
induced structure on the homotopy retract, and verifies the quantum master
equation the expansion satisfies, coefficient by coefficient, in rational
arithmetic.
"""

from .superlinear import (
    GradedBasis,
    Slot,
    SparseTensor,
    Operator,
    koszul_sign,
    tensor_contract,
    tensor_product,
    apply_operator,
    beta_inverse,
    EVEN,
    ODD,
    VECTOR,
    COVECTOR,
)

__version__ = "0.1.0"
