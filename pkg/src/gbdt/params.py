"""Generator triples (A, S0, Pi0) and the signature-matrix algebra.

A transformation is generated by an n x n matrix A, an n x n Hermitian
matrix S0 and an n x 2h matrix Pi0 tied together by a matrix identity.
Two signature variants exist:

* ``"continuous"``: j = [[0, I_h], [-I_h, 0]] and the identity reads
  A S0 - S0 A* = Pi0 j Pi0*.
* ``"discrete"``: j = [[0, I_h], [I_h, 0]] and the identity reads
  A S0 - S0 A* = i Pi0 j Pi0*.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditionError, DimensionError
from .linalg import as_cmatrix, frob, require_hermitian, require_square

VARIANTS = ("continuous", "discrete")

#: Condition code of the generator identity, per variant.
IDENTITY_CONDITION = {"continuous": "(bt2)", "discrete": "(A-2)"}

#: Default acceptance tolerance for generator/propagated identities.
ID_TOL = 1e-9


def signature_j(variant, h):
    """The 2h x 2h signature matrix of the given variant."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown signature variant {variant!r}")
    j = np.zeros((2 * h, 2 * h), dtype=np.complex128)
    eye = np.eye(h)
    j[:h, h:] = eye
    j[h:, :h] = -eye if variant == "continuous" else eye
    return j


def lower_projector(h):
    """P = diag(0, I_h), projection onto the second block column."""
    p = np.zeros((2 * h, 2 * h), dtype=np.complex128)
    p[h:, h:] = np.eye(h)
    return p


def split_blocks(x, h):
    """Split a (..., 2h, 2h) array into its four h x h blocks."""
    return (
        x[..., :h, :h],
        x[..., :h, h:],
        x[..., h:, :h],
        x[..., h:, h:],
    )


@dataclass(frozen=True)
class ParameterTriple:
    """Generator triple of a transformation (treat as immutable)."""

    a: np.ndarray
    s0: np.ndarray
    pi0: np.ndarray
    variant: str = "continuous"

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def h(self):
        return self.pi0.shape[1] // 2

    @property
    def j(self):
        return signature_j(self.variant, self.h)

    @classmethod
    def make(cls, a, s0, pi0, variant="continuous"):
        """Validate shapes and Hermitian symmetry; S0 is symmetrized."""
        a = require_square(a, "A")
        s0 = require_hermitian(s0, name="S0")
        pi0 = as_cmatrix(pi0, "Pi0")
        n = a.shape[0]
        if s0.shape[0] != n or pi0.shape[0] != n:
            raise DimensionError(
                f"triple: A is {n}x{n} but S0 is {s0.shape[0]}x{s0.shape[1]} "
                f"and Pi0 has {pi0.shape[0]} rows"
            )
        if pi0.shape[1] % 2 != 0:
            raise DimensionError("triple: Pi0 must have an even column count (2h)")
        if variant not in VARIANTS:
            raise ValueError(f"unknown signature variant {variant!r}")
        return cls(a=a, s0=s0, pi0=pi0, variant=variant)


def identity_residual(triple):
    """Frobenius norm of the generator identity defect at the base point."""
    a, s0, pi0 = triple.a, triple.s0, triple.pi0
    rhs = pi0 @ triple.j @ pi0.conj().T
    if triple.variant == "discrete":
        rhs = 1j * rhs
    return frob(a @ s0 - s0 @ a.conj().T - rhs)


def identity_scale(triple):
    """Normalization 1 + ||A|| ||S0|| for identity residual acceptance."""
    return 1.0 + frob(triple.a) * frob(triple.s0)


def require_valid(triple, id_tol=ID_TOL):
    """Raise :class:`ConditionError` unless the generator identity holds."""
    res = identity_residual(triple)
    bound = id_tol * identity_scale(triple)
    if res > bound:
        raise ConditionError(
            IDENTITY_CONDITION[triple.variant],
            f"generator identity residual {res:.3e} exceeds {bound:.3e}",
        )
    return res
