"""Nilpotent local-system data and the small dense tensor operations.

Local systems here are pairs (V, exp N) with N nilpotent, V of dimension at
most a handful, so everything is dense numpy and exponentials are finite sums.
The dual action is the plain transpose (the pairing <v, N* xi> = <N v, xi>
carries no conjugation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NotNilpotent(ValueError):
    """Matrix fails the exact nilpotency check."""


class ShapeMismatch(ValueError):
    """Tensor legs do not line up."""


@dataclass(frozen=True, eq=False)
class LocalSystemData:
    """Vector space dimension plus a verified-nilpotent endomorphism."""

    matrix: np.ndarray
    dim: int = 0
    nil_index: int = 0

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeMismatch(f"expected a square matrix, got shape {mat.shape}")
        d = mat.shape[0]
        # eager exact check by repeated multiplication: zero entries stay zero
        # exactly for strictly triangular integer or float data
        power = np.eye(d, dtype=complex)
        index = 0
        while index <= d:
            if not power.any():
                break
            power = power @ mat
            index += 1
        else:
            raise NotNilpotent(f"matrix is not nilpotent within dimension {d}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "nil_index", max(index, 1))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalSystemData):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.matrix, other.matrix)

    def scaled(self, factor: complex) -> "LocalSystemData":
        return LocalSystemData(factor * self.matrix)

    @classmethod
    def trivial(cls, dim: int = 1) -> "LocalSystemData":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def jordan(cls, dim: int) -> "LocalSystemData":
        """Single nilpotent Jordan block J_dim (ones on the superdiagonal)."""
        return cls(np.diag(np.ones(dim - 1), k=1)) if dim > 1 else cls.trivial(1)


def nilpotent_exp(system: LocalSystemData, factor: complex = 1.0) -> np.ndarray:
    """exp(factor * N) as the finite sum sum_{j < nil_index} (factor N)^j / j!."""
    out = np.eye(system.dim, dtype=complex)
    term = np.eye(system.dim, dtype=complex)
    for j in range(1, system.nil_index):
        term = term @ (factor * system.matrix) / j
        out = out + term
    return out


def adjoint_on_dual(matrix: np.ndarray) -> np.ndarray:
    """Action induced on the dual space in the dual basis: the transpose."""
    return np.asarray(matrix).T.copy()


def tensor_sum(n1: np.ndarray, n2: np.ndarray) -> np.ndarray:
    """N1 (x) 1 + 1 (x) N2 on the tensor product (Kronecker convention)."""
    n1 = np.asarray(n1, dtype=complex)
    n2 = np.asarray(n2, dtype=complex)
    return np.kron(n1, np.eye(n2.shape[0])) + np.kron(np.eye(n1.shape[0]), n2)


def partial_trace_middle(tensor: np.ndarray) -> np.ndarray:
    """Contract the middle legs of X in (V1* x V2) x (V2* x V3).

    ``tensor`` has shape (d2, d1, d3, d2): legs (V2, V1*, V3, V2*).  The result
    out[b, i] = sum_a X[a, i, b, a] is the composite V1 -> V3; for a pure
    X = A (x) B this is the matrix product B @ A.
    """
    tensor = np.asarray(tensor)
    if tensor.ndim != 4 or tensor.shape[0] != tensor.shape[3]:
        raise ShapeMismatch(f"expected shape (d2, d1, d3, d2), got {tensor.shape}")
    return np.einsum("aiba->bi", tensor)


def intertwiners(n1: np.ndarray, n2: np.ndarray, tol: float = 1e-12) -> list[np.ndarray]:
    """Basis of {T : T N1 = N2 T} via an SVD null space.

    T is d2 x d1; vectorizing column-major, T N1 - N2 T = 0 becomes
    (N1^T (x) I - I (x) N2) vec(T) = 0.
    """
    n1 = np.asarray(n1, dtype=complex)
    n2 = np.asarray(n2, dtype=complex)
    d1, d2 = n1.shape[0], n2.shape[0]
    op = np.kron(n1.T, np.eye(d2)) - np.kron(np.eye(d1), n2)
    _, sing, vh = np.linalg.svd(op)
    null_mask = np.concatenate([sing, np.zeros(max(0, vh.shape[0] - len(sing)))]) <= tol
    basis = [vh[k].conj().reshape((d1, d2)).T for k in range(vh.shape[0]) if null_mask[k]]
    return basis
