"""Skew-symmetric tensors stored by their C(n, d) wedge-basis coordinates.

Coordinates of ``v_1 ^ ... ^ v_d`` are the d x d minors of ``[v_1 ... v_d]``
(rows taken in increasing order), and the wedge basis is declared
orthonormal. The dense embedding into the full ``n**d`` array places
``sign * a_K`` at every ordering of ``K``, so a wedge of vectors maps to the
plain permutation sum of tensor products.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import comb

import numpy as np

from .errors import DimensionError, SizeError
from .indexing import combos, rank_rows, removal_table, sort_signed

DEFAULT_MAX_DENSE = 10**7


def max_dense() -> int:
    return int(float(os.environ.get("GDT_MAX_DENSE", DEFAULT_MAX_DENSE)))


@dataclass(frozen=True, eq=False)
class SkewTensor:
    """Element of the d-th exterior power of F^n in intrinsic coordinates."""

    coords: np.ndarray
    n: int
    d: int

    def __post_init__(self):
        c = np.asarray(self.coords)
        if not np.iscomplexobj(c):
            c = c.astype(np.float64, copy=False)
        else:
            c = c.astype(np.complex128, copy=False)
        if self.d < 1 or self.n < self.d:
            raise DimensionError(f"need 1 <= d <= n, got d={self.d}, n={self.n}")
        if c.shape != (comb(self.n, self.d),):
            raise DimensionError(
                f"expected {comb(self.n, self.d)} coordinates for d={self.d}, n={self.n}, got {c.shape}"
            )
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.coords) else "real"

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def _check(self, other: "SkewTensor"):
        if (self.n, self.d) != (other.n, other.d):
            raise DimensionError(f"shape mismatch: ({self.n},{self.d}) vs ({other.n},{other.d})")

    def __add__(self, other: "SkewTensor") -> "SkewTensor":
        self._check(other)
        return SkewTensor(self.coords + other.coords, self.n, self.d)

    def __sub__(self, other: "SkewTensor") -> "SkewTensor":
        self._check(other)
        return SkewTensor(self.coords - other.coords, self.n, self.d)

    def __mul__(self, c) -> "SkewTensor":
        return SkewTensor(c * self.coords, self.n, self.d)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, n: int, d: int, field: str = "real") -> "SkewTensor":
        dtype = np.complex128 if field == "complex" else np.float64
        return cls(np.zeros(comb(n, d), dtype=dtype), n, d)

    @classmethod
    def basis(cls, indices, n: int) -> "SkewTensor":
        """``e_{i_1} ^ ... ^ e_{i_d}`` for 1-based increasing ``indices``."""
        idx = np.asarray(indices, dtype=np.intp) - 1
        d = len(idx)
        out = np.zeros(comb(n, d))
        out[int(rank_rows(idx, n))] = 1.0
        return cls(out, n, d)


def _batched_wedge(V: np.ndarray) -> np.ndarray:
    """Minors of the trailing (c, k) matrices of ``V``; shape (..., C(c, k)).

    Assembled by appending one column at a time (Laplace expansion along the
    last column), which costs O(k * C(c, k)) per step instead of k! terms.
    """
    c, k = V.shape[-2:]
    w = V[..., :, 0]
    for j in range(1, k):
        removed, rest_rank, sign = removal_table(c, j + 1)
        # moving position t to the end of a (j+1)-tuple takes j - t swaps
        s = sign if j % 2 == 0 else -sign
        v = V[..., :, j]
        w = np.sum(s * w[..., rest_rank] * v[..., removed], axis=-1)
    return w


def wedge(vectors) -> SkewTensor:
    """Wedge product of the columns of a (c, k) matrix (or a list of vectors)."""
    if isinstance(vectors, (list, tuple)):
        V = np.column_stack([np.asarray(v) for v in vectors])
    else:
        V = np.asarray(vectors)
    if V.ndim != 2:
        raise DimensionError("wedge expects a matrix or a list of vectors")
    c, k = V.shape
    if k < 1 or k > c:
        raise DimensionError(f"cannot wedge {k} vectors in dimension {c}")
    return SkewTensor(_batched_wedge(V), c, k)


def wedge_many(blocks: np.ndarray) -> np.ndarray:
    """Coordinates of the wedges of a stack of (c, k) blocks, shape (r, C(c, k))."""
    blocks = np.asarray(blocks)
    c, k = blocks.shape[-2:]
    if k < 1 or k > c:
        raise DimensionError(f"cannot wedge {k} vectors in dimension {c}")
    return _batched_wedge(blocks)


def frobenius_inner(A: SkewTensor, B: SkewTensor):
    A._check(B)
    return np.vdot(A.coords, B.coords)


# -- flattenings -------------------------------------------------------------

def _flatten_mode1_coords(coords: np.ndarray, n: int, d: int) -> np.ndarray:
    """Mode-1 flattening of every column of a (C(n,d), ...) coordinate array.

    Result has shape (n, C(n, d-1), ...).
    """
    removed, rest_rank, sign = removal_table(n, d)
    extra = coords.shape[1:]
    out = np.zeros((n, comb(n, d - 1)) + extra, dtype=coords.dtype)
    vals = coords[:, None, ...] * sign.reshape(sign.shape + (1,) * len(extra))
    out[removed, rest_rank] = vals
    return out


def flatten_mode1(A: SkewTensor) -> np.ndarray:
    if A.d < 2:
        raise DimensionError("mode-1 flattening needs d >= 2")
    return _flatten_mode1_coords(A.coords, A.n, A.d)


@lru_cache(maxsize=None)
def _modes12_table(n: int, d: int):
    K = combos(n, d)
    pairs = [(s, t) for s in range(d) for t in range(d) if s != t]
    rows, cols, signs, src = [], [], [], []
    idx = np.arange(K.shape[0])
    for s, t in pairs:
        rest_pos = [p for p in range(d) if p not in (s, t)]
        sgn = sort_signed([s, t] + rest_pos).sign
        rows.append(K[:, s] * n + K[:, t])
        cols.append(rank_rows(K[:, rest_pos], n))
        signs.append(np.full(K.shape[0], float(sgn)))
        src.append(idx)
    return (np.concatenate(rows), np.concatenate(cols), np.concatenate(signs), np.concatenate(src))


def flatten_modes12(A: SkewTensor) -> np.ndarray:
    """(n*n) x C(n, d-2) flattening; row ``i*n + j`` holds the ordered pair (i, j)."""
    if A.d < 3:
        raise DimensionError("modes-(1,2) flattening needs d >= 3")
    rows, cols, signs, src = _modes12_table(A.n, A.d)
    out = np.zeros((A.n * A.n, comb(A.n, A.d - 2)), dtype=A.coords.dtype)
    out[rows, cols] = signs * A.coords[src]
    return out


def _unflatten_last_coords(Y: np.ndarray, n: int, k: int, return_deviation: bool = False):
    """Inverse of the last-mode k-flattening, batched over leading axes.

    ``Y`` has shape (..., C(n, k-1), n). Each output coordinate is the mean of
    its k signed copies.
    """
    removed, rest_rank, sign = removal_table(n, k)
    s = sign if (k - 1) % 2 == 0 else -sign
    cand = s * Y[..., rest_rank, removed]  # (..., C(n,k), k)
    alpha = cand.mean(axis=-1)
    if return_deviation:
        dev = float(np.max(np.abs(cand - alpha[..., None]), initial=0.0))
        return alpha, dev
    return alpha


def unflatten_last(Y: np.ndarray, k: int, return_deviation: bool = False):
    """Coordinates of the order-k tensor whose last-mode flattening is ``Y``."""
    Y = np.asarray(Y)
    n = Y.shape[-1]
    if Y.shape[-2] != comb(n, k - 1):
        raise DimensionError(f"expected {comb(n, k - 1)} rows for k={k}, n={n}")
    return _unflatten_last_coords(Y, n, k, return_deviation)


def flatten_last(A: SkewTensor) -> np.ndarray:
    """C(n, d-1) x n flattening that splits off the last mode."""
    F1 = flatten_mode1(A)
    # moving the first mode to the end of a d-tuple costs d-1 swaps
    return (F1.T if A.d % 2 == 1 else -F1.T).copy()


# -- dense oracle ------------------------------------------------------------

def _guard(n: int, d: int):
    if n**d > max_dense():
        raise SizeError(f"dense tensor with {n}**{d} entries exceeds guard {max_dense()}")


def to_dense(A: SkewTensor) -> np.ndarray:
    """Full d-way antisymmetric array of ``A``."""
    n, d = A.n, A.d
    _guard(n, d)
    out = np.zeros((n,) * d, dtype=A.coords.dtype)
    K = combos(n, d)
    for perm in permutations(range(d)):
        sgn = sort_signed(perm).sign
        out[tuple(K[:, list(perm)].T)] = sgn * A.coords
    return out


def from_dense(X: np.ndarray) -> SkewTensor:
    """Read coordinates off a dense array at strictly increasing positions."""
    d = X.ndim
    n = X.shape[0]
    K = combos(n, d)
    return SkewTensor(X[tuple(K.T)], n, d)


def dense_wedge(vectors) -> np.ndarray:
    """Literal permutation-sum definition of the wedge product (oracle only)."""
    vs = [np.asarray(v) for v in vectors]
    d = len(vs)
    n = vs[0].shape[0]
    _guard(n, d)
    dtype = np.result_type(*vs, np.float64)
    out = np.zeros((n,) * d, dtype=dtype)
    for perm in permutations(range(d)):
        term = vs[perm[0]]
        for p in perm[1:]:
            term = np.multiply.outer(term, vs[p])
        out += sort_signed(perm).sign * term
    return out


def dense_multilinear(X: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Apply ``U`` along every mode of a dense array (oracle only)."""
    out = X
    for k in range(X.ndim):
        out = np.moveaxis(np.tensordot(U, out, axes=(1, k)), 0, k)
    return out


def dense_unfold(X: np.ndarray, nrow_modes: int) -> np.ndarray:
    n = X.shape[0]
    return X.reshape(n**nrow_modes, -1)
