"""Skew-aware truncated HOSVD: the compression step that starts every decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .skew import SkewTensor, _flatten_mode1_coords, _unflatten_last_coords, flatten_mode1

DEFAULT_RANK_TOL = 1e-8


def multilinear_multiply(T: SkewTensor, U: np.ndarray) -> SkewTensor:
    """Compute ``(U, ..., U) . T`` without leaving the intrinsic representation.

    The tensor is pushed through ``d`` rounds. Round ``k`` starts from a mixed
    tensor stored as a ``C(m, d-k+1) x C(n, k-1)`` coordinate matrix whose
    columns are skew tensors over F^m, flattens every column along its first
    mode, applies ``U``, and folds the new index into the trailing group of
    skew indices over F^n.
    """
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[1] != T.n:
        raise DimensionError(f"map must have {T.n} columns, got shape {U.shape}")
    m, d = T.n, T.d
    n = U.shape[0]
    if n < d:
        raise DimensionError(f"target dimension {n} is below the order {d}")
    dtype = np.result_type(T.coords, U)
    P = T.coords.astype(dtype)[:, None]
    for k in range(1, d + 1):
        F = _flatten_mode1_coords(P, m, d - k + 1)  # (m, C(m, d-k), C(n, k-1))
        B = np.einsum("vw,wsc->scv", U, F)
        P = _unflatten_last_coords(B, n, k)  # (C(m, d-k), C(n, k))
    return SkewTensor(P[0], n, d)


def detect_rank(singular_values, d: int, eps: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank rounded to a multiple of ``d``.

    Singular values are grouped into consecutive blocks of ``d`` and each
    block is summarized by its geometric mean; the rank is ``d`` times the
    last block whose mean stays above ``eps`` times the first.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        raise ValueError("no singular values given")
    nblocks = s.size // d
    if nblocks <= 1:
        return d
    blocks = s[: nblocks * d].reshape(nblocks, d)
    with np.errstate(divide="ignore"):
        gm = np.exp(np.log(blocks).mean(axis=1))
    if gm[0] <= 0:
        return d
    above = np.nonzero(gm >= eps * gm[0])[0]
    return d * (int(above[-1]) + 1)


@dataclass(frozen=True)
class CompressionResult:
    basis: np.ndarray
    core: SkewTensor
    singular_values: np.ndarray
    residual: float

    @property
    def n(self) -> int:
        return self.basis.shape[1]


def compress(T: SkewTensor, n: int | None = None, eps: float = DEFAULT_RANK_TOL) -> CompressionResult:
    """Project ``T`` onto the span of the top-``n`` mode-1 singular vectors.

    When ``n`` is omitted it is chosen by :func:`detect_rank` with threshold ``eps``.
    """
    F1 = flatten_mode1(T)
    U, s, _ = np.linalg.svd(F1, full_matrices=False)
    if n is None:
        n = min(detect_rank(s, T.d, eps), T.n)
    if n < T.d or n > T.n:
        raise DimensionError(f"target dimension must satisfy d <= n <= m, got n={n}")
    U = U[:, :n]
    core = multilinear_multiply(T, U.conj().T)
    projected = multilinear_multiply(core, U)
    residual = float(np.linalg.norm(T.coords - projected.coords))
    full_s = np.zeros(T.n)
    full_s[: s.size] = s
    return CompressionResult(U, core, full_s, residual)


def projector_apply(T: SkewTensor, U: np.ndarray) -> SkewTensor:
    """``(U U^H, ..., U U^H) . T`` for a basis ``U`` with orthonormal columns."""
    return multilinear_multiply(multilinear_multiply(T, U.conj().T), U)

