"""Normal matrix of the differential ``E -> sum_k E ._k A`` and its kernel.

Endomorphisms are vectorized row-major: the elementary matrix ``e_i e_j^H``
sits at position ``i*n + j``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DimensionError, SizeError
from .indexing import combos, rank_rows
from .skew import SkewTensor, flatten_mode1, flatten_modes12, max_dense


class IllSeparatedKernelWarning(UserWarning):
    pass


def gram(A: SkewTensor) -> np.ndarray:
    """``J^H J`` for the differential at ``A``, built from two flattening Grams.

    ``G[(i,j),(i',j')] = delta(i,i') * conj(H)[j,j'] + G12[(i,j'),(j,i')]`` with
    ``H = F1 F1^H`` and ``G12 = F12 F12^H``. ``J`` itself is never formed.
    """
    if A.d < 3:
        raise DimensionError("the Gram construction needs d >= 3")
    n = A.n
    F12 = flatten_modes12(A)
    G12 = (F12 @ F12.conj().T).reshape(n, n, n, n)
    G = np.ascontiguousarray(G12.transpose(0, 2, 3, 1))
    F1 = flatten_mode1(A)
    H = F1 @ F1.conj().T
    idx = np.arange(n)
    G[idx, :, idx, :] += H.conj()
    return G.reshape(n * n, n * n)


def jacobian_dense(A: SkewTensor, guard: int | None = None) -> np.ndarray:
    """Explicit ``C(n,d) x n**2`` matrix of the differential (oracle)."""
    n, d = A.n, A.d
    limit = max_dense() if guard is None else guard
    if comb(n, d) * n * n > limit:
        raise SizeError(f"jacobian of size {comb(n, d)} x {n * n} exceeds guard {limit}")
    J = np.zeros((comb(n, d), n * n), dtype=A.coords.dtype)
    L = combos(n, d)
    rows = np.arange(L.shape[0])
    for t in range(d):
        i = L[:, t]
        for j in range(n):
            K = L.copy()
            K[:, t] = j
            srt = np.sort(K, axis=1)
            valid = np.all(np.diff(srt, axis=1) > 0, axis=1) if d > 1 else np.ones(len(K), bool)
            # parity of the sorting permutation = parity of inversions
            inv = np.zeros(len(K), dtype=int)
            for a in range(d):
                for b in range(a + 1, d):
                    inv += K[:, a] > K[:, b]
            sign = np.where(inv % 2 == 0, 1.0, -1.0)
            src = rank_rows(np.where(valid[:, None], srt, np.arange(d)), n)
            vals = np.where(valid, sign * A.coords[src], 0.0)
            J[rows, i * n + j] += vals
    return J


def apply_differential(A: SkewTensor, E: np.ndarray) -> SkewTensor:
    J = jacobian_dense(A)
    return SkewTensor(J @ np.asarray(E).reshape(-1), A.n, A.d)


@dataclass(frozen=True)
class KernelBasis:
    matrices: np.ndarray  # (q, n, n); the last one belongs to the smallest singular value
    kernel_singular_values: np.ndarray
    gap_value: float
    sigma_max: float
    all_singular_values: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def suggested_dimension(self, tol: float = 1e-8) -> int:
        """Kernel dimension implied by a relative singular-value threshold (diagnostic only)."""
        if self.sigma_max == 0:
            return len(self.all_singular_values)
        return int(np.sum(self.all_singular_values <= tol * self.sigma_max))

    def diagnostics(self) -> dict:
        smax = self.sigma_max or 1.0
        return {
            "q": self.q,
            "largest_kernel_singular_value": float(self.kernel_singular_values.max()) / smax,
            "gap_singular_value": self.gap_value / smax,
            "suggested_q": self.suggested_dimension(),
        }


def kernel_basis(G: np.ndarray, q: int) -> KernelBasis:
    """Orthonormal basis of the ``q``-dimensional numerical kernel of ``G``."""
    nn = G.shape[0]
    n = int(round(np.sqrt(nn)))
    if n * n != nn or G.shape != (nn, nn):
        raise DimensionError(f"Gram matrix must be n^2 x n^2, got {G.shape}")
    if not 0 < q < nn:
        raise DimensionError(f"kernel dimension must lie in (0, {nn}), got {q}")
    _, s, Vh = np.linalg.svd(G)
    K = Vh[nn - q:].conj().reshape(q, n, n)
    sq = s[nn - q:]
    gap = float(s[nn - q - 1])
    smax = float(s[0])
    if smax > 0 and gap < 10 * sq.max():
        warnings.warn(
            f"kernel poorly separated: gap {gap / smax:.3e} vs kernel {sq.max() / smax:.3e}",
            IllSeparatedKernelWarning,
            stacklevel=2,
        )
    return KernelBasis(K, sq, gap, smax, s)
