"""Recovering elementary terms from the kernel of the differential.

The pipeline is: compress (S0), Gram matrix (S1), kernel (S2), eigenbasis of
one kernel element (S3), block partition from a second element (S4), per-block
K-subspace refinement (S5), sketched coefficient solve (S6), lifting (S7).
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSpectrumError,
    DimensionError,
    NotElementaryError,
    PartitionError,
    RankDeficiencyError,
)
from .hosvd import compress, multilinear_multiply
from .kernel import KernelBasis, gram, kernel_basis
from .skew import SkewTensor, flatten_mode1, wedge, wedge_many

STEPS = ("S0", "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8")


class DegenerateSpectrumWarning(UserWarning):
    pass


@dataclass(eq=False)
class Decomposition:
    """Sum of ``coefficients[i] * wedge(blocks[i])``; ``blocks`` has shape (r, m, d)."""

    blocks: np.ndarray
    coefficients: np.ndarray
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks)
        self.coefficients = np.asarray(self.coefficients)
        if self.blocks.ndim != 3 or self.coefficients.shape != (self.blocks.shape[0],):
            raise DimensionError("blocks must be (r, m, d) with r coefficients")

    @property
    def r(self) -> int:
        return self.blocks.shape[0]

    @property
    def m(self) -> int:
        return self.blocks.shape[1]

    @property
    def d(self) -> int:
        return self.blocks.shape[2]

    @property
    def field(self) -> str:
        cplx = np.iscomplexobj(self.blocks) or np.iscomplexobj(self.coefficients)
        return "complex" if cplx else "real"

    def evaluate(self) -> SkewTensor:
        W = wedge_many(self.blocks)
        return SkewTensor(self.coefficients @ W, self.m, self.d)

    def factor_matrix(self) -> np.ndarray:
        """m x (d r) factor matrix with each coefficient folded into its block's first column."""
        B = self.blocks.astype(np.result_type(self.blocks, self.coefficients)).copy()
        B[:, :, 0] *= self.coefficients[:, None]
        return np.concatenate(list(B), axis=1)


@dataclass
class DecomposeOptions:
    rank: int | None = None
    p: int = 10
    omega: float = 2.0
    seed: int = 0
    rank1_tol: float = 1e-8

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        if self.omega < 1:
            raise ValueError("omega must be at least 1")


# -- S3 ---------------------------------------------------------------------

@dataclass(frozen=True)
class RealifiedEigenbasis:
    W: np.ndarray
    eigenvalues: np.ndarray
    realified: bool
    degenerate: bool = False


def realified_evd(K: np.ndarray, pair_tol: float = 1e-8, degeneracy_tol: float = 1e-10) -> RealifiedEigenbasis:
    """Eigenvectors of ``K``; for real ``K`` every conjugate pair ``(v, conj v)`` is
    replaced by ``((v + conj v)/sqrt2, i(v - conj v)/sqrt2)`` so the basis stays real."""
    K = np.asarray(K)
    lam, Wc = np.linalg.eig(K)
    n = lam.size
    diffs = np.abs(lam[:, None] - lam[None, :])
    spread = diffs.max() if n > 1 else 0.0
    np.fill_diagonal(diffs, np.inf)
    degenerate = bool(n > 1 and (spread == 0 or diffs.min() < degeneracy_tol * spread))
    if degenerate:
        warnings.warn("kernel element has (nearly) repeated eigenvalues", DegenerateSpectrumWarning, stacklevel=2)
    if np.iscomplexobj(K):
        return RealifiedEigenbasis(Wc, lam, False, degenerate)

    scale = max(np.abs(lam).max(), np.finfo(float).tiny)
    W = np.empty((n, n))
    cplx = np.abs(lam.imag) > pair_tol * scale
    W[:, ~cplx] = Wc[:, ~cplx].real
    upper = [i for i in range(n) if cplx[i] and lam[i].imag > 0]
    lower = {i for i in range(n) if cplx[i] and lam[i].imag < 0}
    for i in upper:
        j = min(lower, key=lambda j: abs(lam[j] - np.conj(lam[i])), default=None)
        if j is None:
            raise DegenerateSpectrumError("unpaired complex eigenvalue of a real matrix")
        lower.discard(j)
        v = Wc[:, i]
        W[:, i] = np.sqrt(2.0) * v.real
        W[:, j] = -np.sqrt(2.0) * v.imag
    if lower:
        raise DegenerateSpectrumError("unpaired complex eigenvalue of a real matrix")
    return RealifiedEigenbasis(W, lam, True, degenerate)


# -- S4 ---------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_kernel_element(B: KernelBasis | np.ndarray, seed=None) -> np.ndarray:
    """Unit-coefficient Gaussian combination of the kernel basis."""
    Ks = B.matrices if isinstance(B, KernelBasis) else np.asarray(B)
    rng = _rng(seed)
    q = Ks.shape[0]
    k = rng.standard_normal(q)
    if np.iscomplexobj(Ks):
        k = k + 1j * rng.standard_normal(q)
    k = k / np.linalg.norm(k)
    return np.tensordot(k, Ks, axes=1)


def greedy_block_permutation(L: np.ndarray, d: int) -> np.ndarray:
    """0-based permutation grouping the rows of ``L`` into blocks of ``d``.

    Columns are scanned in order; a column contributes the rows of its ``d``
    largest magnitudes (ties to the lower row) unless one of them is taken.
    """
    A = np.abs(np.asarray(L))
    n = A.shape[0]
    if A.shape != (n, n) or n % d:
        raise DimensionError(f"need a square matrix with size divisible by {d}")
    used = np.zeros(n, dtype=bool)
    perm: list[int] = []
    for i in range(n):
        top = np.argsort(-A[:, i], kind="stable")[:d]
        if used[top].any():
            continue
        used[top] = True
        perm.extend(sorted(int(t) for t in top))
        if len(perm) == n:
            return np.array(perm, dtype=np.intp)
    raise PartitionError(f"greedy scan grouped only {len(perm)} of {n} indices")


# -- S5 ---------------------------------------------------------------------

def refine_invariant_subspace(Ks, Q: np.ndarray, p: int) -> np.ndarray:
    """K-subspace iteration: ``Q <- top-d left singular vectors of [K_1 Q ... K_q Q]``."""
    Ks = Ks.matrices if isinstance(Ks, KernelBasis) else np.asarray(Ks)
    n, d = Q.shape
    for _ in range(p):
        M = (Ks @ Q).transpose(1, 0, 2).reshape(n, -1)
        U, _, _ = np.linalg.svd(M, full_matrices=False)
        Q = U[:, :d]
    return Q


# -- S6 ---------------------------------------------------------------------

def sketch_dimension(n: int, d: int, r: int, omega: float = 2.0) -> int:
    """Smallest ``c`` with ``C(c, d) >= omega * r`` (at most ``n``), else ``n``."""
    for c in range(d, n + 1):
        if comb(c, d) >= omega * r:
            return c
    return n


@dataclass(frozen=True)
class SketchPlan:
    c: int
    omega: float
    Gamma: np.ndarray | None  # None means no sketch (c == n)

    @classmethod
    def make(cls, n: int, d: int, r: int, omega: float = 2.0, seed=None) -> "SketchPlan":
        c = sketch_dimension(n, d, r, omega)
        if c >= n:
            return cls(n, omega, None)
        return cls(c, omega, _rng(seed).standard_normal((c, n)))


def solve_coefficients(A: SkewTensor, blocks: np.ndarray, plan: SketchPlan | None = None) -> np.ndarray:
    """Least-squares coefficients of ``A`` in the wedges of ``blocks`` (r, n, d),
    solved on the sketched system by column-pivoted QR."""
    blocks = np.asarray(blocks)
    r = blocks.shape[0]
    if plan is None or plan.Gamma is None:
        sys = wedge_many(blocks).T
        rhs = A.coords
    else:
        sys = wedge_many(plan.Gamma @ blocks).T
        rhs = multilinear_multiply(A, plan.Gamma).coords
    Qf, R, piv = scipy.linalg.qr(sys, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(sys.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    if diag.size < r or diag[-1] <= tol:
        raise RankDeficiencyError("sketched system is numerically rank deficient; elementary terms are dependent")
    y = scipy.linalg.solve_triangular(R, Qf.conj().T @ rhs)
    x = np.empty_like(y)
    x[piv] = y
    return x


# -- drivers ----------------------------------------------------------------

def decompose_rank1(T: SkewTensor, tol: float = 1e-8) -> Decomposition:
    """Elementary tensor: the factor is any basis of the mode-1 column span."""
    d = T.d
    if d < 2:
        raise DimensionError("need d >= 2")
    U, s, _ = np.linalg.svd(flatten_mode1(T), full_matrices=False)
    if s.size < d or s[0] == 0 or s[d - 1] <= tol * s[0] or (s.size > d and s[d] > tol * s[0]):
        raise NotElementaryError(f"mode-1 numerical rank is not {d}")
    Q = U[:, :d]
    w = wedge(Q).coords
    idx = int(np.argmax(np.abs(T.coords)))
    alpha = T.coords[idx] / w[idx]
    return Decomposition(Q[None], np.array([alpha]), info={"path": "rank1"})


def _partition(kb: KernelBasis, d: int, rng: np.random.Generator, K: np.ndarray, timings: dict):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSpectrumWarning)
        evd = realified_evd(K)
    t1 = time.perf_counter()
    timings["S3"] += t1 - t0
    if evd.degenerate:
        raise DegenerateSpectrumError("kernel element has repeated eigenvalues")
    Kp = sample_kernel_element(kb, rng)
    if evd.realified:
        Kp = Kp.real
    L = np.linalg.solve(evd.W, Kp @ evd.W)
    perm = greedy_block_permutation(L, d)
    timings["S4"] += time.perf_counter() - t1
    return evd.W[:, perm]


def grassmann_decompose(T: SkewTensor, opts: DecomposeOptions | None = None, **kw) -> Decomposition:
    """Rank-``opts.rank`` Grassmann decomposition of ``T``.

    ``info`` on the result carries per-step timings and kernel diagnostics.
    """
    opts = opts or DecomposeOptions(**kw)
    r, d, m = opts.rank, T.d, T.n
    if r is None or r < 1:
        raise DimensionError("a positive rank is required")
    if d * r > m:
        raise DimensionError(f"rank {r} exceeds m/d = {m}/{d}")
    timings = dict.fromkeys(STEPS, 0.0)
    start = time.perf_counter()
    if r == 1:
        t0 = time.perf_counter()
        D = decompose_rank1(T, opts.rank1_tol)
        timings["S0"] = time.perf_counter() - t0
        D.info.update(timings=timings, total_seconds=time.perf_counter() - start, path="rank1")
        return D
    if d < 3:
        raise DimensionError("ranks above 1 need d >= 3")

    seeds = np.random.SeedSequence(opts.seed).spawn(3)
    rng_kernel, rng_retry, rng_sketch = (np.random.default_rng(s) for s in seeds)
    n = d * r
    q = r * (d * d - 1)

    t0 = time.perf_counter()
    comp = compress(T, n)
    A = comp.core
    t1 = time.perf_counter()
    G = gram(A)
    t2 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kb = kernel_basis(G, q)
    t3 = time.perf_counter()
    timings.update(S0=t1 - t0, S1=t2 - t1, S2=t3 - t2)

    K = kb.matrices[-1]
    if A.field == "real":
        K = K.real
    resampled = False
    try:
        WP = _partition(kb, d, rng_kernel, K, timings)
    except (DegenerateSpectrumError, PartitionError):
        resampled = True
        K = sample_kernel_element(kb, rng_retry)
        if A.field == "real":
            K = K.real
        WP = _partition(kb, d, rng_retry, K, timings)

    t5 = time.perf_counter()
    Ks = kb.matrices.real if A.field == "real" else kb.matrices
    blocks = []
    for i in range(r):
        Qi, _ = np.linalg.qr(WP[:, i * d:(i + 1) * d])
        blocks.append(refine_invariant_subspace(Ks, Qi, opts.p))
    blocks = np.stack(blocks)
    t6 = time.perf_counter()
    plan = SketchPlan.make(n, d, r, opts.omega, rng_sketch)
    x = solve_coefficients(A, blocks, plan)
    t7 = time.perf_counter()
    lifted = np.einsum("mn,rnd->rmd", comp.basis, blocks)
    t8 = time.perf_counter()
    D = Decomposition(lifted, x)
    timings.update(S5=t6 - t5, S6=t7 - t6, S7=t8 - t7)
    timings["S8"] = time.perf_counter() - t8
    D.info.update(
        path="full",
        timings=timings,
        total_seconds=time.perf_counter() - start,
        kernel=kb.diagnostics(),
        kernel_warnings=[str(w.message) for w in caught],
        compression_residual=comp.residual,
        sketch_dimension=plan.c,
        resampled=resampled,
    )
    return D
