"""Lexicographic indexing of strictly increasing index tuples.

The public functions use 1-based tuples and positions, matching the on-disk
formats. The vectorized helpers (prefixed with ``_`` or named ``*_table``)
work 0-based and are what the numerical kernels use.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidIndexError


class SignedSort(NamedTuple):
    tuple: tuple[int, ...]
    sign: int


def rank_tuple(t: Sequence[int], n: int) -> int:
    """Position (1-based) of the increasing tuple ``t`` among all
    ``len(t)``-subsets of ``[1, n]`` in lexicographic order."""
    d = len(t)
    if d < 1:
        raise InvalidIndexError("tuple must have at least one entry")
    prev = 0
    for x in t:
        if x <= prev:
            raise InvalidIndexError(f"tuple {tuple(t)} is not strictly increasing from 1")
        prev = x
    if prev > n:
        raise InvalidIndexError(f"entry {prev} exceeds dimension {n}")
    # lex rank = C(n,d) - 1 - (colex rank of the complement-reflected tuple)
    total = comb(n, d)
    acc = sum(comb(n - x, d - i) for i, x in enumerate(t))
    return total - acc


def unrank_index(p: int, n: int, d: int) -> tuple[int, ...]:
    """Inverse of :func:`rank_tuple`."""
    total = comb(n, d)
    if d < 1 or not 1 <= p <= total:
        raise InvalidIndexError(f"position {p} outside [1, C({n},{d})={total}]")
    # walk the lexicographic tree, skipping whole subtrees
    rem = p - 1
    out = []
    x = 1
    for i in range(d):
        while True:
            block = comb(n - x, d - i - 1)
            if rem < block:
                break
            rem -= block
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def sort_signed(seq: Sequence[int]) -> SignedSort:
    """Sort ``seq`` and report the parity of the sorting permutation
    (0 when an index repeats)."""
    items = list(seq)
    srt = tuple(sorted(items))
    if any(a == b for a, b in zip(srt, srt[1:])):
        return SignedSort(srt, 0)
    inversions = sum(
        1 for i in range(len(items)) for j in range(i + 1, len(items)) if items[i] > items[j]
    )
    return SignedSort(srt, -1 if inversions % 2 else 1)


def permutation_sign(perm: Sequence[int]) -> int:
    return sort_signed(perm).sign


@lru_cache(maxsize=None)
def combos(n: int, d: int) -> np.ndarray:
    """All 0-based increasing d-tuples from range(n), lexicographic, shape (C(n,d), d)."""
    if d == 0:
        return np.zeros((1, 0), dtype=np.intp)
    arr = np.array(list(combinations(range(n), d)), dtype=np.intp)
    return arr.reshape(-1, d)


@lru_cache(maxsize=None)
def _binom_table(n: int) -> np.ndarray:
    tab = np.zeros((n + 2, n + 2), dtype=np.int64)
    for a in range(n + 2):
        for b in range(a + 1):
            tab[a, b] = comb(a, b)
    return tab


def rank_rows(tuples: np.ndarray, n: int) -> np.ndarray:
    """Vectorized 0-based lexicographic rank of each row of ``tuples``
    (0-based increasing entries)."""
    tuples = np.asarray(tuples, dtype=np.intp)
    k = tuples.shape[-1]
    if k == 0:
        return np.zeros(tuples.shape[:-1], dtype=np.intp)
    tab = _binom_table(n)
    offs = np.arange(k)
    acc = tab[n - 1 - tuples, k - offs].sum(axis=-1)
    return (comb(n, k) - 1 - acc).astype(np.intp)


@lru_cache(maxsize=None)
def removal_table(n: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For each k-tuple K (row) and each position t (column): the removed
    entry ``K[t]``, the rank of ``K`` without it, and ``(-1)**t``.

    This one table drives mode-1 flattening, Laplace-expansion wedges and
    the inverse of the last-mode flattening.
    """
    K = combos(n, k)
    N = K.shape[0]
    removed = K.copy()
    rest_rank = np.empty((N, k), dtype=np.intp)
    for t in range(k):
        rest = np.delete(K, t, axis=1)
        rest_rank[:, t] = rank_rows(rest, n)
    sign = np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
    sign = np.broadcast_to(sign, (N, k)).copy()
    for arr in (removed, rest_rank, sign):
        arr.setflags(write=False)
    return removed, rest_rank, sign
