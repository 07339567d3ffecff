from itertools import permutations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from grassdecomp.errors import DimensionError, SizeError
from grassdecomp.indexing import combos
from grassdecomp.skew import (
    SkewTensor,
    dense_unfold,
    dense_wedge,
    flatten_last,
    flatten_mode1,
    flatten_modes12,
    frobenius_inner,
    from_dense,
    to_dense,
    unflatten_last,
    wedge,
)

from conftest import rand_coords

E = np.eye


def test_wedge_unit_basis():
    A = wedge([E(5)[:, 0], E(5)[:, 1], E(5)[:, 2]])
    expected = np.zeros(comb(5, 3))
    expected[0] = 1.0
    assert np.array_equal(A.coords, expected)


def test_wedge_two_by_two_determinant():
    A = wedge([np.array([1.0, 1.0]), np.array([1.0, -1.0])])
    assert A.coords.tolist() == [-2.0]


@pytest.mark.parametrize("d,n", [(1, 4), (2, 5), (3, 5), (3, 6), (4, 6)])
@pytest.mark.parametrize("field", ["real", "complex"])
def test_wedge_matches_permutation_sum(rng, d, n, field):
    V = rand_coords(rng, (n, d), field)
    dense = dense_wedge(list(V.T))
    assert np.allclose(to_dense(wedge(V)), dense, rtol=0, atol=1e-12 * np.abs(dense).max())
    assert np.allclose(wedge(V).coords, from_dense(dense).coords, atol=1e-12 * np.abs(dense).max())


def test_wedge_rejects_too_many_vectors():
    with pytest.raises(DimensionError):
        wedge(np.ones((2, 3)))


def test_to_dense_examples():
    assert to_dense(SkewTensor.basis([1, 2], 2)).tolist() == [[0, 1], [-1, 0]]
    assert not to_dense(SkewTensor.zeros(4, 3)).any()
    X = to_dense(SkewTensor.basis([1, 2, 3], 3))
    for idx in np.ndindex(3, 3, 3):
        if len(set(idx)) < 3:
            assert X[idx] == 0
        else:
            inv = sum(idx[a] > idx[b] for a in range(3) for b in range(a + 1, 3))
            assert X[idx] == (-1) ** inv


def test_to_dense_antisymmetric(rng):
    X = to_dense(SkewTensor(rng.standard_normal(comb(5, 3)), 5, 3))
    assert np.array_equal(X, -X.transpose(1, 0, 2))
    assert np.array_equal(X, -X.transpose(0, 2, 1))


def test_dense_guard(monkeypatch):
    monkeypatch.setenv("GDT_MAX_DENSE", "100")
    with pytest.raises(SizeError):
        to_dense(SkewTensor.zeros(5, 3))


def test_flatten_mode1_example():
    F = flatten_mode1(SkewTensor.basis([1, 2, 3], 3))
    assert F.tolist() == [[0, 0, 1], [0, -1, 0], [1, 0, 0]]
    assert not flatten_mode1(SkewTensor.zeros(5, 3)).any()


@pytest.mark.parametrize("field", ["real", "complex"])
def test_flatten_mode1_span_matches_dense_unfolding(rng, field):
    n, d = 6, 3
    A = SkewTensor(rand_coords(rng, comb(n, d), field), n, d)
    F = flatten_mode1(A)
    D = dense_unfold(to_dense(A), 1)
    assert np.linalg.matrix_rank(F) == np.linalg.matrix_rank(D) == n
    # with deficient span: compress a rank-1 instance into 6 dims
    V = rand_coords(rng, (n, d), field)
    B = wedge(V)
    angles = subspace_angles(np.linalg.svd(flatten_mode1(B))[0][:, :3],
                             np.linalg.svd(dense_unfold(to_dense(B), 1))[0][:, :3])
    assert angles.max() < 1e-10
    # the dense unfolding carries every intrinsic column (d-1)! times
    assert np.allclose(D @ D.conj().T, 2 * F @ F.conj().T)


def test_flatten_modes12_example():
    F = flatten_modes12(SkewTensor.basis([1, 2, 3], 3))
    nz = {(int(r), int(c)): F[r, c] for r, c in zip(*np.nonzero(F))}
    row = lambda i, j: (i - 1) * 3 + (j - 1)
    col = {3: 2, 2: 1, 1: 0}
    expected = {
        (row(1, 2), col[3]): 1, (row(2, 1), col[3]): -1,
        (row(1, 3), col[2]): -1, (row(3, 1), col[2]): 1,
        (row(2, 3), col[1]): 1, (row(3, 2), col[1]): -1,
    }
    assert nz == expected
    assert not flatten_modes12(SkewTensor.zeros(4, 3)).any()


@pytest.mark.parametrize("field", ["real", "complex"])
def test_flatten_modes12_gram_matches_dense(rng, field):
    n, d = 8, 4
    A = SkewTensor(rand_coords(rng, comb(n, d), field), n, d)
    F = flatten_modes12(A)
    D = dense_unfold(to_dense(A), 2)
    assert np.allclose(D @ D.conj().T, 2 * (F @ F.conj().T), atol=1e-10 * np.abs(D).max() ** 2)


def test_unflatten_last_examples(rng):
    A = SkewTensor.basis([1, 2, 3], 3)
    assert unflatten_last(flatten_last(A), 3).tolist() == [1.0]
    assert not unflatten_last(np.zeros((comb(5, 2), 5)), 3).any()
    B = SkewTensor(rng.standard_normal(comb(6, 3)), 6, 3)
    Y = dense_unfold(to_dense(B), 2)[combos_rows(6, 2)]  # dense last-mode unfolding at increasing rows
    alpha, dev = unflatten_last(Y, 3, return_deviation=True)
    assert np.allclose(alpha, B.coords, rtol=0, atol=1e-15)
    assert dev < 1e-15


def combos_rows(n, k):
    """Row indices of the dense (n**k)-row unfolding at increasing k-tuples."""
    K = combos(n, k)
    return np.ravel_multi_index(tuple(K.T), (n,) * k)


def test_frobenius_inner_examples(rng):
    e = SkewTensor.basis([1, 2, 3], 5)
    assert frobenius_inner(e, e) == 1
    assert frobenius_inner(e, SkewTensor.basis([1, 2, 4], 5)) == 0
    U = rand_coords(rng, (6, 3), "complex")
    W = rand_coords(rng, (6, 3), "complex")
    assert np.isclose(frobenius_inner(wedge(U), wedge(W)), np.linalg.det(U.conj().T @ W), rtol=1e-12)
    with pytest.raises(DimensionError):
        frobenius_inner(e, SkewTensor.basis([1, 2], 5))


# -- wedge properties ---------------------------------------------------------

vec_params = st.tuples(st.integers(2, 6), st.integers(0, 2**32 - 1))


@settings(max_examples=40, deadline=None)
@given(vec_params, st.floats(-3, 3), st.floats(-3, 3))
def test_wedge_multilinear(params, alpha, beta):
    n, seed = params
    rng = np.random.default_rng(seed)
    d = rng.integers(1, n + 1)
    V = rng.standard_normal((n, d))
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    k = rng.integers(d)
    def with_col(x):
        W = V.copy()
        W[:, k] = x
        return wedge(W).coords
    lhs = with_col(alpha * u + beta * v)
    rhs = alpha * with_col(u) + beta * with_col(v)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(rhs).max()))


@settings(max_examples=40, deadline=None)
@given(vec_params)
def test_wedge_antisymmetric_and_nilpotent(params):
    n, seed = params
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, n + 1))
    V = rng.standard_normal((n, d))
    a, b = rng.choice(d, 2, replace=False)
    S = V.copy()
    S[:, [a, b]] = S[:, [b, a]]
    assert np.allclose(wedge(S).coords, -wedge(V).coords, rtol=0,
                       atol=1e-14 * np.abs(wedge(V).coords).max())
    Dep = V.copy()
    Dep[:, a] = V[:, [i for i in range(d) if i != a]] @ rng.standard_normal(d - 1)
    bound = 1e-10 * np.prod(np.linalg.norm(Dep, axis=0))
    assert np.linalg.norm(wedge(Dep).coords) <= bound


@settings(max_examples=30, deadline=None)
@given(vec_params)
def test_change_of_basis_scales_by_determinant(params):
    n, seed = params
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, n + 1))
    Vp = rng.standard_normal((n, d))
    X = rng.standard_normal((d, d))
    lhs = wedge(Vp @ X).coords
    rhs = np.linalg.det(X) * wedge(Vp).coords
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-10 * max(1.0, np.abs(rhs).max()))


def test_full_wedge_is_determinant(rng):
    V = rng.standard_normal((5, 5))
    assert np.isclose(wedge(V).coords[0], np.linalg.det(V), rtol=1e-12)


@pytest.mark.parametrize("d,r,n", [(3, 1, 6), (3, 2, 8), (4, 2, 9)])
def test_mode1_rank_bounded_by_dr(rng, d, r, n):
    A = sum((wedge(rng.standard_normal((n, d))) for _ in range(r)), SkewTensor.zeros(n, d))
    s = np.linalg.svd(flatten_mode1(A), compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) == d * r


def test_tensor_is_immutable(rng):
    A = SkewTensor(rng.standard_normal(4), 4, 3)
    with pytest.raises(ValueError):
        A.coords[0] = 1.0
    with pytest.raises(DimensionError):
        SkewTensor(np.zeros(3), 4, 3)


def test_permutation_sum_oracle_small():
    # literal definition check for the oracle itself
    e = np.eye(3)
    X = dense_wedge([e[0], e[1], e[2]])
    for perm in permutations(range(3)):
        inv = sum(perm[a] > perm[b] for a in range(3) for b in range(a + 1, 3))
        assert X[perm] == (-1) ** inv
