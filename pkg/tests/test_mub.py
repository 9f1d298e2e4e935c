import numpy as np
import pytest

from quadreg.exactnum import ONE, QuadNum, sqrt_int
from quadreg.mub import (BoundExceeded, EmptySelection, MUBSet, NotOrthonormal, NotUnbiased,
                         gram_from_idempotent, mub_to_scheme, standard_basis, sub_mub, verify_mub)


def _float_vectors(M):
    return np.array([[float(x) for x in v] for v in M.vectors()])


@pytest.mark.parametrize("which", ["mub4", "mub16"])
def test_constructions_are_unbiased_numerically(which, request):
    M = request.getfixturevalue(which)
    V = _float_vectors(M)
    G = V @ V.T
    d = M.d
    for a in range(M.f):
        for b in range(M.f):
            block = G[a * d:(a + 1) * d, b * d:(b + 1) * d]
            if a == b:
                assert np.allclose(block, np.eye(d))
            else:
                assert np.allclose(np.abs(block), 1 / np.sqrt(d))
    assert M.is_maximal and 2 * M.f == d + 2


def test_non_orthonormal_rejected():
    B = standard_basis(4)
    B[1] = [1, 0, 0, 0]
    with pytest.raises(NotOrthonormal):
        verify_mub([B])


def test_biased_pair_rejected(mub4):
    with pytest.raises(NotUnbiased):
        verify_mub([standard_basis(4), standard_basis(4)])
    assert verify_mub([mub4.bases[0], mub4.bases[1]]).f == 2


def test_bound_exceeded():
    # three bases of R^2 exceed f <= d/2 + 1 = 2
    r = ONE / sqrt_int(2)
    B1 = [[1, 0], [0, 1]]
    B2 = [[r, r], [r, -r]]
    B3 = [[r, -r], [r, r]]
    with pytest.raises((BoundExceeded, NotUnbiased)):
        verify_mub([B1, B2, B3])
    assert verify_mub([B1, B2]).is_maximal


def test_sub_mub_and_json(mub16):
    M = sub_mub(mub16, [0, 4, 8])
    assert (M.d, M.f, M.is_maximal) == (16, 3, False)
    N = MUBSet.from_json(M.to_json())
    assert N.bases == M.bases
    with pytest.raises(EmptySelection):
        sub_mub(mub16, [])


def test_point_order_and_labels(mub4):
    X = mub4.point_gram()
    assert X.size == 24
    assert X.labels[:8] == [(0, i, 1) for i in range(4)] + [(0, i, -1) for i in range(4)]
    assert X.entry(0, 4) == -1


def test_scheme_angles(mub4, scheme4):
    assert scheme4.angles == [ONE, QuadNum(1, 0) / 2, QuadNum(0), QuadNum(-1, 0) / 2, QuadNum(-1)]
    with pytest.raises(ValueError):
        mub_to_scheme(sub_mub(mub4, [1]))


def test_gram_from_idempotent_reproduces_inner_products(mub4, scheme4, scheme16, mub16):
    for M, S in ((mub4, scheme4), (mub16, scheme16)):
        X = gram_from_idempotent(S)
        assert X.ambient_dim == M.d
        Y = M.point_gram()
        assert all(X.entry(0, y) == Y.entry(0, y) for y in range(S.n))
