import itertools
from fractions import Fraction

import numpy as np
import pytest

from quadreg import geometry
from quadreg.exactnum import ONE, ZERO, QuadNum, sqrt_int
from quadreg.geometry import (DegenerateAngle, EmptyFiber, GramSet, TwoPointFamily, annihilator_expand,
                              derive_one, derive_two, design_strength, gegenbauer, gegenbauer_poly)


def cross_polytope(m):
    vecs = []
    for i in range(m):
        for s in (1, -1):
            v = [0] * m
            v[i] = s
            vecs.append(v)
    return GramSet.from_vectors(vecs)


def simplex(m):
    # m + 1 points in R^{m+1} on the hyperplane sum = 0, Gram entries -1/m
    n = m + 1
    G = [[ONE if i == j else QuadNum(Fraction(-1, m)) for j in range(n)] for i in range(n)]
    from quadreg.exactnum import ExactMatrix
    return GramSet.from_matrix(ExactMatrix(G), m)


def test_gegenbauer_normalization():
    # Q_1(t) = m t, Q_2(t) = (m + 2)(m t^2 - 1) / 2, Q_k(1) = dim of harmonics
    m = 5
    assert gegenbauer_poly(1, m) == [0, m]
    assert gegenbauer_poly(2, m) == [Fraction(-(m + 2), 2), 0, Fraction(m * (m + 2), 2)]
    from math import comb
    for k in range(6):
        dim = comb(m + k - 1, k) - (comb(m + k - 3, k - 2) if k >= 2 else 0)
        assert gegenbauer(k, m, 1) == dim


def test_gegenbauer_orthogonality_against_numeric_quadrature():
    # weighted by (1 - t^2)^{(m-3)/2}
    m = 6
    t = np.linspace(-1, 1, 200001)
    w = (1 - t * t) ** ((m - 3) / 2)
    polys = [np.polynomial.Polynomial([float(c) for c in gegenbauer_poly(k, m)]) for k in range(4)]
    for a, b in itertools.combinations(range(4), 2):
        assert abs(np.trapezoid(polys[a](t) * polys[b](t) * w, t)) < 1e-6


@pytest.mark.parametrize("m", [2, 3, 5])
def test_cross_polytope_is_3_design(m):
    X = cross_polytope(m)
    assert design_strength(X) == 3
    assert X.is_antipodal()
    assert X.angle_set_prime() == [ZERO, QuadNum(-1)]


@pytest.mark.parametrize("m", [2, 3, 6])
def test_simplex_is_2_design(m):
    assert design_strength(simplex(m)) == 2


def test_annihilator_expansion_reproduces_polynomial(mub16, scheme16):
    X = mub16.point_gram()
    z2 = int(np.nonzero(scheme16.rel[0] == 2)[0][0])
    a = ONE / sqrt_int(16)
    Y = derive_two(X, 0, z2, a, a)
    coeffs = annihilator_expand(Y)
    m = Y.ambient_dim
    # F(1) = 1 and F vanishes on A'(Y)
    assert sum((c * gegenbauer(k, m, 1) for k, c in enumerate(coeffs)), ZERO) == 1
    for alpha in Y.angle_set_prime():
        assert sum((c * gegenbauer(k, m, alpha) for k, c in enumerate(coeffs)), ZERO) == 0
    d = 16
    assert coeffs[0] == Fraction(4, d * d)
    assert coeffs[1] * m == Fraction(2 * (d * d + 6) * (d - 2), d ** 3 * (d - 1))


def test_gram_json_round_trip(mub4):
    X = mub4.point_gram()
    Y = GramSet.from_json(X.to_json())
    assert np.array_equal(X.gram.tolist(), Y.gram.tolist())
    assert Y.labels == X.labels


def test_gram_rejects_bad_input():
    with pytest.raises(ValueError):
        GramSet(np.array([[0, 1], [0, 0]]), [ONE, ZERO], 2)
    with pytest.raises(ValueError):
        GramSet(np.array([[0, 1], [1, 0]]), [ONE, QuadNum(2)], 2)


def test_derive_one_d4(mub4):
    X = mub4.point_gram()
    Y = derive_one(X, 0, ONE / sqrt_int(4))
    # (sqrt d - 1)/(d - 1), -1/(d - 1), (-sqrt d - 1)/(d - 1) at d = 4
    assert Y.angle_set_prime() == [QuadNum(Fraction(1, 3)), QuadNum(Fraction(-1, 3)), QuadNum(-1)]
    assert Y.size == 8
    assert Y.ambient_dim == 3


def test_derive_errors(mub4):
    X = mub4.point_gram()
    with pytest.raises(DegenerateAngle):
        derive_one(X, 0, 1)
    with pytest.raises(EmptyFiber):
        derive_one(X, 0, QuadNum(Fraction(1, 3)))
    with pytest.raises(DegenerateAngle):
        derive_two(X, 0, 0, ZERO, ZERO)


def test_two_point_family_matches_derive_two(mub16, scheme16):
    X = mub16.point_gram()
    z2 = int(np.nonzero(scheme16.rel[0] == 2)[0][0])
    fam = TwoPointFamily(X, 0, z2, [(1, 1), (1, 3), (2, 2)])
    for a in range(3):
        cell = fam.cell(a)
        idx, vals = fam.cross(a, a)
        assert [vals[k] for k in np.diag(idx)] == [ONE] * cell.size
        assert sorted({vals[k] for k in np.unique(idx)}, reverse=True) == \
            sorted({cell.values[k] for k in np.unique(cell.index)}, reverse=True)
    assert [len(m) for m in fam.members] == [64, 64, 28]
    # the cross polytope cell against itself: {0, -1}
    assert fam.angle_set(2, 2, with_minus_one=True) == [ZERO, QuadNum(-1)]


def test_two_point_projection_against_floats(mub16, scheme16):
    """Projected inner products agree with a floating-point projection."""
    X = mub16.point_gram()
    vecs = np.array([[float(x) for x in v] for v in mub16.vectors()])
    V = np.vstack([vecs[b * 16:(b + 1) * 16] * s for b in range(mub16.f) for s in (1, -1)])
    z1, z2 = 0, int(np.nonzero(scheme16.rel[0] == 1)[0][0])
    fam = TwoPointFamily(X, z1, z2, [(1, 1), (2, 1)])
    P = V - np.outer(V @ V[z1], V[z1])
    u = V[z2] - (V[z2] @ V[z1]) * V[z1]
    u /= np.linalg.norm(u)
    P = P - np.outer(P @ u, u)
    for a, b in [(0, 0), (0, 1), (1, 1)]:
        A = P[fam.members[a]] / np.linalg.norm(P[fam.members[a]], axis=1)[:, None]
        B = P[fam.members[b]] / np.linalg.norm(P[fam.members[b]], axis=1)[:, None]
        idx, vals = fam.cross(a, b)
        exact = np.array([[float(vals[k]) for k in row] for row in idx])
        assert np.allclose(A @ B.T, exact, atol=1e-12)
