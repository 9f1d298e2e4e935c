import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from quadreg import designs
from quadreg.exactnum import QuadNum
from quadreg.designs import (IdentityViolated, LinkedSystem, NonSquareN, NotLambdaBalanced, NotLinked,
                             NotRegular, difference_set_design, integral_point_scan, linkage_constants,
                             lsd_to_scheme, noda_check, quad_counting, quartic_obstruction, quartic_value,
                             scheme_to_lsd, verify_design, verify_linked)


def test_fano_plane_and_complement():
    N = difference_set_design(7, [0, 1, 3])
    D = verify_design(N)
    assert D.params == (7, 3, 1)
    assert D.complement().params == (7, 4, 2)


def test_design_violations():
    N = difference_set_design(7, [0, 1, 3]).astype(np.int64)
    N[3, 0] ^= 1
    with pytest.raises(NotRegular) as exc:
        verify_design(N)
    assert exc.value.witness == ("row", 3)
    # regular but not balanced: two disjoint copies of K_{2}
    M = np.kron(np.eye(2, dtype=int), np.ones((2, 2), dtype=int))
    with pytest.raises(NotLambdaBalanced):
        verify_design(M)


def test_linkage_constant_branches():
    br = linkage_constants(16, 6, 2)
    assert br["+"] == (Fraction(1), Fraction(3))
    assert br["-"] == (Fraction(7, 2), Fraction(3, 2))
    br = linkage_constants(16, 10, 6)
    assert br["-"] == (Fraction(7), Fraction(5))
    with pytest.raises(NonSquareN):
        linkage_constants(7, 3, 1)


def test_lsd_from_mub_both_branches(sub16, lsd8):
    system, fibers = scheme_to_lsd(sub16)
    assert (system.f, system.v, system.k, system.sigma, system.tau, system.sign) == (8, 16, 10, 7, 5, "-")
    assert sorted(len(F) for F in fibers) == [16] * 8
    rep = verify_linked(lsd8)
    assert (rep.v, rep.k, rep.lam, rep.sigma, rep.tau, rep.sign) == (16, 6, 2, 1, 3, "+")


def test_linked_json_round_trip(lsd8):
    L = LinkedSystem.from_json(lsd8.to_json())
    for key, N in lsd8.incidences.items():
        assert np.array_equal(L.incidences[key], N)


def test_corrupted_linked_system_has_witness(lsd8):
    inc = dict(lsd8.incidences)
    N = inc[(0, 1)].copy()
    # swap two columns on the rows of one block: keeps the (0,1) design, breaks linkage
    N[:, [0, 1]] = N[:, [1, 0]]
    inc[(0, 1)] = N
    bad = LinkedSystem(lsd8.f, lsd8.v, inc)
    with pytest.raises(NotLinked) as exc:
        verify_linked(bad)
    assert exc.value.witness is not None


def test_scheme_round_trip(scheme_lsd8, lsd8):
    system, _ = scheme_to_lsd(scheme_lsd8)
    assert (system.f, system.k, system.sigma, system.tau) == (8, 6, 1, 3)
    assert scheme_lsd8.k == [1, 42, 15, 70]
    assert scheme_lsd8.a1_star == 0


def test_subsystem_a1_star(scheme_lsd3):
    assert scheme_lsd3.a1_star == Fraction(10, 3)


def test_noda():
    assert designs.noda_rhs(16, 6) == 7
    rep = noda_check(f=8, v=16, k=6)
    assert rep.is_equality and rep.inequality_holds
    rep = noda_check(f=3, v=16, k=6)
    assert not rep.is_equality and rep.inequality_holds
    # the complement design gives the same bound
    assert noda_check(f=8, v=16, k=10).is_equality


def test_quad_counting_identities(lsd8, lsd3):
    dist = quad_counting(lsd8, 3)
    assert dist.histogram == {0: 140, 1: 1680}
    # independent recount for a handful of 4-subsets
    others = np.hstack([lsd8.incidence(3, j) for j in range(8) if j != 3])
    for S in [(0, 1, 2, 3), (2, 5, 9, 15), (4, 7, 8, 11)]:
        alpha = int(np.all(others[list(S)] == 1, axis=0).sum())
        assert alpha in dist.histogram
    small = quad_counting(lsd3, 0)
    assert small.sum_alpha == small.rhs_alpha == 2 * 16 * math.comb(6, 4)


def test_quad_counting_detects_broken_identity(lsd8):
    L = LinkedSystem(lsd8.f, lsd8.v, lsd8.incidences)
    verify_linked(L)
    L.k = 7  # wrong parameter on purpose
    with pytest.raises(IdentityViolated):
        quad_counting(L, 0)


def test_quartic():
    assert quartic_value(16, 6) == 64
    rep = quartic_obstruction(3)
    assert rep.square_check
    assert set(rep.k_roots) == {QuadNum(2), QuadNum(1)}
    for k in rep.k_roots:
        assert quartic_value(3, int(k.to_fraction())) == 0
    assert integral_point_scan(-100, 100) == [-3, -1, 0, 1, 3]
    assert not quartic_obstruction(16).square_check
