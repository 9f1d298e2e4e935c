import itertools
from collections import defaultdict

import numpy as np
import pytest

from quadreg import regularity as R
from quadreg.geometry import TwoPointFamily
from quadreg.scheme import AssociationScheme

from conftest import complete_graph_rel


def oracle_regular(rel, t):
    """Brute force: every t-tuple, counts over the extra point keyed by its classes to the tuple."""
    n = rel.shape[0]
    B = int(rel.max()) + 1
    seen = {}
    for tup in itertools.product(range(n), repeat=t):
        typ = tuple(int(rel[a, b]) for a, b in itertools.combinations(tup, 2))
        code = np.zeros(n, dtype=np.int64)
        for x in tup:
            code = code * B + rel[x]
        counts = tuple(np.bincount(code, minlength=B ** t).tolist())
        if seen.setdefault(typ, counts) != counts:
            return False
    return True


@pytest.mark.parametrize("n", [3, 5, 8])
def test_complete_graph_regular(n):
    S = AssociationScheme.from_relations(complete_graph_rel(n))
    tri = R.triple_regular(S)
    assert tri.verdict
    # the only nontrivial count: w off the three distinct points
    assert tri.tensor.get("1,1,1", {}).get("1,1,1", 0) == max(n - 3, 0)
    assert R.quadruple_regular(S).verdict


def test_triple_tensor_marginals(scheme4):
    S = scheme4
    rep = R.triple_regular(S)
    for key, counts in rep.tensor.items():
        i, j, k = map(int, key.split(","))
        marg = defaultdict(int)
        for lmn, c in counts.items():
            l, m, n_ = map(int, lmn.split(","))
            marg[(m, n_)] += c
        for (m, n_), c in marg.items():
            assert c == S.p[m, n_, i]


def test_kernel_agrees_with_bruteforce_oracle(scheme4, scheme_lsd3):
    assert R.triple_regular(scheme4).verdict == oracle_regular(scheme4.rel, 3) is True
    assert R.quadruple_regular(scheme4).verdict == oracle_regular(scheme4.rel, 4) is True
    assert R.triple_regular(scheme_lsd3).verdict == oracle_regular(scheme_lsd3.rel, 3) is False


def test_cycle_scheme_against_oracle():
    i = np.arange(8)
    diff = np.abs(i[:, None] - i[None, :])
    S = AssociationScheme.from_relations(np.minimum(diff, 8 - diff))
    assert R.triple_regular(S).verdict == oracle_regular(S.rel, 3)
    assert R.quadruple_regular(S).verdict == oracle_regular(S.rel, 4)


def test_witness_is_lexicographically_first(scheme_lsd3):
    rep = R.triple_regular(scheme_lsd3)
    w = rep.witness
    rel = scheme_lsd3.rel
    # recount both triples directly
    def count(tup, key):
        return int(np.all([rel[x] == c for x, c in zip(tup, key)], axis=0).sum())
    assert [count(w["reference"], w["key"]), count(w["tuple"], w["key"])] == w["counts"]
    # no earlier triple (row-major over (x, y, z)) is inconsistent with its first-seen reference
    n = rel.shape[0]
    x0, y0, z0 = w["tuple"]
    seen = {}
    for x in range(x0 + 1):
        for y in range(n):
            for z in range(n):
                if (x, y, z) >= (x0, y0, z0):
                    break
                typ = (rel[x, y], rel[x, z], rel[y, z])
                vec = tuple(np.bincount(rel[x] * 25 + rel[y] * 5 + rel[z], minlength=125))
                assert seen.setdefault(typ, vec) == vec


def test_too_large_for_exhaustive(scheme16):
    with pytest.raises(R.TooLargeForExhaustive):
        R.quadruple_regular(scheme16, "exhaustive")


def test_sampled_is_deterministic(mub16_f3):
    from quadreg.mub import mub_to_scheme
    S = mub_to_scheme(mub16_f3)
    a = R.quadruple_regular(S, "sampled", samples=2000, seed=7)
    b = R.quadruple_regular(S, "sampled", samples=2000, seed=7)
    assert a.to_json() == b.to_json() and a.verdict is False
    with pytest.raises(ValueError):
        R.quadruple_regular(S, "sampled")


def test_structured_agrees_with_exhaustive_on_d4(scheme4):
    a = R.quadruple_regular(scheme4, "exhaustive")
    b = R.quadruple_regular(scheme4, "structured", seed=3)
    assert a.verdict == b.verdict is True
    assert "non-exhaustive" not in " ".join(b.notes)


def test_structured_rejects_non_maximal(mub16_f3):
    from quadreg.mub import mub_to_scheme
    rep = R.quadruple_regular(mub_to_scheme(mub16_f3), "structured", seed=1, pairs_per_class=20)
    assert rep.verdict is False and rep.witness is not None


def test_report_json_digest_stable(scheme4):
    a = R.triple_regular(scheme4).to_json()
    b = R.triple_regular(scheme4).to_json()
    assert a == b and len(a["digest"]) == 64


# ---------------------------------------------------------------------------
# coherent configurations


def test_scheme_is_one_fiber_cc(scheme4):
    cc = R.scheme_as_cc(scheme4)
    assert cc.fiber_count == 1 and cc.rank == 5
    for (t, r, s), c in cc.tensor.items():
        assert scheme4.p[r, s, t] == c


def test_random_partition_fails():
    rng = np.random.default_rng(0)
    n = 12
    rel = rng.integers(1, 4, size=(n, n))
    rel = np.triu(rel, 1)
    rel = rel + rel.T
    with pytest.raises((R.NumbersInconsistent, R.NotRefining)) as exc:
        R.verify_cc(np.zeros(n, dtype=int), rel)
    assert exc.value.witness is not None


def test_cc_axiom_violations():
    rel = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    with pytest.raises(R.NotRefining):
        R.verify_cc([0, 0, 1], rel)  # relation 1 spans fiber pairs (0,0) and (0,1)
    with pytest.raises(R.NotTransposeClosed):
        R.verify_cc([0, 0, 0], np.array([[0, 1, 1], [2, 0, 1], [1, 2, 0]]))
    with pytest.raises(R.NotRefining):
        R.verify_cc([0, 0], np.array([[0, 0], [0, 0]]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_two_point_partition_census_and_cc(scheme4, m):
    S = scheme4
    z2 = int(np.nonzero(S.rel[0] == m)[0][0])
    part = R.two_point_partition(S, 0, z2)
    for (i, j), size in part.census().items():
        assert size == S.p[i, j, m]
    cc = R.partition_cc(S, part)
    assert cc.fiber_count == len(part.cells)


def test_two_point_partition_d16(scheme16):
    z2 = int(np.nonzero(scheme16.rel[0] == 2)[0][0])
    census = R.two_point_partition(scheme16, 0, z2).census()
    assert census[(1, 1)] == 64 and census[(1, 3)] == 64 and census[(2, 2)] == 28
    with pytest.raises(ValueError):
        R.two_point_partition(scheme16, 0, 0)


def test_complete_graph_partition():
    S = AssociationScheme.from_relations(complete_graph_rel(6))
    assert R.two_point_partition(S, 0, 1).census() == {(1, 1): 4}


def test_partition_parameters_independent_of_pair(scheme4):
    S = scheme4
    tensors = set()
    for z2 in np.nonzero(S.rel[0] == 2)[0]:
        part = R.two_point_partition(S, 0, int(z2))
        tensors.add(tuple(sorted(R.partition_cc(S, part).named_tensor().items())))
    assert len(tensors) == 1


def test_antipodal_double_matches_direct(mub4, scheme4, mub16, scheme16):
    for M, S in ((mub4, scheme4), (mub16, scheme16)):
        X = M.point_gram()
        z2 = int(np.nonzero(S.rel[0] == 2)[0][0])
        res = R.antipodal_double(X, 0, z2, [(1, 1), (2, 2)])
        # (2,2) is its own antipode, (1,1) doubles to (3,3)
        assert res.fibers == [(0, 1), (1, 1), (0, -1)]
        assert res.derived == res.doubled.tensor


def test_antipodal_double_single_pair(mub16, scheme16):
    X = mub16.point_gram()
    z2 = int(np.nonzero(scheme16.rel[0] == 1)[0][0])
    res = R.antipodal_double(X, 0, z2, [(1, 2)])
    assert len(res.fibers) == 2 and res.doubled.fiber_count == 2


def test_ladder_holds_on_maximal_mub(mub16, scheme16):
    X = mub16.point_gram()
    for m in (1, 2, 3):
        z2 = int(np.nonzero(scheme16.rel[0] == m)[0][0])
        rep = R.theorem26_conditions(TwoPointFamily(X, 0, z2, R.admissible_cells(X, 0, z2)))
        assert rep.all_hold
    z2 = int(np.nonzero(scheme16.rel[0] == 2)[0][0])
    rep = R.theorem26_conditions(TwoPointFamily(X, 0, z2, R.admissible_cells(X, 0, z2)))
    assert rep.t == [3, 3, 3]
    # the (2,2,3) triple needs condition (2): s_22 + s_23 - 3 = t_2
    assert rep.conditions[(1, 1, 2)]["cond2"] is True


class _FakeFamily:
    """Cells given directly as lists of unit vectors."""

    def __init__(self, cells):
        self.cells = list(range(len(cells)))
        self._pts = [np.array(c, dtype=float) for c in cells]

    def cross(self, a, b):
        from quadreg.exactnum import QuadNum
        G = np.rint(self._pts[a] @ self._pts[b].T).astype(int)
        vals = sorted({int(v) for v in G.ravel()}, reverse=True)
        idx = np.vectorize(vals.index)(G)
        return idx, [QuadNum(v) for v in vals]


def test_dichotomy_violation():
    e = np.eye(3)
    R._check_dichotomy(_FakeFamily([e[[0, 1]], e[[0, 1]]]))  # equal cells
    R._check_dichotomy(_FakeFamily([e[[0, 1]], -e[[0, 1]]]))  # antipodal cells
    R._check_dichotomy(_FakeFamily([e[[0]], e[[1, 2]]]))  # disjoint cells
    with pytest.raises(R.DichotomyViolated):
        R._check_dichotomy(_FakeFamily([e[[0, 1]], e[[0, 2]]]))
    with pytest.raises(R.DichotomyViolated):
        R._check_dichotomy(_FakeFamily([e[[0, 0]]]))


def test_derived_count_entry_seven(mub16, scheme16):
    X = mub16.point_gram()
    z2 = int(np.nonzero(scheme16.rel[0] == 2)[0][0])
    res = R.check_derived_counts(X, 16, [(0, z2)])
    row = next(r for r in res if r["ijk"] == (2, 2, 3) and r["ab"] == (2, 2))
    assert row["observed"] == [0, 7, 0] and row["ok"]


def test_closed_form_consistency_flags_claimed_forms():
    issues = R.closed_form_consistency(16, 9)
    assert set(issues) == {"B1", "Q"}
    assert any("144" in msg for msg in issues["Q"])


def test_corrected_closed_forms(sub16):
    d, f, r = 16, 9, 4
    B1 = sub16.B(1)
    assert B1[1, 2] == (f - 2) * (d + 2 * r) // 4 == 42
    assert B1[1, 3] == (f - 3) * (d + r) // 4 == 30
    assert [sub16.Q[0, j] for j in range(4)] == [1, d - 1, (f - 2) * (d - 1), f - 2]
    assert [sub16.Q[2, j] for j in range(4)] == [1, -1, -(f - 2), f - 2]
