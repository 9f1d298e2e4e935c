"""Real mutually unbiased bases: verification, constructions, and their 4-class schemes."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .codes import nordstrom_robinson
from .exactnum import (QuadNum, common_field, exact_gram_parts, integer_split, sqrt_int,
                       squarefree_decomposition)
from .geometry import GramSet
from .scheme import AssociationScheme


class NotOrthonormal(ValueError):
    pass


class NotUnbiased(ValueError):
    pass


class BoundExceeded(ValueError):
    pass


class PartitionFailed(RuntimeError):
    pass


class EmptySelection(ValueError):
    pass


class NotIdempotent(ValueError):
    pass


class WrongAngles(ValueError):
    pass


class MUBSet:
    """f orthonormal bases of R^d, pairwise unbiased.  Build with verify_mub()."""

    def __init__(self, d: int, bases: Sequence[Sequence[Sequence]]):
        self.d = d
        self.bases = [[tuple(QuadNum.coerce(x) for x in v) for v in B] for B in bases]
        self.f = len(self.bases)
        self.D = common_field(x for B in self.bases for v in B for x in v)
        self.sqrt_d = sqrt_int(d)

    @property
    def is_maximal(self) -> bool:
        return 2 * self.f == self.d + 2

    def vectors(self) -> list[tuple]:
        return [v for B in self.bases for v in B]

    @cached_property
    def _signed(self) -> tuple[list[tuple], list[tuple]]:
        vecs, labels = [], []
        for b, B in enumerate(self.bases):
            for s in (1, -1):
                for i, v in enumerate(B):
                    vecs.append(v if s == 1 else tuple(-x for x in v))
                    labels.append((b, i, s))
        return vecs, labels

    def point_gram(self) -> GramSet:
        """Gram data of X = M ∪ -M, points ordered basis by basis (vectors, then negatives)."""
        if not hasattr(self, "_gram"):
            vecs, labels = self._signed
            self._gram = GramSet.from_vectors(vecs, labels)
        return self._gram

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "D": self.D,
            "f": self.f,
            "bases": [[[list(x.to_tuple()) for x in v] for v in B] for B in self.bases],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MUBSet":
        bases = [[[QuadNum.from_tuple(t) for t in v] for v in B] for B in data["bases"]]
        M = verify_mub(bases)
        if M.d != data["d"] or M.f != data["f"]:
            raise ValueError("header disagrees with the bases")
        return M

    def __repr__(self):
        return f"MUBSet(d={self.d}, f={self.f}, maximal={self.is_maximal})"


def verify_mub(bases: Sequence[Sequence[Sequence]]) -> MUBSet:
    """Check orthonormality, unbiasedness and f <= d/2 + 1; return the verified set."""
    if not bases or not bases[0]:
        raise ValueError("need at least one basis")
    d = len(bases[0][0])
    for b, B in enumerate(bases):
        if len(B) != d or any(len(v) != d for v in B):
            raise NotOrthonormal(f"basis {b} is not d={d} vectors of length {d}")
    M = MUBSet(d, bases)
    ga, gb, den = exact_gram_parts(M.vectors(), M.D)
    # unbiased: value^2 == 1/d, value = (a + b sqrt D)/den
    a2 = ga.astype(object) ** 2 + M.D * gb.astype(object) ** 2
    ab = ga.astype(object) * gb.astype(object)
    for b1 in range(M.f):
        s1 = slice(b1 * d, (b1 + 1) * d)
        block_a, block_b = ga[s1, s1], gb[s1, s1]
        if not (np.array_equal(block_a, den * np.eye(d, dtype=block_a.dtype)) and not block_b.any()):
            i, j = np.argwhere((block_a != den * np.eye(d, dtype=block_a.dtype)) | (block_b != 0))[0]
            raise NotOrthonormal(f"basis {b1}: <v{i}, v{j}> = {M_entry(ga, gb, den, M.D, b1 * d + i, b1 * d + j)}")
        for b2 in range(b1 + 1, M.f):
            s2 = slice(b2 * d, (b2 + 1) * d)
            # x^2 = 1/d  <=>  (a^2 + D b^2) * d == den^2 and a*b == 0
            ok = (a2[s1, s2] * d == den * den) & (ab[s1, s2] == 0)
            if not np.all(ok):
                i, j = np.argwhere(~ok)[0]
                raise NotUnbiased(f"bases {b1},{b2}: <v{i}, w{j}> = "
                                  f"{M_entry(ga, gb, den, M.D, b1 * d + i, b2 * d + j)}")
    if 2 * M.f > d + 2:
        raise BoundExceeded(f"f = {M.f} > d/2 + 1 = {Fraction(d, 2) + 1}")
    return M


def M_entry(ga, gb, den, D, x, y) -> QuadNum:
    return QuadNum(Fraction(int(ga[x, y]), den), Fraction(int(gb[x, y]), den), D)


def standard_basis(d: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(d)] for i in range(d)]


def _hadamard_search(d: int) -> list[list[tuple[int, ...]]]:
    """Lexicographically first d/2 unbiased sign bases (+-1 entries, first sign +)."""
    root = squarefree_decomposition(d)
    if root[1] != 1:
        raise ValueError("sign-vector search needs a square dimension")
    sq = root[0]
    pats = [p for p in itertools.product((0, 1), repeat=d) if p[0] == 0]
    ham = lambda u, v: sum(a != b for a, b in zip(u, v))
    ortho = {(u, v): ham(u, v) == d // 2 for u in pats for v in pats}
    unbiased = {(u, v): abs(d - 2 * ham(u, v)) == sq for u in pats for v in pats}
    target = d // 2

    def extend_basis(basis, pool):
        if len(basis) == d:
            yield list(basis)
            return
        start = pool.index(basis[-1]) + 1 if basis else 0
        for v in pool[start:]:
            if all(ortho[(u, v)] for u in basis):
                yield from extend_basis(basis + [v], pool)

    def search(chosen):
        if len(chosen) == target:
            return chosen
        used = [v for B in chosen for v in B]
        pool = [v for v in pats if all(unbiased[(u, v)] for u in used)]
        for B in extend_basis([], pool):
            out = search(chosen + [B])
            if out:
                return out
        return None

    found = search([])
    if found is None:
        raise RuntimeError("sign-vector search failed")
    return found


def _sign_vectors(patterns, d: int) -> list[list[QuadNum]]:
    inv = QuadNum(1) / sqrt_int(d)
    return [[-inv if bit else inv for bit in p] for p in patterns]


def construct_d4() -> MUBSet:
    """Maximal real MUB in R^4 (f = 3) by exhaustive sign-vector search."""
    bases = [standard_basis(4)] + [_sign_vectors(B, 4) for B in _hadamard_search(4)]
    M = verify_mub(bases)
    assert M.is_maximal
    return M


def construct_d16() -> MUBSet:
    """Maximal real MUB in R^16 (f = 9) from the Nordstrom-Robinson code."""
    code = nordstrom_robinson().words
    n = len(code)
    w = code.astype(np.int32)
    dist = w.sum(1)[:, None] + w.sum(1)[None, :] - 2 * (w @ w.T)
    adj = (dist == 8) | (dist == 16) | (dist == 0)
    label = -np.ones(n, dtype=int)
    classes = []
    for s in range(n):
        if label[s] >= 0:
            continue
        stack, comp = [s], []
        label[s] = len(classes)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.nonzero(adj[u] & (label < 0))[0]:
                label[v] = len(classes)
                stack.append(v)
        classes.append(sorted(comp))
    if len(classes) != 8 or any(len(c) != 32 for c in classes):
        raise PartitionFailed(f"component sizes {[len(c) for c in classes]}")
    bases = [standard_basis(16)]
    for comp in classes:
        reps = [code[u] for u in comp if code[u][0] == 0]
        if len(reps) != 16:
            raise PartitionFailed("component not closed under complement")
        bases.append(_sign_vectors([tuple(r.tolist()) for r in reps], 16))
    M = verify_mub(bases)
    assert M.is_maximal
    return M


def sub_mub(M: MUBSet, indices: Sequence[int]) -> MUBSet:
    idx = list(indices)
    if not idx:
        raise EmptySelection("select at least one basis")
    return verify_mub([M.bases[i] for i in idx])


def mub_to_scheme(M: MUBSet) -> AssociationScheme:
    """4-class scheme on X = M ∪ -M, classes at 1, 1/sqrt d, 0, -1/sqrt d, -1."""
    if M.f < 2:
        raise ValueError("need f >= 2")
    X = M.point_gram()
    alpha = QuadNum(1) / M.sqrt_d
    expected = [alpha, QuadNum(0), -alpha, QuadNum(-1)]
    if X.angle_set_prime() != expected:
        raise WrongAngles(f"angle set {X.angle_set_prime()}")
    S = AssociationScheme.from_gram(X)
    S.gramset = X
    return S


def gram_from_idempotent(S: AssociationScheme) -> GramSet:
    """Gram matrix of the E_1 embedding: G(x, y) = Q[rel(x, y)][1] / Q[0][1]."""
    qs = S.q_structure()
    if S.d != 4 or not (qs.is_q_bipartite and qs.is_q_antipodal):
        raise ValueError("needs a Q-bipartite, Q-antipodal 4-class scheme")
    m1 = S.Q[0, 1]
    values = [S.Q[i, 1] / m1 for i in range(S.d + 1)]
    if not m1.is_rational or m1.a.denominator != 1:
        raise WrongAngles(f"multiplicity {m1} is not an integer")
    dim = int(m1.a)
    alpha = QuadNum(1) / sqrt_int(dim)
    if values != [QuadNum(1), alpha, QuadNum(0), -alpha, QuadNum(-1)]:
        raise WrongAngles(f"angles {[str(v) for v in values]}")
    labels = getattr(getattr(S, "gramset", None), "labels", None)
    X = GramSet(S.rel.astype(np.int64), values, dim, labels)
    # (m1/n) G idempotent  <=>  G @ G == (n/m1) G;  G = (A + B sqrt D) / den
    A, B, den = integer_split([[values[k] for k in row] for row in X.index], X.D)
    ratio = Fraction(S.n) / m1.a
    if ratio.denominator != 1:
        raise NotIdempotent(f"n/m1 = {ratio} is not an integer")
    r = ratio.numerator * den
    if not (np.array_equal(A @ A + X.D * (B @ B), r * A) and np.array_equal(A @ B + B @ A, r * B)):
        raise NotIdempotent("(m1/n) G is not idempotent")
    return X
