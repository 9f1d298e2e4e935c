"""Symmetric designs, linked systems of symmetric designs and their 3-class schemes."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactnum import QuadNum, is_square, sqrt_int, sqrt_rational
from .scheme import AssociationScheme


class NotRegular(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotLambdaBalanced(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotLinked(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NonSquareN(ValueError):
    pass


class NotEquivalence(ValueError):
    pass


class FiberSizeMismatch(ValueError):
    pass


class IdentityViolated(AssertionError):
    def __init__(self, which, lhs, rhs):
        super().__init__(f"identity ({which}): {lhs} != {rhs}")
        self.which, self.lhs, self.rhs = which, lhs, rhs


@dataclass(frozen=True)
class SymmetricDesign:
    v: int
    k: int
    lam: int
    incidence: np.ndarray = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.k - self.lam

    @property
    def params(self) -> tuple[int, int, int]:
        return self.v, self.k, self.lam

    def complement(self) -> "SymmetricDesign":
        return verify_design(1 - self.incidence)


def verify_design(incidence) -> SymmetricDesign:
    """Check that a square 0/1 table is a symmetric (v, k, lambda) design."""
    N = np.asarray(incidence, dtype=np.int64)
    if N.ndim != 2 or N.shape[0] != N.shape[1]:
        raise ValueError("incidence must be square")
    if not np.isin(N, (0, 1)).all():
        raise ValueError("incidence must be 0/1")
    v = N.shape[0]
    rows, cols = N.sum(1), N.sum(0)
    k = int(rows[0])
    bad = np.nonzero(rows != k)[0]
    if len(bad):
        raise NotRegular(f"row {bad[0]} has {rows[bad[0]]} ones, row 0 has {k}", ("row", int(bad[0])))
    bad = np.nonzero(cols != k)[0]
    if len(bad):
        raise NotRegular(f"column {bad[0]} has {cols[bad[0]]} ones, expected {k}", ("col", int(bad[0])))
    G = N @ N.T
    lam = int(G[0, 1]) if v > 1 else 0
    off = ~np.eye(v, dtype=bool)
    if (G[off] != lam).any():
        i, j = np.argwhere(off & (G != lam))[0]
        raise NotLambdaBalanced(f"rows {i},{j} meet in {G[i, j]} columns, rows 0,1 in {lam}",
                                (int(i), int(j), int(G[i, j]), lam))
    return SymmetricDesign(v, k, lam, N.astype(np.uint8))


def difference_set_design(v: int, base: Sequence[int]) -> np.ndarray:
    """Incidence of the development of a difference set mod v (blocks D + x)."""
    N = np.zeros((v, v), dtype=np.uint8)
    for x in range(v):
        for b in base:
            N[(b + x) % v, x] = 1
    return N


# ---------------------------------------------------------------------------


class LinkedSystem:
    """f fibers of size v with a symmetric design between every two of them.

    ``incidences[(i, j)]`` (i < j) is the v x v table with rows in fiber i.
    Fill sigma/tau via verify_linked().
    """

    def __init__(self, f: int, v: int, incidences: dict[tuple[int, int], np.ndarray]):
        self.f, self.v = f, v
        self.incidences = {}
        for i, j in itertools.combinations(range(f), 2):
            if (i, j) in incidences:
                N = incidences[(i, j)]
            elif (j, i) in incidences:
                N = np.asarray(incidences[(j, i)]).T
            else:
                raise ValueError(f"missing incidence between fibers {i} and {j}")
            N = np.asarray(N, dtype=np.uint8)
            if N.shape != (v, v):
                raise ValueError(f"incidence {(i, j)} has shape {N.shape}")
            self.incidences[(i, j)] = N
        self.k = self.lam = None
        self.sigma = self.tau = None
        self.sign = None

    def incidence(self, i: int, j: int) -> np.ndarray:
        return self.incidences[(i, j)] if i < j else self.incidences[(j, i)].T

    def subsystem(self, fibers: Sequence[int]) -> "LinkedSystem":
        fibers = list(fibers)
        inc = {(a, b): self.incidence(fibers[a], fibers[b])
               for a, b in itertools.combinations(range(len(fibers)), 2)}
        return LinkedSystem(len(fibers), self.v, inc)

    def complement(self) -> "LinkedSystem":
        return LinkedSystem(self.f, self.v, {key: 1 - N for key, N in self.incidences.items()})

    def to_json(self) -> dict:
        k, lam = self.k, self.lam
        if k is None:
            d = verify_design(self.incidence(0, 1))
            k, lam = d.k, d.lam
        return {
            "f": self.f,
            "v": self.v,
            "k": k,
            "lambda": lam,
            "incidences": {f"{i},{j}": np.packbits(N.ravel()).tobytes().hex()
                           for (i, j), N in sorted(self.incidences.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "LinkedSystem":
        v = data["v"]
        inc = {}
        for key, hexbits in data["incidences"].items():
            i, j = (int(t) for t in key.split(","))
            bits = np.unpackbits(np.frombuffer(bytes.fromhex(hexbits), dtype=np.uint8))[: v * v]
            inc[(i, j)] = bits.reshape(v, v)
        return cls(data["f"], v, inc)

    def __repr__(self):
        return f"LinkedSystem(f={self.f}, v={self.v}, k={self.k}, sigma={self.sigma}, tau={self.tau})"


@dataclass(frozen=True)
class LinkedReport:
    v: int
    k: int
    lam: int
    sigma: int | None
    tau: int | None
    sign: str | None  # "+" when sigma = (k^2 - sqrt(n)(v-k))/v, "-" for the other branch


def linkage_constants(v: int, k: int, lam: int) -> dict[str, tuple[Fraction, Fraction]]:
    """Both closed-form (sigma, tau) branches; raises NonSquareN if n = k - lambda is not a square."""
    n = k - lam
    if n < 0 or not is_square(n):
        raise NonSquareN(f"n = k - lambda = {n} is not a perfect square")
    r = math.isqrt(n)
    return {
        "+": (Fraction(k * k - r * (v - k), v), Fraction(k * (k + r), v)),
        "-": (Fraction(k * k + r * (v - k), v), Fraction(k * (k - r), v)),
    }


def verify_linked(system: LinkedSystem) -> LinkedReport:
    """Check every pairwise design and the two-valued linkage through third fibers."""
    params = None
    for (i, j), N in sorted(system.incidences.items()):
        des = verify_design(N)
        if params is None:
            params = des.params
        elif des.params != params:
            raise NotLinked(f"fibers {i},{j} carry a {des.params} design, fibers 0,1 a {params}",
                            {"pair": (i, j), "params": des.params, "expected": params})
    v, k, lam = params
    system.k, system.lam = k, lam
    if system.f < 3:
        system.sigma = system.tau = system.sign = None
        return LinkedReport(v, k, lam, None, None, None)

    first = {}
    for i, j in itertools.combinations(range(system.f), 2):
        Nij = system.incidence(i, j).astype(bool)
        for l in range(system.f):
            if l in (i, j):
                continue
            counts = system.incidence(i, l).astype(np.int64) @ system.incidence(l, j).astype(np.int64)
            for flag, name in ((True, "sigma"), (False, "tau")):
                mask = Nij if flag else ~Nij
                if not mask.any():
                    continue
                vals = counts[mask]
                if name not in first:
                    x, y = np.argwhere(mask)[0]
                    first[name] = (int(vals[0]), (i, j, l, int(x), int(y)))
                ref, where = first[name]
                bad = np.nonzero(vals != ref)[0]
                if len(bad):
                    x, y = np.argwhere(mask)[bad[0]]
                    raise NotLinked(
                        f"{name} not constant: {(i, j, l, int(x), int(y))} gives {vals[bad[0]]}, "
                        f"{where} gives {ref}",
                        {"tuple": (i, j, l, int(x), int(y)), "count": int(vals[bad[0]]),
                         "reference": where, "reference_count": ref})
    sigma = first.get("sigma", (None,))[0]
    tau = first.get("tau", (None,))[0]
    branches = linkage_constants(v, k, lam)
    sign = next((s for s, (a, b) in branches.items()
                 if (sigma is None or a == sigma) and (tau is None or b == tau)), None)
    if sign is None:
        raise NotLinked(f"(sigma, tau) = ({sigma}, {tau}) matches neither closed-form branch {branches}")
    system.sigma, system.tau, system.sign = sigma, tau, sign
    return LinkedReport(v, k, lam, sigma, tau, sign)


def lsd_to_scheme(system: LinkedSystem) -> AssociationScheme:
    """3-class scheme on all f*v points: 1 incident, 2 same fiber, 3 otherwise."""
    f, v = system.f, system.v
    if f < 2:
        raise ValueError("need at least two fibers")
    n = f * v
    rel = np.full((n, n), 3, dtype=np.int8)
    for i in range(f):
        rel[i * v:(i + 1) * v, i * v:(i + 1) * v] = 2
        for j in range(i + 1, f):
            N = system.incidence(i, j).astype(bool)
            block = np.where(N, 1, 3).astype(np.int8)
            rel[i * v:(i + 1) * v, j * v:(j + 1) * v] = block
            rel[j * v:(j + 1) * v, i * v:(i + 1) * v] = block.T
    np.fill_diagonal(rel, 0)
    return AssociationScheme.from_relations(rel)


def scheme_to_lsd(S: AssociationScheme) -> tuple[LinkedSystem, list[np.ndarray]]:
    """Fibers are the classes of R_0 ∪ R_2, incidence is R_1.  Returns (system, fibers)."""
    if S.d != 3:
        raise NotEquivalence(f"a {S.d}-class scheme has no R_0 ∪ R_2 fibration")
    E = (S.rel == 0) | (S.rel == 2)
    E2 = (E.astype(np.int32) @ E.astype(np.int32)) > 0
    if (E2 & ~E).any():
        x, y = np.argwhere(E2 & ~E)[0]
        raise NotEquivalence(f"R_0 ∪ R_2 not transitive at ({x}, {y})")
    seen = np.zeros(S.n, dtype=bool)
    fibers = []
    for x in range(S.n):
        if not seen[x]:
            members = np.nonzero(E[x])[0]
            seen[members] = True
            fibers.append(members)
    v = len(fibers[0])
    if any(len(F) != v for F in fibers):
        raise FiberSizeMismatch(f"fiber sizes {[len(F) for F in fibers]}")
    inc = {}
    for i, j in itertools.combinations(range(len(fibers)), 2):
        inc[(i, j)] = (S.rel[np.ix_(fibers[i], fibers[j])] == 1).astype(np.uint8)
    system = LinkedSystem(len(fibers), v, inc)
    verify_linked(system)
    return system, fibers


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodaReport:
    f: int
    v: int
    k: int
    rhs: QuadNum
    is_equality: bool
    inequality_holds: bool
    complemented: bool


def noda_rhs(v: int, k: int) -> QuadNum:
    """(v - 2) sqrt(k (v - k)) / ((v - 2k) sqrt(v - 1)), exactly."""
    if 2 * k == v:
        raise ValueError("undefined for k = v/2")
    root = sqrt_rational(Fraction(k * (v - k), v - 1))
    return root * Fraction(v - 2, v - 2 * k)


def noda_check(system: LinkedSystem | None = None, *, f: int | None = None, v: int | None = None,
               k: int | None = None) -> NodaReport:
    """Compare f - 1 with the Noda bound; complements first when k > v/2."""
    if system is not None:
        if system.k is None:
            verify_linked(system)
        f, v, k = system.f, system.v, system.k
    complemented = 2 * k > v
    if complemented:
        k = v - k
    rhs = noda_rhs(v, k)
    lhs = QuadNum(f - 1)
    return NodaReport(f, v, k, rhs, lhs == rhs, lhs <= rhs, complemented)


@dataclass
class AlphaDistribution:
    fiber: int
    histogram: dict[int, int]
    sum_alpha: int
    sum_pairs: int
    rhs_alpha: int
    rhs_pairs: Fraction

    @property
    def is_4_design(self) -> bool:
        return len(self.histogram) == 1

    @property
    def subsets(self) -> int:
        return sum(self.histogram.values())


def quad_counting(system: LinkedSystem, fiber: int = 0, chunk: int = 1 << 14) -> AlphaDistribution:
    """alpha(S) = number of common R_1-neighbours of a 4-subset S of one fiber.

    Verifies both double-counting identities exactly.
    """
    if system.k is None:
        verify_linked(system)
    f, v, k, lam = system.f, system.v, system.k, system.lam
    if f < 2:
        raise ValueError("need at least two fibers")
    # rows: points of `fiber`; columns: points of every other fiber; bit-packed
    N = np.hstack([system.incidence(fiber, j) for j in range(f) if j != fiber]).astype(np.uint8)
    packed = np.packbits(N, axis=1)
    popcount = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)
    hist: Counter = Counter()
    combos = itertools.combinations(range(v), 4)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if len(block) == 0:
            break
        inter = packed[block[:, 0]] & packed[block[:, 1]] & packed[block[:, 2]] & packed[block[:, 3]]
        alpha = popcount[inter].sum(axis=1)
        hist.update({int(a): int(c) for a, c in enumerate(np.bincount(alpha)) if c})
    sum_alpha = sum(a * c for a, c in hist.items())
    sum_pairs = sum(math.comb(a, 2) * c for a, c in hist.items())
    rhs_alpha = (f - 1) * v * math.comb(k, 4)
    if f >= 3:
        sigma, tau = system.sigma, system.tau
        inner = (f - 2) * k * math.comb(sigma, 4) + (v - 1) * math.comb(lam, 4) \
            + (f - 2) * (v - k) * math.comb(tau, 4)
    else:
        inner = (v - 1) * math.comb(lam, 4)
    rhs_pairs = Fraction((f - 1) * v * inner, 2)
    if sum_alpha != rhs_alpha:
        raise IdentityViolated(1, sum_alpha, rhs_alpha)
    if sum_pairs != rhs_pairs:
        raise IdentityViolated(2, sum_pairs, rhs_pairs)
    return AlphaDistribution(fiber, dict(sorted(hist.items())), sum_alpha, sum_pairs, rhs_alpha, rhs_pairs)


# ---------------------------------------------------------------------------


LISTED_INTEGRAL_POINTS = ((-2, 6), (-1, 4), (3, 36), (0, 0), (1, 0), (-3, 0))


def cubic(v: int) -> int:
    return v * (v - 1) * (v + 3)


def is_square_int(n: int) -> bool:
    return n >= 0 and is_square(n)


@dataclass(frozen=True)
class QuarticReport:
    v: int
    k: int | None
    value: int | None
    k_roots: tuple[QuadNum, QuadNum] | None
    square_check: bool


def quartic_value(v: int, k: int) -> int:
    return v * (v + 1) ** 2 + 4 * k * k * (v + 3) - 4 * k * v * (v + 3)


def quartic_obstruction(v: int, k: int | None = None) -> QuarticReport:
    """Value of the quartic at (v, k), its two roots in k, and whether v(v-1)(v+3) is a square."""
    c = cubic(v)
    roots = None
    if v + 3 != 0 and c >= 0:
        r = sqrt_int(c)
        den = 2 * (v + 3)
        roots = ((v * (v + 3) + r) / den, (v * (v + 3) - r) / den)
    value = quartic_value(v, k) if k is not None else None
    return QuarticReport(v, k, value, roots, is_square_int(c))


def integral_point_scan(lo: int, hi: int) -> list[int]:
    """All v in [lo, hi] with v(v-1)(v+3) a perfect square."""
    out = []
    for v in range(lo, hi + 1):
        c = cubic(v)
        if c >= 0 and math.isqrt(c) ** 2 == c:
            out.append(v)
    return out
