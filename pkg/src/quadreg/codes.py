"""Binary codes read off a MUB: weight enumerators, MacWilliams duals, OA strength."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np


class FrameNotUnbiased(ValueError):
    pass


class NegativeDualCoefficient(ValueError):
    pass


class Mismatch(AssertionError):
    pass


class BinaryCode:
    """A set of distinct binary words of one length."""

    def __init__(self, words: Sequence[Sequence[int]] | np.ndarray):
        arr = np.asarray(words, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("words must form a 2-d table")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("words must be binary")
        if len(np.unique(arr, axis=0)) != len(arr):
            raise ValueError("duplicate codewords")
        self.words = arr

    @property
    def length(self) -> int:
        return self.words.shape[1]

    def __len__(self) -> int:
        return self.words.shape[0]

    def to_text(self) -> str:
        return "".join("".join(map(str, w)) + "\n" for w in self.words.tolist())

    @classmethod
    def from_text(cls, text: str) -> "BinaryCode":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if set(line) - {"0", "1"}:
                raise ValueError(f"line {lineno}: not a binary word")
            rows.append([int(ch) for ch in line])
        return cls(rows)


@dataclass(frozen=True)
class WeightEnumerator:
    coefficients: tuple  # A_0 .. A_n, ints or Fractions
    divisor: int | None = None  # set on MacWilliams duals

    @property
    def length(self) -> int:
        return len(self.coefficients) - 1

    @property
    def total(self):
        return sum(self.coefficients)

    def support(self) -> dict[int, object]:
        return {w: a for w, a in enumerate(self.coefficients) if a}


# ---------------------------------------------------------------------------


def nordstrom_robinson() -> BinaryCode:
    """The (16, 256, 6) Nordstrom-Robinson code: Gray image of the Z4 octacode."""
    gen = [[1, 0, 0, 0, 3, 1, 2, 1],
           [0, 1, 0, 0, 1, 2, 3, 1],
           [0, 0, 1, 0, 3, 3, 3, 2],
           [0, 0, 0, 1, 2, 3, 1, 1]]
    gray = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 0)}
    G = np.array(gen)
    words = []
    for msg in itertools.product(range(4), repeat=4):
        z4 = (np.array(msg) @ G) % 4
        words.append([b for x in z4.tolist() for b in gray[x]])
    words.sort()
    return BinaryCode(words)


def weight_enumerator(C: BinaryCode) -> WeightEnumerator:
    counts = np.bincount(C.words.sum(axis=1), minlength=C.length + 1)
    return WeightEnumerator(tuple(int(x) for x in counts))


def distance_enumerator(C: BinaryCode) -> WeightEnumerator:
    """Average distance distribution B_i = #{(x, y): d(x, y) = i} / |C|."""
    w = C.words.astype(np.int32)
    dist = w.sum(1)[:, None] + w.sum(1)[None, :] - 2 * (w @ w.T)
    counts = np.bincount(dist.ravel(), minlength=C.length + 1)
    return WeightEnumerator(tuple(Fraction(int(c), len(C)) for c in counts))


def krawtchouk(j: int, i: int, n: int) -> int:
    return sum((-1) ** s * comb(i, s) * comb(n - i, j - s) for s in range(j + 1))


def macwilliams(W: WeightEnumerator, size: int | None = None) -> WeightEnumerator:
    """Coefficients of W(x + y, x - y) / size."""
    if size is None:
        size = W.total
    if W.total != size:
        raise ValueError(f"size {size} differs from the enumerator total {W.total}")
    n = W.length
    dual = []
    for j in range(n + 1):
        acc = sum(Fraction(a) * krawtchouk(j, i, n) for i, a in enumerate(W.coefficients))
        val = acc / size
        if val < 0:
            raise NegativeDualCoefficient(f"A'_{j} = {val}")
        dual.append(val)
    return WeightEnumerator(tuple(dual), divisor=int(size))


def oa_strength(C: BinaryCode) -> int:
    """Strength as an orthogonal array: dual distance minus one (code length if trivial)."""
    dual = macwilliams(distance_enumerator(C))
    for w in range(1, C.length + 1):
        if dual.coefficients[w]:
            return w - 1
    return C.length


def oa_strength_bruteforce(C: BinaryCode, t_max: int | None = None) -> int:
    """Largest t with every t-column pattern appearing equally often (direct check)."""
    n, N = C.length, len(C)
    t_max = n if t_max is None else t_max
    weights = 1 << np.arange(t_max, dtype=np.int64)
    for t in range(1, t_max + 1):
        if N % (1 << t):
            return t - 1
        target = N >> t
        for cols in itertools.combinations(range(n), t):
            keys = C.words[:, cols].astype(np.int64) @ weights[:t]
            counts = np.bincount(keys, minlength=1 << t)
            if not np.all(counts == target):
                return t - 1
    return t_max


# ---------------------------------------------------------------------------


def frame_signs(M, base: int) -> tuple[np.ndarray, list]:
    """Sign table of every vector outside basis `base` (and its negative) in that frame.

    Returns (bits, labels) with bits[r, i] = 0 when coordinate i is +1/sqrt(d).
    """
    from .exactnum import QuadNum, exact_gram_parts

    d = M.d
    frame = list(M.bases[base])
    others = [(b, i) for b in range(M.f) if b != base for i in range(d)]
    vecs = frame + [M.bases[b][i] for b, i in others]
    ga, gb, den = exact_gram_parts(vecs, M.D)
    ga, gb = ga[d:, :d], gb[d:, :d]
    target = QuadNum(1) / M.sqrt_d
    plus = target.a * den, target.b * den
    if plus[0].denominator != 1 or plus[1].denominator != 1:
        raise FrameNotUnbiased("coordinates cannot equal +-1/sqrt(d)")
    plus = int(plus[0]), int(plus[1])
    good_plus = (ga == plus[0]) & (gb == plus[1])
    good_minus = (ga == -plus[0]) & (gb == -plus[1])
    if not np.all(good_plus | good_minus):
        r, c = np.argwhere(~(good_plus | good_minus))[0]
        raise FrameNotUnbiased(f"vector {others[r]} has coordinate != +-1/sqrt(d) at {c}")
    bits = good_minus.astype(np.uint8)
    labels = [(b, i, 1) for b, i in others] + [(b, i, -1) for b, i in others]
    return np.vstack([bits, 1 - bits]), labels


def extract_code(M, base: int = 0) -> BinaryCode:
    """Kerdock-like code of a MUB in the coordinate frame of basis `base`."""
    if M.f < 2:
        raise ValueError("need at least two bases")
    bits, _ = frame_signs(M, base)
    return BinaryCode(bits)


def joint_quintuple_counts(M, points: Sequence[tuple], classes: Sequence[int]) -> int:
    """|R_{i1}(x1) ∩ ... ∩ R_{i5}(x5)| counted directly and through OA strength 5.

    `points` are labels (basis, index, sign) of five vectors of X = M ∪ -M lying
    in one basis and pairwise orthogonal; `classes` are 1 (+1/sqrt d) or 3 (-1/sqrt d).
    """
    from .exactnum import QuadNum

    if not M.is_maximal or M.d <= 4:
        raise ValueError("needs a maximal MUB with d > 4")
    if len(points) != 5 or len(classes) != 5 or set(classes) - {1, 3}:
        raise ValueError("five points and five classes in {1, 3} required")
    base = points[0][0]
    idx = [p[1] for p in points]
    if any(p[0] != base for p in points) or len(set(idx)) != 5:
        raise ValueError("points must be pairwise orthogonal vectors of one basis")

    # direct count over X
    X = M.point_gram()
    alpha = QuadNum(1) / M.sqrt_d
    rows = [X.point(tuple(p)) for p in points]
    mask = np.ones(X.size, dtype=bool)
    for r, c in zip(rows, classes):
        want = X.value_id(alpha if c == 1 else -alpha)
        mask &= X.index[r] == want
    direct = int(mask.sum())

    # through the orthogonal array: every sign pattern on 5 coordinates is equally frequent
    C = extract_code(M, base)
    strength = oa_strength(C)
    if strength < 5:
        raise Mismatch(f"code has OA strength {strength} < 5")
    predicted = len(C) // 32
    # the pattern itself: bit 0 when <w, sign*e> = +alpha, i.e. coordinate sign = sign of point
    signs = np.array([p[2] for p in points])
    want_bits = np.array([(0 if c == 1 else 1) ^ (0 if s == 1 else 1) for c, s in zip(classes, signs)])
    observed = int(np.all(C.words[:, idx] == want_bits, axis=1).sum())
    if not direct == observed == predicted:
        raise Mismatch(f"direct {direct}, code {observed}, OA prediction {predicted}")
    return direct
