"""Finite point sets on spheres, described only through their Gram data.

A GramSet never stores coordinates.  Every derived set (one-point or two-point
projection, rescaled back to the unit sphere) is computed from inner products,
which keeps all values inside a quadratic field even when the rescaling factor
itself is irrational.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .exactnum import (
    ONE, ZERO, ExactMatrix, QuadNum, common_field, exact_gram_parts,
    poly_eval, sqrt_rational,
)


class EmptyFiber(ValueError):
    pass


class DegenerateAngle(ValueError):
    pass


class DegeneratePoint(ValueError):
    pass


class FieldEscape(ValueError):
    """A projected inner product leaves every single quadratic field."""


class TooManyAngles(ValueError):
    pass


GEGENBAUER_NORMALIZATION = "DGS: Q_0 = 1, Q_1(t) = m t, Q_k(1) = dim Harm_k(R^m)"


class GramSet:
    """Points on S^{m-1} given by an exact Gram matrix.

    The Gram matrix is stored compressed: ``index[x, y]`` points into the tuple
    ``values`` of distinct entries.
    """

    def __init__(self, index: np.ndarray, values: Sequence[QuadNum], ambient_dim: int,
                 labels: Sequence[Hashable] | None = None):
        index = np.asarray(index)
        n = index.shape[0]
        if index.shape != (n, n):
            raise ValueError("Gram index must be square")
        if ambient_dim < 1:
            raise ValueError("ambient_dim must be positive")
        self.index = index
        self.values = tuple(QuadNum.coerce(v) for v in values)
        self.ambient_dim = ambient_dim
        self.labels = list(labels) if labels is not None else list(range(n))
        if len(self.labels) != n:
            raise ValueError("one label per point")
        self.D = common_field(self.values)
        self._check()

    def _check(self):
        if not np.array_equal(self.index, self.index.T):
            raise ValueError("Gram matrix is not symmetric")
        one = self.values.index(ONE) if ONE in self.values else None
        if self.size and (one is None or not np.all(np.diag(self.index) == one)):
            raise ValueError("Gram diagonal must be 1")
        for v in self.values:
            if v > 1 or v < -1:
                raise ValueError(f"inner product {v} outside [-1, 1]")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence], labels=None) -> "GramSet":
        D = common_field(x for v in vectors for x in v)
        ga, gb, den = exact_gram_parts(vectors, D)
        return cls._from_parts(ga, gb, den, D, len(vectors[0]), labels)

    @classmethod
    def _from_parts(cls, ga, gb, den, D, ambient_dim, labels=None) -> "GramSet":
        n = ga.shape[0]
        keys = np.stack([np.asarray(ga).ravel(), np.asarray(gb).ravel()], axis=1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        values = [QuadNum(Fraction(int(a), den), Fraction(int(b), den), D) for a, b in uniq]
        return cls(inv.reshape(n, n), values, ambient_dim, labels)

    @classmethod
    def from_matrix(cls, gram: ExactMatrix, ambient_dim: int, labels=None) -> "GramSet":
        values: list[QuadNum] = []
        lookup: dict[QuadNum, int] = {}
        idx = np.zeros(gram.shape, dtype=np.int32)
        for i in range(gram.rows):
            for j in range(gram.cols):
                v = gram[i, j]
                if v not in lookup:
                    lookup[v] = len(values)
                    values.append(v)
                idx[i, j] = lookup[v]
        return cls(idx, values, ambient_dim, labels)

    # -- accessors ------------------------------------------------------------
    @property
    def size(self) -> int:
        return self.index.shape[0]

    def __len__(self) -> int:
        return self.size

    def entry(self, x: int, y: int) -> QuadNum:
        return self.values[self.index[x, y]]

    @property
    def gram(self) -> ExactMatrix:
        return ExactMatrix([[self.values[k] for k in row] for row in self.index])

    def value_id(self, alpha) -> int | None:
        alpha = QuadNum.coerce(alpha)
        for k, v in enumerate(self.values):
            if v == alpha:
                return k
        return None

    def point(self, label) -> int:
        return self.labels.index(label)

    def histogram(self) -> dict[QuadNum, int]:
        counts = np.bincount(self.index.ravel(), minlength=len(self.values))
        return {v: int(c) for v, c in zip(self.values, counts) if c}

    def angle_set_prime(self) -> list[QuadNum]:
        """A'(X): distinct inner products of distinct points, -1 included, descending."""
        off = self.index[~np.eye(self.size, dtype=bool)]
        present = {self.values[k] for k in np.unique(off)}
        present.discard(ONE)
        return sorted(present, reverse=True)

    def angle_set(self) -> list[QuadNum]:
        """A(X): A'(X) without -1."""
        return [a for a in self.angle_set_prime() if a != -1]

    @property
    def degree(self) -> int:
        return len(self.angle_set())

    def is_antipodal(self) -> bool:
        minus = self.value_id(-1)
        if minus is None:
            return False
        return bool(np.all((self.index == minus).sum(axis=1) == 1))

    def subset(self, points: Sequence[int], ambient_dim: int | None = None) -> "GramSet":
        pts = np.asarray(points, dtype=np.intp)
        sub = self.index[np.ix_(pts, pts)]
        used = np.unique(sub)
        remap = np.full(len(self.values), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        return GramSet(remap[sub], [self.values[k] for k in used],
                       ambient_dim or self.ambient_dim, [self.labels[p] for p in pts])

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "ambient_dim": self.ambient_dim,
            "D": self.D,
            "gram": [list(self.values[k].to_tuple()) for k in self.index.ravel()],
            "labels": [_jsonable(lbl) for lbl in self.labels],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GramSet":
        n = data["size"]
        flat = [QuadNum.from_tuple(t) for t in data["gram"]]
        rows = [flat[i * n:(i + 1) * n] for i in range(n)]
        labels = [tuple(lbl) if isinstance(lbl, list) else lbl for lbl in data["labels"]]
        return cls.from_matrix(ExactMatrix(rows), data["ambient_dim"], labels)

    def __repr__(self):
        return f"GramSet(size={self.size}, ambient_dim={self.ambient_dim}, angles={[str(a) for a in self.angle_set_prime()]})"


def _jsonable(label):
    if isinstance(label, tuple):
        return [_jsonable(x) for x in label]
    return label


def _remap_values(X: GramSet, points: np.ndarray, fn, ambient_dim: int) -> GramSet:
    sub = X.index[np.ix_(points, points)]
    used = np.unique(sub)
    new_vals: list[QuadNum] = []
    lookup: dict[QuadNum, int] = {}
    remap = np.full(len(X.values), -1, dtype=np.int64)
    for k in used:
        v = fn(X.values[k])
        if v not in lookup:
            lookup[v] = len(new_vals)
            new_vals.append(v)
        remap[k] = lookup[v]
    return GramSet(remap[sub], new_vals, ambient_dim, [X.labels[p] for p in points])


# ---------------------------------------------------------------------------
# Gegenbauer polynomials


def gegenbauer_poly(k: int, m: int) -> list[Fraction]:
    """Coefficients (lowest first) of the degree-k Gegenbauer polynomial on S^{m-1}."""
    if m < 2:
        raise ValueError("ambient dimension m must be >= 2")
    prev, cur = [Fraction(1)], [Fraction(0), Fraction(m)]
    if k == 0:
        return prev
    for j in range(1, k):
        lead = Fraction(m + 2 * j, j + 1)
        num, den = m + j - 3, m + 2 * j - 4
        ratio = Fraction(1) if den == 0 else Fraction(num, den)
        nxt = [Fraction(0)] + cur
        for i, c in enumerate(prev):
            nxt[i] -= ratio * c
        prev, cur = cur, [lead * c for c in nxt]
    return cur


def gegenbauer(k: int, m: int, t) -> QuadNum:
    return poly_eval([QuadNum(c) for c in gegenbauer_poly(k, m)], QuadNum.coerce(t))


def gegenbauer_sum(X: GramSet, k: int) -> QuadNum:
    coeffs = [QuadNum(c) for c in gegenbauer_poly(k, X.ambient_dim)]
    total = ZERO
    for v, cnt in X.histogram().items():
        total = total + poly_eval(coeffs, v) * cnt
    return total


def design_strength(X: GramSet, t_max: int = 8) -> int:
    """Largest t <= t_max such that X is a spherical t-design."""
    if X.size == 0:
        raise ValueError("empty point set")
    for k in range(1, t_max + 1):
        if gegenbauer_sum(X, k):
            return k - 1
    return t_max


def annihilator_expand(X: GramSet) -> list[QuadNum]:
    """Gegenbauer coefficients of prod_{a in A'(X)} (t - a) / (1 - a)."""
    angles = X.angle_set_prime()
    if len(angles) > 4:
        raise TooManyAngles(f"{len(angles)} angles; at most 4 supported")
    poly = [ONE]
    for a in angles:
        scale = (ONE - a).inverse()
        shifted = [ZERO] + poly
        for i, c in enumerate(poly):
            shifted[i] = shifted[i] - a * c
        poly = [c * scale for c in shifted]
    m = X.ambient_dim
    coeffs = [ZERO] * len(poly)
    rest = list(poly)
    for k in range(len(poly) - 1, -1, -1):
        gk = [QuadNum(c) for c in gegenbauer_poly(k, m)]
        fk = rest[k] / gk[k]
        coeffs[k] = fk
        for i, c in enumerate(gk):
            rest[i] = rest[i] - fk * c
    return coeffs


# ---------------------------------------------------------------------------
# derived sets


def derive_one(X: GramSet, z: int, alpha) -> GramSet:
    """Points at inner product alpha with z, projected to z-perp and rescaled."""
    alpha = QuadNum.coerce(alpha)
    if alpha == 1 or alpha == -1:
        raise DegenerateAngle("alpha must differ from +-1")
    vid = X.value_id(alpha)
    pts = np.nonzero(X.index[z] == vid)[0] if vid is not None else np.array([], dtype=int)
    if len(pts) == 0:
        raise EmptyFiber(f"no point at inner product {alpha} with point {z}")
    a2 = alpha * alpha
    scale = (ONE - a2).inverse()
    return _remap_values(X, pts, lambda v: (v - a2) * scale, X.ambient_dim - 1)


def _radicand(ai: QuadNum, aj: QuadNum, am: QuadNum) -> QuadNum:
    return ONE - ai * ai - aj * aj - am * am + 2 * ai * aj * am


def projected_numerator(ai, aj, ak, al, am, an) -> QuadNum:
    return (an - ai * ak) * (ONE - am * am) - (aj - ai * am) * (al - ak * am)


def divide_by_sqrt(num: QuadNum, rad: QuadNum) -> QuadNum:
    """num / sqrt(rad), exactly, provided the result stays in one quadratic field."""
    rad = QuadNum.coerce(rad)
    if not rad.is_rational:
        raise FieldEscape(f"cannot take sqrt of irrational radicand {rad}")
    root = sqrt_rational(rad.a)
    if num.is_rational or num.D == root.D or root.D == 1:
        return num / root
    raise FieldEscape(f"{num} / sqrt({rad.a}) needs two square roots")


def derive_two(X: GramSet, z1: int, z2: int, alpha_i, alpha_j) -> GramSet:
    """The two-point derived set X_{i,j}(z1, z2), rescaled to S^{m-3}."""
    ai, aj = QuadNum.coerce(alpha_i), QuadNum.coerce(alpha_j)
    am = X.entry(z1, z2)
    if am == 1 or am == -1:
        raise DegenerateAngle("<z1, z2> must differ from +-1")
    pts = fiber_two(X, z1, z2, ai, aj)
    if len(pts) == 0:
        raise EmptyFiber(f"no point at ({ai}, {aj}) from ({z1}, {z2})")
    r = _radicand(ai, aj, am)
    if r.sign() <= 0:
        raise DegeneratePoint("fiber lies in span(z1, z2)")
    inv = r.inverse()
    return _remap_values(X, pts, lambda v: projected_numerator(ai, aj, ai, aj, am, v) * inv,
                         X.ambient_dim - 2)


def fiber_two(X: GramSet, z1: int, z2: int, ai, aj) -> np.ndarray:
    vi, vj = X.value_id(ai), X.value_id(aj)
    if vi is None or vj is None:
        return np.array([], dtype=np.intp)
    return np.nonzero((X.index[z1] == vi) & (X.index[z2] == vj))[0]


class TwoPointFamily:
    """The cells X_{i,j}(z1, z2) of a host set, with all cross inner products.

    Cells are addressed by pairs of positions in the host's descending angle
    list A'(X) (1-based, so index 1 is the largest angle below 1).
    """

    def __init__(self, X: GramSet, z1: int, z2: int, cells: Sequence[tuple[int, int]]):
        self.host = X
        self.z1, self.z2 = z1, z2
        self.angles = [ONE] + X.angle_set_prime()
        self.am = X.entry(z1, z2)
        if self.am == 1 or self.am == -1:
            raise DegenerateAngle("<z1, z2> must differ from +-1")
        self.cells = [tuple(c) for c in cells]
        self.members = []
        self.radicands = []
        for i, j in self.cells:
            pts = fiber_two(X, z1, z2, self.angles[i], self.angles[j])
            if len(pts) == 0:
                raise EmptyFiber(f"cell {(i, j)} is empty")
            r = _radicand(self.angles[i], self.angles[j], self.am)
            if r.sign() <= 0:
                raise DegeneratePoint(f"cell {(i, j)} lies in span(z1, z2)")
            self.members.append(pts)
            self.radicands.append(r)
        self.ambient_dim = X.ambient_dim - 2
        self._cross: dict[tuple[int, int], tuple[np.ndarray, list[QuadNum]]] = {}

    @classmethod
    def nonempty_cells(cls, X: GramSet, z1: int, z2: int) -> list[tuple[int, int]]:
        angles = [ONE] + X.angle_set_prime()
        out = []
        for i in range(1, len(angles)):
            for j in range(1, len(angles)):
                if len(fiber_two(X, z1, z2, angles[i], angles[j])):
                    out.append((i, j))
        return out

    def cell(self, a: int) -> GramSet:
        i, j = self.cells[a]
        return derive_two(self.host, self.z1, self.z2, self.angles[i], self.angles[j])

    def cross(self, a: int, b: int) -> tuple[np.ndarray, list[QuadNum]]:
        """Inner products between cells a and b as (index matrix, values)."""
        key = (a, b)
        if key not in self._cross:
            i, j = self.cells[a]
            k, l = self.cells[b]
            A = self.angles
            sub = self.host.index[np.ix_(self.members[a], self.members[b])]
            used = np.unique(sub)
            rad = self.radicands[a] * self.radicands[b]
            vals: list[QuadNum] = []
            lookup: dict[QuadNum, int] = {}
            remap = np.full(len(self.host.values), -1, dtype=np.int64)
            for u in used:
                num = projected_numerator(A[i], A[j], A[k], A[l], self.am, self.host.values[u])
                v = divide_by_sqrt(num, rad)
                if v not in lookup:
                    lookup[v] = len(vals)
                    vals.append(v)
                remap[u] = lookup[v]
            self._cross[key] = (remap[sub], vals)
        return self._cross[key]

    def angle_set(self, a: int, b: int, with_minus_one: bool = False) -> list[QuadNum]:
        """A(X_a, X_b) (or A' with -1), descending; +1 is never included."""
        idx, vals = self.cross(a, b)
        present = {vals[k] for k in np.unique(idx)}
        present.discard(ONE)
        if not with_minus_one:
            present.discard(-ONE)
        return sorted(present, reverse=True)

    def relation(self, a: int, b: int, value) -> tuple[np.ndarray, np.ndarray]:
        """Positions (within cells a, b) of pairs at the given inner product."""
        idx, vals = self.cross(a, b)
        value = QuadNum.coerce(value)
        k = next((n for n, v in enumerate(vals) if v == value), None)
        if k is None:
            return np.array([], dtype=np.intp), np.array([], dtype=np.intp)
        return np.nonzero(idx == k)
