"""Exact arithmetic in a real quadratic field Q(sqrt(D)) plus small exact matrices.

Every angle, eigenvalue and Krein number handled by the package lives here, so
equality and sign tests never need a tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence


class FieldMismatch(ValueError):
    """Two irrational operands live in different quadratic fields."""


class NotSplitOverField(ValueError):
    """A characteristic polynomial has a factor irreducible over Q(sqrt(D))."""


@lru_cache(maxsize=4096)
def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return (s, D) with n == s*s*D and D square-free (n >= 0)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0, 1
    s, D, rest, p = 1, 1, n, 2
    while p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            D *= p
        p += 1 if p == 2 else 2
    return s, D * rest


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class QuadNum:
    """The real number a + b*sqrt(D) with a, b rational and D square-free."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a=0, b=0, D: int = 1):
        a = _to_fraction(a)
        b = _to_fraction(b)
        if D < 1:
            raise ValueError("D must be a positive square-free integer")
        if D == 1:
            a, b = a + b, Fraction(0)
        elif b == 0:
            D = 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "D", D)

    def __setattr__(self, name, value):
        raise AttributeError("QuadNum is immutable")

    # -- construction helpers -------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "QuadNum":
        if isinstance(x, QuadNum):
            return x
        return cls(_to_fraction(x))

    @classmethod
    def from_tuple(cls, t: Sequence[int]) -> "QuadNum":
        a_num, a_den, b_num, b_den, D = t
        return cls(Fraction(a_num, a_den), Fraction(b_num, b_den), D)

    def to_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.a.numerator, self.a.denominator,
                self.b.numerator, self.b.denominator, self.D)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def conjugate(self) -> "QuadNum":
        return QuadNum(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.D)

    # -- arithmetic -----------------------------------------------------------
    def _common(self, other) -> tuple["QuadNum", int]:
        other = QuadNum.coerce(other)
        if self.D == other.D or other.D == 1:
            return other, self.D
        if self.D == 1:
            return other, other.D
        raise FieldMismatch(f"Q(sqrt({self.D})) vs Q(sqrt({other.D}))")

    def __add__(self, other):
        try:
            o, D = self._common(other)
        except TypeError:
            return NotImplemented
        return QuadNum(self.a + o.a, self.b + o.b, D)

    __radd__ = __add__

    def __neg__(self):
        return QuadNum(-self.a, -self.b, self.D)

    def __sub__(self, other):
        try:
            o, D = self._common(other)
        except TypeError:
            return NotImplemented
        return QuadNum(self.a - o.a, self.b - o.b, D)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        try:
            o, D = self._common(other)
        except TypeError:
            return NotImplemented
        return QuadNum(self.a * o.a + self.b * o.b * D, self.a * o.b + self.b * o.a, D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadNum":
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadNum(self.a / nrm, -self.b / nrm, self.D)

    def __truediv__(self, other):
        try:
            o, _ = self._common(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QuadNum.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QuadNum(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- order ----------------------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        lhs, rhs = self.a * self.a, self.b * self.b * self.D
        if lhs > rhs:
            return sa
        if lhs < rhs:
            return sb
        return 0

    def __eq__(self, other):
        try:
            o = QuadNum.coerce(other)
        except TypeError:
            return NotImplemented
        if self.b == 0 and o.b == 0:
            return self.a == o.a
        return self.a == o.a and self.b == o.b and self.D == o.D

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __repr__(self):
        return f"QuadNum({self.a}, {self.b}, {self.D})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        head = "" if self.a == 0 else f"{self.a}"
        op = "-" if self.b < 0 else ("+" if head else "")
        coef = abs(self.b)
        coef_s = "" if coef == 1 else f"{coef}*"
        return f"{head}{op}{coef_s}sqrt({self.D})"


ZERO = QuadNum(0)
ONE = QuadNum(1)


def sign(q) -> int:
    return QuadNum.coerce(q).sign()


def sqrt_int(n: int) -> QuadNum:
    """Exact square root of a nonnegative integer in its natural quadratic field."""
    if n < 0:
        raise ValueError("sqrt_int needs n >= 0")
    s, D = squarefree_decomposition(n)
    if D == 1:
        return QuadNum(s)
    return QuadNum(0, s, D)


def sqrt_rational(x: Fraction) -> QuadNum:
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    # sqrt(p/q) = sqrt(p*q)/q
    root = sqrt_int(x.numerator * x.denominator)
    return root / x.denominator


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def common_field(values: Iterable) -> int:
    D = 1
    for v in values:
        v = QuadNum.coerce(v)
        if v.D != 1:
            if D not in (1, v.D):
                raise FieldMismatch(f"Q(sqrt({D})) vs Q(sqrt({v.D}))")
            D = v.D
    return D


# ---------------------------------------------------------------------------
# polynomials: coefficient lists, lowest degree first


def poly_trim(p: list) -> list:
    p = list(p)
    while len(p) > 1 and not p[-1]:
        p.pop()
    return p


def poly_mul(p: Sequence, q: Sequence) -> list:
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_eval(p: Sequence, x) -> QuadNum:
    acc = ZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_divmod_linear(p: Sequence, root) -> tuple[list, QuadNum]:
    """Synthetic division by (t - root)."""
    n = len(p) - 1
    quot = [ZERO] * n
    acc = ZERO
    for i in range(n, 0, -1):
        acc = acc * root + p[i]
        quot[i - 1] = acc
    rem = acc * root + p[0]
    return quot, rem


# ---------------------------------------------------------------------------
# exact matrices


class ExactMatrix:
    """Rectangular matrix of QuadNum entries sharing one field."""

    __slots__ = ("rows", "cols", "_e", "D")

    def __init__(self, entries: Sequence[Sequence]):
        data = tuple(tuple(QuadNum.coerce(x) for x in row) for row in entries)
        if not data or not data[0]:
            raise ValueError("empty matrix")
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise ValueError("ragged matrix")
        self.rows, self.cols = len(data), width
        self._e = data
        self.D = common_field(x for r in data for x in r)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "ExactMatrix":
        return cls([[0] * c for _ in range(r)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self._e[i][j]

    def row(self, i: int) -> tuple:
        return self._e[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._e)

    def tolist(self) -> list[list[QuadNum]]:
        return [list(r) for r in self._e]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for ra, rb in zip(self._e, other._e) for a, b in zip(ra, rb))

    def __hash__(self):
        return hash(self._e)

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self._e)
        return f"ExactMatrix([{body}])"

    def T(self) -> "ExactMatrix":
        return ExactMatrix([self.col(j) for j in range(self.cols)])

    def __add__(self, other: "ExactMatrix"):
        return ExactMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._e, other._e)])

    def __sub__(self, other: "ExactMatrix"):
        return ExactMatrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._e, other._e)])

    def scale(self, c) -> "ExactMatrix":
        c = QuadNum.coerce(c)
        return ExactMatrix([[c * a for a in r] for r in self._e])

    def __matmul__(self, other: "ExactMatrix"):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for r in self._e:
            row = []
            for c in cols:
                acc = ZERO
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return ExactMatrix(out)

    def apply(self, vec: Sequence) -> list[QuadNum]:
        out = []
        for r in self._e:
            acc = ZERO
            for a, b in zip(r, vec):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return out

    def trace(self) -> QuadNum:
        acc = ZERO
        for i in range(min(self.rows, self.cols)):
            acc = acc + self._e[i][i]
        return acc

    def to_float(self):
        import numpy as np
        return np.array([[float(x) for x in r] for r in self._e])

    # -- elimination ----------------------------------------------------------
    def rref(self) -> tuple[list[list[QuadNum]], list[int]]:
        m = [list(r) for r in self._e]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            piv = next((i for i in range(r, self.rows) if m[i][c]), None)
            if piv is None:
                continue
            m[r], m[piv] = m[piv], m[r]
            inv = m[r][c].inverse()
            m[r] = [x * inv for x in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c]:
                    f = m[i][c]
                    m[i] = [x - f * y for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return m, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[list[QuadNum]]:
        m, pivots = self.rref()
        free = [c for c in range(self.cols) if c not in pivots]
        basis = []
        for fc in free:
            v = [ZERO] * self.cols
            v[fc] = ONE
            for r, pc in enumerate(pivots):
                v[pc] = -m[r][fc]
            basis.append(v)
        return basis

    def det(self) -> QuadNum:
        if self.rows != self.cols:
            raise ValueError("det of non-square matrix")
        m = [list(r) for r in self._e]
        n = self.rows
        out = ONE
        for c in range(n):
            piv = next((i for i in range(c, n) if m[i][c]), None)
            if piv is None:
                return ZERO
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                out = -out
            out = out * m[c][c]
            inv = m[c][c].inverse()
            for i in range(c + 1, n):
                if m[i][c]:
                    f = m[i][c] * inv
                    m[i] = [x - f * y for x, y in zip(m[i], m[c])]
        return out

    def inverse(self) -> "ExactMatrix":
        n = self.rows
        if n != self.cols:
            raise ValueError("inverse of non-square matrix")
        aug = ExactMatrix([list(r) + [1 if i == j else 0 for j in range(n)]
                           for i, r in enumerate(self._e)])
        m, pivots = aug.rref()
        if pivots[:n] != list(range(n)):
            raise ZeroDivisionError("singular matrix")
        return ExactMatrix([row[n:] for row in m])

    def char_poly(self) -> list[QuadNum]:
        """Coefficients of det(tI - M), lowest degree first (Faddeev-LeVerrier)."""
        n = self.rows
        if n != self.cols:
            raise ValueError("char_poly of non-square matrix")
        coeffs = [ZERO] * (n + 1)
        coeffs[n] = ONE
        ident = ExactMatrix.identity(n)
        Mk = ExactMatrix.zeros(n, n)
        c = ONE
        for k in range(1, n + 1):
            Mk = self @ Mk + ident.scale(c)
            c = -(self @ Mk).trace() / k
            coeffs[n - k] = c
        return coeffs


# ---------------------------------------------------------------------------
# roots in Q(sqrt(D))


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def _rational_roots(p: list[Fraction]) -> list[Fraction]:
    """Distinct rational roots of a rational polynomial (rational root theorem)."""
    p = [Fraction(c) for c in p]
    roots = []
    while len(p) > 1 and p[0] == 0:
        if Fraction(0) not in roots:
            roots.append(Fraction(0))
        p = p[1:]
    if len(p) <= 1:
        return roots
    lcm = 1
    for c in p:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in p]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    ints = [c // g for c in ints]
    for num in _divisors(ints[0]):
        for den in _divisors(ints[-1]):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if cand in roots:
                    continue
                acc = 0
                for c in reversed(ints):
                    acc = acc * cand + c
                if acc == 0:
                    roots.append(cand)
    return roots


def _quadratic_roots(c0: Fraction, c1: Fraction, c2: Fraction, D: int) -> list[QuadNum] | None:
    disc = c1 * c1 - 4 * c0 * c2
    if disc < 0:
        return None
    root = sqrt_rational(disc)
    if D != 1 and root.D not in (1, D):
        return None
    return [(-c1 + root) / (2 * c2), (-c1 - root) / (2 * c2)]


def poly_roots(p: Sequence, D: int | None = None) -> list[QuadNum]:
    """All roots (with multiplicity) of p in Q(sqrt(D)); raises NotSplitOverField."""
    p = poly_trim([QuadNum.coerce(c) for c in p])
    if D is None:
        D = common_field(p)
    degree = len(p) - 1
    if degree <= 0:
        return []
    # the norm polynomial p * conj(p) has rational coefficients and the same roots in K
    if all(c.is_rational for c in p):
        norm = [c.a for c in p]
    else:
        prod = poly_mul(p, [c.conjugate() for c in p])
        norm = [c.to_fraction() for c in prod]
    candidates: list[QuadNum] = [QuadNum(r) for r in _rational_roots(norm)]
    residual = [QuadNum(c) for c in norm]
    for r in candidates:
        while True:
            q, rem = poly_divmod_linear(residual, r)
            if rem:
                break
            residual = q
    if len(residual) > 1:
        candidates.extend(_irrational_roots([c.a for c in residual], D))
    roots: list[QuadNum] = []
    work = p
    for r in candidates:
        while len(work) > 1:
            q, rem = poly_divmod_linear(work, r)
            if rem:
                break
            roots.append(r)
            work = q
    if len(roots) != degree:
        raise NotSplitOverField(f"polynomial of degree {degree} has only {len(roots)} roots in Q(sqrt({D}))")
    return roots


def _irrational_roots(residual: list[Fraction], D: int) -> list[QuadNum]:
    # quadratic-factor extraction over Q; the residual has no rational roots
    import sympy

    t = sympy.Symbol("t")
    poly = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in residual])),
                      t, domain="QQ")
    out: list[QuadNum] = []
    for factor, _mult in poly.factor_list()[1]:
        if factor.degree() != 2:
            raise NotSplitOverField(f"irreducible factor of degree {factor.degree()} over Q")
        c2, c1, c0 = (Fraction(int(x.p), int(x.q)) for x in factor.all_coeffs())
        pair = _quadratic_roots(c0, c1, c2, D)
        if pair is None:
            raise NotSplitOverField(f"quadratic factor {factor.as_expr()} does not split over Q(sqrt({D}))")
        out.extend(pair)
    return out


def char_poly_roots(M: ExactMatrix) -> list[QuadNum]:
    """Eigenvalues of a square exact matrix (dimension <= 8), sorted descending."""
    if M.rows != M.cols:
        raise ValueError("matrix must be square")
    if M.rows > 8:
        raise ValueError("char_poly_roots supports dimension <= 8")
    roots = poly_roots(M.char_poly(), M.D)
    return sorted(roots, reverse=True)


# ---------------------------------------------------------------------------
# bulk exact products through integer numpy arrays


def integer_split(rows: Sequence[Sequence], D: int = 1):
    """Write a table of QuadNums as (A + B*sqrt(D)) / den with integer arrays A, B."""
    import numpy as np

    flat = [QuadNum.coerce(x) for r in rows for x in r]
    den = 1
    for x in flat:
        for part in (x.a, x.b):
            den = den * part.denominator // math.gcd(den, part.denominator)
    a = [int(x.a * den) for x in flat]
    b = [int(x.b * den) for x in flat]
    big = max((abs(v) for v in a + b), default=0)
    width = len(rows[0]) if rows else 0
    # int64 products of length `width` must not overflow
    dtype = np.int64 if big * big * max(width, 1) * max(D, 1) < 2**62 else object
    A = np.array(a, dtype=dtype).reshape(len(rows), width)
    B = np.array(b, dtype=dtype).reshape(len(rows), width)
    return A, B, den


def exact_gram_parts(rows: Sequence[Sequence], D: int = 1):
    """Pairwise inner products of exact vectors: (rational part, sqrt(D) part, den)."""
    A, B, den = integer_split(rows, D)
    ga = A @ A.T
    gb = A @ B.T + B @ A.T
    if B.any():
        ga = ga + D * (B @ B.T)
    return ga, gb, den * den
