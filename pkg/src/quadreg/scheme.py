"""Symmetric association schemes: axioms, intersection numbers, P/Q, Krein numbers."""

from __future__ import annotations

import base64
import itertools
from dataclasses import dataclass, field

import numpy as np

from .exactnum import (
    ONE, ZERO, ExactMatrix, NotSplitOverField, QuadNum, char_poly_roots, common_field,
)
from .geometry import GramSet


class SchemeError(ValueError):
    """Base class for failures of the association scheme axioms."""


class NotSymmetric(SchemeError):
    pass


class IdentityClassBroken(SchemeError):
    pass


class IntersectionNumbersInconsistent(SchemeError):
    def __init__(self, x, y, k, i, j, first, found):
        self.witness = {"x": int(x), "y": int(y), "k": int(k), "i": int(i), "j": int(j),
                        "expected": int(first), "found": int(found)}
        super().__init__(f"p[{i}][{j}][{k}]: pair ({x},{y}) gives {found}, earlier pairs gave {first}")


class NotAScheme(SchemeError):
    def __init__(self, msg, witness=None):
        self.witness = witness
        super().__init__(msg)


class AngleCollision(SchemeError):
    pass


@dataclass
class QStructure:
    is_q_polynomial: bool
    ordering: tuple[int, ...] | None
    all_orderings: list[tuple[int, ...]]
    is_q_bipartite: bool
    is_q_antipodal: bool
    antipodal_class_count: QuadNum | None
    krein_array_b: list[QuadNum] = field(default_factory=list)
    krein_array_c: list[QuadNum] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "is_q_polynomial": self.is_q_polynomial,
            "ordering": list(self.ordering) if self.ordering else None,
            "all_orderings": [list(o) for o in self.all_orderings],
            "is_q_bipartite": self.is_q_bipartite,
            "is_q_antipodal": self.is_q_antipodal,
            "antipodal_class_count": str(self.antipodal_class_count) if self.antipodal_class_count is not None else None,
            "krein_array_b": [str(x) for x in self.krein_array_b],
            "krein_array_c": [str(x) for x in self.krein_array_c],
        }


def _check_table(rel: np.ndarray) -> int:
    n = rel.shape[0]
    if rel.ndim != 2 or rel.shape != (n, n):
        raise NotSymmetric("relation table must be square")
    if not np.array_equal(rel, rel.T):
        x, y = np.argwhere(rel != rel.T)[0]
        raise NotSymmetric(f"rel({x},{y}) != rel({y},{x})")
    diag = np.diag(rel)
    if np.any(diag != 0):
        raise IdentityClassBroken(f"rel({int(np.argmax(diag != 0))}, same) != 0")
    off = rel[~np.eye(n, dtype=bool)]
    if off.size and off.min() < 1:
        x, y = np.argwhere((rel == 0) & ~np.eye(n, dtype=bool))[0]
        raise IdentityClassBroken(f"distinct points {x},{y} in class 0")
    d = int(rel.max()) if n > 1 else 0
    present = set(np.unique(rel).tolist())
    if present != set(range(d + 1)):
        raise SchemeError(f"class indices must be 0..{d} without gaps, got {sorted(present)}")
    return d


def intersection_numbers(rel: np.ndarray, d: int) -> np.ndarray:
    """p[i][j][k] by direct counting; raises with a witness if not well defined."""
    n = rel.shape[0]
    adj = [(rel == i).astype(np.float64) for i in range(d + 1)]
    first = {}
    for k in range(d + 1):
        xs, ys = np.nonzero(rel == k)
        first[k] = (xs, ys)
    p = np.zeros((d + 1, d + 1, d + 1), dtype=np.int64)
    for i in range(d + 1):
        for j in range(i, d + 1):
            prod = np.rint(adj[i] @ adj[j]).astype(np.int64)
            for k in range(d + 1):
                xs, ys = first[k]
                vals = prod[xs, ys]
                bad = np.nonzero(vals != vals[0])[0]
                if bad.size:
                    b = bad[0]
                    raise IntersectionNumbersInconsistent(xs[b], ys[b], k, i, j, vals[0], vals[b])
                p[i, j, k] = p[j, i, k] = vals[0]
    return p


class AssociationScheme:
    """A verified symmetric association scheme with its eigenmatrices and Krein tensor."""

    def __init__(self, rel: np.ndarray):
        rel = np.asarray(rel)
        self.d = _check_table(rel)
        self.rel = rel.astype(np.int8 if self.d < 127 else np.int32)
        self.n = rel.shape[0]
        self.p = intersection_numbers(self.rel, self.d)
        self.k = [int(self.p[i, i, 0]) for i in range(self.d + 1)]
        self._eigen()

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_relations(cls, rel) -> "AssociationScheme":
        return cls(np.asarray(rel))

    @classmethod
    def from_gram(cls, X: GramSet) -> "AssociationScheme":
        ordered = [ONE] + X.angle_set_prime()
        if len(set(ordered)) != len(ordered):
            raise AngleCollision("two angle values compare equal")
        remap = np.full(len(X.values), -1, dtype=np.int64)
        for cls_idx, a in enumerate(ordered):
            for vid, v in enumerate(X.values):
                if v == a:
                    remap[vid] = cls_idx
        if np.any(remap[np.unique(X.index)] < 0):
            raise AngleCollision("unclassified Gram value")
        S = cls(remap[X.index])
        S.angles = ordered
        return S

    def B(self, i: int) -> ExactMatrix:
        """Intersection matrix with B_i[j][k] = p^k_{ij}."""
        return ExactMatrix(self.p[i].tolist())

    def _eigen(self):
        d = self.d
        Bs = [self.B(i) for i in range(d + 1)]
        rows = _common_eigenvectors(Bs, d)
        trivial = [ONE] + [QuadNum(k) for k in self.k[1:]]
        rows.sort(key=lambda r: r != trivial)
        if rows[0] != trivial:
            raise NotAScheme("trivial eigenvector missing")
        rest = sorted(rows[1:], key=lambda r: [-x for x in r[1:]])
        self._set_P([trivial] + rest)
        self.orderings = self._q_polynomial_orderings()
        if self.orderings:
            best = self.orderings[0]
            if best != tuple(range(1, d + 1)):
                self._set_P([self._P_rows[0]] + [self._P_rows[i] for i in best])
                self.orderings = self._q_polynomial_orderings()

    def _set_P(self, rows):
        self._P_rows = rows
        self.P = ExactMatrix(rows)
        self.Q = self.P.inverse().scale(self.n)
        self.m = [self.Q[0, j] for j in range(self.d + 1)]
        self.D = common_field(x for r in rows for x in r)
        d = self.d
        q = [[[ZERO] * (d + 1) for _ in range(d + 1)] for _ in range(d + 1)]
        inv_n = QuadNum(1) / self.n
        for i in range(d + 1):
            for j in range(i, d + 1):
                for k in range(d + 1):
                    acc = ZERO
                    for l in range(d + 1):
                        acc = acc + self.P[k, l] * self.Q[l, i] * self.Q[l, j]
                    q[i][j][k] = q[j][i][k] = acc * inv_n
        self.q = q

    # -- Krein data -----------------------------------------------------------
    @property
    def a1_star(self) -> QuadNum:
        return self.q[1][1][1]

    def krein_matrix(self, i: int = 1) -> ExactMatrix:
        """B*_i with B*_i[j][k] = q^k_{ij}."""
        return ExactMatrix([[self.q[i][j][k] for k in range(self.d + 1)] for j in range(self.d + 1)])

    def _q_polynomial_orderings(self) -> list[tuple[int, ...]]:
        d = self.d
        found = []
        for perm in itertools.permutations(range(1, d + 1)):
            order = (0,) + perm
            e1 = order[1]
            ok = True
            for a in range(d + 1):
                for b in range(d + 1):
                    val = self.q[e1][order[a]][order[b]]
                    if abs(a - b) > 1 and val:
                        ok = False
                        break
                    if b == a + 1 and not val:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                found.append(perm)
        found.sort(key=lambda perm: ([self.m[i] for i in perm], perm))
        return found

    def q_structure(self) -> QStructure:
        d = self.d
        ident = tuple(range(1, d + 1))
        is_qp = bool(self.orderings) and self.orderings[0] == ident
        b = [self.q[1][j + 1][j] for j in range(d)]
        c = [self.q[1][j - 1][j] for j in range(1, d + 1)]
        a = [self.q[1][j][j] for j in range(d + 1)]
        bip = is_qp and all(not x for x in a)
        half = d // 2
        anti = is_qp and d >= 2 and all(b[j] == c[d - j - 1] for j in range(d) if j != half)
        w = None
        if anti and c[d - half - 1]:
            w = ONE + b[half] / c[d - half - 1]
        return QStructure(is_qp, ident if is_qp else None, list(self.orderings), bip, anti, w, b, c)

    # -- substructures --------------------------------------------------------
    def subconstituent(self, z: int, j: int) -> "AssociationScheme":
        pts = np.nonzero(self.rel[z] == j)[0]
        if len(pts) < 2:
            raise NotAScheme(f"R_{j}({z}) has fewer than 2 points")
        sub = self.rel[np.ix_(pts, pts)]
        present = np.unique(sub)
        remap = np.full(self.d + 1, -1, dtype=np.int64)
        remap[present] = np.arange(len(present))
        try:
            S = AssociationScheme(remap[sub])
        except SchemeError as exc:
            raise NotAScheme(f"restriction to R_{j}({z}) is not a scheme: {exc}",
                             getattr(exc, "witness", None)) from exc
        S.parent_points = pts
        S.parent_classes = present.tolist()
        return S

    # -- invariants -----------------------------------------------------------
    def check_invariants(self) -> list[str]:
        """Return the list of violated invariants (empty when all hold)."""
        problems = []
        d, n = self.d, self.n
        if self.P @ self.Q != ExactMatrix.identity(d + 1).scale(n):
            problems.append("PQ != nI")
        if list(self.P.row(0)) != [QuadNum(k) for k in self.k]:
            problems.append("row 0 of P is not the valency vector")
        if sum(self.k) != n or sum(self.m, ZERO) != n:
            problems.append("valencies or multiplicities do not sum to n")
        if (self.p < 0).any():
            problems.append("negative intersection number")
        for i, j, k in itertools.product(range(d + 1), repeat=3):
            t = self.k[k] * int(self.p[i, j, k])
            for a, b, c in itertools.permutations((i, j, k)):
                if self.k[c] * int(self.p[a, b, c]) != t:
                    problems.append(f"triangle count T{(i, j, k)} not symmetric")
                    break
            if self.q[i][j][k].sign() < 0:
                problems.append(f"Krein condition fails at q[{i}][{j}][{k}] = {self.q[i][j][k]}")
        return problems

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "D": self.D,
            "rel": base64.b64encode(self.rel.astype(np.uint8).tobytes()).decode("ascii"),
            "p": self.p.tolist(),
            "k": self.k,
            "m": [list(x.to_tuple()) for x in self.m],
            "P": [[list(x.to_tuple()) for x in self.P.row(i)] for i in range(self.d + 1)],
            "Q": [[list(x.to_tuple()) for x in self.Q.row(i)] for i in range(self.d + 1)],
            "q": [[[list(x.to_tuple()) for x in row] for row in mat] for mat in self.q],
            "q_structure": self.q_structure().to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "AssociationScheme":
        n = data["n"]
        raw = np.frombuffer(base64.b64decode(data["rel"]), dtype=np.uint8)
        return cls(raw.reshape(n, n).astype(np.int64))

    def __repr__(self):
        return f"AssociationScheme(n={self.n}, d={self.d}, k={self.k})"


def _common_eigenvectors(Bs: list[ExactMatrix], d: int) -> list[list[QuadNum]]:
    """Rows of P: common right eigenvectors u of all B_i with u[0] = 1."""
    combos = [[0, 1] + [0] * (d - 1)]
    combos += [[0] + [c ** k for k in range(1, d + 1)] for c in range(1, 6)]
    combos += [[0] + list(range(1, d + 1))]
    for coeffs in combos[: 6]:
        coeffs = coeffs[: d + 1]
        M = ExactMatrix.zeros(d + 1, d + 1)
        for c, B in zip(coeffs, Bs):
            if c:
                M = M + B.scale(c)
        try:
            roots = char_poly_roots(M)
        except NotSplitOverField:
            continue
        if len(set(roots)) != d + 1:
            continue
        rows = []
        for theta in roots:
            null = (M - ExactMatrix.identity(d + 1).scale(theta)).nullspace()
            if len(null) != 1 or not null[0][0]:
                break
            u = [x / null[0][0] for x in null[0]]
            if any(Bs[i].apply(u) != [u[i] * x for x in u] for i in range(d + 1)):
                break
            rows.append(u)
        else:
            return rows
    raise NotAScheme("could not separate the primitive idempotents over Q(sqrt(D))")
