"""Triple and quadruple regularity of schemes, coherent configurations, and the
two-point derived-set machinery used to certify quadruple regularity.

Counting kernel: for a prefix of points (x,) or (x1, x2), the remaining points w
are grouped by their classes to the prefix.  For a group S the float32 product
F F^T with F[(y, b), w] = [rel(y, w) == b], w in S, gives every count
|{w in S : rel(y, w) = b, rel(z, w) = c}| at once.  Counts stay below 2^24, so
float32 BLAS is exact.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exactnum import ONE, ExactMatrix, QuadNum, sqrt_int
from .geometry import DegeneratePoint, GramSet, TwoPointFamily, design_strength
from .scheme import AssociationScheme

EXHAUSTIVE_QUADRUPLE_LIMIT = 64
DEFAULT_PAIRS_PER_CLASS = 200
DEFAULT_SAMPLED_FIVE_TUPLES = 10**6


class TooLargeForExhaustive(ValueError):
    pass


class NotRefining(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotTransposeClosed(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NumbersInconsistent(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class DichotomyViolated(ValueError):
    pass


class Mismatch(AssertionError):
    pass


# ---------------------------------------------------------------------------
# reports


@dataclass
class RegularityReport:
    level: str  # "triple" | "quadruple"
    verdict: bool
    mode: str  # "exhaustive" | "sampled" | "structured"
    seed: int | None = None
    samples: int | None = None
    witness: dict | None = None
    tensor: dict | None = field(default=None, repr=False)
    digest: str | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self, with_tensor: bool = False) -> dict:
        out = {
            "level": self.level,
            "verdict": self.verdict,
            "mode": self.mode,
            "seed": self.seed,
            "samples": self.samples,
            "witness": self.witness,
            "digest": self.digest,
            "notes": self.notes,
        }
        if with_tensor and self.tensor is not None:
            out["tensor"] = self.tensor
        return out


class _Refs:
    """First-seen count vector for every configuration type."""

    def __init__(self, n_types: int, n_keys: int, tuple_len: int):
        self.table = np.zeros((n_types, n_keys), dtype=np.int16)
        self.filled = np.zeros(n_types, dtype=bool)
        self.first = np.full((n_types, tuple_len), -1, dtype=np.int64)

    def digest(self) -> str:
        h = hashlib.sha256()
        idx = np.nonzero(self.filled)[0]
        h.update(idx.astype(np.int64).tobytes())
        h.update(self.table[idx].astype(np.int64).tobytes())
        return h.hexdigest()


def _decode(code: int, base: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        out.append(code % base)
        code //= base
    return tuple(reversed(out))


def _one_hot(rel: np.ndarray, B: int) -> np.ndarray:
    """OT[y, b, w] = [rel(y, w) == b] as float32."""
    return (rel[:, None, :] == np.arange(B, dtype=rel.dtype)[None, :, None]).astype(np.float32)


def _prefix_scan(rel: np.ndarray, B: int, OT: np.ndarray, prefix: Sequence[int], refs: _Refs):
    """Check all (y, z) for one prefix; return a witness dict or None."""
    n = rel.shape[0]
    p = len(prefix)
    rows = [rel[x].astype(np.int64) for x in prefix]
    g = np.zeros(n, dtype=np.int64)
    for r in rows:
        g = g * B + r
    pid = 0
    for a, b in itertools.combinations(prefix, 2):
        pid = pid * B + int(rel[a, b])
    Bp = B ** p
    types = ((pid * Bp + g[:, None]) * Bp + g[None, :]) * B + rel.astype(np.int64)

    groups = np.unique(g)
    G = len(groups)
    V = np.empty((n, n, G, B, B), dtype=np.int16)
    for gi, gval in enumerate(groups):
        S = np.nonzero(g == gval)[0]
        F = OT[:, :, S].reshape(n * B, len(S))
        C = F @ F.T
        V[:, :, gi] = np.rint(C).astype(np.int16).reshape(n, B, n, B).transpose(0, 2, 1, 3)
    V = V.reshape(n * n, G * B * B)
    cols = (groups[:, None] * (B * B) + np.arange(B * B)[None, :]).ravel()
    T = types.ravel()

    new_types, first_idx = np.unique(T, return_index=True)
    fresh = ~refs.filled[new_types]
    if fresh.any():
        ts, fi = new_types[fresh], first_idx[fresh]
        refs.table[ts] = 0
        refs.table[np.ix_(ts, cols)] = V[fi]
        refs.filled[ts] = True
        yz = np.stack([fi // n, fi % n], axis=1)
        refs.first[ts] = np.hstack([np.tile(np.asarray(prefix), (len(ts), 1)), yz])
    bad = (V != refs.table[T[:, None], cols[None, :]]).any(axis=1)
    if not bad.any():
        return None
    r = int(np.argmax(bad))
    t = int(T[r])
    col = int(np.argmax(V[r] != refs.table[t, cols]))
    key = _decode(int(cols[col]), B, p + 2)
    return {
        "tuple": [int(x) for x in prefix] + [r // n, r % n],
        "reference": [int(x) for x in refs.first[t]],
        "type": list(_decode(t, B, p * (p - 1) // 2 + 2 * p + 1)),
        "key": list(key),
        "counts": [int(refs.table[t, cols[col]]), int(V[r, col])],
    }


def _triple_tensor(refs: _Refs, B: int) -> dict:
    """{"i,j,k": {"l,m,n": count}}: (i, j, k) are the classes of (xy, yz, zx) and
    the count is |R_m(x) ∩ R_n(y) ∩ R_l(z)|."""
    out = {}
    for t in np.nonzero(refs.filled)[0]:
        rxy, rxz, ryz = _decode(int(t), B, 3)
        counts = {}
        for key in np.nonzero(refs.table[t])[0]:
            m, n_, l = _decode(int(key), B, 3)  # classes of (xw, yw, zw)
            counts[f"{l},{m},{n_}"] = int(refs.table[t, key])
        out[f"{rxy},{ryz},{rxz}"] = counts
    return dict(sorted(out.items()))


def _types_count(B: int, p: int) -> int:
    return B ** (p * (p - 1) // 2 + 2 * p + 1)


# ---------------------------------------------------------------------------
# triple regularity


def triple_regular(S: AssociationScheme, mode: str = "exhaustive", samples: int | None = None,
                   seed: int | None = None) -> RegularityReport:
    """Do the counts |R_m(x) ∩ R_n(y) ∩ R_l(z)| depend only on the classes of x, y, z?"""
    rel, B, n = S.rel, S.d + 1, S.n
    if mode == "exhaustive":
        refs = _Refs(_types_count(B, 1), B ** 3, 3)
        OT = _one_hot(rel, B)
        for x in range(n):
            w = _prefix_scan(rel, B, OT, (x,), refs)
            if w is not None:
                return RegularityReport("triple", False, mode, witness=w, digest=refs.digest())
        return RegularityReport("triple", True, mode, tensor=_triple_tensor(refs, B), digest=refs.digest())
    if mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode needs a seed")
        samples = samples or -(-DEFAULT_SAMPLED_FIVE_TUPLES // n)
        w, digest = _sampled(rel, B, 3, samples, seed)
        return RegularityReport("triple", w is None, mode, seed, samples, w, digest=digest,
                                notes=["non-exhaustive: random triples"])
    raise ValueError(f"unknown mode {mode!r} for triple regularity")


def _sampled(rel: np.ndarray, B: int, t: int, samples: int, seed: int, batch: int = 4096):
    """Random t-tuples; counts over the remaining point keyed by its classes to the tuple."""
    rng = np.random.default_rng(seed)
    n = rel.shape[0]
    pairs = list(itertools.combinations(range(t), 2))
    n_types = B ** len(pairs)
    K = B ** t
    table = np.zeros((n_types, K), dtype=np.int32)
    filled = np.zeros(n_types, dtype=bool)
    first = np.zeros((n_types, t), dtype=np.int64)
    rel64 = rel.astype(np.int64)
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        tup = rng.integers(0, n, size=(m, t))
        typ = np.zeros(m, dtype=np.int64)
        for a, b in pairs:
            typ = typ * B + rel64[tup[:, a], tup[:, b]]
        code = np.zeros((m, n), dtype=np.int64)
        for a in range(t):
            code = code * B + rel64[tup[:, a]]
        code += (np.arange(m) * K)[:, None]
        counts = np.bincount(code.ravel(), minlength=m * K).reshape(m, K).astype(np.int32)
        for r in range(m):
            ty = typ[r]
            if not filled[ty]:
                filled[ty] = True
                table[ty] = counts[r]
                first[ty] = tup[r]
            elif not np.array_equal(table[ty], counts[r]):
                col = int(np.argmax(table[ty] != counts[r]))
                w = {
                    "tuple": [int(x) for x in tup[r]],
                    "reference": [int(x) for x in first[ty]],
                    "type": list(_decode(int(ty), B, len(pairs))),
                    "key": list(_decode(col, B, t)),
                    "counts": [int(table[ty, col]), int(counts[r, col])],
                    "sample_index": done + r,
                }
                return w, None
        done += m
    h = hashlib.sha256()
    idx = np.nonzero(filled)[0]
    h.update(idx.tobytes())
    h.update(table[idx].astype(np.int64).tobytes())
    return None, h.hexdigest()


# ---------------------------------------------------------------------------
# quadruple regularity


def sample_pairs(S: AssociationScheme, per_class: int, seed: int) -> dict[int, list[tuple[int, int]]]:
    """Up to `per_class` ordered pairs (z1, z2) in R_m for every m >= 1, seeded."""
    rng = np.random.default_rng(seed)
    out = {}
    for m in range(1, S.d + 1):
        xs, ys = np.nonzero(S.rel == m)
        if len(xs) <= per_class:
            pick = np.arange(len(xs))
        else:
            pick = np.sort(rng.choice(len(xs), size=per_class, replace=False))
        out[m] = [(int(xs[i]), int(ys[i])) for i in pick]
    return out


def quadruple_regular(S: AssociationScheme, mode: str = "exhaustive", samples: int | None = None,
                      seed: int | None = None, pairs_per_class: int = DEFAULT_PAIRS_PER_CLASS
                      ) -> RegularityReport:
    """Do the counts |R_i1(x1) ∩ ... ∩ R_i4(x4)| depend only on the 4-point type?

    exhaustive: every ordered prefix (x1, x2), n <= 64.
    sampled:    `samples` random 4-tuples (default about 10^6 five-tuples in total).
    structured: exhaustive triple regularity, then every two-point partition at
                seeded pairs (z1, z2) in R_m is checked to be a coherent configuration
                whose parameters agree across all checked pairs with the same m.
    """
    rel, B, n = S.rel, S.d + 1, S.n
    if mode == "exhaustive":
        if n > EXHAUSTIVE_QUADRUPLE_LIMIT:
            raise TooLargeForExhaustive(f"n = {n} > {EXHAUSTIVE_QUADRUPLE_LIMIT}; use sampled or structured")
        refs = _Refs(_types_count(B, 2), B ** 4, 4)
        OT = _one_hot(rel, B)
        for x1 in range(n):
            for x2 in range(n):
                w = _prefix_scan(rel, B, OT, (x1, x2), refs)
                if w is not None:
                    return RegularityReport("quadruple", False, mode, witness=w, digest=refs.digest())
        return RegularityReport("quadruple", True, mode, digest=refs.digest())
    if seed is None:
        raise ValueError(f"{mode} mode needs a seed")
    if mode == "sampled":
        samples = samples or -(-DEFAULT_SAMPLED_FIVE_TUPLES // n)
        w, digest = _sampled(rel, B, 4, samples, seed)
        return RegularityReport("quadruple", w is None, mode, seed, samples, w, digest=digest,
                                notes=[f"non-exhaustive: {samples} random 4-tuples, each against all fifth points"])
    if mode == "structured":
        tri = triple_regular(S, "exhaustive")
        if not tri.verdict:
            return RegularityReport("quadruple", False, mode, seed, witness=tri.witness,
                                    notes=["not triply regular"])
        refs = _Refs(_types_count(B, 2), B ** 4, 4)
        OT = _one_hot(rel, B)
        pairs = sample_pairs(S, pairs_per_class, seed)
        total = 0
        for m, plist in pairs.items():
            for z1, z2 in plist:
                w = _prefix_scan(rel, B, OT, (z1, z2), refs)
                total += 1
                if w is not None:
                    return RegularityReport("quadruple", False, mode, seed, total, witness=w,
                                            digest=refs.digest())
        notes = [f"two-point partitions checked at {total} pairs"]
        if any(len(p) < int((S.rel == m).sum()) for m, p in pairs.items()):
            notes.append(f"non-exhaustive: at most {pairs_per_class} pairs per class")
        return RegularityReport("quadruple", True, mode, seed, total, digest=refs.digest(), notes=notes)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# coherent configurations


@dataclass
class CoherentConfiguration:
    n: int
    fiber_of: np.ndarray
    labels: np.ndarray  # n x n relation ids
    label_fibers: dict[int, tuple[int, int]]
    transpose: dict[int, int]
    tensor: dict[tuple[int, int, int], int]  # (t, r, s) -> p^t_{r s}
    names: list | None = None

    @property
    def fiber_count(self) -> int:
        return int(self.fiber_of.max()) + 1 if self.n else 0

    @property
    def rank(self) -> int:
        return len(self.label_fibers)

    def named_tensor(self) -> dict:
        """Tensor keyed by relation names (when names were supplied)."""
        if self.names is None:
            return dict(self.tensor)
        nm = self.names
        return {(nm[t], nm[r], nm[s]): c for (t, r, s), c in self.tensor.items()}


def verify_cc(fiber_of: Sequence[int], relations: np.ndarray, names: list | None = None
              ) -> CoherentConfiguration:
    """Verify the coherent-configuration axioms for a fibered relation table.

    `fiber_of[x]` is the fiber of point x; `relations[x, y]` a relation id.
    """
    fiber_of = np.asarray(fiber_of, dtype=np.int64)
    R = np.asarray(relations, dtype=np.int64)
    n = len(fiber_of)
    if R.shape != (n, n):
        raise ValueError("relation table must be n x n")
    fx = np.broadcast_to(fiber_of[:, None], (n, n))
    fy = np.broadcast_to(fiber_of[None, :], (n, n))
    label_fibers: dict[int, tuple[int, int]] = {}
    for r in np.unique(R):
        mask = R == r
        pairs = set(zip(fx[mask].tolist(), fy[mask].tolist()))
        if len(pairs) != 1:
            x, y = np.argwhere(mask)[0]
            raise NotRefining(f"relation {r} meets several fiber pairs {sorted(pairs)[:3]}",
                              {"relation": int(r), "fiber_pairs": sorted(pairs)})
        label_fibers[int(r)] = pairs.pop()
    diag = set(np.unique(np.diag(R)).tolist())
    off = R[~np.eye(n, dtype=bool)]
    both = diag & set(np.unique(off).tolist())
    if both:
        raise NotRefining(f"relation {min(both)} contains diagonal and off-diagonal pairs",
                          {"relation": int(min(both))})
    transpose: dict[int, int] = {}
    for r in label_fibers:
        rt = np.unique(R.T[R == r])
        if len(rt) != 1:
            raise NotTransposeClosed(f"transpose of relation {r} splits into {rt.tolist()}",
                                     {"relation": r, "images": rt.tolist()})
        transpose[r] = int(rt[0])

    fibers = [np.nonzero(fiber_of == i)[0] for i in range(int(fiber_of.max()) + 1)] if n else []
    pair_labels: dict[tuple[int, int], list[int]] = {}
    for r, fp in label_fibers.items():
        pair_labels.setdefault(fp, []).append(r)
    tensor: dict[tuple[int, int, int], int] = {}
    for a, b, c in itertools.product(range(len(fibers)), repeat=3):
        Fa, Fb, Fc = fibers[a], fibers[b], fibers[c]
        if not (len(Fa) and len(Fb) and len(Fc)):
            continue
        rs = pair_labels.get((a, b), [])
        ss = pair_labels.get((b, c), [])
        Rab = R[np.ix_(Fa, Fb)]
        Rbc = R[np.ix_(Fb, Fc)]
        Rac = R[np.ix_(Fa, Fc)]
        left = np.stack([(Rab == r) for r in rs], axis=1).astype(np.float32)  # |Fa|, L, |Fb|
        right = np.stack([(Rbc == s) for s in ss], axis=0).astype(np.float32)  # L', |Fb|, |Fc|
        prod = np.einsum("xrw,swy->xyrs", left, right, optimize=True)
        prod = np.rint(prod).astype(np.int64)
        for t in pair_labels.get((a, c), []):
            mask = Rac == t
            vals = prod[mask]  # (#pairs, L, L')
            ref = vals[0]
            bad = np.nonzero((vals != ref).reshape(len(vals), -1).any(axis=1))[0]
            if len(bad):
                xs, ys = np.nonzero(mask)
                x0, y0 = Fa[xs[0]], Fc[ys[0]]
                x1, y1 = Fa[xs[bad[0]]], Fc[ys[bad[0]]]
                ri, si = np.argwhere(vals[bad[0]] != ref)[0]
                raise NumbersInconsistent(
                    f"relation {t}: pairs {(int(x0), int(y0))} and {(int(x1), int(y1))} see "
                    f"{ref[ri, si]} vs {vals[bad[0]][ri, si]} points in ({rs[ri]}, {ss[si]})",
                    {"relation": t, "pair": (int(x1), int(y1)), "reference_pair": (int(x0), int(y0)),
                     "r": rs[ri], "s": ss[si],
                     "counts": (int(ref[ri, si]), int(vals[bad[0]][ri, si]))})
            for ri, r in enumerate(rs):
                for si, s in enumerate(ss):
                    if ref[ri, si]:
                        tensor[(t, r, s)] = int(ref[ri, si])
    return CoherentConfiguration(n, fiber_of, R, label_fibers, transpose, tensor, names)


def scheme_as_cc(S: AssociationScheme) -> CoherentConfiguration:
    return verify_cc(np.zeros(S.n, dtype=np.int64), S.rel.astype(np.int64))


@dataclass
class TwoPointPartition:
    z1: int
    z2: int
    m: int
    cells: dict[tuple[int, int], np.ndarray]

    def census(self) -> dict[tuple[int, int], int]:
        return {c: len(p) for c, p in self.cells.items()}

    def points(self) -> np.ndarray:
        return np.concatenate(list(self.cells.values()))


def two_point_partition(S: AssociationScheme, z1: int, z2: int) -> TwoPointPartition:
    """Nonempty cells R_{i,j}(z1, z2) = R_i(z1) ∩ R_j(z2), i, j >= 1."""
    if z1 == z2:
        raise ValueError("z1 and z2 must differ")
    r1, r2 = S.rel[z1], S.rel[z2]
    cells = {}
    for i in range(1, S.d + 1):
        for j in range(1, S.d + 1):
            pts = np.nonzero((r1 == i) & (r2 == j))[0]
            if len(pts):
                cells[(i, j)] = pts
    return TwoPointPartition(z1, z2, int(S.rel[z1, z2]), cells)


def partition_cc(S: AssociationScheme, part: TwoPointPartition) -> CoherentConfiguration:
    """The fibered structure on the cells with relations (cell, cell, class)."""
    keys = list(part.cells)
    pts = part.points()
    fiber_of = np.concatenate([np.full(len(part.cells[c]), a) for a, c in enumerate(keys)])
    B = S.d + 1
    sub = S.rel[np.ix_(pts, pts)].astype(np.int64)
    F = len(keys)
    R = (fiber_of[:, None] * F + fiber_of[None, :]) * B + sub
    uniq, inv = np.unique(R, return_inverse=True)
    names = [(keys[u // B // F], keys[u // B % F], int(u % B)) for u in uniq]
    return verify_cc(fiber_of, inv.reshape(R.shape), names)


# ---------------------------------------------------------------------------
# Gram-based families: coherent configurations from inner products


def _family_points(fam: TwoPointFamily, cells: Sequence[int]):
    sizes = [len(fam.members[a]) for a in cells]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    return sizes, offsets


def family_cc(fam: TwoPointFamily, cells: Sequence[int]) -> CoherentConfiguration:
    """CC on the union of the given cells; relations are (cell, cell, inner product)."""
    sizes, off = _family_points(fam, cells)
    N = int(off[-1])
    fiber_of = np.concatenate([np.full(s, a) for a, s in enumerate(sizes)])
    R = np.zeros((N, N), dtype=np.int64)
    names: list = []
    lookup: dict = {}
    for a, ca in enumerate(cells):
        for b, cb in enumerate(cells):
            idx, vals = fam.cross(ca, cb)
            ids = np.empty(len(vals), dtype=np.int64)
            for v_i, v in enumerate(vals):
                key = (a, b, v)
                if key not in lookup:
                    lookup[key] = len(names)
                    names.append(key)
                ids[v_i] = lookup[key]
            R[off[a]:off[a + 1], off[b]:off[b + 1]] = ids[idx]
    return verify_cc(fiber_of, R, names)


@dataclass
class DoubledCC:
    base: CoherentConfiguration
    doubled: CoherentConfiguration
    fibers: list[tuple[int, int]]  # (plus cell position, sign)
    derived: dict


def _antipodal_cell(fam: TwoPointFamily, a: int) -> tuple[int, int]:
    i, j = fam.cells[a]
    neg = {v: k for k, v in enumerate(fam.angles)}
    return neg[-fam.angles[i]], neg[-fam.angles[j]]


def antipodal_double(X: GramSet, z1: int, z2: int, plus_cells: Sequence[tuple[int, int]]) -> DoubledCC:
    """Double a coherent configuration on cells X_c^+ by their antipodes X_c^- = -X_c^+.

    The doubled parameters are computed from the input configuration alone via
    |X^+(x,a; y,b)| = |X^-(x,-a; y,-b)| and compared with direct counting.
    """
    plus_cells = [tuple(c) for c in plus_cells]
    probe = TwoPointFamily(X, z1, z2, plus_cells)
    minus = [_antipodal_cell(probe, a) for a in range(len(plus_cells))]
    for a, c in enumerate(minus):
        if c in plus_cells and c != plus_cells[a]:
            raise ValueError(f"cells {plus_cells[a]} and {c} are antipodes; list only one of them")
    fibers = [(a, 1) for a in range(len(plus_cells))]
    all_cells = list(plus_cells)
    for a, c in enumerate(minus):
        if c != plus_cells[a]:
            fibers.append((a, -1))
            all_cells.append(c)
    fam = TwoPointFamily(X, z1, z2, all_cells)
    base = family_cc(fam, list(range(len(plus_cells))))
    doubled = family_cc(fam, list(range(len(all_cells))))

    # x in fiber (a, e) is e * x' with x' in X_a^+, so <x, y> = e_x e_y <x', y'>
    rep = dict(enumerate(fibers))
    base_id = {nm: r for r, nm in enumerate(base.names)}
    derived = {}
    for t_id, (fa, fc, gamma) in enumerate(doubled.names):
        for r_id, (fa2, fb, alpha) in enumerate(doubled.names):
            if fa2 != fa:
                continue
            for s_id, (fb2, fc2, beta) in enumerate(doubled.names):
                if fb2 != fb or fc2 != fc:
                    continue
                (a, ea), (b, eb), (c, ec) = rep[fa], rep[fb], rep[fc]
                key_t = (a, c, gamma * (ea * ec))
                key_r = (a, b, alpha * (ea * eb))
                key_s = (b, c, beta * (eb * ec))
                if key_t not in base_id:
                    continue
                val = base.tensor.get((base_id[key_t], base_id.get(key_r, -1), base_id.get(key_s, -1)), 0)
                if val:
                    derived[(t_id, r_id, s_id)] = val
    if derived != doubled.tensor:
        diff = sorted(set(derived.items()) ^ set(doubled.tensor.items()))[:3]
        raise Mismatch(f"doubled parameters disagree with the sign-flip derivation: {diff}")
    return DoubledCC(base, doubled, fibers, derived)


# ---------------------------------------------------------------------------
# the condition ladder for a family of derived sets


@dataclass
class LadderReport:
    cells: list[tuple[int, int]]
    s: list[list[int]]
    t: list[int]
    conditions: dict[tuple[int, int, int], dict]

    @property
    def all_hold(self) -> bool:
        return all(c["holds"] for c in self.conditions.values())


def _check_dichotomy(fam: TwoPointFamily):
    L = len(fam.cells)
    for a in range(L):
        for b in range(L):
            idx, vals = fam.cross(a, b)
            for target, name in ((ONE, "equal"), (-ONE, "antipodal")):
                k = next((u for u, v in enumerate(vals) if v == target), None)
                hit = (idx == k) if k is not None else np.zeros(idx.shape, dtype=bool)
                if a == b and target == ONE:
                    hit = hit & ~np.eye(len(idx), dtype=bool)
                    if hit.any():
                        raise DichotomyViolated(f"cell {fam.cells[a]} has repeated points")
                    continue
                if hit.any() and not (hit.any(axis=1).all() and hit.any(axis=0).all()):
                    raise DichotomyViolated(
                        f"cells {fam.cells[a]}, {fam.cells[b]} are neither disjoint nor {name}")


def _pair_counts(fam: TwoPointFamily, i: int, j: int, k: int):
    """For every (alpha, beta): counts |{z in X_j: <x,z>=alpha, <z,y>=beta}| for x in X_i, y in X_k."""
    Aij = fam.angle_set(i, j)
    Ajk = fam.angle_set(j, k)
    idx_ij, val_ij = fam.cross(i, j)
    idx_jk, val_jk = fam.cross(j, k)
    out = {}
    for a in Aij:
        ka = val_ij.index(a)
        L = (idx_ij == ka).astype(np.float32)
        for b in Ajk:
            kb = val_jk.index(b)
            Rm = (idx_jk == kb).astype(np.float32)
            out[(a, b)] = np.rint(L @ Rm).astype(np.int64)
    return out


def constant_counts(fam: TwoPointFamily, i: int, j: int, k: int) -> dict:
    """{gamma: {(alpha, beta): value or None}}; None when p^j_{alpha,beta}(x,y) varies."""
    counts = _pair_counts(fam, i, j, k)
    idx_ik, val_ik = fam.cross(i, k)
    out = {}
    for g in fam.angle_set(i, k):
        mask = idx_ik == val_ik.index(g)
        row = {}
        for ab, C in counts.items():
            vals = np.unique(C[mask])
            row[ab] = int(vals[0]) if len(vals) == 1 else None
        out[g] = row
    return out


def theorem26_conditions(fam: TwoPointFamily, t_max: int = 8) -> LadderReport:
    """s-matrix, strengths, and which of conditions (1)-(3) holds for each triple of cells."""
    _check_dichotomy(fam)
    L = len(fam.cells)
    s = [[len(fam.angle_set(a, b)) for b in range(L)] for a in range(L)]
    t = [design_strength(fam.cell(a), t_max) for a in range(L)]
    conds = {}
    for i, j, k in itertools.product(range(L), repeat=3):
        v = s[i][j] + s[j][k]
        entry = {"cond1": v - 2 <= t[j], "cond2": None, "cond3": None}
        if not entry["cond1"] and v - 3 == t[j]:
            table = constant_counts(fam, i, j, k)
            entry["cond2"] = all(any(x is not None for x in row.values()) for row in table.values())
        elif not entry["cond1"] and v - 4 == t[j]:
            table = constant_counts(fam, i, j, k)
            ok = True
            for row in table.values():
                good = {ab for ab, x in row.items() if x is not None}
                found = any((a, b2) in good and (a2, b) in good
                            for (a, b) in good for (a2, _) in good for (_, b2) in good
                            if a2 != a and b2 != b)
                ok &= found
            entry["cond3"] = ok
        entry["holds"] = bool(entry["cond1"] or entry["cond2"] or entry["cond3"])
        conds[(i, j, k)] = entry
    return LadderReport(list(fam.cells), s, t, conds)


def admissible_cells(X: GramSet, z1: int, z2: int) -> list[tuple[int, int]]:
    """The subfamily of nonempty cells used for the ladder, in a fixed order.

    With s = |A'(X)|: nondegenerate cells with i <= (s-1)/2, j <= s-1, together with cells
    (s-1)/2 <= i <= (s+1)/2, j <= (s+1)/2; sorted by (cell degree, -i, j).
    """
    s = len(X.angle_set_prime())
    keep = []
    for i, j in TwoPointFamily.nonempty_cells(X, z1, z2):
        if not ((2 * i <= s - 1 and j <= s - 1) or (s - 1 <= 2 * i <= s + 1 and 2 * j <= s + 1)):
            continue
        try:
            TwoPointFamily(X, z1, z2, [(i, j)])
        except DegeneratePoint:
            continue  # a point of span(z1, z2): nothing left after projection
        keep.append((i, j))
    fam = TwoPointFamily(X, z1, z2, keep)
    deg = [len(fam.angle_set(a, a)) for a in range(len(keep))]
    order = sorted(range(len(keep)), key=lambda a: (deg[a], -keep[a][0], keep[a][1]))
    return [keep[a] for a in order]


# ---------------------------------------------------------------------------
# closed forms from the MUB analysis, evaluated at (d, f)


def closed_form_matrices(d: int, f: int) -> dict[str, ExactMatrix]:
    """The claimed closed-form B_1, B_2, B_3, Q and B_1^* of the MUB subconstituent, taken literally."""
    r = sqrt_int(d)
    q = QuadNum
    F = lambda x: q(x)  # noqa: E731
    B1 = [[0, 1, 0, 0],
          [(f - 2) * (d + r) / 2, (f - 3) * (d + 3 * r) / 4, (d + 2 * r) / 4, (d + r) / 4],
          [0, (d + r - 2) / 2, 0, (d + r) / 2],
          [0, (f - 3) * (d - r) / 4, F((f - 2) * d) / 4, (f - 3) * (d + r) / 4]]
    B2 = [[0, 0, 1, 0],
          [0, (d + r - 2) / 2, 0, (d + r) / 2],
          [d - 1, 0, d - 2, 0],
          [0, (d - r) / 2, 0, (d - r - 2) / 2]]
    B3 = [[0, 0, 0, 1],
          [0, (f - 3) * (d - r) / 4, F((f - 2) * d) / 4, (f - 3) * (d + r) / 4],
          [0, (d - r) / 2, 0, (d - r - 2) / 2],
          [(f - 2) * (d - r) / 2, (f - 3) * (d - r) / 4, (f - 2) * (d - 2 * r) / 4, (f - 3) * (d - 3 * r) / 4]]
    Qm = [[1, d - 1, (f - 1) * (d - 1), f - 1],
          [1, r - 1, -r + 1, -1],
          [1, -1, -f + 1, f - 1],
          [1, -r - 1, r + 1, -1]]
    g = F(d) / (f - 1)
    B1s = [[0, 1, 0, 0],
           [d - 1, g - 2, g, 0],
           [0, (f - 2) * g, (f - 2) * g - 2, d - 1],
           [0, 0, 1, 0]]
    return {name: ExactMatrix(m) for name, m in
            (("B1", B1), ("B2", B2), ("B3", B3), ("Q", Qm), ("B1*", B1s))}


def closed_form_consistency(d: int, f: int) -> dict[str, list[str]]:
    """Internal checks on the claimed closed forms (column sums, row 0 of Q)."""
    mats = closed_form_matrices(d, f)
    issues: dict[str, list[str]] = {}
    for name in ("B1", "B2", "B3"):
        M = mats[name]
        val = M[int(name[1]), 0]
        for c in range(4):
            col = sum((M[r, c] for r in range(4)), QuadNum(0))
            if col != val:
                issues.setdefault(name, []).append(f"column {c} sums to {col}, valency {val}")
    Q0 = sum(mats["Q"].row(0), QuadNum(0))
    n = d * (f - 1)  # size of R_1(z)
    if Q0 != n:
        issues.setdefault("Q", []).append(f"row 0 sums to {Q0}, expected {n}")
    return issues


def compare_closed_forms(sub: AssociationScheme, d: int, f: int) -> dict[str, list[tuple]]:
    """Entrywise differences (row, col, computed, claimed) between a computed
    subconstituent and the claimed closed forms; empty lists mean equal."""
    shown = closed_form_matrices(d, f)
    computed = {"B1": sub.B(1), "B2": sub.B(2), "B3": sub.B(3), "Q": sub.Q, "B1*": sub.krein_matrix(1)}
    out = {}
    for name, M in computed.items():
        diffs = []
        for r in range(4):
            for c in range(4):
                if M[r, c] != shown[name][r, c]:
                    diffs.append((r, c, M[r, c], shown[name][r, c]))
        out[name] = diffs
    return out


def derived_count_table(d: int) -> list[dict]:
    """Closed-form p^j_{alpha,beta}(x,y) entries at the orthogonal pair case.

    Cells are numbered 1 = X_{2,2}, 2 = X_{1,1}, 3 = X_{1,3}; (a, b) picks
    alpha = a-th angle of A(X_i, X_j) and beta = b-th angle of A(X_j, X_k)
    (descending); values are listed against the three angles of A(X_i, X_k).
    """
    r = sqrt_int(d)
    h = QuadNum(d) / 2 - 1
    up, dn = (d + 2 * r) / 4, (d - 2 * r) / 4
    q4 = QuadNum(d) / 4
    rows = []
    for ijk in ((2, 2, 2), (3, 3, 3)):
        rows.append({"ijk": ijk, "ab": [(2, 2)], "values": [0, h, 0]})
        rows.append({"ijk": ijk, "ab": [(2, 1), (1, 2)], "values": [up - 1, 0, up]})
        rows.append({"ijk": ijk, "ab": [(2, 3), (3, 2)], "values": [dn, 0, dn - 1]})
    rows.append({"ijk": (2, 2, 3), "ab": [(2, 2)], "values": [0, h, 0]})
    rows.append({"ijk": (2, 2, 3), "ab": [(2, 1)], "values": [q4 - 1, 0, q4]})
    rows.append({"ijk": (2, 2, 3), "ab": [(2, 3)], "values": [q4 - 1, 0, q4]})
    rows.append({"ijk": (2, 2, 3), "ab": [(1, 2)], "values": [up, 0, up]})
    rows.append({"ijk": (2, 2, 3), "ab": [(3, 2)], "values": [dn, 0, dn]})
    for row in rows:
        row["values"] = [QuadNum.coerce(v) for v in row["values"]]
    return rows


DERIVED_CELLS = [(2, 2), (1, 1), (1, 3)]


def check_derived_counts(X: GramSet, d: int, pairs: Sequence[tuple[int, int]]) -> list[dict]:
    """Recount every claimed derived-set entry at each given orthogonal pair (z1, z2)."""
    results = []
    for z1, z2 in pairs:
        fam = TwoPointFamily(X, z1, z2, DERIVED_CELLS)
        for row in derived_count_table(d):
            i, j, k = (x - 1 for x in row["ijk"])
            Aij, Ajk, Aik = fam.angle_set(i, j), fam.angle_set(j, k), fam.angle_set(i, k)
            table = constant_counts(fam, i, j, k)
            for a, b in row["ab"]:
                observed = [table[g][(Aij[a - 1], Ajk[b - 1])] for g in Aik]
                results.append({
                    "pair": (z1, z2), "ijk": row["ijk"], "ab": (a, b),
                    "expected": row["values"], "observed": observed,
                    "ok": [QuadNum.coerce(o) if o is not None else None for o in observed] == row["values"],
                })
    return results
