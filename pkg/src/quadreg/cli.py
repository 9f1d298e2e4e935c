"""Command-line entry point: construct artifacts, verify them, run the regularity checks.

Exit status: 0 pass, 1 a checked property fails (a witness is reported), 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import codes, designs, geometry, mub, regularity, scheme
from .exactnum import QuadNum

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class FormatError(ValueError):
    pass


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    kind: str
    input: Path | None
    out: Path | None
    mode: str | None
    samples: int | None
    seed: int | None
    t_max: int
    fmt: str

    def require_seed(self):
        if self.mode in ("sampled", "structured") and self.seed is None:
            raise UsageError(f"--seed is required with --mode {self.mode}")


# ---------------------------------------------------------------------------
# serialization


def _plain(obj):
    """JSON-ready copy: QuadNum and Fraction become strings, tuples become lists."""
    if isinstance(obj, (QuadNum, Fraction)):
        return str(obj)
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else ",".join(map(str, k)) if isinstance(k, tuple) else str(k)):
                _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=1) + "\n"


def write_output(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def load_json(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "kind" not in data:
        raise FormatError(f"{path}: expected a JSON object with a 'kind' field")
    return data


def load_code(path: Path) -> codes.BinaryCode:
    try:
        return codes.BinaryCode.from_text(path.read_text())
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _field(data: dict, key: str, path: Path):
    if key not in data:
        raise FormatError(f"{path}: missing field '{key}'")
    return data[key]


def load_mub(path: Path) -> mub.MUBSet:
    data = load_json(path)
    if data["kind"] != "mub":
        raise FormatError(f"{path}: expected kind 'mub', got {data['kind']!r}")
    try:
        return mub.MUBSet.from_json(data)
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc


def load_linked(path: Path) -> designs.LinkedSystem:
    data = load_json(path)
    if data["kind"] != "linked":
        raise FormatError(f"{path}: expected kind 'linked', got {data['kind']!r}")
    try:
        return designs.LinkedSystem.from_json(data)
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def load_scheme(path: Path) -> tuple[scheme.AssociationScheme, dict]:
    """A scheme from a scheme, MUB or linked-system file, with provenance info."""
    data = load_json(path)
    kind = data["kind"]
    if kind == "scheme":
        return scheme.AssociationScheme.from_json(data), {"source": "scheme"}
    if kind == "mub":
        M = mub.MUBSet.from_json(data)
        return mub.mub_to_scheme(M), {"source": "mub", "d": M.d, "f": M.f, "mub": M}
    if kind == "linked":
        L = designs.LinkedSystem.from_json(data)
        designs.verify_linked(L)
        return designs.lsd_to_scheme(L), {"source": "linked", "f": L.f, "v": L.v, "system": L}
    raise FormatError(f"{path}: no scheme can be read from kind {kind!r}")


def _rows_to_bits(rows, path: Path) -> np.ndarray:
    try:
        return np.array([[int(ch) for ch in r] for r in rows], dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: incidence rows must be 0/1 strings") from exc


# ---------------------------------------------------------------------------
# construct


def cmd_construct(cfg: RunConfig, args) -> tuple[int, str]:
    kind = cfg.kind
    if kind == "mub-d4":
        return EXIT_PASS, dumps({"kind": "mub", **mub.construct_d4().to_json()})
    if kind == "mub-d16":
        return EXIT_PASS, dumps({"kind": "mub", **mub.construct_d16().to_json()})
    if kind == "nr-code":
        M = load_mub(cfg.input) if cfg.input else mub.construct_d16()
        return EXIT_PASS, codes.extract_code(M, args.base).to_text()
    if kind == "lsd-from-mub":
        M = load_mub(cfg.input) if cfg.input else mub.construct_d16()
        X = M.point_gram()
        angles = X.angle_set_prime()
        if not 1 <= args.angle <= len(angles) or angles[args.angle - 1] == -1:
            raise UsageError(f"--angle must pick one of {[str(a) for a in angles[:-1]]} (1-based)")
        Y = geometry.derive_one(X, args.point, angles[args.angle - 1])
        S = scheme.AssociationScheme.from_gram(Y)
        L, _ = designs.scheme_to_lsd(S)
        if 2 * L.k > L.v:
            L = L.complement()
        if args.fibers:
            L = L.subsystem([int(t) for t in args.fibers.split(",")])
        designs.verify_linked(L)
        return EXIT_PASS, dumps({"kind": "linked", **L.to_json()})
    raise UsageError(f"unknown construct kind {kind!r}")


# ---------------------------------------------------------------------------
# verify


def _fail(report: dict, exc: Exception) -> tuple[int, dict]:
    report.update(verdict=False, error=type(exc).__name__, message=str(exc),
                  witness=getattr(exc, "witness", None))
    return EXIT_FAIL, report


def cmd_verify(cfg: RunConfig, args) -> tuple[int, dict]:
    kind, path = cfg.kind, cfg.input
    report: dict = {"command": "verify", "kind": kind}
    if kind == "mub":
        data = load_json(path)
        try:
            M = mub.MUBSet.from_json(data)
        except (mub.NotOrthonormal, mub.NotUnbiased, mub.BoundExceeded) as exc:
            return _fail(report, exc)
        report.update(verdict=True, d=M.d, f=M.f, maximal=M.is_maximal)
        return EXIT_PASS, report
    if kind == "design":
        data = load_json(path)
        N = _rows_to_bits(_field(data, "incidence", path), path)
        try:
            D = designs.verify_design(N)
        except (designs.NotRegular, designs.NotLambdaBalanced) as exc:
            return _fail(report, exc)
        report.update(verdict=True, v=D.v, k=D.k, lam=D.lam)
        return EXIT_PASS, report
    if kind == "linked":
        L = load_linked(path)
        try:
            rep = designs.verify_linked(L)
        except (designs.NotLinked, designs.NotRegular, designs.NotLambdaBalanced,
                designs.NonSquareN) as exc:
            return _fail(report, exc)
        report.update(verdict=True, f=L.f, v=rep.v, k=rep.k, lam=rep.lam,
                      sigma=rep.sigma, tau=rep.tau, sign=rep.sign)
        return EXIT_PASS, report
    if kind == "scheme":
        try:
            S, info = load_scheme(path)
        except scheme.SchemeError as exc:
            return _fail(report, exc)
        problems = S.check_invariants()
        report.update(verdict=not problems, problems=problems, n=S.n, d=S.d, k=S.k,
                      q_structure=S.q_structure().to_json(), a1_star=S.a1_star)
        return (EXIT_PASS if not problems else EXIT_FAIL), report
    if kind == "cc":
        data = load_json(path)
        fibers = _field(data, "fibers", path)
        relations = np.array(_field(data, "relations", path), dtype=np.int64)
        try:
            cc = regularity.verify_cc(fibers, relations)
        except (regularity.NotRefining, regularity.NotTransposeClosed,
                regularity.NumbersInconsistent) as exc:
            return _fail(report, exc)
        report.update(verdict=True, n=cc.n, fibers=cc.fiber_count, rank=cc.rank)
        return EXIT_PASS, report
    raise UsageError(f"unknown verify kind {kind!r}")


# ---------------------------------------------------------------------------
# check

CLOSED_FORMS = {
    "B1": "[[0,1,0,0],[(f-2)(d+r)/2,(f-3)(d+3r)/4,(d+2r)/4,(d+r)/4],[0,(d+r-2)/2,0,(d+r)/2],"
          "[0,(f-3)(d-r)/4,(f-2)d/4,(f-3)(d+r)/4]]",
    "B2": "[[0,0,1,0],[0,(d+r-2)/2,0,(d+r)/2],[d-1,0,d-2,0],[0,(d-r)/2,0,(d-r-2)/2]]",
    "B3": "[[0,0,0,1],[0,(f-3)(d-r)/4,(f-2)d/4,(f-3)(d+r)/4],[0,(d-r)/2,0,(d-r-2)/2],"
          "[(f-2)(d-r)/2,(f-3)(d-r)/4,(f-2)(d-2r)/4,(f-3)(d-3r)/4]]",
    "Q": "[[1,d-1,(f-1)(d-1),f-1],[1,r-1,-r+1,-1],[1,-1,-f+1,f-1],[1,-r-1,r+1,-1]]",
    "B1*": "[[0,1,0,0],[d-1,d/(f-1)-2,d/(f-1),0],[0,(f-2)d/(f-1),(f-2)d/(f-1)-2,d-1],[0,0,1,0]]",
}


def _r2_pairs(S, cfg: RunConfig) -> tuple[list[tuple[int, int]], str]:
    xs, ys = np.nonzero(S.rel == 2)
    if cfg.mode in (None, "exhaustive"):
        return [(int(x), int(y)) for x, y in zip(xs, ys)], "exhaustive"
    cfg.require_seed()
    rng = np.random.default_rng(cfg.seed)
    k = min(cfg.samples or 200, len(xs))
    pick = np.sort(rng.choice(len(xs), size=k, replace=False))
    return [(int(xs[i]), int(ys[i])) for i in pick], "sampled"


def cmd_check(cfg: RunConfig, args) -> tuple[int, dict]:
    kind, path = cfg.kind, cfg.input
    report: dict = {"command": "check", "kind": kind}

    if kind in ("triple", "quadruple"):
        S, _ = load_scheme(path)
        mode = cfg.mode or "exhaustive"
        cfg.mode = mode
        cfg.require_seed()
        try:
            if kind == "triple":
                rep = regularity.triple_regular(S, mode, cfg.samples, cfg.seed)
            else:
                rep = regularity.quadruple_regular(S, mode, cfg.samples, cfg.seed)
        except regularity.TooLargeForExhaustive as exc:
            raise UsageError(str(exc)) from exc
        report.update(rep.to_json(with_tensor=args.tensor))
        return (EXIT_PASS if rep.verdict else EXIT_FAIL), report

    if kind == "noda":
        L = load_linked(path)
        designs.verify_linked(L)
        S = designs.lsd_to_scheme(L)
        nr = designs.noda_check(L)
        tri = regularity.triple_regular(S)
        report.update(f=nr.f, v=nr.v, k=nr.k, rhs=nr.rhs, equality=nr.is_equality,
                      inequality_holds=nr.inequality_holds, complemented=nr.complemented,
                      a1_star=S.a1_star, a1_star_zero=S.a1_star == 0, triple_regular=tri.verdict)
        agree = nr.is_equality == (S.a1_star == 0) == tri.verdict
        report["predicates_agree"] = agree
        report["verdict"] = nr.is_equality
        return (EXIT_PASS if nr.inequality_holds and agree else EXIT_FAIL), report

    if kind == "quad-counting":
        L = load_linked(path)
        try:
            dist = designs.quad_counting(L, args.fiber)
        except designs.IdentityViolated as exc:
            return _fail(report, exc)
        report.update(fiber=dist.fiber, subsets=dist.subsets, histogram=dist.histogram,
                      sum_alpha=dist.sum_alpha, rhs_alpha=dist.rhs_alpha,
                      sum_pairs=dist.sum_pairs, rhs_pairs=dist.rhs_pairs,
                      is_4_design=dist.is_4_design, verdict=True)
        return EXIT_PASS, report

    if kind in ("weights", "oa-strength"):
        C = load_code(path)
        W = codes.weight_enumerator(C)
        report.update(size=len(C), length=C.length)
        if kind == "weights":
            dual = codes.macwilliams(codes.distance_enumerator(C))
            report.update(weights=W.support(), coefficients=list(W.coefficients),
                          dual_distance_distribution=dual.support(), verdict=True)
        else:
            report.update(oa_strength=codes.oa_strength(C), verdict=True)
        return EXIT_PASS, report

    if kind == "table1":
        M = load_mub(path)
        S = mub.mub_to_scheme(M)
        pairs, used = _r2_pairs(S, cfg)
        results = regularity.check_derived_counts(M.point_gram(), M.d, pairs)
        failures = [r for r in results if not r["ok"]]
        seen, distinct = set(), []
        for r in failures:
            key = (r["ijk"], r["ab"])
            if key not in seen:
                seen.add(key)
                distinct.append({k: r[k] for k in ("ijk", "ab", "expected", "observed", "pair")})
        z1, z2 = pairs[0]
        fam = geometry.TwoPointFamily(M.point_gram(), z1, z2, regularity.DERIVED_CELLS)
        strengths = [geometry.design_strength(fam.cell(a), cfg.t_max) for a in range(3)]
        report.update(mode=used, seed=cfg.seed if used == "sampled" else None, pairs=len(pairs),
                      cells=regularity.DERIVED_CELLS, design_strengths=strengths,
                      entries_checked=len(results), entries_failed=len(failures),
                      failing_entries=distinct, verdict=not failures)
        return (EXIT_PASS if not failures else EXIT_FAIL), report

    if kind == "lemma-matrices":
        M = load_mub(path)
        S = mub.mub_to_scheme(M)
        sub = S.subconstituent(args.point, 1)
        diffs = regularity.compare_closed_forms(sub, M.d, M.f)
        report.update(d=M.d, f=M.f, point=args.point,
                      matrices={name: {"equal": not dl, "formula": CLOSED_FORMS[name],
                                       "differences": [{"row": r, "col": c, "computed": a, "claimed": b}
                                                       for r, c, a, b in dl]}
                                for name, dl in diffs.items()},
                      a1_star=sub.a1_star, verdict=not any(diffs.values()))
        report["note"] = "r = sqrt(d); B1* is the Krein matrix q^k_{1j}"
        return (EXIT_PASS if report["verdict"] else EXIT_FAIL), report

    raise UsageError(f"unknown check kind {kind!r}")


# ---------------------------------------------------------------------------


def _text(report: dict) -> str:
    lines = []
    for key in sorted(report):
        val = _plain(report[key])
        lines.append(f"{key}: {json.dumps(val, sort_keys=True) if isinstance(val, (dict, list)) else val}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quadreg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", type=Path, help="write the result here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--mode", choices=("exhaustive", "sampled", "structured"))
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--t-max", type=int, default=8)

    p = sub.add_parser("construct", help="build an artifact")
    p.add_argument("kind", choices=("mub-d4", "mub-d16", "nr-code", "lsd-from-mub"))
    p.add_argument("--in", dest="input", type=Path, help="MUB file (nr-code, lsd-from-mub; default d=16)")
    p.add_argument("--point", type=int, default=0)
    p.add_argument("--angle", type=int, default=1, help="1-based position in the angle set A'(X)")
    p.add_argument("--base", type=int, default=0, help="coordinate frame for nr-code")
    p.add_argument("--fibers", help="comma-separated fibers to keep (lsd-from-mub)")
    common(p)

    p = sub.add_parser("verify", help="verify an artifact file")
    p.add_argument("kind", choices=("mub", "design", "linked", "scheme", "cc"))
    p.add_argument("input", type=Path)
    common(p)

    p = sub.add_parser("check", help="run a structural check")
    p.add_argument("kind", choices=("triple", "quadruple", "noda", "quad-counting", "weights",
                                    "oa-strength", "table1", "lemma-matrices"))
    p.add_argument("input", type=Path)
    p.add_argument("--fiber", type=int, default=0)
    p.add_argument("--point", type=int, default=0)
    p.add_argument("--tensor", action="store_true", help="include the full count tensor")
    common(p)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    cfg = RunConfig(args.command, args.kind, getattr(args, "input", None), args.out, args.mode,
                    args.samples, args.seed, args.t_max, args.format)
    try:
        if cfg.command == "construct":
            status, text = cmd_construct(cfg, args)
        else:
            handler = cmd_verify if cfg.command == "verify" else cmd_check
            status, report = handler(cfg, args)
            text = dumps(report) if cfg.fmt == "json" else _text(report)
        write_output(text, cfg.out)
        return status
    except (KeyError, TypeError) as exc:
        print(f"quadreg: error: malformed input ({type(exc).__name__}: {exc})", file=sys.stderr)
        return EXIT_ERROR
    except (FormatError, UsageError, OSError) as exc:
        print(f"quadreg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
