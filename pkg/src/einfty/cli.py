"""Command-line front end.

Every command writes JSON to standard output (JSON Lines for lists, one
object per tree, term, face or degree) and a short human summary to
standard error.  Exit codes: 0 success, 1 invalid input, 2 capacity guard
hit, 3 internal inconsistency (including a failed selftest).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import __version__
from .errors import CapacityError, EInftyError, InternalInconsistency, ValidationError

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are validation errors (exit 1)
        raise ValidationError(f"{self.prog}: {message}")


def _height(text: str):
    from .criticality import INF
    if text.lower() in ("inf", "infinity", "oo"):
        return INF
    try:
        h = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"height must be a positive integer or 'inf', got {text!r}")
    if h < 1:
        raise argparse.ArgumentTypeError("height must be >= 1")
    return h


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=False)


def _emit(out, obj) -> None:
    out.write(_dump(obj) + "\n")


def _emit_lines(out, items) -> None:
    for item in items:
        _emit(out, item)


def _say(err, text: str) -> None:
    err.write(text.rstrip("\n") + "\n")


def _read_input(path: str | None) -> str:
    if path is None:
        raise ValidationError("this command needs --input FILE (use - for standard input)")
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}")


# ---------------------------------------------------------------------------
# commands

def cmd_trees(args, out, err) -> int:
    from .level_trees import enumerate_labeled, enumerate_reduced, LabeledLevelTree
    if args.dim < 0:
        raise ValidationError("--dim must be >= 0")
    if args.labeled:
        if args.arity is None:
            raise ValidationError("--labeled needs --arity")
        trees = enumerate_labeled(args.arity, args.dim, args.height)
        rows = [{"barcode": t.barcode(), "arity": t.n, "dim": t.dim, "height": t.height} for t in trees]
    else:
        trees = enumerate_reduced(args.arity, args.dim, args.height)
        rows = [{"barcode": t.barcode(), "arity": t.n_tips, "dim": t.dim, "height": t.height}
                for t in trees]
    _emit_lines(out, rows)
    _say(err, f"{len(rows)} trees of dimension {args.dim}")
    return 0


def cmd_diff(args, out, err) -> int:
    from .bar_diff import d_lin
    from .criticality import INF, d_crit
    from .faces import d_reg_mod2, d_reg_signed
    from .level_trees import tree_from_barcode
    t = tree_from_barcode(args.barcode)
    ring = args.ring.upper()
    if args.linear_only:
        result = d_lin(t).to_ring(ring)
    elif ring == "F2":
        result = d_reg_mod2(t)
        if t.dim >= d_crit(t.n, INF):
            _say(err, "note: critical cell; this is the regular part only (see the counterterm command)")
    else:
        if t.dim >= d_crit(t.n, INF):
            raise ValidationError(
                f"{t.barcode()} has dimension {t.dim} >= d_crit = {d_crit(t.n, INF)}; integral "
                "signs are only defined on the regular range (use --ring f2)")
        result = d_reg_signed(t)
    _emit_lines(out, ({"term": str(x), "coeff": c} for x, c in result.items()))
    _say(err, f"d({t.barcode()}) = {result}")
    return 0


def cmd_faces(args, out, err) -> int:
    from .faces import iter_faces
    from .level_trees import tree_from_barcode
    t = tree_from_barcode(args.barcode)
    count = 0
    for face in iter_faces(t, args.codim):
        el = face.element()
        _emit(out, {"element": str(el), "degree": el.degree, "codim": t.dim - el.degree,
                    "tip_map": list(face.tip_map), "target": face.target.to_json(),
                    "quasibijection": face.is_quasibijection})
        count += 1
    _say(err, f"{count} faces of {t.barcode()}")
    return 0


def cmd_classify(args, out, err) -> int:
    from .criticality import classify
    res = classify(args.arity, args.height)
    _emit(out, res)
    text = "regular" if res["regular"] else f"non-regular, witness {res['witness']}"
    _say(err, f"F_{res['height']}({args.arity}): {text}")
    return 0


def cmd_bad_cell(args, out, err) -> int:
    from .criticality import bad_cell_report, classify
    res = classify(args.arity, args.height)
    if res["witness"]:
        res["cell"] = bad_cell_report(res["witness"])
    _emit(out, res)
    _say(err, "no bad cells" if res["regular"] else f"bad cell {res['witness']}")
    return 0


def _parse_term_list(text: str) -> list[str]:
    text = text.strip()
    if text.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            data = None
        if isinstance(data, list):
            return [str(x) for x in data]
    return [line.strip() for line in text.splitlines() if line.strip()]


def cmd_counterterm(args, out, err) -> int:
    from .criticality import counterterm_pool, find_counterterm, verify_counterterm
    from .free_operad import parse_term
    from .level_trees import tree_from_barcode
    t = tree_from_barcode(args.barcode)
    if args.verify:
        terms = [parse_term(x) for x in _parse_term_list(_read_input(args.verify))]
        ok = verify_counterterm(t, terms)
        _emit(out, {"barcode": t.barcode(), "terms": [str(x) for x in terms], "verified": ok})
        _say(err, "counterterm verifies over F2" if ok else "counterterm does NOT verify over F2")
        return 0 if ok else 1
    u = find_counterterm(t)
    terms = [str(x) for x, _ in u.items()]
    _emit(out, {"barcode": t.barcode(), "dim": t.dim, "pool_size": len(counterterm_pool(t)),
                "counterterm": terms, "verified": True})
    _say(err, f"counterterm: {u}")
    return 0


def cmd_homology(args, out, err) -> int:
    from .exact_homology import build_G_complex, homology
    from .criticality import format_height
    c = build_G_complex(args.arity, args.height, args.dmax)
    hi = max(c.bases)
    last = hi if c.complete else hi - 1
    rows = []
    for d in range(args.arity - 2, last + 1):
        g = homology(c, d)
        rows.append({"n": args.arity, "h": format_height(args.height), "degree": d,
                     "chain_rank": c.rank_of(d), **g.to_json()})
    if args.matrices:
        os.makedirs(args.matrices, exist_ok=True)
        for d, m in sorted(c.boundaries.items()):
            path = os.path.join(args.matrices, f"boundary_{d}.mtx")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(m.to_matrix_market())
    _emit_lines(out, rows)
    summary = ", ".join(f"H_{r['degree']} = Z^{r['rank']}" + (f" + torsion {r['torsion']}" if r["torsion"] else "")
                        for r in rows if r["rank"] or r["torsion"])
    _say(err, summary or "all homology vanishes in the window")
    return 0


def _parse_tensor(text: str, n: int) -> dict:
    """JSON: a list of [word, coeff] pairs or an object {"1 2 3": coeff}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"input is not JSON: {exc}")
    pairs = data.items() if isinstance(data, dict) else data
    out: dict = {}
    try:
        for word, c in pairs:
            if isinstance(word, str):
                word = [int(x) for x in word.replace(",", " ").split()]
            w = tuple(int(x) for x in word)
            if sorted(w) != list(range(1, n + 1)):
                raise ValidationError(f"word {list(w)} is not a permutation of 1..{n}")
            out[w] = out.get(w, 0) + int(c)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed tensor element: {exc}")
    return {w: c for w, c in out.items() if c}


def cmd_lie(args, out, err) -> int:
    from . import free_lie
    n = args.n
    if n < 1:
        raise ValidationError("--n must be >= 1")
    if args.action == "quotient":
        rep = free_lie.ush_quotient_report(n, args.signed)
        _emit(out, rep)
        _say(err, f"Ush rank {rep['ush_rank']}, quotient rank {rep['quotient_rank']}, "
                  f"torsion-free: {rep['torsion_free']}")
        return 0
    f = _parse_tensor(_read_input(args.input), n)
    if args.action == "ree":
        ok = free_lie.ree_test(f, n)
        _emit(out, {"n": n, "lie": ok})
        _say(err, "Lie element" if ok else "not a Lie element")
        return 0
    coords = free_lie.lie_coordinates(f, n)
    _emit(out, {"n": n, "lie": coords is not None,
                "coordinates": None if coords is None else
                [{"lambda": list(l), "coeff": c} for l, c in sorted(coords.items())]})
    _say(err, "not a Lie element" if coords is None else f"{len(coords)} nonzero coordinates")
    return 0


def cmd_selftest(args, out, err) -> int:
    from .acceptance import CRITERIA, run_all
    only = None
    if args.criteria:
        try:
            only = {int(x) for x in args.criteria.split(",")}
        except ValueError:
            raise ValidationError("--criteria takes a comma-separated list of numbers")
        if not only <= set(CRITERIA):
            raise ValidationError(f"criteria must be among {sorted(CRITERIA)}")

    def progress(res, seconds):
        mark = "PASS" if res["passed"] else "FAIL"
        _say(err, f"criterion {res['criterion']} ({res['title']}): {mark} [{seconds:.1f}s]")
        for c in res["checks"]:
            if not c["passed"]:
                _say(err, f"    failed: {c['name']}")

    report = run_all(only, progress)
    _emit(out, {"header": {"tool": "einfty", "version": __version__, "schema": SCHEMA_VERSION},
                "report": report})
    return 0 if report["passed"] else 3


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="einfty", description="Fox-Neuwirth tree computations (JSON output).")
    p.add_argument("--version", action="version", version=f"einfty {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    trees = sub.add_parser("trees", help="tree enumeration")
    tsub = trees.add_subparsers(dest="action", required=True, parser_class=_Parser)
    enum = tsub.add_parser("enum", help="list reduced trees of a dimension")
    enum.add_argument("--dim", type=int, required=True)
    enum.add_argument("--arity", type=int)
    enum.add_argument("--height", type=int, help="only trees of height <= H")
    enum.add_argument("--labeled", action="store_true", help="all labelings (needs --arity)")
    enum.set_defaults(func=cmd_trees)

    diff = sub.add_parser("diff", help="differential of a generator")
    diff.add_argument("--barcode", required=True)
    diff.add_argument("--ring", choices=["z", "f2"], default="z")
    diff.add_argument("--linear-only", action="store_true")
    diff.set_defaults(func=cmd_diff)

    faces = sub.add_parser("faces", help="faces of a tree and their elements")
    faces.add_argument("--barcode", required=True)
    faces.add_argument("--codim", type=int, help="keep faces of this codimension only")
    faces.set_defaults(func=cmd_faces)

    for name, func, help_ in (("classify", cmd_classify, "regularity of F_h(n)"),
                              ("bad-cell", cmd_bad_cell, "the explicit bad cell of F_h(n)")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--arity", type=int, required=True)
        c.add_argument("--height", type=_height, required=True)
        c.set_defaults(func=func)

    ct = sub.add_parser("counterterm", help="find or verify a counterterm over F2")
    ct.add_argument("--barcode", required=True)
    ct.add_argument("--verify", metavar="FILE",
                    help="terms to check (JSON list or one term per line; - for stdin)")
    ct.set_defaults(func=cmd_counterterm)

    hom = sub.add_parser("homology", help="homology of the tree complex")
    hom.add_argument("--arity", type=int, required=True)
    hom.add_argument("--height", type=_height, required=True)
    hom.add_argument("--dmax", type=int, help="top degree to build (required for inf)")
    hom.add_argument("--matrices", metavar="DIR", help="also write boundary matrices (Matrix Market)")
    hom.set_defaults(func=cmd_homology)

    lie = sub.add_parser("lie", help="free Lie algebra tools")
    lie.add_argument("action", choices=["ree", "coords", "quotient"])
    lie.add_argument("--n", type=int, required=True)
    lie.add_argument("--input", metavar="FILE",
                     help='tensor element as JSON: [[[1,2],1],[[2,1],-1]] or {"1 2": 1}')
    lie.add_argument("--signed", action="store_true", help="sign-weighted unshuffles (quotient)")
    lie.set_defaults(func=cmd_lie)

    st = sub.add_parser("selftest", help="run the acceptance suite")
    st.add_argument("--criteria", help="comma-separated subset, e.g. 1,4")
    st.set_defaults(func=cmd_selftest)
    return p


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out, err)
    except ValidationError as exc:
        _say(err, f"error: {exc}")
        return 1
    except CapacityError as exc:
        _say(err, f"capacity guard: {exc}")
        return 2
    except InternalInconsistency as exc:
        _say(err, f"internal inconsistency: {exc}")
        return 3
    except EInftyError as exc:
        _say(err, f"error: {exc}")
        return 3


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
