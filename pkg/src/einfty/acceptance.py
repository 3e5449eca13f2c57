"""The acceptance suite: one function per criterion, each returning a
JSON-ready dict {criterion, title, passed, checks: [...]}.

Reports contain no timings, so two runs give byte-identical output;
``run_all`` reports elapsed times separately through a callback.
"""

from __future__ import annotations

import math
import time
from typing import Callable

from . import bar_diff, criticality, exact_homology, faces, free_lie, fixtures
from .criticality import INF
from .free_operad import FormalSum
from .level_trees import enumerate_reduced, tree_from_barcode


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def _result(k: int, title: str, checks: list[dict]) -> dict:
    return {"criterion": k, "title": title,
            "passed": all(c["passed"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------

def criterion_1() -> dict:
    checks = []
    counts = {d: len(enumerate_reduced(None, d)) for d in range(9)}
    checks.append(_check("2^d reduced trees of dimension d, d = 0..8",
                         all(c == 2 ** d for d, c in counts.items()),
                         counts=[counts[d] for d in range(9)]))
    figure = fixtures.reduced_trees()
    for d in range(4):
        got = [t.barcode() for t in enumerate_reduced(None, d)]
        want = figure[d]
        checks.append(_check(f"dimension {d} list equals the reference figure",
                             sorted(got) == sorted(want) and len(got) == len(want),
                             enumerated=got, reference=want))
    return _result(1, "enumeration counts", checks)


def _d_lin_square(labels, gaps) -> dict:
    acc: dict = {}
    for (l2, g2), c in bar_diff.d_lin_pairs(labels, gaps).items():
        for key, c2 in bar_diff.d_lin_pairs(l2, g2).items():
            acc[key] = acc.get(key, 0) + c * c2
    return {k: v for k, v in acc.items() if v}


def criterion_2() -> dict:
    checks = []
    for f in fixtures.linear_formulas():
        t = tree_from_barcode(f["barcode"])
        got = bar_diff.d_lin(t)
        want = FormalSum.parse(f["linear"])
        checks.append(_check(f"linear part of {f['barcode']}", got == want,
                             computed=str(got), reference=f["linear"]))
    bad = []
    count = 0
    for n in range(2, 7):
        for d in range(n - 2, 9):
            for tree in enumerate_reduced(n, d):
                count += 1
                if _d_lin_square(tuple(range(1, n + 1)), tree.gaps):
                    bad.append(tree.barcode())
    checks.append(_check("d_lin o d_lin = 0 for n <= 6, dim <= 8 (unlabeled generators)",
                         not bad, trees=count, failures=bad[:10]))
    from .level_trees import enumerate_labeled
    bad = []
    count = 0
    for n in range(2, 5):
        for d in range(n - 2, 6):
            for t in enumerate_labeled(n, d):
                count += 1
                if _d_lin_square(t.labels, t.tree.gaps):
                    bad.append(t.barcode())
    checks.append(_check("d_lin o d_lin = 0 for every labeling, n <= 4, dim <= 5",
                         not bad, trees=count, failures=bad[:10]))
    bad = []
    count = 0
    for n in range(2, 6):
        for d in range(n - 2, 7):
            for t in enumerate_labeled(n, d):
                count += 1
                a = bar_diff.d_lin_pairs(t.labels, t.tree.gaps)
                b = bar_diff.d_lin_pairs(t.labels, t.tree.gaps, oracle=True)
                if a != b:
                    bad.append(t.barcode())
    checks.append(_check("bar transport equals merge-unshuffle, n <= 5, dim <= 6",
                         not bad, trees=count, failures=bad[:10]))
    return _result(2, "linear differential", checks)


def criterion_3() -> dict:
    checks = []
    table = faces.default_table(5, 4)
    for f in fixtures.boundary_formulas():
        t = tree_from_barcode(f["barcode"])
        got = faces.d_reg_signed(t, table)
        want = FormalSum.parse(f["boundary"])
        diff = got - want
        checks.append(_check(f"{f['name']} {f['barcode']} matches the printed formula",
                             not diff, computed=str(got), reference=f["boundary"],
                             difference=str(diff)))
        if "consistent" in f:
            checks.append(_check(f"{f['name']} {f['barcode']} matches the d^2 = 0 corrected formula",
                                 got == FormalSum.parse(f["consistent"]),
                                 computed=str(got), reference=f["consistent"], informational=True))
    bad = []
    count = 0
    for n, dmax in ((2, 3), (3, 3), (4, 3), (5, 4)):
        for d in range(n - 2, dmax + 1):
            for tree in enumerate_reduced(n, d):
                count += 1
                if table.d(table.boundary_unlabeled(tree.gaps)):
                    bad.append(tree.barcode())
    checks.append(_check("d o d = 0 on regular generators (n <= 4, dim <= 3; n = 5, dim <= 4)",
                         not bad, trees=count, failures=bad))
    return _result(3, "full differential on the regular range", checks)


def _regular_by_statement(n: int, h) -> bool:
    """Regularity as stated case by case (independent of d_crit)."""
    if n in (2, 3):
        return True
    if h == INF:
        return False
    return (n <= 5 and h <= 2) or h == 1


def criterion_4() -> dict:
    checks = []
    mismatches = []
    witness_problems = []
    certified = 0
    for h in (1, 2, 3, 4, 5, INF):
        for n in range(2, 11):
            c = criticality.classify(n, h, certify=True)
            if c["regular"] != _regular_by_statement(n, h):
                mismatches.append([n, criticality.format_height(h)])
            if not c["regular"]:
                if c["witness_dim"] != c["d_crit"] or not c["certificate"]:
                    witness_problems.append([n, criticality.format_height(h)])
                else:
                    certified += 1
    checks.append(_check("regularity matches the case list for n <= 10, h <= 5 and the colimit",
                         not mismatches, mismatches=mismatches))
    checks.append(_check("every bad case has a witness of dimension d_crit with a source-target datum",
                         not witness_problems and certified > 0,
                         certified=certified, problems=witness_problems))
    fig = criticality.compare_figures()
    for name, bad in sorted(fig.items()):
        checks.append(_check(f"figure pattern '{name}'", not bad, mismatches=bad))
    tam = criticality.classify(6, 2)
    checks.append(_check("(6, 2) is non-regular with the Tamarkin witness",
                         not tam["regular"] and tam["witness"] == "[1|2||3|4||5|6]",
                         certificate=tam["certificate"]))
    return _result(4, "criticality table", checks)


def criterion_5() -> dict:
    checks = []
    cells = fixtures.bad_cells()["cells"]
    mar = cells["mar"]
    rep = criticality.bad_cell_report(mar["barcode"])
    want_dec = sorted(mar["regular_decomposable"])
    checks.append(_check("Mar: regular boundary has exactly 2 linear + 8 decomposable terms",
                         len(rep["linear"]) == 2 and len(rep["decomposable"]) == 8,
                         linear=rep["linear"], decomposable=rep["decomposable"],
                         listed=want_dec,
                         not_listed=sorted(set(rep["decomposable"]) - set(want_dec)),
                         missing=sorted(set(want_dec) - set(rep["decomposable"]))))
    checks.append(_check("Mar: linear terms equal the listed ones",
                         sorted(rep["linear"]) == sorted(mar["linear"])))
    checks.append(_check("Mar: the listed decomposable terms all occur",
                         set(want_dec) <= set(rep["decomposable"])))
    checks.append(_check("Mar: support of d(d_reg) equals the listed intersection cells",
                         sorted(rep["intersection"]) == sorted(mar["intersection"]),
                         computed=rep["intersection"]))
    t = tree_from_barcode(mar["barcode"])
    for name, terms in sorted(mar["counterterms"].items()):
        checks.append(_check(f"Mar: counterterm {name} verifies over F2",
                             criticality.verify_counterterm(t, terms), terms=terms))
    found = criticality.find_counterterm(t)
    checks.append(_check("Mar: solver returns a verifying counterterm",
                         criticality.verify_counterterm(t, list(found.terms)),
                         terms=[str(x) for x, _ in found.items()]))
    tam = cells["tamarkin"]
    t = tree_from_barcode(tam["barcode"])
    sing = criticality.singular_faces(t)
    checks.append(_check("Tamarkin: singular face [[1||3||5]|[2||4||6]] with deg = dim = 6",
                         [str(x) for x in sing] == [tam["singular_face"]]
                         and all(x.degree == 6 for x in sing) and t.dim == 6,
                         found=[str(x) for x in sing]))
    for name, terms in sorted(tam["counterterms"].items()):
        checks.append(_check(f"Tamarkin: six-term counterterm {name} verifies over F2",
                             len(terms) == 6 and criticality.verify_counterterm(t, terms),
                             terms=terms))
    found = criticality.find_counterterm(t)
    checks.append(_check("Tamarkin: solver returns a verifying counterterm",
                         criticality.verify_counterterm(t, list(found.terms)),
                         terms=[str(x) for x, _ in found.items()]))
    return _result(5, "bad-cell case studies", checks)


def criterion_6() -> dict:
    checks = []
    for n in range(2, 7):
        d_max = n + 2 if n <= 5 else n + 1
        rep = exact_homology.homology_report(n, INF, d_max)
        nonzero = {r["degree"]: r["rank"] for r in rep if r["rank"]}
        torsion = [r for r in rep if r["torsion"]]
        checks.append(_check(f"H(G({n})) = Z^{math.factorial(n - 1)} in degree {n - 2} "
                             f"(degrees {n - 2}..{rep[-1]['degree']})",
                             nonzero == {n - 2: math.factorial(n - 1)} and not torsion,
                             ranks=nonzero))
    for h in (1, 2, 3):
        for n in range(2, 6):
            rep = exact_homology.homology_report(n, h)
            nonzero = {r["degree"]: r["rank"] for r in rep if r["rank"]}
            torsion = [r for r in rep if r["torsion"]]
            want = exact_homology.expected_ranks(n, h)
            checks.append(_check(f"H(G^{h}({n})) matches the configuration space",
                                 nonzero == want and not torsion,
                                 ranks={str(k): v for k, v in sorted(nonzero.items())},
                                 expected={str(k): v for k, v in sorted(want.items())}))
    return _result(6, "homology", checks)


def criterion_7() -> dict:
    checks = []
    ex = free_lie.ree_exhaustive(3)
    checks.append(_check("Ree criterion = span oracle, all {-1,0,1} vectors for n = 3",
                         ex["agree"] == ex["total"], **ex))
    for n in range(2, 6):
        r = free_lie.ree_agreement(n, 200, seed=n)
        checks.append(_check(f"Ree criterion = span oracle on 200 random elements, n = {n}",
                             r["agree"] == r["trials"], **r))
    for n in range(2, 7):
        for signed in (False, True):
            rep = free_lie.ush_quotient_report(n, signed)
            ok = (rep["torsion_free"] and rep["quotient_rank"] == rep["expected_quotient_rank"]
                  and rep["basis_spans"] and rep["annihilates_lie"] and rep["twist_exchange"])
            if n <= 5:
                ok = ok and abs(rep["pairing_det"]) == 1
            label = "signed" if signed else "plain"
            checks.append(_check(f"unshuffle quotient, n = {n}, {label}", ok,
                                 **{k: v for k, v in rep.items() if k != "divisors"},
                                 divisor_set=sorted(set(rep["divisors"]))))
    for n in range(2, 6):
        checks.append(_check(f"tree boundaries of two-block trees are the signed generators, n = {n}",
                             free_lie.tree_boundary_matches_signed_ush(n)))
    return _result(7, "free Lie algebra over Z", checks)


CRITERIA: dict[int, Callable[[], dict]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7,
}


def run_all(only=None, on_done: Callable[[dict, float], None] | None = None) -> dict:
    results = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        start = time.perf_counter()
        res = fn()
        if on_done:
            on_done(res, time.perf_counter() - start)
        results.append(res)
    return {"criteria": results, "passed": all(r["passed"] for r in results)}
