"""Critical dimensions, regularity, bad-cell witnesses and counterterms.

A cell of the Fox-Neuwirth decomposition is bad when its closure meets a
face cell only in a proper subset.  This happens when a face nu: T -> S
glues two groups of tips a_1..a_s and b_1..b_s onto two tips u < v of S
while the a's and b's pair up below some level m: the positions of the
a's and of the b's, projected to the first m coordinates, must agree
(the source-target condition).  The condition is a real constraint only
when the amputated tree R (the a-part of the fiber cut at level m) spans
a cell of positive dimension.

At the critical dimension the regular part of the boundary no longer
squares to zero; a counterterm made of cells next to the singular face
repairs it.  Counterterms are searched for over F2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import InternalInconsistency, ValidationError
from .faces import TreeMorphism, _GF2System, _eq, d_reg_mod2, iter_faces
from .free_operad import FormalSum, OperadTerm, apply_derivation, parse_term, sort_key, substitute_vertex
from .level_trees import LabeledLevelTree, LevelTree, format_barcode, tree_from_barcode

INF = math.inf


def _check(n, h):
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ValidationError(f"arity must be an integer >= 2, got {n!r}")
    if h != INF and (not isinstance(h, int) or isinstance(h, bool) or h < 1):
        raise ValidationError(f"height must be a positive integer or inf, got {h!r}")


def d_crit(n: int, h=INF):
    """Smallest dimension of a bad cell in arity n (inf if there is none)."""
    _check(n, h)
    if n in (2, 3):
        return INF
    if h == INF:
        return n
    if n in (4, 5) and h <= 2:
        return INF
    if h == 1:
        return INF
    return n


def format_height(h) -> str | int:
    return "inf" if h == INF else h


# ---------------------------------------------------------------------------
# witnesses

def witness_barcode(n: int, h=INF) -> str | None:
    """Barcode of the explicit bad cell of dimension d_crit(n, h), if any.

    Arity 4 and 5 use the height-3 cells [1|2|||3|4] and [1|2|||3|4|5];
    arity 6 and up use the height-2 cells [1|2||3|4||5|6|7|...|n].  For a
    larger ambient height the same cell is taken through the inclusion,
    which does not change its barcode.
    """
    if d_crit(n, h) == INF:
        return None
    if n == 4:
        return "[1|2|||3|4]"
    if n == 5:
        return "[1|2|||3|4|5]"
    gaps = [1, 2, 1, 2, 1] + [1] * (n - 6)
    return format_barcode(range(1, n + 1), gaps)


def witness_tree(n: int, h=INF) -> LabeledLevelTree | None:
    """The witness as a pruned tree of height h (suspended if needed)."""
    code = witness_barcode(n, h)
    if code is None:
        return None
    t = tree_from_barcode(code)
    if h != INF:
        while t.height < h:
            t = t.suspend()
    return t


# ---------------------------------------------------------------------------
# source-target data

@dataclass(frozen=True)
class SourceTargetDatum:
    """A face nu together with tips a_1 < b_1 < ... < a_s < b_s (0-based
    planar positions) that pair up at ``level`` and land on target tips
    u < v.  ``amputated`` is the a-part of the fiber over u cut at
    ``level`` (a pruned tree of that height with s tips)."""
    face: TreeMorphism
    level: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    u: int
    v: int
    amputated: LevelTree

    @property
    def size(self) -> int:
        return len(self.a)

    @property
    def amputated_reduced(self) -> LevelTree:
        return self.amputated.reduce()

    @property
    def nontrivial(self) -> bool:
        return self.amputated_reduced.dim >= 1

    def to_json(self) -> dict:
        labels = self.face.source.labels
        r = self.amputated_reduced
        return {
            "tree": self.face.source.barcode(),
            "face": str(self.face.element()),
            "face_tip_map": list(self.face.tip_map),
            "level": self.level,
            "size": self.size,
            "a": [i + 1 for i in self.a],
            "b": [i + 1 for i in self.b],
            "a_labels": [labels[i] for i in self.a],
            "b_labels": [labels[i] for i in self.b],
            "u": self.u + 1,
            "v": self.v + 1,
            "amputated": r.barcode() if r.is_reduced else str(r),
            "amputated_dim": r.dim,
        }


def _amputate(tree: LevelTree, tips: tuple[int, ...], level: int) -> LevelTree:
    """The subtree spanned by ``tips`` cut at ``level``."""
    keep = [sorted({tree.ancestor(t, m) for t in tips}) for m in range(level + 1)]
    maps = []
    for m in range(1, level + 1):
        below = {v: i for i, v in enumerate(keep[m - 1])}
        maps.append(tuple(below[tree.parent_maps[m - 1][v]] for v in keep[m]))
    return LevelTree(tuple(maps))


def tip_selections(tree: LevelTree) -> Iterator[tuple[int, tuple, tuple]]:
    """All (level, a, b) with a_1 < b_1 < ... < a_s < b_s, s >= 2, where
    a_i and b_i share their ancestor at ``level`` and these ancestors
    strictly increase with i.  Only nontrivial selections are produced."""
    n = tree.n_tips
    for level in range(1, tree.height):
        anc = [tree.ancestor(i, level) for i in range(n)]
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if anc[a] == anc[b]]

        def extend(chain):
            if len(chain) >= 2:
                a = tuple(p[0] for p in chain)
                b = tuple(p[1] for p in chain)
                if _amputate(tree, a, level).reduce().dim >= 1:
                    yield level, a, b
            last_b = chain[-1][1] if chain else -1
            last_anc = anc[chain[-1][0]] if chain else -1
            for a, b in pairs:
                if a > last_b and anc[a] > last_anc:
                    yield from extend(chain + [(a, b)])

        yield from extend([])


def _faces_gluing(t: LabeledLevelTree, a: tuple, b: tuple) -> Iterator[TreeMorphism]:
    """Faces sending all of ``a`` to one tip and all of ``b`` to another."""
    tree = t.tree
    h = tree.height
    anc_a = [[tree.ancestor(i, m) for i in a] for m in range(h + 1)]
    anc_b = [[tree.ancestor(i, m) for i in b] for m in range(h + 1)]

    def accept(m, images):
        ia = {images[v] for v in anc_a[m]}
        ib = {images[v] for v in anc_b[m]}
        if len(ia) != 1 or len(ib) != 1:
            return False
        return m < h or ia != ib

    return iter_faces(t, accept_level=accept)


def source_target_witnesses(t: LabeledLevelTree, limit: int | None = None) -> list[SourceTargetDatum]:
    """Nontrivial source-target data of a reduced tree, by exhaustive search
    over tip selections and the faces compatible with them.

    With ``limit`` the search stops after that many data.
    """
    if not t.tree.is_reduced:
        raise ValidationError("source-target data are defined for reduced trees")
    out: list[SourceTargetDatum] = []
    for level, a, b in tip_selections(t.tree):
        amputated = _amputate(t.tree, a, level)
        for face in _faces_gluing(t, a, b):
            u = face.maps[-1][a[0]]
            v = face.maps[-1][b[0]]
            if u >= v:
                continue
            out.append(SourceTargetDatum(face, level, a, b, u, v, amputated))
            if limit is not None and len(out) >= limit:
                return out
    return out


# ---------------------------------------------------------------------------
# classification

def classify(n: int, h=INF, certify: bool = True) -> dict:
    """Regularity of the complex in arity n and height h (or the colimit).

    Non-regular cases come with the explicit bad cell and, when
    ``certify`` is set, one nontrivial source-target datum for it.
    """
    dc = d_crit(n, h)
    out = {
        "arity": n,
        "height": format_height(h),
        "d_crit": None if dc == INF else dc,
        "regular": dc == INF,
        "witness": None,
    }
    if dc == INF:
        return out
    w = witness_tree(n, h)
    reduced = w.reduce()
    out["witness"] = reduced.barcode()
    out["witness_dim"] = w.dim
    out["witness_height"] = w.height
    if certify:
        data = source_target_witnesses(reduced, limit=1)
        out["certificate"] = data[0].to_json() if data else None
    return out


def criticality_table(n_max: int = 10, heights=(1, 2, 3, 4, 5, INF), certify: bool = False) -> list[dict]:
    return [classify(n, h, certify) for h in heights for n in range(2, n_max + 1)]


def cell_exists(n: int, d: int, h=INF) -> bool:
    """Whether F_h(n) has cells of dimension d (reduced trees of height <= h)."""
    if d < n - 2:
        return False
    return h == INF or d <= h * (n - 1) - 1


def compare_figures(figures: dict | None = None) -> dict:
    """Check the plotted regular/bad pattern against d_crit.

    The first figure covers the colimit and every h >= 3 (checked for
    h = 3, 4, 5 where the cell exists); the second covers h = 2.
    Returns {figure: list of mismatching entries}.
    """
    if figures is None:
        from .fixtures import criticality_figures
        figures = criticality_figures()
    result = {}
    for name, entries in sorted(figures.items()):
        heights = (2,) if name == "F_2" else (3, 4, 5, INF)
        bad = []
        for e in entries:
            n, d = e["arity"], e["dim"]
            for h in heights:
                if not cell_exists(n, d, h):
                    continue
                expected = "bad" if d >= d_crit(n, h) else "regular"
                if expected != e["mark"]:
                    bad.append({**e, "height": format_height(h), "expected": expected})
        result[name] = bad
    return result


# ---------------------------------------------------------------------------
# counterterms (over F2)

def _boundary_mod2(gaps: tuple) -> FormalSum:
    n = len(gaps) + 1
    return d_reg_mod2(LabeledLevelTree(LevelTree.from_gaps(gaps), tuple(range(1, n + 1))))


def boundary_mod2(x: FormalSum) -> FormalSum:
    """The regular boundary extended as a derivation, over F2."""
    return apply_derivation(x.to_ring("F2"), _boundary_mod2)


def regular_boundary_square(t: LabeledLevelTree) -> FormalSum:
    """d(d_reg g_t) over F2; zero exactly when t needs no counterterm."""
    return boundary_mod2(d_reg_mod2(t))


def singular_faces(t: LabeledLevelTree) -> list[OperadTerm]:
    """Decomposable face elements of the same dimension as t."""
    found = set()
    for face in iter_faces(t, codim=0):
        el = face.element()
        if len(el.vertices) > 1:
            found.add(el)
    return sorted(found, key=sort_key)


def counterterm_pool(t: LabeledLevelTree) -> list[OperadTerm]:
    """Terms of degree dim(t) - 1 obtained from a singular face element by
    replacing one vertex decoration with one of its own codimension-one
    faces."""
    pool = set()
    for el in singular_faces(t):
        for idx, v in enumerate(el.vertices):
            for value in _boundary_mod2(v[0]).terms:
                pool.add(substitute_vertex(el, idx, value)[1])
    return sorted(pool, key=sort_key)


class CountertermNotFound(InternalInconsistency):
    """The candidate pool does not contain a counterterm."""

    def __init__(self, tree: str, pool_size: int, target_size: int):
        self.tree = tree
        self.pool_size = pool_size
        self.target_size = target_size
        super().__init__(
            f"no counterterm for {tree} in a pool of {pool_size} candidates "
            f"(d(d_reg) has {target_size} terms); the pool is too small")


def find_counterterm(t: LabeledLevelTree) -> FormalSum:
    """A set U of pool terms with d(U) = d(d_reg g_t) over F2.

    Among all solutions the lexicographically smallest 0/1 vector in pool
    order is returned (earlier pool terms are avoided first).
    """
    target = regular_boundary_square(t)
    pool = counterterm_pool(t)
    images = [boundary_mod2(FormalSum([(p, 1)], "F2")).support() for p in pool]
    rows: dict = {}
    for j, image in enumerate(images):
        for term in image:
            rows.setdefault(term, []).append(j)
    for term in target.terms:
        rows.setdefault(term, [])
    system = _GF2System()
    for term in sorted(rows, key=sort_key):
        if not system.add(_eq(rows[term], 1 if term in target.terms else 0)):
            raise CountertermNotFound(t.barcode(), len(pool), len(target))
    chosen = []
    for j in range(len(pool)):
        value = system.value(j)
        if value is None:
            system.add(_eq([j], 0))
            value = 0
        if value:
            chosen.append(pool[j])
    result = FormalSum([(p, 1) for p in chosen], "F2")
    if not verify_counterterm(t, chosen):
        raise InternalInconsistency(f"counterterm for {t.barcode()} does not verify")
    return result


def verify_counterterm(t: LabeledLevelTree, terms) -> bool:
    """d(d_reg g_t + sum of terms) == 0 over F2."""
    u = FormalSum(ring="F2")
    for x in terms:
        u.add(parse_term(x) if isinstance(x, str) else x, 1)
    return not boundary_mod2(d_reg_mod2(t) + u)


def bad_cell_report(barcode: str) -> dict:
    """Regular boundary, its square and the singular faces of a cell."""
    t = tree_from_barcode(barcode)
    dreg = d_reg_mod2(t)
    linear = sorted((x for x in dreg.terms if x.is_generator), key=sort_key)
    decomposable = sorted((x for x in dreg.terms if not x.is_generator), key=sort_key)
    return {
        "barcode": barcode,
        "dim": t.dim,
        "d_crit": _json_num(d_crit(t.n, t.height)),
        "linear": [str(x) for x in linear],
        "decomposable": [str(x) for x in decomposable],
        "singular_faces": [str(x) for x in singular_faces(t)],
        "intersection": [str(x) for x in sorted(regular_boundary_square(t).terms, key=sort_key)],
    }


def _json_num(x):
    return None if x == INF else x


def tree_report(barcode: str, with_counterterm: bool = False, limit: int | None = None) -> dict:
    """JSON summary of one tree: dimension, critical dimension, whether it
    lies in the regular range, its source-target data and (optionally)
    a counterterm."""
    t = tree_from_barcode(barcode)
    dc = d_crit(t.n, INF)
    data = source_target_witnesses(t, limit=limit)
    out = {
        "barcode": t.barcode(),
        "dim": t.dim,
        "d_crit": _json_num(dc),
        "regular": not data,
        "witnesses": [d.to_json() for d in data],
    }
    if with_counterterm:
        out["counterterm"] = [str(x) for x, _ in find_counterterm(t).items()]
    return out
