"""Integer chain complexes of trees and their homology via Smith normal form.

Matrices are stored sparsely (one dict per row) with Python integers, so
every computation is exact.  The Smith form first eliminates unit pivots
sparsely (these contribute divisors equal to 1) and finishes the small
remaining block densely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bar_diff import d_lin_pairs
from .criticality import INF, format_height
from .errors import CapacityError, InternalInconsistency, ValidationError, capacity_limit
from .level_trees import all_permutations, enumerate_reduced, format_barcode


# ---------------------------------------------------------------------------
# matrices

class IntegerMatrix:
    """Sparse integer matrix; ``rows[i]`` maps column -> nonzero entry."""

    def __init__(self, n_rows: int, n_cols: int, rows: Sequence[dict] | None = None):
        if n_rows < 0 or n_cols < 0:
            raise ValidationError("matrix dimensions must be non-negative")
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.rows = [dict() for _ in range(n_rows)] if rows is None else [
            {c: v for c, v in r.items() if v} for r in rows]
        if len(self.rows) != n_rows:
            raise ValidationError("row count does not match")
        for r in self.rows:
            for c in r:
                if not 0 <= c < n_cols:
                    raise ValidationError(f"column {c} out of range")

    @classmethod
    def from_dense(cls, entries: Sequence[Sequence[int]]) -> "IntegerMatrix":
        entries = [list(r) for r in entries]
        n_cols = len(entries[0]) if entries else 0
        if any(len(r) != n_cols for r in entries):
            raise ValidationError("ragged matrix")
        return cls(len(entries), n_cols, [{c: int(v) for c, v in enumerate(r) if v} for r in entries])

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.n_cols for _ in range(self.n_rows)]
        for i, r in enumerate(self.rows):
            for c, v in r.items():
                out[i][c] = v
        return out

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.n_cols != other.n_rows:
            raise ValidationError("matrix shapes do not match")
        out = []
        for r in self.rows:
            acc: dict = {}
            for k, v in r.items():
                for c, w in other.rows[k].items():
                    acc[c] = acc.get(c, 0) + v * w
            out.append(acc)
        return IntegerMatrix(self.n_rows, other.n_cols, out)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def to_matrix_market(self) -> str:
        """Coordinate format, 1-based, entries sorted by (row, column)."""
        lines = ["%%MatrixMarket matrix coordinate integer general",
                 f"{self.n_rows} {self.n_cols} {self.nnz}"]
        for i, r in enumerate(self.rows):
            for c in sorted(r):
                lines.append(f"{i + 1} {c + 1} {r[c]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_matrix_market(cls, text: str) -> "IntegerMatrix":
        lines = [l for l in text.splitlines() if l.strip() and not l.startswith("%")]
        if not lines:
            raise ValidationError("empty matrix file")
        n_rows, n_cols, nnz = (int(x) for x in lines[0].split())
        rows = [dict() for _ in range(n_rows)]
        for l in lines[1:1 + nnz]:
            i, c, v = (int(x) for x in l.split())
            rows[i - 1][c - 1] = v
        return cls(n_rows, n_cols, rows)


@dataclass(frozen=True)
class SmithForm:
    divisors: tuple[int, ...]  # nonzero diagonal entries d_1 | d_2 | ...

    @property
    def rank(self) -> int:
        return len(self.divisors)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.divisors if d > 1)


def _dense_diagonal(a: list[list[int]]) -> list[int]:
    """Diagonalize by unimodular row/column operations, smallest pivot first."""
    a = [r[:] for r in a]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    diag = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = a[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        a[t], a[i] = a[i], a[t]
        for r in a:
            r[t], r[j] = r[j], r[t]
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // p
                    if q:
                        a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // p
                    if q:
                        for r in a:
                            r[j] -= q * r[t]
                    if a[t][j]:
                        done = False
            if done:
                break
            # a remainder smaller than the pivot is left; move it to the pivot
            best = None
            for i in range(t, rows):
                if a[i][t] and (best is None or abs(a[i][t]) < best[0]):
                    best = (abs(a[i][t]), i, "r")
            for j in range(t, cols):
                if a[t][j] and (best is None or abs(a[t][j]) < best[0]):
                    best = (abs(a[t][j]), j, "c")
            _, k, kind = best
            if kind == "r":
                a[t], a[k] = a[k], a[t]
            else:
                for r in a:
                    r[t], r[k] = r[k], r[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def _divisibility_chain(diag: Iterable[int]) -> tuple[int, ...]:
    d = sorted(x for x in diag if x)
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            g = math.gcd(d[i], d[j])
            d[i], d[j] = g, d[i] * d[j] // g
    return tuple(d)


def smith_normal_form(m: IntegerMatrix) -> SmithForm:
    """Nonzero invariant factors of an integer matrix.

    Unit entries are used as pivots first (choosing, row by row, the unit
    whose column is shortest), which keeps sparse boundary matrices sparse;
    the remaining block has no unit entries and is reduced densely.
    """
    rows = {i: dict(r) for i, r in enumerate(m.rows) if r}
    cols: dict[int, set] = {}
    for i, r in rows.items():
        for c in r:
            cols.setdefault(c, set()).add(i)
    units = 0
    progress = True
    while progress:
        progress = False
        for i in sorted(rows):
            r = rows.get(i)
            if not r:
                rows.pop(i, None)
                continue
            cands = [c for c, v in r.items() if v in (1, -1)]
            if not cands:
                continue
            c = min(cands, key=lambda x: (len(cols[x]), x))
            p = r[c]
            for k in sorted(cols[c] - {i}):
                rk = rows[k]
                q = rk[c] * p  # p = +-1, so rk[c] / p = rk[c] * p
                for cc, v in r.items():
                    nv = rk.get(cc, 0) - q * v
                    if nv:
                        if cc not in rk:
                            cols[cc].add(k)
                        rk[cc] = nv
                    else:
                        rk.pop(cc, None)
                        cols[cc].discard(k)
                if not rk:
                    del rows[k]
            for cc in r:
                cols[cc].discard(i)
            del rows[i]
            units += 1
            progress = True
    rest_rows = sorted(rows)
    rest_cols = sorted(c for c, s in cols.items() if s)
    if len(rest_rows) * len(rest_cols) > capacity_limit():
        raise CapacityError(f"dense Smith block of size {len(rest_rows)}x{len(rest_cols)}")
    index = {c: j for j, c in enumerate(rest_cols)}
    dense = [[0] * len(rest_cols) for _ in rest_rows]
    for a, i in enumerate(rest_rows):
        for c, v in rows[i].items():
            dense[a][index[c]] = v
    return SmithForm(_divisibility_chain([1] * units + _dense_diagonal(dense)))


# ---------------------------------------------------------------------------
# chain complexes

@dataclass
class HomologyGroup:
    rank: int
    torsion: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}


@dataclass
class ChainComplex:
    """``bases[d]`` lists the basis of degree d; ``boundaries[d]`` is the
    matrix of the boundary from degree d to d - 1 (rows = degree d - 1).
    Degrees outside ``bases`` are zero if ``complete`` is set, unknown
    otherwise (except below the lowest degree, which is always zero)."""
    bases: dict[int, list]
    boundaries: dict[int, IntegerMatrix]
    complete: bool
    meta: dict = field(default_factory=dict)
    _smith: dict = field(default_factory=dict, repr=False)

    def rank_of(self, d: int) -> int:
        return len(self.bases.get(d, []))

    def boundary(self, d: int) -> IntegerMatrix:
        if d in self.boundaries:
            return self.boundaries[d]
        lo, hi = min(self.bases), max(self.bases)
        if d <= lo or (d > hi and self.complete):
            return IntegerMatrix(self.rank_of(d - 1), self.rank_of(d))
        raise ValidationError(f"boundary in degree {d} is outside the built window "
                              f"(built up to degree {hi}); increase d_max")

    def smith(self, d: int) -> SmithForm:
        if d not in self._smith:
            self._smith[d] = smith_normal_form(self.boundary(d))
        return self._smith[d]

    def check_square_zero(self) -> None:
        for d in sorted(self.boundaries):
            if d - 1 in self.boundaries:
                if not (self.boundaries[d - 1] @ self.boundaries[d]).is_zero():
                    raise InternalInconsistency(f"boundary squares to a nonzero map in degree {d}")


def homology(c: ChainComplex, d: int) -> HomologyGroup:
    """H_d = ker(boundary_d) / im(boundary_{d+1}) with its torsion."""
    outgoing = c.smith(d).rank
    incoming = c.smith(d + 1)
    return HomologyGroup(c.rank_of(d) - outgoing - incoming.rank, incoming.torsion)


def top_degree(n: int, h) -> float:
    """Largest dimension of a reduced tree with n tips and height <= h."""
    return INF if h == INF else h * (n - 1) - 1


def build_G_complex(n: int, h=INF, d_max: int | None = None) -> ChainComplex:
    """The complex of labeled reduced trees with n tips and height <= h
    under the linear differential.

    Degree d is spanned by trees of dimension d (a pruned h-tree with a
    trunk is identified with its reduction).  For h = inf, ``d_max`` is
    required; for finite h the complex is finite and built completely
    unless ``d_max`` cuts it off.
    """
    if not isinstance(n, int) or n < 2:
        raise ValidationError("arity must be an integer >= 2")
    if h != INF and (not isinstance(h, int) or h < 1):
        raise ValidationError("height must be a positive integer or inf")
    top = top_degree(n, h)
    if d_max is None:
        if top == INF:
            raise ValidationError("d_max is required for the infinite-height complex")
        d_max = int(top)
    complete = d_max >= top
    hi = int(min(d_max, top))
    bases: dict[int, list] = {}
    index: dict[int, dict] = {}
    perms = all_permutations(n)
    total = 0
    for d in range(n - 2, hi + 1):
        basis = []
        for tree in enumerate_reduced(n, d, None if h == INF else h):
            for p in perms:
                basis.append((p, tree.gaps))
        basis.sort(key=lambda x: format_barcode(*x))
        total += len(basis)
        if total > capacity_limit():
            raise CapacityError(f"tree complex for n={n} exceeds the capacity guard")
        bases[d] = basis
        index[d] = {b: i for i, b in enumerate(basis)}
    boundaries = {}
    for d in range(n - 1, hi + 1):
        rows = [dict() for _ in bases[d - 1]]
        for j, (labels, gaps) in enumerate(bases[d]):
            for key, coeff in d_lin_pairs(labels, gaps).items():
                if key not in index[d - 1]:
                    raise InternalInconsistency(f"boundary term {key} is not a basis element")
                rows[index[d - 1][key]][j] = coeff
        boundaries[d] = IntegerMatrix(len(bases[d - 1]), len(bases[d]), rows)
    c = ChainComplex(bases, boundaries, complete,
                     {"arity": n, "height": format_height(h), "d_max": hi})
    c.check_square_zero()
    return c


def expected_ranks(n: int, h) -> dict[int, int]:
    """Betti numbers of the configuration space of n points in R^h placed
    in the degrees of the tree complex: the coefficient of t^(j(h-1)) in
    prod_{k<n} (1 + k t^(h-1)) lands in degree (n-2) + (n-1-j)(h-1).
    For h = inf only the bottom class survives, with rank (n-1)!."""
    if h == INF:
        return {n - 2: math.factorial(n - 1)}
    poly = [1]
    for k in range(1, n):
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] += c
            nxt[i + 1] += k * c
        poly = nxt
    out: dict[int, int] = {}
    for j in range(n):
        d = (n - 2) + j * (h - 1)
        out[d] = out.get(d, 0) + poly[n - 1 - j]
    return out


def homology_report(n: int, h=INF, d_max: int | None = None) -> list[dict]:
    """Homology in every degree where both adjacent boundaries are known."""
    c = build_G_complex(n, h, d_max)
    hi = max(c.bases)
    last = hi if c.complete else hi - 1
    out = []
    for d in range(n - 2, last + 1):
        g = homology(c, d)
        out.append({"n": n, "h": format_height(h), "degree": d, **g.to_json()})
    return out


def permutation_action_matrix(c: ChainComplex, d: int, s: Sequence[int]) -> IntegerMatrix:
    """The relabeling action of s on the degree-d basis (a permutation matrix)."""
    from .level_trees import relabel
    basis = c.bases[d]
    index = {b: i for i, b in enumerate(basis)}
    rows = [dict() for _ in basis]
    for j, (labels, gaps) in enumerate(basis):
        rows[index[(relabel(labels, s), gaps)]][j] = 1
    return IntegerMatrix(len(basis), len(basis), rows)
