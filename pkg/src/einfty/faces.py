"""Faces of trees, fiber diagrams, the elements C_sigma and the full boundary.

A face of a reduced tree T is a level-wise map sigma: T -> S onto a pruned
tree S (a trunk is allowed) that preserves the order of siblings and hits
every tip of S.  Faces are enumerated level by level: once sigma is known
at level m, the children of the T-vertices over each S-vertex w are sent
weakly monotonically (per sibling list) and jointly onto the children of w.

For a face, the fiber over tip j of S is the part of T lying over the path
from j down to the root.  Reducing S and every fiber and grafting the
fibers into the inputs of r(S) gives an element C_sigma of the free operad.

The boundary of a generator is the signed sum of the C_sigma of degree
dim(T) - 1.  The signs are not given by a formula; ``SignTable`` solves
for them from d o d = 0, with the linear part taken from ``bar_diff``.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

from .bar_diff import d_lin_pairs
from .errors import CapacityError, InternalInconsistency, ValidationError, capacity_limit
from .free_operad import FormalSum, OperadTerm, apply_derivation, parse_term, substitute_vertex
from .level_trees import LabeledLevelTree, LevelTree, enumerate_reduced, tree_from_barcode


@dataclass(frozen=True)
class TreeMorphism:
    """sigma: source -> target given level by level.

    ``maps[m][v]`` is the target vertex of source vertex v at level m
    (0-based, m = 0..h).  ``target`` is pruned and may have a trunk.
    """
    source: LabeledLevelTree
    target: LevelTree
    maps: tuple[tuple[int, ...], ...]

    @property
    def tip_map(self) -> tuple[int, ...]:
        """sigma_h in 1-based form: source tip i goes to target tip tip_map[i-1]."""
        return tuple(v + 1 for v in self.maps[-1])

    @property
    def is_quasibijection(self) -> bool:
        return len(set(self.maps[-1])) == len(self.maps[-1])

    def fiber_tips(self, j: int) -> list[int]:
        """Source tips (0-based, in planar order) over target tip j (0-based)."""
        return [i for i, v in enumerate(self.maps[-1]) if v == j]

    def fiber(self, j: int) -> LevelTree:
        """The subtree of the source over the path from tip j to the root."""
        t = self.source.tree
        h = t.height
        path = [j]
        for m in range(h, 0, -1):
            path.append(self.target.parent_maps[m - 1][path[-1]])
        path.reverse()  # path[m] = target vertex at level m
        keep = [[v for v in range(t.level_sizes[m]) if self.maps[m][v] == path[m]]
                for m in range(h + 1)]
        maps = []
        for m in range(1, h + 1):
            index_below = {v: k for k, v in enumerate(keep[m - 1])}
            maps.append(tuple(index_below[t.parent_maps[m - 1][v]] for v in keep[m]))
        return LevelTree(tuple(maps))

    def element(self) -> OperadTerm:
        return reduced_fiber_element(self)

    def to_json(self) -> dict:
        return {
            "source": self.source.barcode(),
            "target": self.target.to_json(),
            "maps": [[v + 1 for v in m] for m in self.maps],
            "element": str(self.element()),
        }


def reduced_fiber_element(sigma: TreeMorphism) -> OperadTerm:
    """C_sigma: r(S) with the reduced fibers grafted into its inputs."""
    labels = sigma.source.labels
    inputs = []
    for j in range(sigma.target.n_tips):
        tips = sigma.fiber_tips(j)
        if len(tips) == 1:
            inputs.append(labels[tips[0]])
            continue
        fiber = sigma.fiber(j)
        # tips of the fiber are the source tips over j, in planar order
        reduced = fiber.prune().reduce()
        inputs.append((reduced.gaps, tuple(labels[i] for i in tips)))
    if sigma.target.n_tips == 1:
        root = inputs[0]
    else:
        root = (sigma.target.reduce().gaps, tuple(inputs))
    return OperadTerm(root)


# ---------------------------------------------------------------------------
# enumeration

def _monotone_maps(length: int, size: int) -> Iterator[tuple[int, ...]]:
    return itertools.combinations_with_replacement(range(size), length)


def _fills(lists: list[int]) -> Iterator[tuple[int, list[tuple[int, ...]]]]:
    """Ways to send sibling lists of the given lengths onto [c], any c.

    Yields (c, [monotone map per list]) with the union of images = [c].
    """
    total = sum(lists)
    for c in range(1, total + 1):
        for choice in itertools.product(*(list(_monotone_maps(l, c)) for l in lists)):
            hit = set()
            for img in choice:
                hit.update(img)
            if len(hit) == c:
                yield c, list(choice)


def _lazy_product(sizes: list[list[int]], start: int = 0) -> Iterator[tuple]:
    """itertools.product of the _fills of each group, without materializing
    the factors (the first face found may come long before the last)."""
    if start == len(sizes):
        yield ()
        return
    for head in _fills(sizes[start]):
        for rest in _lazy_product(sizes, start + 1):
            yield (head,) + rest


def iter_faces(t: LabeledLevelTree, codim: int | None = None,
               accept_level: Callable[[int, tuple[int, ...]], bool] | None = None,
               ) -> Iterator[TreeMorphism]:
    """Faces of a reduced tree, lazily and in a deterministic order.

    ``accept_level(m, images)`` may reject a partial face as soon as its
    level-m map ``images`` is known; the whole branch is then skipped.
    With ``codim`` only faces with deg(C_sigma) = dim(t) - codim are kept.
    """
    if not t.tree.is_reduced:
        raise ValidationError("faces are defined for reduced trees")
    tree = t.tree
    h = tree.height
    limit = capacity_limit()
    counter = [0]
    kids = [[tree.children(m, v) for v in range(tree.level_sizes[m])] for m in range(h)]

    def rec(m, sigma_maps, target_maps):
        counter[0] += 1
        if counter[0] > limit:
            raise CapacityError(f"face enumeration for {t} exceeded {limit} steps")
        if m == h:
            face = TreeMorphism(t, LevelTree(tuple(target_maps)), tuple(sigma_maps))
            if codim is None or face.element().degree == tree.dim - codim:
                yield face
            return
        cur = sigma_maps[-1]
        n_target = max(cur) + 1
        groups = []
        for w in range(n_target):
            sources = [v for v in range(len(cur)) if cur[v] == w]
            groups.append([kids[m][v] for v in sources])
        sizes = [[len(l) for l in g] for g in groups]
        for combo in _lazy_product(sizes):
            nxt = [0] * tree.level_sizes[m + 1]
            parents = []
            offset = 0
            for w, (c, maps) in enumerate(combo):
                for sibs, img in zip(groups[w], maps):
                    for child, k in zip(sibs, img):
                        nxt[child] = offset + k
                parents.extend([w] * c)
                offset += c
            nxt_t = tuple(nxt)
            if accept_level is not None and not accept_level(m + 1, nxt_t):
                continue
            yield from rec(m + 1, sigma_maps + [nxt_t], target_maps + [tuple(parents)])

    yield from rec(0, [(0,)], [])


def enumerate_faces(t: LabeledLevelTree, codim: int | None = None) -> list[TreeMorphism]:
    """All faces of a reduced tree (optionally only those with
    deg(C_sigma) = dim(t) - codim), in a deterministic order."""
    return list(iter_faces(t, codim))


@lru_cache(maxsize=None)
def _codim1_unlabeled(gaps: tuple) -> tuple:
    t = LabeledLevelTree(LevelTree.from_gaps(gaps), tuple(range(1, len(gaps) + 2)))
    return tuple(enumerate_faces(t, codim=1))


def codim1_faces(t: LabeledLevelTree) -> list[TreeMorphism]:
    """Faces with deg(C_sigma) = dim(t) - 1 (the regular part of the boundary)."""
    base = _codim1_unlabeled(t.tree.gaps)
    return [TreeMorphism(t, f.target, f.maps) for f in base]


def face_multiplicities(t: LabeledLevelTree) -> dict:
    """C_sigma -> number of codimension-one faces producing it."""
    return dict(Counter(f.element() for f in codim1_faces(t)))


def d_reg_mod2(t: LabeledLevelTree) -> FormalSum:
    """The codimension-one face elements with F2 coefficients."""
    out = FormalSum(ring="F2")
    for f in codim1_faces(t):
        out.add(f.element(), 1)
    return out


# ---------------------------------------------------------------------------
# signs

class SignTable:
    """Signs of codimension-one faces of unlabeled generators.

    ``signs[gaps][k]`` is the sign of the k-th codimension-one face (in the
    order of ``enumerate_faces``) of the tree with identity labels.
    Labeled generators use the same signs (the boundary is equivariant).
    """

    def __init__(self, signs: dict | None = None, meta: dict | None = None):
        self.signs: dict[tuple, tuple[int, ...]] = dict(signs or {})
        self.meta = dict(meta or {})

    def covers(self, gaps) -> bool:
        return tuple(gaps) in self.signs

    def boundary_unlabeled(self, gaps) -> FormalSum:
        gaps = tuple(gaps)
        if max(gaps) == 1 and len(gaps) == 1:
            return FormalSum()
        if gaps not in self.signs:
            raise CapacityError(f"no signs solved for {_bc(gaps)}; extend the solve range")
        out = FormalSum()
        for face, s in zip(_codim1_unlabeled(gaps), self.signs[gaps]):
            out.add(face.element(), s)
        return out

    def boundary(self, t: LabeledLevelTree) -> FormalSum:
        return self.boundary_unlabeled(t.tree.gaps).act(t.labels)

    def d(self, x: FormalSum) -> FormalSum:
        """The boundary extended to the free operad as a derivation."""
        return apply_derivation(x, self.boundary_unlabeled)

    def to_json(self) -> dict:
        entries = []
        for gaps in sorted(self.signs, key=_bc):
            faces = _codim1_unlabeled(gaps)
            for k, (face, s) in enumerate(zip(faces, self.signs[gaps])):
                entries.append({"source": _bc(gaps), "face": k,
                                "target": str(face.element()), "sign": s})
        return {"meta": self.meta, "signs": entries}

    @classmethod
    def from_json(cls, data: dict) -> "SignTable":
        signs: dict = {}
        for e in data["signs"]:
            gaps = tree_from_barcode(e["source"]).tree.gaps
            signs.setdefault(gaps, {})[e["face"]] = e["sign"]
        table = {}
        for gaps, d in signs.items():
            faces = _codim1_unlabeled(gaps)
            if sorted(d) != list(range(len(faces))):
                raise ValidationError(f"sign table for {_bc(gaps)} is incomplete")
            table[gaps] = tuple(d[k] for k in range(len(faces)))
        return cls(table, data.get("meta"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _bc(gaps) -> str:
    from .level_trees import format_barcode
    return format_barcode(range(1, len(gaps) + 2), gaps)


class _GF2System:
    """Incremental Gaussian elimination over F2; rows are int bitmasks.

    The constant term is stored in bit 0, variable k in bit k + 1.
    """

    def __init__(self):
        self.pivots: dict[int, int] = {}  # pivot bit -> row

    def reduce(self, row: int) -> int:
        # pivot rows are kept fully reduced, so one pass suffices
        for bit, r in self.pivots.items():
            if row & bit:
                row ^= r
        return row

    def add(self, row: int) -> bool:
        """Add an equation; False if it contradicts the ones already there."""
        row = self.reduce(row)
        if row >> 1 == 0:
            return row & 1 == 0
        top = 1 << (row >> 1).bit_length()
        # keep the basis reduced with respect to the new pivot
        for b, r in list(self.pivots.items()):
            if r & top:
                self.pivots[b] = r ^ row
        self.pivots[top] = row
        return True

    def consistent_with(self, row: int) -> bool:
        row = self.reduce(row)
        return row >> 1 != 0 or row & 1 == 0

    def value(self, var: int) -> int | None:
        """Value of a variable if it is determined by the equations."""
        r = self.reduce(1 << (var + 1))
        if r >> 1 == 0:
            return r & 1
        return None


def _eq(vars_: Sequence[int], const: int) -> int:
    row = const & 1
    for v in vars_:
        row ^= 1 << (v + 1)
    return row


def solve_signs(n_max: int, d_max: int, fixtures: dict | None = None,
                trees: Sequence[tuple] | None = None) -> SignTable:
    """Solve for face signs on the regular unlabeled trees with n <= n_max,
    dim <= d_max (regular: dim below the critical dimension of the arity).

    Unknowns are sign exponents e(T, k) in F2 (sign = (-1)^e).  Equations:

    * quasibijection faces carry the coefficient of d_lin;
    * every fixture formula (an unlabeled tree -> FormalSum) pins its faces;
    * d(d g_T) = 0: every codimension-two term that is reached in exactly
      two ways gives a linear equation in the two pairs of exponents.

    The remaining freedom is fixed by taking, variable by variable in
    enumeration order, the value 0 when that is consistent.  Terms reached
    more than twice are checked after the fact, as is d o d = 0 itself.
    """
    if trees is None:
        from .criticality import d_crit
        trees = []
        for n in range(2, n_max + 1):
            for d in range(0, min(d_max, d_crit(n) - 1) + 1):
                trees.extend(t.gaps for t in enumerate_reduced(n, d))
    trees = sorted(set(tuple(g) for g in trees), key=lambda g: (sum(g), len(g), _bc(g)))
    if len(trees) > capacity_limit():
        raise CapacityError("too many trees for the sign solve")
    index: dict[tuple, int] = {}
    faces: dict[tuple, tuple] = {}
    for gaps in trees:
        faces[gaps] = _codim1_unlabeled(gaps)
        for k in range(len(faces[gaps])):
            index[(gaps, k)] = len(index)
    tree_set = set(trees)

    system = _GF2System()

    def require(row, why):
        if not system.add(row):
            raise InternalInconsistency(f"sign system unsolvable: {why}")

    # linear part
    for gaps in trees:
        n = len(gaps) + 1
        lin = d_lin_pairs(tuple(range(1, n + 1)), gaps)
        seen: dict = {}
        for k, face in enumerate(faces[gaps]):
            if face.is_quasibijection:
                el = face.element()
                key = (el.labels, el.root[0])
                seen.setdefault(key, []).append(k)
        for key, ks in seen.items():
            c = lin.get(key, 0)
            if len(ks) != 1 or abs(c) != 1:
                raise InternalInconsistency(
                    f"linear part of {_bc(gaps)} does not match its quasibijection "
                    f"faces at {key}: {len(ks)} faces, coefficient {c}")
            require(_eq([index[(gaps, ks[0])]], 0 if c > 0 else 1), f"linear part of {_bc(gaps)}")
        if len(seen) != len(lin):
            raise InternalInconsistency(f"linear part of {_bc(gaps)} has extra terms")

    # fixtures
    for gaps, formula in (fixtures or {}).items():
        gaps = tuple(gaps)
        if gaps not in tree_set:
            continue
        by_element: dict = {}
        for k, face in enumerate(faces[gaps]):
            by_element.setdefault(face.element(), []).append(k)
        if set(by_element) != formula.support():
            raise InternalInconsistency(f"fixture for {_bc(gaps)} has a different support")
        for el, ks in by_element.items():
            if len(ks) != 1:
                raise InternalInconsistency(f"fixture term {el} comes from {len(ks)} faces")
            require(_eq([index[(gaps, ks[0])]], 0 if formula[el] > 0 else 1),
                    f"fixture {_bc(gaps)} at {el}")

    # d o d = 0
    for gaps in trees:
        contributions: dict = {}
        for k, face in enumerate(faces[gaps]):
            el = face.element()
            verts = el.vertices
            passed = 0
            for vi, v in enumerate(verts):
                sub = v[0]
                if sub in tree_set:
                    for kk, subface in enumerate(faces[sub]):
                        s, term = substitute_vertex(el, vi, subface.element())
                        if passed % 2:
                            s = -s
                        contributions.setdefault(term, []).append(
                            (s, (index[(gaps, k)], index[(sub, kk)])))
                elif _codim1_unlabeled(sub):
                    raise CapacityError(f"{_bc(sub)} is needed but outside the solve range")
                passed += sum(v[0]) - 1
        for term, contrib in contributions.items():
            if len(contrib) == 2:
                (s1, (a1, b1)), (s2, (a2, b2)) = contrib
                # s1 (-1)^(a1+b1) + s2 (-1)^(a2+b2) = 0
                const = 1 if s1 == s2 else 0
                require(_eq([a1, b1, a2, b2], const), f"d^2 of {_bc(gaps)} at {term}")
            elif len(contrib) % 2:
                raise InternalInconsistency(
                    f"d^2 of {_bc(gaps)} at {term} has an odd number of contributions")

    # gauge: smallest exponent vector in enumeration order
    values: list[int] = []
    for var in range(len(index)):
        fixed = system.value(var)
        if fixed is None:
            require(_eq([var], 0), "gauge choice")
            fixed = 0
        values.append(fixed)
    signs = {}
    for gaps in trees:
        signs[gaps] = tuple(-1 if values[index[(gaps, k)]] else 1 for k in range(len(faces[gaps])))
    table = SignTable(signs, {"n_max": n_max, "d_max": d_max})
    for gaps in trees:
        dd = table.d(table.boundary_unlabeled(gaps))
        if dd:
            raise InternalInconsistency(f"d^2 of {_bc(gaps)} is {dd}")
    return table


@lru_cache(maxsize=None)
def default_table(n_max: int = 5, d_max: int = 4) -> SignTable:
    from .fixtures import boundary_fixtures
    return solve_signs(n_max, d_max, boundary_fixtures())


def d_reg_signed(t: LabeledLevelTree, table: SignTable | None = None) -> FormalSum:
    """Full boundary (over Z) of a regular generator."""
    if table is None:
        n, d = t.n, t.dim
        table = default_table(max(5, n), max(4, d))
    return table.boundary(t)
