"""The linear differential on single generators.

A labeled reduced tree of height h is the same thing as a monomial in the
h-fold iterated bar construction on the free graded commutative algebra
generated by x_1..x_n: every vertex is a word, every tip is a letter x_j,
and each factor of a word carries one suspension.  The differential of the
iterated bar construction transports to trees; this is ``d_lin``.

Two implementations live here:

* ``bar_differential`` works on nested words with Koszul bookkeeping
  (Mac Lane's conventions: the differential passing a suspended factor
  of degree p picks up (-1)^p, the internal differential of a suspended
  factor is -s(d), and the product of two adjacent factors s(a), s(b) is
  (-1)^{|s a|} s(a * b) with * the signed shuffle product).
* ``merge_unshuffle_differential`` works directly on trees: choose two
  adjacent sibling vertices, merge them and interleave their branches by
  an unshuffle.  Its sign is a closed formula in edge counts.

Both produce "raw" coefficients.  The generators are then rescaled by a
sign per unlabeled tree (``gauge``) chosen so that for the identity
labeling, the face that keeps the labels in order and has the
lexicographically smallest gap sequence comes with coefficient +1.
With this normalization the classical low-dimensional formulas come out
with their customary signs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import ValidationError
from .free_operad import FormalSum, OperadTerm, generator
from .level_trees import (LabeledLevelTree, LevelTree, format_barcode,
                          perm_sign)

# A bar word is a tuple of factors; a factor is an int (the letter x_j)
# or a nested word.


def word_degree(w) -> int:
    """Internal degree of a word: one per suspension inside it."""
    if isinstance(w, int):
        return 0
    return sum(word_degree(f) + 1 for f in w)


def _depth(w) -> int:
    return 0 if isinstance(w, int) else 1 + _depth(w[0])


@dataclass(frozen=True)
class BarMonomial:
    """A word of height ``height`` (nesting depth) with the outer desuspension."""
    word: tuple
    height: int

    @property
    def letters(self) -> tuple[int, ...]:
        out: list[int] = []

        def walk(w):
            if isinstance(w, int):
                out.append(w)
            else:
                for f in w:
                    walk(f)
        walk(self.word)
        return tuple(out)

    @property
    def degree(self) -> int:
        """Total degree after the (h+1)-fold desuspension."""
        return word_degree(self.word) - self.height - 1

    def __str__(self) -> str:
        def fmt(w):
            if isinstance(w, int):
                return f"↑x{w}"
            return "↑(" + "⊗".join(fmt(f) for f in w) + ")"
        inner = "⊗".join(fmt(f) for f in self.word)
        return f"↓{self.height + 1}({inner})"


def omega_encode(t: LabeledLevelTree) -> BarMonomial:
    if not t.tree.is_reduced:
        raise ValidationError("omega_encode needs a reduced tree")
    return BarMonomial(_encode_word(t.labels, t.tree.gaps, t.height), t.height)


def _encode_word(labels, gaps, h):
    """Split the tips at the deepest gaps, recursively."""
    if h == 0:
        return labels[0]
    pieces = [[labels[0]]]
    piece_gaps: list[list[int]] = [[]]
    for g, lab in zip(gaps, labels[1:]):
        if g >= h:
            pieces.append([lab])
            piece_gaps.append([])
        else:
            pieces[-1].append(lab)
            piece_gaps[-1].append(g)
    return tuple(_encode_word(p, pg, h - 1) for p, pg in zip(pieces, piece_gaps))


def word_to_barcode(w) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(labels, gaps) of a word after removing the trunk."""
    while not isinstance(w, int) and len(w) == 1:
        w = w[0]
    if isinstance(w, int):
        raise ValidationError("a single letter has no barcode")
    h = _depth(w)
    labels: list[int] = []
    gaps: list[int] = []

    def walk(x, level):
        if isinstance(x, int):
            labels.append(x)
            return
        for k, f in enumerate(x):
            if k:
                gaps.append(h - level)
            walk(f, level + 1)
    walk(w, 0)
    return tuple(labels), tuple(gaps)


def omega_decode(m: BarMonomial) -> LabeledLevelTree:
    if _depth(m.word) != m.height:
        raise ValidationError("word depth does not match the height")
    labels, gaps = word_to_barcode(m.word)
    return LabeledLevelTree(LevelTree.from_gaps(gaps), labels)


# ---------------------------------------------------------------------------
# implementation 1: Koszul signs on nested words

@lru_cache(maxsize=None)
def _shuffles(u: tuple, v: tuple) -> tuple:
    """Signed shuffle product of two words (factors keep their suspension)."""
    out: dict = {}
    p, q = len(u), len(v)
    du = [word_degree(f) + 1 for f in u]
    dv = [word_degree(f) + 1 for f in v]
    for pos in itertools.combinations(range(p + q), p):
        chosen = set(pos)
        w = []
        ia = ib = 0
        parity = 0
        for k in range(p + q):
            if k in chosen:
                # u[ia] jumps over the ib factors of v already placed
                parity += du[ia] * sum(dv[:ib])
                w.append(u[ia])
                ia += 1
            else:
                w.append(v[ib])
                ib += 1
        w = tuple(w)
        out[w] = out.get(w, 0) + (-1 if parity % 2 else 1)
    return tuple((w, c) for w, c in out.items() if c)


@lru_cache(maxsize=None)
def bar_differential(w) -> tuple:
    """Raw bar differential of a word, as a tuple of (word, coefficient)."""
    if isinstance(w, int):
        return ()
    out: dict = {}
    passed = 0
    for i, f in enumerate(w):
        sign = -1 if passed % 2 else 1
        # internal part: d(s f) = -s(d f)
        for g, c in bar_differential(f):
            nw = w[:i] + (g,) + w[i + 1:]
            out[nw] = out.get(nw, 0) - sign * c
        # product of s f with the next factor
        if i + 1 < len(w) and not isinstance(f, int):
            mu = -1 if (word_degree(f) + 1) % 2 else 1
            for g, c in _shuffles(f, w[i + 1]):
                nw = w[:i] + (g,) + w[i + 2:]
                out[nw] = out.get(nw, 0) + sign * mu * c
        passed += word_degree(f) + 1
    return tuple((k, c) for k, c in out.items() if c)


def strip_trunk(w) -> tuple[int, tuple]:
    """Remove one-factor wrappers from a word.

    Identifying s(w) with w is a chain map only with the sign
    (-1)^{deg w}, because the differential of s(w) is -s(dw).
    """
    sign = 1
    while not isinstance(w, int) and len(w) == 1:
        w = w[0]
        if word_degree(w) % 2:
            sign = -sign
    return sign, w


def _raw_bar(labels, gaps) -> dict:
    w = _encode_word(tuple(labels), tuple(gaps), max(gaps))
    out: dict = {}
    for nw, c in bar_differential(w):
        sign, nw = strip_trunk(nw)
        key = word_to_barcode(nw)
        out[key] = out.get(key, 0) + sign * c
    return {k: c for k, c in out.items() if c}


# ---------------------------------------------------------------------------
# implementation 2: merge two sibling vertices, unshuffle their branches

def _branches(labels, gaps, h):
    """Nested lists of children; tips are labels.  Same shape as a word."""
    if h == 0:
        return labels[0]
    groups = [[0]]
    for k, g in enumerate(gaps):
        if g >= h:
            groups.append([k + 1])
        else:
            groups[-1].append(k + 1)
    out = []
    for grp in groups:
        sub_labels = [labels[k] for k in grp]
        sub_gaps = [gaps[k] for k in grp[:-1]]
        out.append(_branches(sub_labels, sub_gaps, h - 1))
    return tuple(out)


def _edges(node) -> int:
    """Edges in the branch hanging from ``node``, counting the edge above it."""
    if isinstance(node, int):
        return 1
    return 1 + sum(_edges(c) for c in node)


def _unshuffles(p: int, q: int):
    """Position maps of p+q items that keep the first p and the last q in order."""
    for first in itertools.combinations(range(p + q), p):
        rest = [k for k in range(p + q) if k not in first]
        yield list(first) + rest


def merge_unshuffle_differential(labels, gaps) -> dict:
    """Raw differential by direct enumeration of merges.

    Merging siblings u, u+1 at level m with branch lists A (p items) and
    B (q items), interleaved so that A and B keep their internal order,
    carries the sign

        (-1)^(m-1) * (-1)^L * (-1)^(crossings)

    where L is the number of edges strictly left of the path from the root
    to u+1 (that is all edges of u's branch plus everything hanging to the
    left of the path), and crossings counts, with weight
    edges(a) * edges(b), every pair where a branch b of B lands before a
    branch a of A.  When the merge leaves the root with a single child,
    the new trunk edge is dropped at the cost of (-1)^e, e the edge count
    of the original tree.
    """
    labels, gaps = tuple(labels), tuple(gaps)
    root = _branches(labels, gaps, max(gaps))
    total_edges = _edges(root) - 1
    out: dict = {}

    def rebuild(path, node):
        for i, parent in reversed(path):
            node = parent[:i] + (node,) + parent[i + 1:]
        return node

    def visit(node, path, level, left_edges):
        # merge each adjacent pair of children of ``node`` (a vertex at ``level``)
        for i in range(len(node) - 1):
            a, b = node[i], node[i + 1]
            if isinstance(a, int):
                continue
            before = left_edges + sum(_edges(c) for c in node[:i + 1])
            items = list(a) + list(b)
            weights = [_edges(c) for c in items]
            for perm in _unshuffles(len(a), len(b)):
                # item k moves to position perm[k]
                parity = level + before
                for x in range(len(perm)):
                    for y in range(x + 1, len(perm)):
                        if perm[x] > perm[y]:
                            parity += weights[x] * weights[y]
                merged = [None] * len(items)
                for k, pos in enumerate(perm):
                    merged[pos] = items[k]
                merged = tuple(merged)
                if level == 0 and len(node) == 2:
                    # the root is left with one child; dropping that trunk
                    # edge costs (-1)^(edges left below it) = (-1)^(e - 2)
                    parity += total_edges
                key = word_to_barcode(rebuild(path, node[:i] + (merged,) + node[i + 2:]))
                out[key] = out.get(key, 0) + (-1 if parity % 2 else 1)
        offset = left_edges
        for i, c in enumerate(node):
            if not isinstance(c, int):
                visit(c, path + [(i, node)], level + 1, offset)
            offset += _edges(c)

    visit(root, [], 0, 0)
    return {k: c for k, c in out.items() if c}


# ---------------------------------------------------------------------------
# gauge and the public differential

@lru_cache(maxsize=None)
def gauge(gaps: tuple) -> int:
    """Sign by which the generator of this unlabeled tree is rescaled."""
    gaps = tuple(gaps)
    if max(gaps) == 1:
        return 1
    n = len(gaps) + 1
    ident = tuple(range(1, n + 1))
    raw = _raw_bar(ident, gaps)
    in_order = sorted(g for (lab, g) in raw if lab == ident)
    if not in_order:
        raise ValidationError(f"no order-preserving face for gaps {gaps}")
    anchor = in_order[0]
    c = raw[(ident, anchor)]
    return 1 if c * gauge(anchor) > 0 else -1


def _normalized(raw: dict, gaps) -> dict:
    g = gauge(tuple(gaps))
    return {k: g * c * gauge(k[1]) for k, c in raw.items()}


def d_lin_pairs(labels, gaps, oracle: bool = False) -> dict:
    """d_lin as {(labels, gaps): coefficient}."""
    labels, gaps = tuple(labels), tuple(gaps)
    if max(gaps) == 1:
        return {}
    raw = merge_unshuffle_differential(labels, gaps) if oracle else _raw_bar(labels, gaps)
    return _normalized(raw, gaps)


def d_lin(t: LabeledLevelTree, max_height: int | None = None) -> FormalSum:
    """Linear differential of a labeled reduced tree, as a sum of generators.

    With ``max_height`` set, terms of larger height are dropped (they do not
    occur for trees of height <= max_height, so this is only a guard).
    """
    if not t.tree.is_reduced:
        raise ValidationError("d_lin needs a reduced tree")
    out = FormalSum()
    for (labels, gaps), c in d_lin_pairs(t.labels, t.tree.gaps).items():
        if max_height is not None and max(gaps) > max_height:
            continue
        out.add(generator(gaps, labels), c)
    return out


def d_lin_oracle(t: LabeledLevelTree) -> FormalSum:
    out = FormalSum()
    for (labels, gaps), c in d_lin_pairs(t.labels, t.tree.gaps, oracle=True).items():
        out.add(generator(gaps, labels), c)
    return out


def d_lin_term(term: OperadTerm) -> FormalSum:
    if not term.is_generator:
        raise ValidationError("d_lin is defined on single generators")
    return d_lin(term.generator_tree())


def signed_unshuffle_formula(labels, s: int) -> dict:
    """Sum over (s, n-s)-unshuffles tau of sgn(tau) times the permuted corolla.

    For the height-2 tree with blocks labels[:s] || labels[s:] this must
    equal d_lin.
    """
    labels = tuple(labels)
    n = len(labels)
    out: dict = {}
    for perm in _unshuffles(s, n - s):
        new = [0] * n
        for k, pos in enumerate(perm):
            new[pos] = labels[k]
        new = tuple(new)
        key = (new, (1,) * (n - 1))
        out[key] = out.get(key, 0) + perm_sign([k + 1 for k in perm])
    return {k: c for k, c in out.items() if c}


def format_pairs(d: dict) -> str:
    """Human-readable rendering of a {(labels, gaps): coeff} map."""
    fs = FormalSum()
    for (labels, gaps), c in d.items():
        fs.add(generator(gaps, labels), c)
    return str(fs)


__all__ = [
    "BarMonomial", "omega_encode", "omega_decode", "bar_differential",
    "merge_unshuffle_differential", "gauge", "d_lin", "d_lin_oracle",
    "d_lin_pairs", "d_lin_term", "signed_unshuffle_formula", "word_degree",
    "word_to_barcode", "format_pairs", "format_barcode",
]
