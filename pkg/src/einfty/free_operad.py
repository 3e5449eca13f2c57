"""Elements of the free operad generated by labeled reduced trees.

A term is a planar rooted tree whose vertices are decorated by unlabeled
reduced trees (stored as gap tuples) and whose leaves carry labels 1..n.
It is stored as a nested tuple: a vertex is ``(gaps, children)`` where each
child is either a vertex or an ``int`` leaf label.  Because the decorations
are unlabeled and all labels live on the leaves, the nested tuple is already
the normal form "unlabeled planar term times a permutation".

Orientation: a term with vertices v_1, ..., v_k listed in preorder (root
first, children left to right) stands for the product of its generators in
that order.  Any other order of composition is converted with the Koszul
sign (-1)^{|x||y|} for every pair of vertices that trade places.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import ParseError, ValidationError
from .level_trees import (LabeledLevelTree, LevelTree, check_perm, format_barcode,
                          relabel)

Node = tuple  # (gaps, children) or int leaf


def _node_arity(node) -> int:
    if isinstance(node, int):
        return 1
    return sum(_node_arity(c) for c in node[1])


def _node_leaves(node, out: list) -> None:
    if isinstance(node, int):
        out.append(node)
        return
    for c in node[1]:
        _node_leaves(c, out)


def _node_vertices(node, out: list) -> None:
    if isinstance(node, int):
        return
    out.append(node)
    for c in node[1]:
        _node_vertices(c, out)


def _dim(gaps) -> int:
    return sum(gaps) - 1


def _map_leaves(node, f):
    if isinstance(node, int):
        return f(node)
    return (node[0], tuple(_map_leaves(c, f) for c in node[1]))


@dataclass(frozen=True, order=False)
class OperadTerm:
    root: object  # Node or int (identity when arity 1)

    def __post_init__(self):
        leaves = self.labels
        check_perm(leaves)
        for v in self.vertices:
            gaps, children = v
            if len(children) < 2 or len(children) != len(gaps) + 1:
                raise ValidationError("vertex arity must be >= 2 and match its decoration")
            if any(g < 1 for g in gaps):
                raise ValidationError("bad decoration")

    # -- structure --------------------------------------------------------
    @property
    def labels(self) -> tuple[int, ...]:
        out: list[int] = []
        _node_leaves(self.root, out)
        return tuple(out)

    @property
    def arity(self) -> int:
        return _node_arity(self.root)

    @property
    def vertices(self) -> list:
        out: list = []
        _node_vertices(self.root, out)
        return out

    @property
    def degree(self) -> int:
        return sum(_dim(v[0]) for v in self.vertices)

    @property
    def is_identity(self) -> bool:
        return isinstance(self.root, int)

    @property
    def is_generator(self) -> bool:
        return not self.is_identity and all(isinstance(c, int) for c in self.root[1])

    def generator_tree(self) -> LabeledLevelTree:
        if not self.is_generator:
            raise ValidationError(f"{self} is not a single generator")
        return LabeledLevelTree(LevelTree.from_gaps(self.root[0]), self.labels)

    def act(self, s: Sequence[int]) -> "OperadTerm":
        s = check_perm(s, self.arity)
        return OperadTerm(_map_leaves(self.root, lambda x: s[x - 1]))

    def unlabeled(self) -> tuple["OperadTerm", tuple[int, ...]]:
        """Factor the term as (unlabeled term) . permutation."""
        labels = self.labels
        counter = iter(range(1, len(labels) + 1))
        base = OperadTerm(_map_leaves(self.root, lambda x: next(counter)))
        return base, labels

    # -- text -------------------------------------------------------------
    def __str__(self) -> str:
        return _format_node(self.root)

    def __repr__(self) -> str:
        return f"OperadTerm({self})"

    def to_json(self):
        return _node_json(self.root)

    def __lt__(self, other: "OperadTerm") -> bool:
        return sort_key(self) < sort_key(other)


def sort_key(t: OperadTerm):
    return (str(t),)


def _format_node(node) -> str:
    if isinstance(node, int):
        return str(node)
    gaps, children = node
    items = [_format_node(c) for c in children]
    parts = [items[0]]
    for g, item in zip(gaps, items[1:]):
        parts.append("|" * g)
        parts.append(item)
    return "[" + "".join(parts) + "]"


def _node_json(node):
    if isinstance(node, int):
        return node
    gaps, children = node
    return {"decoration": format_barcode(range(1, len(gaps) + 2), gaps),
            "inputs": [_node_json(c) for c in children]}


# ---------------------------------------------------------------------------
# constructors

def identity() -> OperadTerm:
    return OperadTerm(1)


def generator(tree: LevelTree | LabeledLevelTree | Sequence[int],
              labels: Sequence[int] | None = None) -> OperadTerm:
    """Single-vertex term E_T (relabelled if labels are given)."""
    if isinstance(tree, LabeledLevelTree):
        labels = tree.labels if labels is None else labels
        tree = tree.tree
    if isinstance(tree, LevelTree):
        if tree.is_terminal:
            return identity()
        if not tree.is_reduced:
            raise ValidationError("decorations must be reduced trees")
        gaps = tree.gaps
    else:
        gaps = tuple(tree)
    n = len(gaps) + 1
    labels = tuple(range(1, n + 1)) if labels is None else check_perm(labels, n)
    return OperadTerm((tuple(gaps), tuple(labels)))


def parse_term(text: str) -> OperadTerm:
    """Parse an extended barcode such as ``[[1||3]|2]``."""
    pos = 0

    def item():
        nonlocal pos
        if pos < len(text) and text[pos] == "[":
            return node()
        m = re.match(r"\d+", text[pos:])
        if not m:
            raise ParseError(text, pos, "expected a label or '['")
        pos += len(m.group())
        return int(m.group())

    def node():
        nonlocal pos
        pos += 1  # '['
        children = [item()]
        gaps = []
        while True:
            if pos >= len(text):
                raise ParseError(text, pos, "missing ']'")
            if text[pos] == "]":
                pos += 1
                break
            m = re.match(r"\|+", text[pos:])
            if not m:
                raise ParseError(text, pos, f"unexpected character {text[pos]!r}")
            gaps.append(len(m.group()))
            pos += len(m.group())
            children.append(item())
        if len(children) < 2:
            raise ParseError(text, pos, "a vertex needs at least two inputs")
        return (tuple(gaps), tuple(children))

    if not text:
        raise ParseError(text, 0, "empty term")
    root = item()
    if pos != len(text):
        raise ParseError(text, pos, "trailing characters")
    try:
        return OperadTerm(root)
    except ValidationError as exc:
        raise ParseError(text, 0, str(exc)) from None


# ---------------------------------------------------------------------------
# signs

def koszul_reorder_sign(product_order: Sequence, final_order: Sequence,
                        degree: Mapping) -> int:
    """Sign for rewriting a product given in one order into another."""
    pos = {v: i for i, v in enumerate(final_order)}
    seq = [pos[v] for v in product_order]
    odd = [degree[v] % 2 for v in product_order]
    sign = 1
    for i in range(len(seq)):
        if not odd[i]:
            continue
        for j in range(i + 1, len(seq)):
            if odd[j] and seq[j] < seq[i]:
                sign = -sign
    return sign


# A tagged tree carries a unique tag on every vertex so that the vertex
# order can be tracked through substitutions: vertex = (tag, gaps, children).

def _tag(node, prefix, counter):
    if isinstance(node, int):
        return node
    tag = (prefix, next(counter))
    gaps, children = node
    return (tag, gaps, tuple(_tag(c, prefix, counter) for c in children))


def _untag(node):
    if isinstance(node, int):
        return node
    return (node[1], tuple(_untag(c) for c in node[2]))


def _tagged_preorder(node, out):
    if isinstance(node, int):
        return
    out.append(node[0])
    for c in node[2]:
        _tagged_preorder(c, out)


def _tagged_degrees(node, out):
    if isinstance(node, int):
        return
    out[node[0]] = _dim(node[1])
    for c in node[2]:
        _tagged_degrees(c, out)


def compose_with_sign(a: OperadTerm, i: int, b: OperadTerm) -> tuple[int, OperadTerm]:
    """a o_i b together with the Koszul sign of its preorder orientation."""
    na, nb = a.arity, b.arity
    if not 1 <= i <= na:
        raise ValidationError(f"position {i} out of range 1..{na}")
    ta = _tag(a.root, "a", iter(range(10**9)))
    tb = _tag(b.root, "b", iter(range(10**9)))
    tb = _map_tagged_leaves(tb, lambda x: x + i - 1)

    def graft(leaf):
        if leaf == i:
            return tb
        return leaf if leaf < i else leaf + nb - 1

    tc = _map_tagged_leaves(ta, graft)
    order_a: list = []
    order_b: list = []
    _tagged_preorder(ta, order_a)
    _tagged_preorder(tb, order_b)
    final: list = []
    _tagged_preorder(tc, final)
    degs: dict = {}
    _tagged_degrees(tc, degs)
    sign = koszul_reorder_sign(order_a + order_b, final, degs)
    return sign, OperadTerm(_untag(tc))


def _map_tagged_leaves(node, f):
    if isinstance(node, int):
        return f(node)
    return (node[0], node[1], tuple(_map_tagged_leaves(c, f) for c in node[2]))


def compose(a: OperadTerm, i: int, b: OperadTerm) -> OperadTerm:
    """Grafting of b into the leaf labelled i of a (sign dropped)."""
    return compose_with_sign(a, i, b)[1]


def block_permutation(s: Sequence[int], i: int, r: Sequence[int]) -> tuple[int, ...]:
    """The permutation p with (a.s) o_i (b.r) == (a o_{s^{-1}...} b).p.

    Here the composite on the right is a o_j b with j the a-label sent to i
    by s (j = s(i) in the usual notation, i.e. the position of i in the
    tuple s).
    """
    m, n = len(s), len(r)
    j = s.index(i) + 1

    def adj(v):
        return v if v < i else v + n - 1

    out = []
    for x in range(1, m + n):
        if x < j:
            out.append(adj(s[x - 1]))
        elif x >= j + n:
            out.append(adj(s[x - n]))
        else:
            out.append(r[x - j] + i - 1)
    return tuple(out)


# ---------------------------------------------------------------------------
# formal sums

class FormalSum:
    """Finite Z- or F2-linear combination of terms."""

    __slots__ = ("ring", "terms")

    def __init__(self, terms: Mapping[OperadTerm, int] | Iterable = (), ring: str = "Z"):
        if ring not in ("Z", "F2"):
            raise ValidationError(f"unknown ring {ring!r}")
        self.ring = ring
        self.terms: dict[OperadTerm, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for t, c in items:
            self.add(t, c)

    def _norm(self, c: int) -> int:
        return c % 2 if self.ring == "F2" else c

    def add(self, term: OperadTerm, coeff: int = 1) -> None:
        c = self._norm(self.terms.get(term, 0) + coeff)
        if c:
            self.terms[term] = c
        else:
            self.terms.pop(term, None)

    def copy(self) -> "FormalSum":
        out = FormalSum(ring=self.ring)
        out.terms = dict(self.terms)
        return out

    def __iter__(self):
        return iter(self.items())

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: sort_key(kv[0]))

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __getitem__(self, term):
        return self.terms.get(term, 0)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, FormalSum):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def _check(self, other):
        if self.ring != other.ring:
            raise ValidationError("cannot mix Z and F2 sums")

    def __add__(self, other: "FormalSum") -> "FormalSum":
        self._check(other)
        out = self.copy()
        for t, c in other.terms.items():
            out.add(t, c)
        return out

    def __neg__(self) -> "FormalSum":
        return self.scale(-1)

    def __sub__(self, other: "FormalSum") -> "FormalSum":
        return self + (-other)

    def scale(self, k: int) -> "FormalSum":
        return FormalSum(((t, k * c) for t, c in self.terms.items()), self.ring)

    def act(self, s: Sequence[int]) -> "FormalSum":
        return FormalSum(((t.act(s), c) for t, c in self.terms.items()), self.ring)

    def to_ring(self, ring: str) -> "FormalSum":
        if ring == self.ring:
            return self.copy()
        if ring == "F2":
            return FormalSum(self.terms.items(), "F2")
        raise ValidationError("cannot lift an F2 sum to Z")

    def support(self) -> set[OperadTerm]:
        return set(self.terms)

    def degrees(self) -> set[int]:
        return {t.degree for t in self.terms}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for k, (t, c) in enumerate(self.items()):
            if self.ring == "F2":
                out.append(("" if k == 0 else " + ") + str(t))
                continue
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            if k == 0:
                out.append(("-" if c < 0 else "") + mag + str(t))
            else:
                out.append(f" {sign} {mag}{t}")
        return "".join(out)

    __repr__ = __str__

    def to_json(self) -> list:
        return [{"term": str(t), "coeff": c, "degree": t.degree} for t, c in self.items()]

    @classmethod
    def parse(cls, text: str, ring: str = "Z") -> "FormalSum":
        """Parse ``a - b + 2*c`` where a, b, c are extended barcodes."""
        out = cls(ring=ring)
        text = text.replace(" ", "")
        if text == "0":
            return out
        for m in re.finditer(r"([+-]?)(\d+\*)?([^+-]+)", text):
            sign = -1 if m.group(1) == "-" else 1
            mult = int(m.group(2)[:-1]) if m.group(2) else 1
            out.add(parse_term(m.group(3)), sign * mult)
        return out


def single(term: OperadTerm, coeff: int = 1, ring: str = "Z") -> FormalSum:
    return FormalSum([(term, coeff)], ring)


def compose_sums(a: FormalSum, i: int, b: FormalSum) -> FormalSum:
    a._check(b)
    out = FormalSum(ring=a.ring)
    for ta, ca in a.terms.items():
        for tb, cb in b.terms.items():
            s, t = compose_with_sign(ta, i, tb)
            out.add(t, s * ca * cb)
    return out


# ---------------------------------------------------------------------------
# derivations

def substitute_vertex(term: OperadTerm, index: int, value: OperadTerm) -> tuple[int, OperadTerm]:
    """Replace the index-th vertex (preorder) by ``value``.

    ``value`` has the arity of that vertex and its leaf labels name the
    vertex inputs.  The sign converts the product order
    (v_1 .. v_{index-1}, value, v_{index+1} ..) into preorder; the
    derivation sign for passing v_1 .. v_{index-1} is not included.
    """
    tagged = _tag(term.root, "t", iter(range(10**9)))
    product: list = []
    found = []

    def walk(node):
        if isinstance(node, int):
            return node
        tag, gaps, children = node
        if tag[1] == index:
            new_children = tuple(walk(c) for c in children)
            vt = _tag(value.root, "v", iter(range(10**9)))
            vorder: list = []
            _tagged_preorder(vt, vorder)
            found.append(vorder)
            return _map_tagged_leaves(vt, lambda x: new_children[x - 1])
        return (tag, gaps, tuple(walk(c) for c in children))

    new = walk(tagged)
    if not found:
        raise ValidationError(f"term has no vertex {index}")
    old_order: list = []
    _tagged_preorder(tagged, old_order)
    for tag in old_order:
        if tag[1] == index:
            product.extend(found[0])
        else:
            product.append(tag)
    final: list = []
    _tagged_preorder(new, final)
    degs: dict = {}
    _tagged_degrees(new, degs)
    return koszul_reorder_sign(product, final, degs), OperadTerm(_untag(new))


def apply_derivation(x: FormalSum, on_generator: Callable[[tuple], FormalSum]) -> FormalSum:
    """Extend a degree -1 map on generators to a derivation of the free operad.

    ``on_generator(gaps)`` returns the image of the unlabeled generator with
    decoration ``gaps`` (leaf labels = its inputs).
    """
    out = FormalSum(ring=x.ring)
    for term, coeff in x.terms.items():
        verts = term.vertices
        passed = 0
        for idx, v in enumerate(verts):
            image = on_generator(v[0])
            sign0 = -1 if passed % 2 else 1
            for value, c in image.terms.items():
                s, t = substitute_vertex(term, idx, value)
                out.add(t, sign0 * s * c * coeff)
            passed += _dim(v[0])
    return out


def vertex_decorations(term: OperadTerm) -> list[tuple[int, ...]]:
    return [v[0] for v in term.vertices]
