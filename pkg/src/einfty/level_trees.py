"""Trees with levels, barcodes and flags of preorders.

A tree of height h is a tower of order-preserving maps

    [k_h] -> [k_{h-1}] -> ... -> [k_1] -> [k_0] = [1]

Internally vertices at each level are numbered 0..k_m-1 and
``parent_maps[m-1][i]`` is the parent (at level m-1) of vertex i at level m.
The JSON form uses 1-based numbering, as in the usual notation.

A pruned tree (every leaf is at the top level) is determined by its height
and the gap depths between adjacent tips: tips i and i+1 have their lowest
common ancestor at level h - gap.  Reduced trees are exactly the pruned
trees with max(gaps) == h, which is why barcodes and gap sequences are the
workhorse representation everywhere else in the package.

Permutations follow the tuple convention (s_1, ..., s_n) with
s_i = s^{-1}(i).  With this convention the tuple is literally the label
sequence of the corolla relabelled by s, e.g. [1|2|3] . (1,3,2) = [1|3|2].
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import ParseError, ValidationError

Perm = tuple[int, ...]


# ---------------------------------------------------------------------------
# permutations

def check_perm(p: Sequence[int], n: int | None = None) -> Perm:
    p = tuple(int(x) for x in p)
    if n is not None and len(p) != n:
        raise ValidationError(f"permutation {p} has size {len(p)}, expected {n}")
    if sorted(p) != list(range(1, len(p) + 1)):
        raise ValidationError(f"{p} is not a permutation of 1..{len(p)}")
    return p


def perm_mul(s: Sequence[int], r: Sequence[int]) -> Perm:
    """Product sr in tuple notation, so that (x.s).r == x.(sr)."""
    return tuple(r[v - 1] for v in s)


def perm_inverse(s: Sequence[int]) -> Perm:
    inv = [0] * len(s)
    for i, v in enumerate(s):
        inv[v - 1] = i + 1
    return tuple(inv)


def perm_sign(p: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j] - 1
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def relabel(labels: Sequence[int], s: Sequence[int]) -> Perm:
    """Right action of s on a label sequence."""
    return tuple(s[x - 1] for x in labels)


# ---------------------------------------------------------------------------
# unlabeled trees

@dataclass(frozen=True)
class LevelTree:
    parent_maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        maps = tuple(tuple(int(v) for v in m) for m in self.parent_maps)
        object.__setattr__(self, "parent_maps", maps)
        if len(maps) < 1:
            raise ValidationError("a level tree needs height >= 1")
        below = 1
        for m, rho in enumerate(maps, start=1):
            if len(rho) < 1:
                raise ValidationError(f"level {m} is empty")
            for i, v in enumerate(rho):
                if not 0 <= v < below:
                    raise ValidationError(f"parent {v} out of range at level {m}")
                if i and v < rho[i - 1]:
                    raise ValidationError(f"map below level {m} is not order-preserving")
            below = len(rho)

    # -- basic numbers ----------------------------------------------------
    @property
    def height(self) -> int:
        return len(self.parent_maps)

    @property
    def level_sizes(self) -> tuple[int, ...]:
        return (1,) + tuple(len(m) for m in self.parent_maps)

    @property
    def n_tips(self) -> int:
        return len(self.parent_maps[-1])

    @property
    def edges(self) -> int:
        return sum(len(m) for m in self.parent_maps)

    @property
    def is_terminal(self) -> bool:
        return all(len(m) == 1 for m in self.parent_maps)

    @property
    def dim(self) -> int:
        if self.is_terminal:
            return 0
        return self.edges - self.height - 1

    def children(self, m: int, v: int) -> list[int]:
        """Vertices at level m+1 sitting over vertex v at level m."""
        return [i for i, p in enumerate(self.parent_maps[m]) if p == v]

    def ancestor(self, tip: int, level: int) -> int:
        v = tip
        for m in range(self.height, level, -1):
            v = self.parent_maps[m - 1][v]
        return v

    # -- predicates -------------------------------------------------------
    @property
    def is_pruned(self) -> bool:
        for m in range(self.height - 1):
            below = len(self.parent_maps[m])
            if set(self.parent_maps[m + 1]) != set(range(below)):
                return False
        return True

    @property
    def has_trunk(self) -> bool:
        return any(len(m) == 1 for m in self.parent_maps)

    @property
    def is_reduced(self) -> bool:
        return self.is_pruned and not self.has_trunk

    # -- gap encoding -----------------------------------------------------
    @cached_property
    def gaps(self) -> tuple[int, ...]:
        if not self.is_pruned:
            raise ValidationError("gap depths are defined for pruned trees only")
        h = self.height
        out = []
        for i in range(self.n_tips - 1):
            level = 0
            for m in range(h - 1, -1, -1):
                if self.ancestor(i, m) == self.ancestor(i + 1, m):
                    level = m
                    break
            out.append(h - level)
        return tuple(out)

    @classmethod
    def from_gaps(cls, gaps: Sequence[int], height: int | None = None) -> "LevelTree":
        gaps = tuple(int(g) for g in gaps)
        if any(g < 1 for g in gaps):
            raise ValidationError("gap depths must be positive")
        if height is None:
            if not gaps:
                raise ValidationError("terminal tree needs an explicit height")
            height = max(gaps)
        if gaps and max(gaps) > height:
            raise ValidationError("gap deeper than the height")
        maps = []
        prev_blocks = None
        for m in range(1, height + 1):
            # tips i, i+1 are in different level-m vertices iff gap > h - m
            block_of_tip = [0]
            for g in gaps:
                block_of_tip.append(block_of_tip[-1] + (1 if g > height - m else 0))
            if prev_blocks is None:
                rho = [0] * (block_of_tip[-1] + 1)
            else:
                rho = [0] * (block_of_tip[-1] + 1)
                for tip, b in enumerate(block_of_tip):
                    rho[b] = prev_blocks[tip]
            maps.append(tuple(rho))
            prev_blocks = block_of_tip
        return cls(tuple(maps))

    @classmethod
    def terminal(cls, height: int = 1) -> "LevelTree":
        return cls(tuple((0,) for _ in range(height)))

    # -- normalizations ---------------------------------------------------
    def prune(self) -> "LevelTree":
        """Remove every vertex without a tip above it."""
        h = self.height
        keep = [set() for _ in range(h + 1)]
        keep[h] = set(range(self.n_tips))
        for m in range(h, 0, -1):
            keep[m - 1] = {self.parent_maps[m - 1][v] for v in keep[m]}
        renum = [{v: i for i, v in enumerate(sorted(keep[m]))} for m in range(h + 1)]
        maps = []
        for m in range(1, h + 1):
            maps.append(tuple(renum[m - 1][self.parent_maps[m - 1][v]]
                              for v in sorted(keep[m])))
        return LevelTree(tuple(maps))

    def cut_trunk(self) -> "LevelTree":
        """Drop the bottom levels of size one (the trunk)."""
        t = self
        while t.height > 1 and len(t.parent_maps[0]) == 1:
            t = LevelTree(((0,) * len(t.parent_maps[1]),) + t.parent_maps[2:])
        return t

    def reduce(self) -> "LevelTree":
        """Maximal reduced subtree r(T); terminal trees are returned unchanged."""
        if self.is_terminal:
            return self
        t = self.cut_trunk().prune()
        # pruning can uncover a new trunk
        while t.has_trunk and not t.is_terminal:
            t = t.cut_trunk().prune()
        return t

    def suspend(self) -> "LevelTree":
        first = (0,) * len(self.parent_maps[0])
        return LevelTree(((0,), first) + self.parent_maps[1:])

    # -- text -------------------------------------------------------------
    def barcode(self) -> str:
        if not self.is_reduced:
            raise ValidationError("only reduced trees have a barcode")
        return format_barcode(range(1, self.n_tips + 1), self.gaps)

    def __str__(self) -> str:
        if self.is_reduced:
            return self.barcode()
        return f"LevelTree(h={self.height}, sizes={self.level_sizes})"

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "level_sizes": list(self.level_sizes),
            "parent_maps": [[v + 1 for v in m] for m in self.parent_maps],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LevelTree":
        maps = tuple(tuple(v - 1 for v in m) for m in data["parent_maps"])
        t = cls(maps)
        if "height" in data and data["height"] != t.height:
            raise ValidationError("height does not match parent_maps")
        if "level_sizes" in data and tuple(data["level_sizes"]) != t.level_sizes:
            raise ValidationError("level_sizes do not match parent_maps")
        return t


# ---------------------------------------------------------------------------
# labeled trees

@dataclass(frozen=True)
class LabeledLevelTree:
    tree: LevelTree
    labels: Perm

    def __post_init__(self):
        object.__setattr__(self, "labels", check_perm(self.labels, self.tree.n_tips))

    @property
    def n(self) -> int:
        return self.tree.n_tips

    @property
    def height(self) -> int:
        return self.tree.height

    @property
    def dim(self) -> int:
        return self.tree.dim

    def act(self, s: Sequence[int]) -> "LabeledLevelTree":
        s = check_perm(s, self.n)
        return LabeledLevelTree(self.tree, relabel(self.labels, s))

    def suspend(self) -> "LabeledLevelTree":
        return LabeledLevelTree(self.tree.suspend(), self.labels)

    def reduce(self) -> "LabeledLevelTree":
        """Reduce a pruned tree (pruning would lose tips, so it must be pruned)."""
        if not self.tree.is_pruned:
            raise ValidationError("labeled reduce needs a pruned tree")
        return LabeledLevelTree(self.tree.reduce(), self.labels)

    def barcode(self) -> str:
        if not self.tree.is_reduced:
            raise ValidationError("only reduced trees have a barcode")
        return format_barcode(self.labels, self.tree.gaps)

    def __str__(self) -> str:
        return self.barcode() if self.tree.is_reduced else repr(self)

    def to_json(self) -> dict:
        d = self.tree.to_json()
        d["labeling"] = list(self.labels)
        return d

    @classmethod
    def from_json(cls, data: dict) -> "LabeledLevelTree":
        t = LevelTree.from_json(data)
        labels = data.get("labeling") or list(range(1, t.n_tips + 1))
        return cls(t, tuple(labels))


# ---------------------------------------------------------------------------
# barcodes

_BARCODE_TOKEN = re.compile(r"\d+|\|+|\[|\]")


@dataclass(frozen=True)
class Barcode:
    labels: Perm
    gaps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", check_perm(self.labels))
        object.__setattr__(self, "gaps", tuple(int(g) for g in self.gaps))
        if len(self.gaps) != len(self.labels) - 1 or len(self.labels) < 2:
            raise ValidationError("a barcode needs n >= 2 labels and n-1 gaps")
        if any(g < 1 for g in self.gaps):
            raise ValidationError("gap depths must be positive")

    @property
    def height(self) -> int:
        return max(self.gaps)

    @property
    def dim(self) -> int:
        return sum(self.gaps) - 1

    def __str__(self) -> str:
        return format_barcode(self.labels, self.gaps)

    def to_tree(self) -> LabeledLevelTree:
        return LabeledLevelTree(LevelTree.from_gaps(self.gaps), self.labels)

    @classmethod
    def from_tree(cls, t: LabeledLevelTree) -> "Barcode":
        if not t.tree.is_reduced:
            raise ValidationError("only reduced trees have a barcode")
        return cls(t.labels, t.tree.gaps)


def format_barcode(labels: Iterable[int], gaps: Sequence[int]) -> str:
    labels = list(labels)
    parts = [str(labels[0])]
    for g, lab in zip(gaps, labels[1:]):
        parts.append("|" * g)
        parts.append(str(lab))
    return "[" + "".join(parts) + "]"


def parse_barcode(text: str) -> Barcode:
    """Parse ``'[' label ('|'+ label)* ']'``; no whitespace allowed."""
    if not text.startswith("["):
        raise ParseError(text, 0, "expected '['")
    pos = 1
    labels: list[int] = []
    gaps: list[int] = []
    expect_label = True
    while pos < len(text):
        c = text[pos]
        if expect_label:
            m = re.match(r"\d+", text[pos:])
            if not m:
                raise ParseError(text, pos, "expected a label")
            labels.append(int(m.group()))
            pos += len(m.group())
            expect_label = False
        elif c == "|":
            m = re.match(r"\|+", text[pos:])
            gaps.append(len(m.group()))
            pos += len(m.group())
            expect_label = True
        elif c == "]":
            if pos != len(text) - 1:
                raise ParseError(text, pos + 1, "trailing characters")
            try:
                return Barcode(tuple(labels), tuple(gaps))
            except ValidationError as exc:
                raise ParseError(text, pos, str(exc)) from None
        else:
            raise ParseError(text, pos, f"unexpected character {c!r}")
    raise ParseError(text, len(text), "missing ']'")


def tree_from_barcode(text: str) -> LabeledLevelTree:
    return parse_barcode(text).to_tree()


# ---------------------------------------------------------------------------
# flags of preorders

@dataclass(frozen=True)
class FlagOfPreorders:
    """blocks[s-1] is the ordered partition pi_s; blocks are sorted tuples."""
    blocks: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(tuple(sorted(b)) for b in level) for level in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValidationError("a flag needs at least one preorder")
        everything = sorted(x for b in blocks[0] for x in b)
        n = len(everything)
        if everything != list(range(1, n + 1)):
            raise ValidationError("pi_1 must partition 1..n")
        if any(len(b) != 1 for b in blocks[-1]):
            raise ValidationError("the last preorder must be a total order")
        for s in range(len(blocks)):
            if sorted(x for b in blocks[s] for x in b) != everything:
                raise ValidationError(f"pi_{s + 1} is not a partition of 1..n")
            if any(not b for b in blocks[s]):
                raise ValidationError("empty block")
        for s in range(len(blocks) - 1):
            owner = {x: i for i, b in enumerate(blocks[s]) for x in b}
            seq = []
            for b in blocks[s + 1]:
                ids = {owner[x] for x in b}
                if len(ids) != 1:
                    raise ValidationError(f"pi_{s + 2} does not refine pi_{s + 1}")
                seq.append(ids.pop())
            if seq != sorted(seq):
                raise ValidationError(f"pi_{s + 2} does not preserve the order of pi_{s + 1}")

    @property
    def height(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return len(self.blocks[-1])

    @property
    def dim(self) -> int:
        return sum(len(level) for level in self.blocks) - self.height - 1

    @property
    def is_reduced(self) -> bool:
        return len(self.blocks[0]) > 1

    def to_json(self) -> list:
        return [[list(b) for b in level] for level in self.blocks]


def tree_to_flag(t: LabeledLevelTree) -> FlagOfPreorders:
    tree = t.tree
    if not tree.is_pruned:
        raise ValidationError("flags are defined for pruned trees")
    h = tree.height
    blocks = []
    for s in range(1, h + 1):
        groups: list[list[int]] = [[] for _ in range(len(tree.parent_maps[s - 1]))]
        for tip in range(tree.n_tips):
            groups[tree.ancestor(tip, s)].append(t.labels[tip])
        blocks.append(tuple(tuple(g) for g in groups))
    return FlagOfPreorders(tuple(blocks))


def flag_to_tree(f: FlagOfPreorders) -> LabeledLevelTree:
    maps = []
    prev_owner = None
    for level in f.blocks:
        if prev_owner is None:
            maps.append((0,) * len(level))
        else:
            maps.append(tuple(prev_owner[b[0]] for b in level))
        prev_owner = {x: i for i, b in enumerate(level) for x in b}
    labels = tuple(b[0] for b in f.blocks[-1])
    return LabeledLevelTree(LevelTree(tuple(maps)), labels)


# ---------------------------------------------------------------------------
# enumeration

def compositions(total: int, parts: int | None = None) -> Iterator[tuple[int, ...]]:
    """Compositions of ``total`` (into exactly ``parts`` parts if given)."""
    if total <= 0:
        return
    if parts is None:
        for k in range(1, total + 1):
            yield from compositions(total, k)
        return
    if parts < 1 or parts > total:
        return
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def _barcode_key(gaps):
    return format_barcode(range(1, len(gaps) + 2), gaps)


def enumerate_reduced(n: int | None, d: int, max_height: int | None = None) -> list[LevelTree]:
    """Unlabeled reduced trees of dimension d (n tips if given), sorted by barcode.

    ``max_height`` restricts to trees of height <= max_height; these are the
    reduced representatives of the pruned trees of that height.
    """
    if d < 0:
        return []
    if n is not None and n < 2:
        return []
    parts = None if n is None else n - 1
    out = []
    for gaps in compositions(d + 1, parts):
        if max_height is not None and max(gaps) > max_height:
            continue
        out.append(gaps)
    out.sort(key=_barcode_key)
    return [LevelTree.from_gaps(g) for g in out]


def enumerate_labeled(n: int, d: int, max_height: int | None = None) -> list[LabeledLevelTree]:
    """All labeled reduced trees with n tips and dimension d, sorted by barcode."""
    out = []
    for tree in enumerate_reduced(n, d, max_height):
        for p in itertools.permutations(range(1, n + 1)):
            out.append(LabeledLevelTree(tree, p))
    out.sort(key=lambda t: t.barcode())
    return out


def all_permutations(n: int) -> list[Perm]:
    return list(itertools.permutations(range(1, n + 1)))
