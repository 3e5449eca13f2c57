"""The multilinear part of the free Lie algebra over the integers.

Tensor elements are dicts {word: coefficient}; a word is a permutation of
1..n written as the tuple of its letters.  The left-normed brackets
b_lam = [x_lam(1), [x_lam(2), ..., [x_lam(n-1), x_n] ...]] form a basis of
the Lie part; the coefficient of the word lam + (n,) in b_mu is 1 if
lam = mu and 0 otherwise, which makes coordinates readable directly.

Ree's criterion: F is a Lie element iff for every splitting of the
letters into two words u, v (u the first s letters of some permutation
rho, v the rest), the coefficients of F summed over all shuffles of u and
v vanish.  The span of these shuffle sums (as elements of the dual
tensor space) is the unshuffle lattice Ush.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .errors import ValidationError
from .exact_homology import IntegerMatrix, smith_normal_form
from .level_trees import all_permutations, check_perm, perm_sign

TensorElement = dict  # word (tuple) -> nonzero int


def _clean(f: Mapping) -> TensorElement:
    return {w: c for w, c in f.items() if c}


def _check_element(f: Mapping) -> int:
    """Validate a multilinear element and return its degree."""
    n = None
    for w in f:
        check_perm(w)
        if n is None:
            n = len(w)
        elif len(w) != n:
            raise ValidationError("tensor element is not homogeneous")
    if n is None:
        raise ValidationError("empty tensor element has no degree; pass n")
    return n


def bracket(f: Mapping, g: Mapping) -> TensorElement:
    """[f, g] = f g - g f for elements in disjoint letters."""
    out: dict = {}
    for u, a in f.items():
        for v, b in g.items():
            out[u + v] = out.get(u + v, 0) + a * b
            out[v + u] = out.get(v + u, 0) - a * b
    return _clean(out)


def expand_left_normed(lam: Sequence[int]) -> TensorElement:
    """b_lam for a permutation lam of 1..n-1 (n = len(lam) + 1)."""
    lam = tuple(lam)
    n = len(lam) + 1
    if lam:
        check_perm(lam, n - 1)
    f: dict = {(n,): 1}
    for x in reversed(lam):
        f = bracket({(x,): 1}, f)
    return f


def format_element(f: Mapping) -> str:
    if not f:
        return "0"
    parts = []
    for w in sorted(f):
        c = f[w]
        word = "⊗".join(f"x{i}" for i in w)
        sign = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else f"{abs(c)}*"
        parts.append(f"{sign} {mag}{word}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


# ---------------------------------------------------------------------------
# shuffle sums

@lru_cache(maxsize=None)
def _shuffle_positions(n: int, s: int) -> tuple[tuple[int, ...], ...]:
    """For each (s, n-s) shuffle: the word positions read as indices into
    u + v (the concatenation of the two words)."""
    out = []
    for first in itertools.combinations(range(n), s):
        rest = [p for p in range(n) if p not in first]
        word = [0] * n
        for k, p in enumerate(first):
            word[p] = k
        for k, p in enumerate(rest):
            word[p] = s + k
        out.append(tuple(word))
    return tuple(out)


def shuffle_generators(n: int, signed: bool = False) -> list[tuple[tuple, int, dict]]:
    """All (rho, s, generator) with generator = sum over shuffles w of the
    words rho[:s] and rho[s:] of (sign of the shuffle, if ``signed``) * w."""
    out = []
    for rho in all_permutations(n):
        for s in range(1, n):
            gen: dict = {}
            for pos in _shuffle_positions(n, s):
                w = tuple(rho[k] for k in pos)
                c = perm_sign([k + 1 for k in pos]) if signed else 1
                gen[w] = gen.get(w, 0) + c
            out.append((rho, s, _clean(gen)))
    return out


def ree_sums(f: Mapping, n: int | None = None):
    """Yield (rho, s, sum of coefficients of f over the shuffles)."""
    if n is None:
        n = _check_element(f)
    for rho in all_permutations(n):
        for s in range(1, n):
            total = 0
            for pos in _shuffle_positions(n, s):
                total += f.get(tuple(rho[k] for k in pos), 0)
            yield rho, s, total


def ree_test(f: Mapping, n: int | None = None) -> bool:
    """True iff f is a Lie element (all shuffle sums vanish)."""
    return all(total == 0 for _, _, total in ree_sums(f, n))


def lie_coordinates(f: Mapping, n: int | None = None) -> dict | None:
    """Coordinates of f in the basis b_lam, or None if f is not Lie.

    The candidate coordinate at lam is the coefficient of lam + (n,); the
    candidate is accepted only if it reconstructs f exactly.
    """
    if n is None:
        n = _check_element(f)
    coords = {}
    total: dict = {}
    for lam in all_permutations(n - 1) if n > 1 else [()]:
        c = f.get(tuple(lam) + (n,), 0)
        if c:
            coords[tuple(lam)] = c
            for w, v in expand_left_normed(lam).items():
                total[w] = total.get(w, 0) + c * v
    if _clean(total) != _clean(f):
        return None
    return coords


def span_membership(f: Mapping, n: int) -> dict | None:
    """Independent oracle: solve f = sum c_lam b_lam over Q by Gaussian
    elimination and accept only integral solutions."""
    lams = all_permutations(n - 1) if n > 1 else [()]
    words = all_permutations(n)
    cols = [expand_left_normed(l) for l in lams]
    # augmented system: one row per word
    rows = [[Fraction(col.get(w, 0)) for col in cols] + [Fraction(f.get(w, 0))] for w in words]
    extra = set(f) - set(words)
    if extra:
        raise ValidationError("element has words of the wrong length")
    m = len(cols)
    pivots = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                k = rows[i][c]
                rows[i] = [x - k * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] != 0 for row in rows[r:]):
        return None
    sol = {}
    for i, c in enumerate(pivots):
        v = rows[i][-1]
        if v.denominator != 1:
            return None
        if v:
            sol[tuple(lams[c])] = int(v)
    return sol


# ---------------------------------------------------------------------------
# the unshuffle quotient

def _vector(f: Mapping, index: dict) -> dict:
    return {index[w]: c for w, c in f.items()}


def ush_matrix(n: int, signed: bool = False) -> IntegerMatrix:
    """Rows are the shuffle-sum generators in the word basis (sorted words)."""
    words = all_permutations(n)
    index = {w: i for i, w in enumerate(words)}
    rows = [_vector(g, index) for _, _, g in shuffle_generators(n, signed)]
    return IntegerMatrix(len(rows), len(words), rows)


def sign_twist_matrix(n: int) -> IntegerMatrix:
    """Psi: the diagonal matrix word -> sgn(word) * word."""
    words = all_permutations(n)
    return IntegerMatrix(len(words), len(words), [{i: perm_sign(w)} for i, w in enumerate(words)])


def _det(m: IntegerMatrix) -> int:
    """Determinant of a square integer matrix (exact Bareiss elimination)."""
    a = m.to_dense()
    size = len(a)
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def ush_quotient_report(n: int, signed: bool = False) -> dict:
    """Ranks and invariant factors of the unshuffle lattice and the
    pairing between the quotient and the Lie basis.

    * ``ush_rank`` and ``divisors``: Smith form of the generator matrix;
      divisors all 1 means the quotient is torsion-free.
    * ``quotient_rank``: n! - ush_rank, expected (n-1)!.
    * ``basis_spans``: the classes of the words lam + (n,) together with
      Ush span the whole tensor lattice (so they form a quotient basis).
    * ``annihilates_lie``: every generator pairs to zero with every b_lam
      (with Psi(b_lam) for the signed variant).
    * ``pairing_det``: determinant of <lam + (n,), b_mu>.
    * ``twist_exchange``: Psi maps every signed generator to +-1 times the
      plain generator with the same (rho, s).
    """
    if not isinstance(n, int) or not 2 <= n <= 7:
        raise ValidationError("n must be between 2 and 7")
    words = all_permutations(n)
    index = {w: i for i, w in enumerate(words)}
    gens = shuffle_generators(n, signed)
    m = ush_matrix(n, signed)
    snf = smith_normal_form(m)
    lams = all_permutations(n - 1)
    basis_rows = [{index[tuple(l) + (n,)]: 1} for l in lams]
    stacked = IntegerMatrix(m.n_rows + len(basis_rows), m.n_cols, m.rows + basis_rows)
    stacked_snf = smith_normal_form(stacked)
    lie = [expand_left_normed(l) for l in lams]
    if signed:
        lie = [{w: perm_sign(w) * c for w, c in b.items()} for b in lie]
    annihilates = all(sum(c * b.get(w, 0) for w, c in g.items()) == 0
                      for _, _, g in gens for b in lie)
    pairing = IntegerMatrix(len(lams), len(lams),
                            [{j: b.get(tuple(l) + (n,), 0) for j, b in enumerate(lie)} for l in lams])
    other = {(rho, s): g for rho, s, g in shuffle_generators(n, not signed)}
    twist = True
    for rho, s, g in gens:
        twisted = {w: perm_sign(w) * c for w, c in g.items()}
        target = other[(rho, s)]
        if twisted != target and twisted != {w: -c for w, c in target.items()}:
            twist = False
            break
    return {
        "n": n,
        "signed_variant": signed,
        "ush_rank": snf.rank,
        "divisors": list(snf.divisors),
        "torsion_free": not snf.torsion,
        "quotient_rank": len(words) - snf.rank,
        "expected_quotient_rank": math.factorial(n - 1),
        "basis_spans": stacked_snf.rank == len(words) and not stacked_snf.torsion,
        "annihilates_lie": annihilates,
        "pairing_det": _det(pairing),
        "twist_exchange": twist,
    }


def ree_agreement(n: int, trials: int, seed: int = 0) -> dict:
    """Compare ree_test, lie_coordinates and the span oracle on random
    elements: half are random integer combinations of the b_lam (members),
    half are random sparse integer vectors (almost always non-members)."""
    rng = random.Random(seed)
    lams = all_permutations(n - 1)
    words = all_permutations(n)
    agree = 0
    members = 0
    for k in range(trials):
        if k % 2 == 0:
            f: dict = {}
            for l in lams:
                c = rng.randint(-3, 3)
                for w, v in expand_left_normed(l).items():
                    f[w] = f.get(w, 0) + c * v
            if k % 4 == 0:
                # a small perturbation turns most members into non-members
                w = rng.choice(words)
                f[w] = f.get(w, 0) + rng.choice((-1, 1))
            f = _clean(f)
        else:
            f = _clean({w: rng.randint(-2, 2) for w in rng.sample(words, min(len(words), 4))})
        r = ree_test(f, n)
        c = lie_coordinates(f, n)
        o = span_membership(f, n)
        if r == (c is not None) == (o is not None) and (c is None or c == o):
            agree += 1
        members += r
    return {"n": n, "trials": trials, "agree": agree, "members": members}


def ree_exhaustive(n: int = 3) -> dict:
    """All coefficient vectors with entries in {-1, 0, 1}."""
    words = all_permutations(n)
    agree = total = members = 0
    for coeffs in itertools.product((-1, 0, 1), repeat=len(words)):
        f = _clean(dict(zip(words, coeffs)))
        r = ree_test(f, n)
        o = span_membership(f, n)
        c = lie_coordinates(f, n)
        if r == (o is not None) == (c is not None) and (c is None or c == o):
            agree += 1
        members += r
        total += 1
    return {"n": n, "total": total, "agree": agree, "members": members}


def tree_boundary_matches_signed_ush(n: int) -> bool:
    """The linear differential of the two-block height-2 tree
    [rho(1)|..|rho(s)||rho(s+1)|..|rho(n)], read in the corolla basis, is
    exactly the signed shuffle generator for (rho, s)."""
    from .bar_diff import d_lin_pairs
    for rho, s, g in shuffle_generators(n, signed=True):
        gaps = tuple(2 if k == s - 1 else 1 for k in range(n - 1))
        image = {labels: c for (labels, _), c in d_lin_pairs(rho, gaps).items()}
        if image != g:
            return False
    return True
