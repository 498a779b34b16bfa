"""Weighted set-family calculus and coloring certificates for generalized
Kneser hypergraphs.

For a coloring of the Kneser hypergraph at coverage s = r-1, an edge is a
set of r vertices with no common ground element, so each proper color class
is an r-wise intersecting family of k-subsets.  The certificate checks, in
exact rational arithmetic, that the weighted sizes of the upward closures of
the first l classes stay below 1 - 1/r^l, and that the complement of the
full union weighs exactly the small-set binomial tail.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .errors import GroundTooLarge, ImproperColoring, SearchCapExceeded
from .hypercore import Coloring, Hypergraph, is_weak_coloring
from .generators import kneser, kneser_vertex_labels

GROUND_CAP = 22
DEFAULT_TUPLE_BUDGET = 5_000_000


@dataclass(frozen=True)
class SetFamily:
    """Explicit family of subsets of [n], deduplicated and canonical."""

    n: int
    members: tuple  # sorted tuples, ordered by (size, lex)

    @staticmethod
    def build(n: int, members) -> "SetFamily":
        out = {tuple(sorted(set(m))) for m in members}
        for m in out:
            if m and (m[0] < 0 or m[-1] >= n):
                raise GroundTooLarge(f"member {m} leaves ground set [{n}]")
        return SetFamily(n, tuple(sorted(out, key=lambda m: (len(m), m))))

    def masks(self):
        return [sum(1 << i for i in m) for m in self.members]

    def __len__(self):
        return len(self.members)


def weighted_size(fam: SetFamily, w) -> Fraction:
    """Sum of w^|F| (1-w)^(n-|F|) over members, exactly.

    Grouping by member size keeps this linear in the family even for full
    power-set closures.
    """
    w = Fraction(w)
    if not 0 <= w <= 1:
        raise ValueError(f"weight {w} must lie in [0,1]")
    by_size = {}
    for m in fam.members:
        by_size[len(m)] = by_size.get(len(m), 0) + 1
    total = Fraction(0)
    for size, count in by_size.items():
        total += count * w ** size * (1 - w) ** (fam.n - size)
    return total


def upward_closure(fam: SetFamily) -> SetFamily:
    """All supersets of members, via one subset-lattice sweep."""
    if fam.n > GROUND_CAP:
        raise GroundTooLarge(f"ground set {fam.n} exceeds the closure cap "
                             f"{GROUND_CAP}")
    size = 1 << fam.n
    closed = bytearray(size)
    for m in fam.masks():
        closed[m] = 1
    for b in range(fam.n):
        bit = 1 << b
        for mask in range(size):
            if closed[mask] and not closed[mask | bit]:
                closed[mask | bit] = 1
    members = [tuple(i for i in range(fam.n) if (mask >> i) & 1)
               for mask in range(size) if closed[mask]]
    return SetFamily(fam.n, members)


def is_r_wise_intersecting(fam: SetFamily, r: int,
                           budget: int = DEFAULT_TUPLE_BUDGET):
    """Exact decision whether every r distinct members share an element.

    Returns (True, None) or (False, counterexample tuple of members).  A
    prefix with empty running intersection is completed greedily to the
    lexicographically first counterexample.
    """
    masks = fam.masks()
    m = len(masks)
    if r < 1:
        raise ValueError("r must be positive")
    if m < r:
        return True, None
    nodes = [0]

    def extend(start, chosen, inter):
        nodes[0] += 1
        if nodes[0] > budget:
            raise SearchCapExceeded("tuple enumeration budget exhausted")
        if inter == 0:
            rest = [i for i in range(m) if i not in chosen]
            fill = chosen + rest[: r - len(chosen)]
            return tuple(fam.members[i] for i in sorted(fill))
        if len(chosen) == r:
            return None
        for i in range(start, m):
            got = extend(i + 1, chosen + [i], inter & masks[i])
            if got is not None:
                return got
        return None

    full = (1 << fam.n) - 1
    witness = extend(0, [], full)
    return (witness is None), witness


@dataclass(frozen=True)
class Claim1Row:
    prefix: int
    weighted: Fraction
    bound: Fraction
    ok: bool


@dataclass(frozen=True)
class Claim1Certificate:
    n: int
    k: int
    r: int
    classes: int
    rows: tuple
    classes_intersecting: tuple
    complement_weight: Fraction
    complement_tail: Fraction

    @property
    def ok(self) -> bool:
        return (all(row.ok for row in self.rows)
                and all(self.classes_intersecting)
                and self.complement_weight == self.complement_tail)


def claim1_certificate(n: int, k: int, r: int, coloring: Coloring,
                       hypergraph: Optional[Hypergraph] = None
                       ) -> Claim1Certificate:
    """Exact-arithmetic certificate for a proper coloring of the coverage
    (r-1) Kneser hypergraph.

    Verifies, at weight w = (r-1)/r: the prefix-union closure bounds
    1 - 1/r^l for every prefix of color classes, r-wise intersection of each
    class, and the identity expressing the closure complement as the
    below-k binomial tail.
    """
    if r < 2:
        raise ValueError("need r >= 2")
    if n > GROUND_CAP:
        raise GroundTooLarge(f"ground set {n} exceeds the closure cap")
    hg = hypergraph if hypergraph is not None else kneser(n, k, r, r - 1)
    if not is_weak_coloring(hg, coloring):
        raise ImproperColoring("the supplied coloring leaves a "
                               "monochromatic edge")
    labels = kneser_vertex_labels(n, k)
    if len(labels) != hg.n:
        raise ImproperColoring("hypergraph does not match the stated (n,k)")
    w = Fraction(r - 1, r)
    fams = [SetFamily.build(n, (labels[v] for v in cls))
            for cls in coloring.classes()]
    intersecting = tuple(is_r_wise_intersecting(f, r)[0] for f in fams)

    rows = []
    union_members = set()
    for ell, fam in enumerate(fams, start=1):
        closure = upward_closure(fam)
        union_members.update(closure.members)
        wu = weighted_size(SetFamily.build(n, union_members), w)
        bound = 1 - Fraction(1, r ** ell)
        rows.append(Claim1Row(ell, wu, bound, wu <= bound))

    comp = [m for m in _all_subsets(n) if m not in union_members]
    comp_weight = weighted_size(SetFamily.build(n, comp), w)
    tail = sum(comb(n, i) * w ** i * (1 - w) ** (n - i) for i in range(k))
    return Claim1Certificate(n, k, r, len(fams), tuple(rows), intersecting,
                             comp_weight, Fraction(tail))


def _all_subsets(n: int):
    out = []
    for size in range(n + 1):
        out.extend(itertools.combinations(range(n), size))
    return out
