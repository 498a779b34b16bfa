"""Hypergraph family generators and composite lower-bound constructions.

Every named family is materialized exactly.  The composite constructions
additionally expose a closed-form degree profile: per vertex-class (or
vertex-pair-class) exact minimum-degree formulas, polynomial in a common
scale factor applied to the tunable part sizes.  Evaluating the profile at
materializable sizes reproduces the materialized minimum degree exactly;
extracting leading coefficients gives the exact limiting density ratio.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Optional

from .errors import BadArity, BudgetExceeded, ParamViolation
from .hypercore import Hypergraph

DEFAULT_MAX_VERTICES = 2000
DEFAULT_MAX_EDGES = 400_000


def _comb0(a: int, b: int) -> int:
    """Binomial that treats out-of-range arguments as empty counts."""
    if a < 0 or b < 0 or b > a:
        return 0
    return comb(a, b)


# -- basic families ----------------------------------------------------------

def turan_parts(n: int, s: int):
    """Vertex index ranges of the balanced s-partition, larger parts first."""
    q, rem = divmod(n, s)
    parts, start = [], 0
    for i in range(s):
        size = q + (1 if i < rem else 0)
        parts.append(range(start, start + size))
        start += size
    return parts


def turan(n: int, r: int, s: int) -> Hypergraph:
    """Complete r-uniform s-partite hypergraph with balanced parts."""
    if not 1 <= r <= s <= n:
        raise BadArity(f"need 1 <= r <= s <= n, got r={r} s={s} n={n}")
    parts = turan_parts(n, s)
    edges = []
    for chosen in itertools.combinations(parts, r):
        edges.extend(itertools.product(*chosen))
    return Hypergraph(n, edges)


def turan_edge_count(n: int, r: int, s: int) -> int:
    """Closed-form edge count of the balanced construction."""
    sizes = [len(p) for p in turan_parts(n, s)]
    total = 0
    for chosen in itertools.combinations(sizes, r):
        prod = 1
        for x in chosen:
            prod *= x
        total += prod
    return total


def cycle(r: int, m: int) -> Hypergraph:
    """Tight-wrap cycle of m edges of r consecutive vertices on a circle.

    Consecutive intersections alternate 1, r-1 starting from |E1 n E2| = 1.
    For even m = 2k the circle has rk vertices and the alternation closes
    perfectly (wrap intersection r-1); for odd m = 2k+1 it has rk + r - 1
    vertices, giving k+1 intersections of size 1 and k of size r-1.  (The
    odd wrap size r-1 sometimes quoted for these cycles is inconsistent with
    the vertex count; the convention here is the one the vertex count and
    the standard pictures force.)
    """
    if r < 2 or m < 2 or (m % 2 == 0 and m < 4):
        raise BadArity(f"need r >= 2 and m >= 2 (m >= 4 when even), got r={r} m={m}")
    k = m // 2
    n = r * k + (r - 1) if m % 2 else r * k
    start = 0
    edges = []
    for i in range(m):
        edges.append(tuple(sorted((start + j) % n for j in range(r))))
        start += (r - 1) if (i + 1) % 2 else 1
    hg = Hypergraph(n, edges)
    if len(hg.edges) != m:
        raise BadArity(f"degenerate wrap for r={r}, m={m}")
    return hg


def kneser_vertex_labels(n: int, k: int):
    """The k-subsets naming the vertices, in lexicographic (= index) order."""
    return tuple(itertools.combinations(range(n), k))


def kneser(n: int, k: int, r: int = 3, s: int = 1,
           max_vertices: int = DEFAULT_MAX_VERTICES) -> Hypergraph:
    """Generalized Kneser hypergraph: k-subsets of [n] as vertices, r of
    them an edge iff no ground element lies in more than s of them.

    Edges are enumerated by extension with per-element coverage pruning, so
    non-edges are never materialized.
    """
    if not 1 <= k <= n:
        raise BadArity(f"need 1 <= k <= n, got k={k} n={n}")
    if not 1 <= s < r:
        raise BadArity(f"need 1 <= s < r, got s={s} r={r}")
    nverts = comb(n, k)
    if nverts > max_vertices:
        raise BudgetExceeded(f"{nverts} vertices exceeds budget {max_vertices}")
    verts = kneser_vertex_labels(n, k)
    edges = []
    cover = [0] * n

    def grow(start, chosen):
        if len(chosen) == r:
            edges.append(tuple(chosen))
            return
        for i in range(start, nverts):
            S = verts[i]
            if all(cover[x] < s for x in S):
                for x in S:
                    cover[x] += 1
                chosen.append(i)
                grow(i + 1, chosen)
                chosen.pop()
                for x in S:
                    cover[x] -= 1

    grow(0, [])
    return Hypergraph(nverts, edges)


def book(r: int, m: int) -> Hypergraph:
    """Spine of r-1 shared vertices with m page tips, plus the page edge
    on the first r tips.  book(3, 2) is the generalized triangle."""
    if r < 2 or m < 1:
        raise BadArity(f"need r >= 2 and m >= 1, got r={r} m={m}")
    spine = tuple(range(r - 1))
    tips = max(m, r)
    edges = [spine + (r - 1 + i,) for i in range(m)]
    edges.append(tuple(r - 1 + i for i in range(r)))
    return Hypergraph(r - 1 + tips, edges)


def tk(s: int, r: int) -> Hypergraph:
    """Complete graph on s core vertices, each edge padded with r-2 fresh
    vertices."""
    if s < 2 or r < 2:
        raise BadArity(f"need s, r >= 2, got s={s} r={r}")
    edges = []
    nxt = s
    for a, b in itertools.combinations(range(s), 2):
        edges.append((a, b) + tuple(range(nxt, nxt + r - 2)))
        nxt += r - 2
    return Hypergraph(nxt, edges)


_NAMED = {
    "F5": Hypergraph(5, [(0, 1, 2), (0, 1, 3), (2, 3, 4)]),
    "F4": Hypergraph(4, [(0, 1, 2), (0, 1, 3), (1, 2, 3)]),
    "T5": Hypergraph(5, [(0, 1, 2), (0, 3, 4), (1, 3, 4), (2, 3, 4)]),
    "FANO": Hypergraph(7, [(0, 1, 2), (0, 3, 4), (0, 5, 6),
                           (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]),
}


def named(ident: str) -> Hypergraph:
    """Fixed small hypergraphs by name: F5, F4, T5, FANO."""
    key = ident.upper()
    if key not in _NAMED:
        raise BadArity(f"unknown named hypergraph {ident!r}; "
                       f"known: {sorted(_NAMED)}")
    return _NAMED[key]


def b3(n1: int, n2: int) -> Hypergraph:
    """All triples with exactly two vertices in the first class and one in
    the second; the bipartite-type extremal shape."""
    if n1 < 2 or n2 < 1:
        raise BadArity(f"need n1 >= 2 and n2 >= 1, got {n1}, {n2}")
    edges = [(a, b, n1 + c)
             for a, b in itertools.combinations(range(n1), 2)
             for c in range(n2)]
    return Hypergraph(n1 + n2, edges)


# -- Kneser-part degree bookkeeping ------------------------------------------

def kneser1_vertex_degree(n: int, k: int) -> int:
    """Degree of any vertex inside the disjointness Kneser 3-graph."""
    return _comb0(n - k, k) * _comb0(n - 2 * k, k) // 2


def kneser2_vertex_degree(n: int, k: int) -> int:
    """Degree of any vertex inside the coverage-2 Kneser 3-graph.

    A triple is an edge iff no ground element lies in all three sets, so for
    a fixed first set X the partners (Y, Z) are counted by |X n Y| = m:
    C(k,m) C(n-k,k-m) choices of Y, then Z avoids X n Y.
    """
    total = 0
    for m in range(0, k):
        ways_y = comb(k, m) * _comb0(n - k, k - m)
        if ways_y == 0:
            continue
        ways_z = _comb0(n - m, k) - (2 if m == 0 else 0)
        total += ways_y * max(ways_z, 0)
    return total // 2


def kneser2_pair_codegree(n: int, k: int, m: int) -> int:
    """Number of Kneser-internal completions of a vertex pair with
    intersection size m in the coverage-2 Kneser 3-graph."""
    return max(_comb0(n - m, k) - (2 if m == 0 else 0), 0)


# -- construction profiles ----------------------------------------------------

@dataclass
class DegreeClass:
    """One vertex class (or pair class) with its exact degree formula.

    ``value(scale)`` evaluates the class minimum degree when every tunable
    part size is multiplied by ``scale``; the formula is a polynomial in the
    scale of degree at most ``poly_degree``.
    """

    name: str
    value: Callable[[int], Fraction]
    poly_degree: int = 2

    def coefficients(self):
        """Exact polynomial coefficients, recovered by interpolation and
        checked against a fourth point."""
        pts = [Fraction(self.value(s)) for s in (1, 2, 3, 4)][: self.poly_degree + 2]
        xs = list(range(1, len(pts) + 1))
        # Newton interpolation on the first poly_degree+1 points
        deg = self.poly_degree
        coeffs = _poly_fit(xs[: deg + 1], pts[: deg + 1])
        check = sum(c * xs[deg + 1] ** i for i, c in enumerate(coeffs))
        if check != pts[deg + 1]:
            raise ArithmeticError(
                f"class {self.name}: formula is not a degree-{deg} polynomial")
        return coeffs

    def leading(self) -> Fraction:
        return self.coefficients()[self.poly_degree]


def _poly_fit(xs, ys):
    """Exact coefficients of the interpolating polynomial (Lagrange)."""
    deg = len(xs) - 1
    coeffs = [Fraction(0)] * (deg + 1)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            denom *= xi - xj
            new = [Fraction(0)] * (len(basis) + 1)
            for p, c in enumerate(basis):
                new[p] -= c * xj
                new[p + 1] += c
            basis = new
        for p, c in enumerate(basis):
            coeffs[p] += yi * c / denom
    return coeffs


class ConstructionProfile:
    """Closed-form degree accounting for one composite construction.

    ``mode`` is "degree" (minimum degree against C(M, 2)) or "codegree"
    (minimum co-degree against M).  ``fixed_vertices`` counts the part that
    does not scale (the Kneser part); ``scaled_vertices`` the total size of
    the tunable parts at scale 1.
    """

    def __init__(self, construction: str, mode: str, classes,
                 fixed_vertices: int, scaled_vertices: int,
                 reference: Fraction, sizes: dict):
        self.construction = construction
        self.mode = mode
        self.classes = list(classes)
        self.fixed_vertices = fixed_vertices
        self.scaled_vertices = scaled_vertices
        self.reference = reference
        self.sizes = dict(sizes)

    def vertex_count(self, scale: int = 1) -> int:
        return self.fixed_vertices + self.scaled_vertices * scale

    def class_values(self, scale: int = 1):
        return {c.name: Fraction(c.value(scale)) for c in self.classes}

    def min_degree(self, scale: int = 1) -> Fraction:
        return min(self.class_values(scale).values())

    def ratio(self, scale: int = 1) -> Fraction:
        """Exact measured ratio at these sizes."""
        m = self.vertex_count(scale)
        denom = comb(m, 2) if self.mode == "degree" else m
        return self.min_degree(scale) / denom

    def limit_ratio(self) -> Fraction:
        """Exact limiting ratio as the tunable parts grow, the Kneser part
        staying fixed: minimum leading coefficient over classes against the
        leading coefficient of the normalizer."""
        lead = min(c.leading() for c in self.classes)
        nslope = Fraction(self.scaled_vertices)
        denom = nslope * nslope / 2 if self.mode == "degree" else nslope
        return lead / denom

    def summary(self):
        return {
            "construction": self.construction,
            "mode": self.mode,
            "sizes": dict(self.sizes),
            "vertices": self.vertex_count(),
            "min_degree": self.min_degree(),
            "ratio": self.ratio(),
            "limit_ratio": self.limit_ratio(),
            "reference": self.reference,
        }


@dataclass
class ConstructionResult:
    hypergraph: Optional[Hypergraph]
    profile: ConstructionProfile
    labels: Optional[tuple]


def _materialize_guard(nverts, nedges_estimate, max_vertices, max_edges):
    if nverts > max_vertices:
        raise BudgetExceeded(f"{nverts} vertices exceeds budget {max_vertices}")
    if nedges_estimate > max_edges:
        raise BudgetExceeded(
            f"~{nedges_estimate} edges exceeds budget {max_edges}")


# -- generalized-triangle lower bound -----------------------------------------

def construct_f5_lower(k: int, t: int, u: int, v: int, w: int,
                       materialize: bool = True,
                       max_vertices: int = DEFAULT_MAX_VERTICES,
                       max_edges: int = DEFAULT_MAX_EDGES) -> ConstructionResult:
    """Kneser core plus three blocks U, V, W.

    Edges: disjoint triples inside the Kneser part; {S, x, y} for x in the
    i-th block of U, y in V, whenever i lies in the k-set S; and the full
    U x V x W layer.  The profile optimum (u = v, w = v/3) approaches 6/49.
    """
    if k < 1 or t < 1:
        raise ParamViolation(f"need k >= 1 and t >= 1, got k={k} t={t}")
    n = 3 * k + 2 * (t - 1)
    if not n < 4 * k:
        raise ParamViolation(f"freeness needs n < 4k; n={n}, 4k={4 * k}")
    if u % n:
        raise ParamViolation(f"n={n} must divide u={u}")
    if min(u, v, w) < 1:
        raise ParamViolation("u, v, w must be positive")

    K = comb(n, k)
    dk = kneser1_vertex_degree(n, k)
    cnk1 = comb(n - 1, k - 1)

    def cl_kneser(s):
        return Fraction(dk + k * (u * s // n) * (v * s))

    def cl_u(s):
        return Fraction(cnk1 * (v * s) + (v * s) * (w * s))

    def cl_v(s):
        return Fraction(cnk1 * (u * s) + (u * s) * (w * s))

    def cl_w(s):
        return Fraction((u * s) * (v * s))

    profile = ConstructionProfile(
        "f5_lower", "degree",
        [DegreeClass("kneser", cl_kneser), DegreeClass("U", cl_u),
         DegreeClass("V", cl_v), DegreeClass("W", cl_w)],
        fixed_vertices=K, scaled_vertices=u + v + w,
        reference=Fraction(6, 49),
        sizes={"n": n, "k": k, "t": t, "u": u, "v": v, "w": w})

    if not materialize:
        return ConstructionResult(None, profile, None)

    nverts = K + u + v + w
    _materialize_guard(nverts, dk * K // 3 + K * k * (u // n) * v + u * v * w,
                       max_vertices, max_edges)
    kg = kneser(n, k, 3, 1, max_vertices=max_vertices)
    ulab = kneser_vertex_labels(n, k)
    off_u, off_v, off_w = K, K + u, K + u + v
    edges = list(kg.edges)
    per = u // n
    for vi, S in enumerate(ulab):
        for i in S:
            for x in range(off_u + i * per, off_u + (i + 1) * per):
                for y in range(off_v, off_v + v):
                    edges.append((vi, x, y))
    for x in range(off_u, off_u + u):
        for y in range(off_v, off_v + v):
            for z in range(off_w, off_w + w):
                edges.append((x, y, z))
    hg = Hypergraph(nverts, edges)
    labels = tuple(
        [f"K:{','.join(map(str, S))}" for S in ulab]
        + [f"U{i // per}:{i % per}" for i in range(u)]
        + [f"V:{j}" for j in range(v)]
        + [f"W:{j}" for j in range(w)])
    return ConstructionResult(hg, profile, labels)


# -- pairwise-covered-core lower bounds ---------------------------------------

def construct_tkf4_lower(k: int, t: int, u: int, v: int, w: int,
                         materialize: bool = True,
                         max_vertices: int = DEFAULT_MAX_VERTICES,
                         max_edges: int = DEFAULT_MAX_EDGES) -> ConstructionResult:
    """Variant with both U and V split into n blocks: {S, x, y} needs the
    blocks of both x and y inside S.  Optimum (u = v, w = u/9) -> 18/361."""
    if k < 1 or t < 1:
        raise ParamViolation(f"need k >= 1 and t >= 1, got k={k} t={t}")
    n = 3 * k + 2 * (t - 1)
    if not n < 4 * k:
        raise ParamViolation(f"freeness needs n < 4k; n={n}, 4k={4 * k}")
    if u % n or v % n:
        raise ParamViolation(f"n={n} must divide u={u} and v={v}")
    if min(u, v, w) < 1:
        raise ParamViolation("u, v, w must be positive")

    K = comb(n, k)
    dk = kneser1_vertex_degree(n, k)
    cnk1 = comb(n - 1, k - 1)

    profile = ConstructionProfile(
        "tkf4_lower", "degree",
        [DegreeClass("kneser", lambda s: Fraction(
            dk + (k * (u * s) // n) * (k * (v * s) // n))),
         DegreeClass("U", lambda s: Fraction(
             (v * s) * (w * s) + cnk1 * (k * (v * s) // n))),
         DegreeClass("V", lambda s: Fraction(
             (u * s) * (w * s) + cnk1 * (k * (u * s) // n))),
         DegreeClass("W", lambda s: Fraction((u * s) * (v * s)))],
        fixed_vertices=K, scaled_vertices=u + v + w,
        reference=Fraction(18, 361),
        sizes={"n": n, "k": k, "t": t, "u": u, "v": v, "w": w})

    if not materialize:
        return ConstructionResult(None, profile, None)

    nverts = K + u + v + w
    _materialize_guard(nverts,
                       dk * K // 3 + K * (k * u // n) * (k * v // n) + u * v * w,
                       max_vertices, max_edges)
    kg = kneser(n, k, 3, 1, max_vertices=max_vertices)
    ulab = kneser_vertex_labels(n, k)
    off_u, off_v, off_w = K, K + u, K + u + v
    pu, pv = u // n, v // n
    edges = list(kg.edges)
    for vi, S in enumerate(ulab):
        for i in S:
            for j in S:
                for x in range(off_u + i * pu, off_u + (i + 1) * pu):
                    for y in range(off_v + j * pv, off_v + (j + 1) * pv):
                        edges.append((vi, x, y))
    for x in range(off_u, off_u + u):
        for y in range(off_v, off_v + v):
            for z in range(off_w, off_w + w):
                edges.append((x, y, z))
    hg = Hypergraph(nverts, edges)
    labels = tuple(
        [f"K:{','.join(map(str, S))}" for S in ulab]
        + [f"U{i // pu}:{i % pu}" for i in range(u)]
        + [f"V{i // pv}:{i % pv}" for i in range(v)]
        + [f"W:{j}" for j in range(w)])
    return ConstructionResult(hg, profile, labels)


def construct_tkfs_lower(s: int, k: int, t: int, u: int, x: int,
                         materialize: bool = True,
                         max_vertices: int = DEFAULT_MAX_VERTICES,
                         max_edges: int = DEFAULT_MAX_EDGES) -> ConstructionResult:
    """Core-size-s variant: one block-split part U, two shielded parts W1,
    W2 and s-4 parts V_i, cross triples over the s-1 parts, {S, v, v'} for
    v, v' in distinct V-parts, and {S, x, y} gated by the block of x.

    Optimum u = 3(2s-7)x/(s-4) gives (s-2)(s-3)(s-4)^2/(s^2-13)^2.
    """
    if s < 5:
        raise ParamViolation(f"core size s={s} must be at least 5")
    if k < 1 or t < 1:
        raise ParamViolation(f"need k >= 1 and t >= 1, got k={k} t={t}")
    n = 3 * k + 2 * (t - 1)
    if not n < 4 * k:
        raise ParamViolation(f"freeness needs n < 4k; n={n}, 4k={4 * k}")
    if u % n:
        raise ParamViolation(f"n={n} must divide u={u}")
    if min(u, x) < 1:
        raise ParamViolation("u and x must be positive")

    K = comb(n, k)
    dk = kneser1_vertex_degree(n, k)
    cnk1 = comb(n - 1, k - 1)
    nv = s - 4  # number of V parts

    def cl_kneser(m):
        um, xm = u * m, x * m
        return Fraction(dk + comb(nv, 2) * xm * xm
                        + (k * um // n) * nv * xm)

    def cl_u(m):
        xm = x * m
        return Fraction(comb(s - 2, 2) * xm * xm + cnk1 * nv * xm)

    def cl_v(m):
        um, xm = u * m, x * m
        return Fraction((s - 3) * um * xm + comb(s - 3, 2) * xm * xm
                        + K * (nv - 1) * xm + cnk1 * um)

    def cl_w(m):
        um, xm = u * m, x * m
        return Fraction((s - 3) * um * xm + comb(s - 3, 2) * xm * xm)

    classes = [DegreeClass("kneser", cl_kneser), DegreeClass("U", cl_u),
               DegreeClass("W", cl_w)]
    if nv:
        classes.insert(2, DegreeClass("V", cl_v))
    num = (s - 2) * (s - 3) * (s - 4) ** 2
    profile = ConstructionProfile(
        "tkfs_lower", "degree", classes,
        fixed_vertices=K, scaled_vertices=u + (s - 2) * x,
        reference=Fraction(num, (s * s - 13) ** 2),
        sizes={"s": s, "n": n, "k": k, "t": t, "u": u, "x": x})

    if not materialize:
        return ConstructionResult(None, profile, None)

    nverts = K + u + (s - 2) * x
    _materialize_guard(nverts, dk * K // 3 + comb(s - 1, 3) * max(u, x) ** 3
                       + K * nv * nv * x * x + K * (k * u // n) * nv * x,
                       max_vertices, max_edges)
    kg = kneser(n, k, 3, 1, max_vertices=max_vertices)
    ulab = kneser_vertex_labels(n, k)
    pu = u // n
    off_u = K
    off_w1, off_w2 = K + u, K + u + x
    off_v = K + u + 2 * x
    part_ranges = ([range(off_u, off_u + u),
                    range(off_w1, off_w1 + x), range(off_w2, off_w2 + x)]
                   + [range(off_v + i * x, off_v + (i + 1) * x)
                      for i in range(nv)])
    edges = list(kg.edges)
    for chosen in itertools.combinations(part_ranges, 3):
        edges.extend(itertools.product(*chosen))
    for vi, S in enumerate(ulab):
        for i, j in itertools.combinations(range(nv), 2):
            for a in part_ranges[3 + i]:
                for b in part_ranges[3 + j]:
                    edges.append((vi, a, b))
        for i in S:
            for a in range(off_u + i * pu, off_u + (i + 1) * pu):
                for vp in range(nv):
                    for b in part_ranges[3 + vp]:
                        edges.append((vi, a, b))
    hg = Hypergraph(nverts, edges)
    labels = tuple(
        [f"K:{','.join(map(str, S))}" for S in ulab]
        + [f"U{i // pu}:{i % pu}" for i in range(u)]
        + [f"W1:{j}" for j in range(x)] + [f"W2:{j}" for j in range(x)]
        + [f"V{i}:{j}" for i in range(nv) for j in range(x)])
    return ConstructionResult(hg, profile, labels)


# -- Fano-plane lower bound ----------------------------------------------------

def construct_fano_lower(k: int, eps: Fraction, usize: int, vsize: int,
                         materialize: bool = True,
                         max_vertices: int = DEFAULT_MAX_VERTICES,
                         max_edges: int = DEFAULT_MAX_EDGES) -> ConstructionResult:
    """Kneser core over n = (3+eps)k, blocks U (split into n) and V; every
    triple meeting both U and V is an edge, plus {X, u, u'} when both blocks
    lie in X.  At |U| : |V| = 9 : 8 the ratio approaches 9/17."""
    eps = Fraction(eps)
    if not 0 < eps < 4:
        raise ParamViolation(f"need 0 < eps < 4, got {eps}")
    n_frac = (3 + eps) * k
    if n_frac.denominator != 1:
        raise ParamViolation(f"(3+eps)k = {n_frac} is not an integer")
    n = int(n_frac)
    if usize % n:
        raise ParamViolation(f"n={n} must divide |U|={usize}")
    if min(usize, vsize) < 1:
        raise ParamViolation("|U| and |V| must be positive")

    K = comb(n, k)
    dk = kneser1_vertex_degree(n, k)
    cnk1 = comb(n - 1, k - 1)

    def mtot(s):
        return K + (usize + vsize) * s

    def cl_kneser(s):
        uu = usize * s
        return Fraction(dk + uu * (vsize * s) + comb(k * uu // n, 2))

    def cl_u(s):
        m, vv, uu = mtot(s), vsize * s, usize * s
        return Fraction(comb(m - 1, 2) - comb(m - 1 - vv, 2)
                        + cnk1 * (k * uu // n - 1))

    def cl_v(s):
        m, uu = mtot(s), usize * s
        return Fraction(comb(m - 1, 2) - comb(m - 1 - uu, 2))

    profile = ConstructionProfile(
        "fano_lower", "degree",
        [DegreeClass("kneser", cl_kneser), DegreeClass("U", cl_u),
         DegreeClass("V", cl_v)],
        fixed_vertices=K, scaled_vertices=usize + vsize,
        reference=Fraction(9, 17),
        sizes={"n": n, "k": k, "eps": eps, "U": usize, "V": vsize})

    if not materialize:
        return ConstructionResult(None, profile, None)

    nverts = K + usize + vsize
    _materialize_guard(nverts, comb(nverts, 3), max_vertices, max_edges)
    kg = kneser(n, k, 3, 1, max_vertices=max_vertices)
    ulab = kneser_vertex_labels(n, k)
    off_u, off_v = K, K + usize
    pu = usize // n

    def side(vtx):
        if vtx < K:
            return "K"
        return "U" if vtx < off_v else "V"

    edges = list(kg.edges)
    for tri in itertools.combinations(range(nverts), 3):
        sides = [side(a) for a in tri]
        if "U" in sides and "V" in sides:
            edges.append(tri)
    for vi, S in enumerate(ulab):
        blocks = [range(off_u + i * pu, off_u + (i + 1) * pu) for i in S]
        pool = [a for b in blocks for a in b]
        for a, b in itertools.combinations(pool, 2):
            edges.append((vi, a, b))
    hg = Hypergraph(nverts, edges)
    labels = tuple(
        [f"K:{','.join(map(str, S))}" for S in ulab]
        + [f"U{i // pu}:{i % pu}" for i in range(usize)]
        + [f"V:{j}" for j in range(vsize)])
    return ConstructionResult(hg, profile, labels)


# -- T5 lower bound -------------------------------------------------------------

def construct_t5_lower(k: int, eps: Fraction, nsize: int,
                       materialize: bool = True,
                       max_vertices: int = DEFAULT_MAX_VERTICES,
                       max_edges: int = DEFAULT_MAX_EDGES) -> ConstructionResult:
    """Coverage-2 Kneser core over n = (3/2+eps)k plus |U| = 4N/7 (split
    into n blocks) and |V| = 3N/7; edges: two-in-U-one-in-V triples and
    {u, v, X} gated by the block of u.  Ratio approaches 16/49."""
    eps = Fraction(eps)
    if not 0 <= eps < Fraction(1, 4):
        raise ParamViolation(f"freeness needs 0 <= eps < 1/4, got {eps}")
    n_frac = (Fraction(3, 2) + eps) * k
    if n_frac.denominator != 1:
        raise ParamViolation(f"(3/2+eps)k = {n_frac} is not an integer")
    n = int(n_frac)
    if nsize % 7:
        raise ParamViolation(f"N={nsize} must be divisible by 7")
    usize, vsize = 4 * nsize // 7, 3 * nsize // 7
    if usize % n:
        raise ParamViolation(f"n={n} must divide |U|={usize}")

    K = comb(n, k)
    dk2 = kneser2_vertex_degree(n, k)
    cnk1 = comb(n - 1, k - 1)

    profile = ConstructionProfile(
        "t5_lower", "degree",
        [DegreeClass("kneser", lambda s: Fraction(
            dk2 + (k * (usize * s) // n) * (vsize * s))),
         DegreeClass("U", lambda s: Fraction(
             (usize * s - 1) * (vsize * s) + cnk1 * (vsize * s))),
         DegreeClass("V", lambda s: Fraction(
             comb(usize * s, 2) + cnk1 * (usize * s)))],
        fixed_vertices=K, scaled_vertices=usize + vsize,
        reference=Fraction(16, 49),
        sizes={"n": n, "k": k, "eps": eps, "N": nsize, "U": usize, "V": vsize})

    if not materialize:
        return ConstructionResult(None, profile, None)

    nverts = K + usize + vsize
    _materialize_guard(nverts, dk2 * K // 3 + comb(usize, 2) * vsize
                       + K * (k * usize // n) * vsize,
                       max_vertices, max_edges)
    kg = kneser(n, k, 3, 2, max_vertices=max_vertices)
    ulab = kneser_vertex_labels(n, k)
    off_u, off_v = K, K + usize
    pu = usize // n
    edges = list(kg.edges)
    for a, b in itertools.combinations(range(off_u, off_u + usize), 2):
        for c in range(off_v, off_v + vsize):
            edges.append((a, b, c))
    for vi, S in enumerate(ulab):
        for i in S:
            for a in range(off_u + i * pu, off_u + (i + 1) * pu):
                for c in range(off_v, off_v + vsize):
                    edges.append((vi, a, c))
    hg = Hypergraph(nverts, edges)
    labels = tuple(
        [f"K:{','.join(map(str, S))}" for S in ulab]
        + [f"U{i // pu}:{i % pu}" for i in range(usize)]
        + [f"V:{j}" for j in range(vsize)])
    return ConstructionResult(hg, profile, labels)


# -- Fano co-degree lower bound --------------------------------------------------

def construct_fano_codegree_lower(k: int, eps: Fraction, nsize: int,
                                  materialize: bool = False,
                                  max_vertices: int = DEFAULT_MAX_VERTICES,
                                  max_edges: int = DEFAULT_MAX_EDGES
                                  ) -> ConstructionResult:
    """Co-degree variant over the coverage-2 Kneser core: |U| = 3N/5 (split
    into n blocks), |V| = 2N/5; within U u V every U-V-meeting triple, every
    K-U-V triple, and {X, Y, u} gated by the block of u against X u Y or
    X n Y depending on whether |X n Y| falls below k - 4 eps k.

    Minimum co-degree ratio approaches 2/5.  Under its freeness hypothesis
    (eps < 1/10) the Kneser part is too large to materialize on a desk, so
    this construction is profile-only unless the guard is raised explicitly.
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 10):
        raise ParamViolation(f"freeness needs 0 < eps < 1/10, got {eps}")
    n_frac = (Fraction(3, 2) + eps) * k
    if n_frac.denominator != 1:
        raise ParamViolation(f"(3/2+eps)k = {n_frac} is not an integer")
    n = int(n_frac)
    if nsize % 5:
        raise ParamViolation(f"N={nsize} must be divisible by 5")
    usize, vsize = 3 * nsize // 5, 2 * nsize // 5
    if usize % n:
        raise ParamViolation(f"n={n} must divide |U|={usize}")

    K = comb(n, k)
    tau = k * (1 - 4 * eps)  # intersection threshold, exact rational

    def rule_block_count(m: int) -> int:
        # number of ground indices whose U-block completes a K-K pair with
        # intersection size m
        return (2 * k - m) if m < tau else m

    classes = [
        DegreeClass("UU", lambda s: Fraction(vsize * s), poly_degree=1),
        DegreeClass("VV", lambda s: Fraction(usize * s), poly_degree=1),
        DegreeClass("UV", lambda s: Fraction(
            K + (usize + vsize) * s - 2), poly_degree=1),
        DegreeClass("KV", lambda s: Fraction(usize * s), poly_degree=1),
    ]
    # K-U pairs: the KUV layer plus the block-gated K-K-U completions
    in_small = sum(comb(k, m) * _comb0(n - k, k - m)
                   for m in range(max(0, 2 * k - n), k) if m < tau)
    in_large_i = sum(_comb0(k - 1, m - 1) * _comb0(n - k, k - m)
                     for m in range(max(1, 2 * k - n), k) if m >= tau)
    out_small_i = sum(comb(k, m) * _comb0(n - k - 1, k - m - 1)
                      for m in range(max(0, 2 * k - n), k) if m < tau)
    ku_const = min(in_small + in_large_i, out_small_i)
    classes.append(DegreeClass(
        "KU", lambda s: Fraction(vsize * s + ku_const), poly_degree=1))
    # K-K pairs, one class per realizable intersection size
    pu_slope = Fraction(usize, n)
    for m in range(max(0, 2 * k - n), k):
        if comb(k, m) * _comb0(n - k, k - m) == 0 or (m == 0 and K < 2):
            continue
        base = kneser2_pair_codegree(n, k, m)
        blocks = rule_block_count(m)
        classes.append(DegreeClass(
            f"KK|{m}", lambda s, b=base, bl=blocks: Fraction(
                b + bl * pu_slope * s), poly_degree=1))

    profile = ConstructionProfile(
        "fano_codegree_lower", "codegree", classes,
        fixed_vertices=K, scaled_vertices=usize + vsize,
        reference=Fraction(2, 5),
        sizes={"n": n, "k": k, "eps": eps, "N": nsize,
               "U": usize, "V": vsize})

    if not materialize:
        return ConstructionResult(None, profile, None)

    nverts = K + usize + vsize
    _materialize_guard(nverts, comb(nverts, 3), max_vertices, max_edges)
    kg = kneser(n, k, 3, 2, max_vertices=max_vertices)
    ulab = kneser_vertex_labels(n, k)
    off_u, off_v = K, K + usize
    pu = usize // n
    edges = list(kg.edges)
    for tri in itertools.combinations(range(off_u, nverts), 3):
        sides = sum(1 for a in tri if a >= off_v)
        if 1 <= sides <= 2:
            edges.append(tri)
    for vi in range(K):
        for a in range(off_u, off_u + usize):
            for b in range(off_v, off_v + vsize):
                edges.append((vi, a, b))
    for xi, yi in itertools.combinations(range(K), 2):
        X, Y = set(ulab[xi]), set(ulab[yi])
        inter = X & Y
        idxs = (X | Y) if len(inter) < tau else inter
        for i in sorted(idxs):
            for a in range(off_u + i * pu, off_u + (i + 1) * pu):
                edges.append((xi, yi, a))
    hg = Hypergraph(nverts, edges)
    labels = tuple(
        [f"K:{','.join(map(str, S))}" for S in ulab]
        + [f"U{i // pu}:{i % pu}" for i in range(usize)]
        + [f"V:{j}" for j in range(vsize)])
    return ConstructionResult(hg, profile, labels)
