"""Hypergraph data model with exact coloring, independence and degree statistics.

Vertices are dense integer indices ``0..n-1``; anything carrying external
identity (k-subsets naming Kneser vertices, construction class tags) lives in
sidecar label tables, never inside the core object.  All solvers here are
exact: they either finish the search or raise ``SearchCapExceeded``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Optional, Sequence

from .errors import (
    DuplicateVertexInTuple,
    EmptyEdge,
    NonUniform,
    NotWithinLimit,
    PartialColoring,
    SearchCapExceeded,
    VertexOutOfRange,
)

DEFAULT_NODE_BUDGET = 20_000_000
DEFAULT_VERTEX_CAP = 60
DEFAULT_EDGE_CAP = 100_000
DEFAULT_STRONG_CAP = 40

MIXED = "mixed"


class Hypergraph:
    """An ``n``-vertex hypergraph with a canonical set of nonempty edges.

    Edges are stored as sorted tuples, deduplicated, in lexicographic order.
    Instances are immutable after construction and safe to share; equality is
    ``(n, edge set)`` equality.  ``source_vertices`` optionally records where
    the vertices came from when this hypergraph was cut out of a larger one
    (``induced`` / ``restriction``) and is ignored by equality and hashing.
    """

    __slots__ = ("n", "edges", "source_vertices", "_edge_sets", "_vert_edges",
                 "_edge_lookup")

    def __init__(self, n: int, edges: Iterable[Iterable[int]],
                 source_vertices: Optional[tuple] = None):
        if n < 0:
            raise VertexOutOfRange(f"vertex count {n} is negative")
        canon = set()
        for raw in edges:
            e = tuple(sorted(set(raw)))
            if not e:
                raise EmptyEdge("edges must be nonempty")
            if e[0] < 0 or e[-1] >= n:
                raise VertexOutOfRange(f"edge {e} leaves 0..{n - 1}")
            canon.add(e)
        self.n = n
        self.edges = tuple(sorted(canon))
        self.source_vertices = source_vertices
        self._edge_sets = None
        self._vert_edges = None
        self._edge_lookup = None

    # -- basic accessors ---------------------------------------------------

    @property
    def edge_sets(self):
        if self._edge_sets is None:
            self._edge_sets = tuple(frozenset(e) for e in self.edges)
        return self._edge_sets

    @property
    def vert_edges(self):
        """Per-vertex list of incident edge indices."""
        if self._vert_edges is None:
            inc = [[] for _ in range(self.n)]
            for i, e in enumerate(self.edges):
                for v in e:
                    inc[v].append(i)
            self._vert_edges = tuple(tuple(x) for x in inc)
        return self._vert_edges

    def uniformity(self):
        """Common edge size, or ``"mixed"`` when edge sizes differ.

        Edgeless hypergraphs report ``None``; mixed sizes only arise from
        restriction and from vertex merging in the bundle machinery.
        """
        sizes = {len(e) for e in self.edges}
        if not sizes:
            return None
        if len(sizes) == 1:
            return sizes.pop()
        return MIXED

    def require_uniform(self, r: Optional[int] = None) -> int:
        u = self.uniformity()
        if u == MIXED or u is None:
            raise NonUniform(f"need a uniform hypergraph, found uniformity {u!r}")
        if r is not None and u != r:
            raise NonUniform(f"need a {r}-uniform hypergraph, found {u}-uniform")
        return u

    def has_edge(self, verts) -> bool:
        if self._edge_lookup is None:
            self._edge_lookup = set(self.edges)
        return tuple(sorted(set(verts))) in self._edge_lookup

    def __eq__(self, other):
        return (isinstance(other, Hypergraph)
                and self.n == other.n and self.edges == other.edges)

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Hypergraph(n={self.n}, edges={len(self.edges)})"


def new_hypergraph(n: int, edges: Iterable[Iterable[int]]) -> Hypergraph:
    """Build a canonicalized hypergraph, rejecting invariant violations."""
    return Hypergraph(n, edges)


def _check_subset(hg: Hypergraph, verts) -> tuple:
    out = tuple(sorted(set(verts)))
    if out and (out[0] < 0 or out[-1] >= hg.n):
        raise VertexOutOfRange(f"vertex set {out} leaves 0..{hg.n - 1}")
    return out


@dataclass(frozen=True)
class Coloring:
    """A total vertex coloring using colors ``0..color_count-1``, all used."""

    assignment: tuple
    color_count: int

    @staticmethod
    def from_raw(values: Sequence[int]) -> "Coloring":
        """Normalize an arbitrary total assignment to canonical color indices
        (first-seen order)."""
        remap = {}
        out = []
        for c in values:
            if c is None or c < 0:
                raise PartialColoring("assignment is not total")
            if c not in remap:
                remap[c] = len(remap)
            out.append(remap[c])
        return Coloring(tuple(out), len(remap))

    def classes(self):
        """Vertex sets per color, index-ordered."""
        out = [[] for _ in range(self.color_count)]
        for v, c in enumerate(self.assignment):
            out[c].append(v)
        return [tuple(x) for x in out]


@dataclass(frozen=True)
class DegreeProfile:
    """Per-vertex degrees, the minimum and its normalized ratio."""

    degrees: tuple
    delta: int
    ratio: Optional[Fraction]  # delta / C(n, r-1); None for mixed/edgeless-undefined
    argmin: Optional[int]


# -- substructure ----------------------------------------------------------

def induced(hg: Hypergraph, verts) -> Hypergraph:
    """Edges completely contained in ``verts``, relabeled onto 0..|S|-1.

    The original identities are kept in ``source_vertices`` so witnesses can
    be mapped back.
    """
    sel = _check_subset(hg, verts)
    pos = {v: i for i, v in enumerate(sel)}
    selset = set(sel)
    keep = [tuple(pos[v] for v in e) for e in hg.edges if selset.issuperset(e)]
    return Hypergraph(len(sel), keep, source_vertices=sel)


def restriction(hg: Hypergraph, verts) -> Hypergraph:
    """Intersections of every edge with ``verts``, empties dropped.

    The result is generally non-uniform and lives on ``verts`` relabeled onto
    0..|Y|-1 (identities in ``source_vertices``).
    """
    sel = _check_subset(hg, verts)
    pos = {v: i for i, v in enumerate(sel)}
    selset = set(sel)
    cuts = set()
    for e in hg.edges:
        inter = tuple(pos[v] for v in e if v in selset)
        if inter:
            cuts.add(inter)
    return Hypergraph(len(sel), cuts, source_vertices=sel)


def components_of_restriction(hg: Hypergraph, verts) -> list:
    """Connected components of ``restriction(hg, verts)``.

    Edges are adjacent when they share a vertex; isolated vertices of the
    restriction become singleton components.  Each component is returned as
    a hypergraph on its own vertices with ``source_vertices`` pointing back
    into ``hg``.
    """
    rest = restriction(hg, verts)
    m = rest.n
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in rest.edges:
        r0 = find(e[0])
        for v in e[1:]:
            rv = find(v)
            if rv != r0:
                parent[rv] = r0
    groups = {}
    for v in range(m):
        groups.setdefault(find(v), []).append(v)
    comps = []
    src = rest.source_vertices
    for root in sorted(groups, key=lambda r: min(groups[r])):
        members = sorted(groups[root])
        pos = {v: i for i, v in enumerate(members)}
        mset = set(members)
        comp_edges = [tuple(pos[v] for v in e) for e in rest.edges
                      if mset.issuperset(e)]
        comps.append(Hypergraph(len(members), comp_edges,
                                source_vertices=tuple(src[v] for v in members)))
    return comps


# -- independence ----------------------------------------------------------

def is_independent(hg: Hypergraph, verts) -> bool:
    """True iff no edge is contained in ``verts``."""
    sel = set(_check_subset(hg, verts))
    return not any(sel.issuperset(e) for e in hg.edges)


def is_strongly_independent(hg: Hypergraph, verts) -> bool:
    """True iff every edge meets ``verts`` in at most one vertex."""
    sel = set(_check_subset(hg, verts))
    return all(len(sel.intersection(e)) <= 1 for e in hg.edges)


def cooccurrence_pairs(hg: Hypergraph):
    """All vertex pairs lying together in some edge, as sorted tuples."""
    pairs = set()
    for e in hg.edges:
        pairs.update(itertools.combinations(e, 2))
    return pairs


def _cooccurrence_masks(hg: Hypergraph):
    adj = [0] * hg.n
    for a, b in cooccurrence_pairs(hg):
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return adj


def strong_independence_number(hg: Hypergraph, cap: int = DEFAULT_STRONG_CAP,
                               budget: int = DEFAULT_NODE_BUDGET):
    """Exact maximum size of a strongly independent set, with one witness.

    Branch-and-bound over the co-occurrence graph; instances above ``cap``
    vertices are refused rather than answered heuristically.
    """
    if hg.n > cap:
        raise SearchCapExceeded(f"{hg.n} vertices exceeds exhaustive cap {cap}")
    adj = _cooccurrence_masks(hg)
    full = (1 << hg.n) - 1
    best_size = 0
    best_mask = 0
    nodes = 0

    def grab(cand, size, mask):
        nonlocal best_size, best_mask, nodes
        nodes += 1
        if nodes > budget:
            raise SearchCapExceeded("strong independence search budget exhausted")
        if size + cand.bit_count() <= best_size:
            return
        if cand == 0:
            best_size, best_mask = size, mask
            return
        # branch on the candidate with most candidate-neighbors
        v, vdeg = -1, -1
        c = cand
        while c:
            b = c & -c
            u = b.bit_length() - 1
            d = (adj[u] & cand).bit_count()
            if d > vdeg:
                v, vdeg = u, d
            c ^= b
        bit = 1 << v
        grab(cand & ~adj[v] & ~bit, size + 1, mask | bit)
        grab(cand & ~bit, size, mask)

    grab(full, 0, 0)
    witness = tuple(v for v in range(hg.n) if (best_mask >> v) & 1)
    return best_size, witness


# -- degrees ---------------------------------------------------------------

def degree(hg: Hypergraph, v: int) -> int:
    if not 0 <= v < hg.n:
        raise VertexOutOfRange(f"vertex {v}")
    return len(hg.vert_edges[v])


def min_degree(hg: Hypergraph) -> DegreeProfile:
    """Minimum degree with the exact ratio to C(n, r-1) for uniform inputs."""
    degs = tuple(len(hg.vert_edges[v]) for v in range(hg.n))
    if not degs:
        return DegreeProfile((), 0, None, None)
    delta = min(degs)
    arg = degs.index(delta)
    u = hg.uniformity()
    ratio = None
    if isinstance(u, int):
        denom = comb(hg.n, u - 1)
        if denom:
            ratio = Fraction(delta, denom)
    return DegreeProfile(degs, delta, ratio, arg)


def k_degree(hg: Hypergraph, verts) -> int:
    """Number of edge completions of a k-tuple of distinct vertices."""
    tup = tuple(verts)
    if len(set(tup)) != len(tup):
        raise DuplicateVertexInTuple(f"tuple {tup} repeats a vertex")
    _check_subset(hg, tup)
    r = hg.require_uniform()
    if len(tup) >= r:
        raise ValueError(f"tuple size {len(tup)} must be below uniformity {r}")
    sel = set(tup)
    return sum(1 for es in hg.edge_sets if sel.issubset(es))


def min_k_degree(hg: Hypergraph, k: int):
    """Minimum k-degree over all k-subsets and its normalized ratio.

    The ratio divisor is ``|V(H)|`` for k = r-1 (the co-degree convention)
    and C(n-k, r-k) otherwise.
    """
    r = hg.require_uniform()
    if not 1 <= k < r:
        raise ValueError(f"k={k} must satisfy 1 <= k < {r}")
    counts = {}
    for e in hg.edges:
        for sub in itertools.combinations(e, k):
            counts[sub] = counts.get(sub, 0) + 1
    if len(counts) < comb(hg.n, k):
        m = 0
    else:
        m = min(counts.values())
    denom = hg.n if k == r - 1 else comb(hg.n - k, r - k)
    ratio = Fraction(m, denom) if denom else None
    return m, ratio


# -- coloring --------------------------------------------------------------

def is_weak_coloring(hg: Hypergraph, coloring: Coloring) -> bool:
    """True iff no edge is monochromatic under the (total) coloring."""
    if len(coloring.assignment) != hg.n:
        raise PartialColoring(
            f"assignment covers {len(coloring.assignment)} of {hg.n} vertices")
    a = coloring.assignment
    for e in hg.edges:
        c0 = a[e[0]]
        if all(a[v] == c0 for v in e[1:]):
            return False
    return True


def k_colorable(hg: Hypergraph, k: int,
                budget: int = DEFAULT_NODE_BUDGET) -> Optional[Coloring]:
    """Exact k-colorability by backtracking with unit propagation.

    Returns a proper weak coloring or ``None`` after exhausting the search.
    Propagation: an unsatisfied edge with one unassigned vertex and all
    assigned vertices monochromatic forbids that color on the last vertex;
    a vertex with a single allowed color is assigned immediately.  Branching
    picks the most constrained vertex and breaks color symmetry by allowing
    at most one fresh color per decision.
    """
    n = hg.n
    if k < 1:
        return None
    if any(len(e) == 1 for e in hg.edges):
        return None  # a singleton edge is monochromatic under every coloring
    if n == 0:
        return Coloring((), 0)
    if not hg.edges:
        return Coloring((0,) * n, 1)
    if k == 1:
        return None

    edges = hg.edges
    vert_edges = hg.vert_edges
    full = (1 << k) - 1
    color = [-1] * n
    forb = [0] * n
    e_un = [len(e) for e in edges]
    e_col = [-1] * len(edges)
    e_sat = bytearray(len(edges))
    degs = [len(vert_edges[v]) for v in range(n)]
    state = {"max_used": -1, "nodes": 0}

    def assign(v, c, trail, queue):
        color[v] = c
        trail.append((0, v, 0))
        if c > state["max_used"]:
            trail.append((3, state["max_used"], 0))
            state["max_used"] = c
        for ei in vert_edges[v]:
            if e_sat[ei]:
                continue
            trail.append((2, ei, (e_un[ei], e_col[ei])))
            e_un[ei] -= 1
            if e_col[ei] == -1:
                e_col[ei] = c
            elif e_col[ei] != c:
                e_sat[ei] = 1
                continue
            if e_un[ei] == 0:
                return False  # fully assigned monochromatic edge
            if e_un[ei] == 1:
                u = next(w for w in edges[ei] if color[w] == -1)
                cc = e_col[ei]
                if not (forb[u] >> cc) & 1:
                    trail.append((1, u, forb[u]))
                    forb[u] |= 1 << cc
                    allowed = full & ~forb[u]
                    if allowed == 0:
                        return False
                    if allowed & (allowed - 1) == 0:
                        queue.append((u, allowed.bit_length() - 1))
        return True

    def undo(trail):
        while trail:
            kind, a, b = trail.pop()
            if kind == 0:
                color[a] = -1
            elif kind == 1:
                forb[a] = b
            elif kind == 2:
                e_un[a], e_col[a] = b
                e_sat[a] = 0
            else:
                state["max_used"] = a

    def run_queue(trail, queue):
        while queue:
            u, c = queue.pop()
            if color[u] != -1:
                continue
            if (forb[u] >> c) & 1:
                return False
            if not assign(u, c, trail, queue):
                return False
        return True

    def pick():
        best, key = -1, (-1, -1)
        for v in range(n):
            if color[v] == -1:
                cand = (forb[v].bit_count(), degs[v])
                if cand > key:
                    best, key = v, cand
        return best

    def solve():
        state["nodes"] += 1
        if state["nodes"] > budget:
            raise SearchCapExceeded("coloring search budget exhausted")
        v = pick()
        if v == -1:
            return True
        top = min(k - 1, state["max_used"] + 1)
        for c in range(top + 1):
            if (forb[v] >> c) & 1:
                continue
            trail, queue = [], []
            if assign(v, c, trail, queue) and run_queue(trail, queue) and solve():
                return True
            undo(trail)
        return False

    if solve():
        return Coloring.from_raw(color)
    return None


def chromatic_number(hg: Hypergraph, limit: Optional[int] = None,
                     budget: int = DEFAULT_NODE_BUDGET,
                     max_vertices: int = DEFAULT_VERTEX_CAP,
                     max_edges: int = DEFAULT_EDGE_CAP):
    """Least k admitting a proper weak coloring, with a validated witness.

    Each value below the answer is refuted by the same exhaustive solver.
    Raises ``NotWithinLimit`` when no coloring with at most ``limit`` colors
    exists (in particular whenever some edge has a single vertex).
    """
    if hg.n > max_vertices or len(hg.edges) > max_edges:
        raise SearchCapExceeded(
            f"instance ({hg.n} vertices, {len(hg.edges)} edges) exceeds the "
            f"configured budget; raise max_vertices/max_edges to override")
    top = hg.n if limit is None else min(limit, hg.n)
    if hg.n == 0:
        return 0, Coloring((), 0)
    for k in range(1, top + 1):
        witness = k_colorable(hg, k, budget=budget)
        if witness is not None:
            assert is_weak_coloring(hg, witness)
            return k, witness
    raise NotWithinLimit(limit if limit is not None else hg.n)


def is_s_partite(hg: Hypergraph, s: int,
                 budget: int = DEFAULT_NODE_BUDGET) -> Optional[list]:
    """A partition into at most ``s`` strongly independent parts, or None.

    Strong coloring is exactly proper coloring of the co-occurrence graph
    (all vertex pairs sharing a hyperedge), so the same exact solver is used.
    """
    co = Hypergraph(hg.n, cooccurrence_pairs(hg))
    witness = k_colorable(co, s, budget=budget)
    if witness is None:
        return None
    parts = [set(cls) for cls in witness.classes()]
    for p in parts:
        assert is_strongly_independent(hg, p)
    return parts


def blow_up(hg: Hypergraph, t: int) -> Hypergraph:
    """Replace each vertex by an independent class of ``t`` clones.

    Vertex ``v`` becomes indices ``v*t .. v*t+t-1``; each edge becomes all
    ``t^r`` transversals of its classes.
    """
    if t < 1:
        raise VertexOutOfRange(f"blow-up factor {t} must be >= 1")
    out = []
    for e in hg.edges:
        classes = [range(v * t, v * t + t) for v in e]
        out.extend(itertools.product(*classes))
    return Hypergraph(hg.n * t, out)
