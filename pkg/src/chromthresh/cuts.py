"""Cuts in fiber bundles and the 5-cut construction for hypergraphs free of
the generalized triangle.

A cut (X, S) collects fiber edges touched only by fibers over X; for the
neighborhood bundle of a 3-graph this means vertex pairs whose completions
all pass through X.  The finder implements the two-case construction: a
vertex in no 4-vertex double-pair copy yields a cut from the good non-edges
of its link, otherwise the links of one such copy are pooled and the
neighborhood of a max-degree vertex is split by certifying link.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    AttemptsExhausted,
    InternalInvariant,
    NonUniform,
    NoWitness,
    NotF5Free,
)
from .hypercore import Hypergraph, induced, min_degree, strong_independence_number
from .bundles import DimWitness, FiberBundle, dim_h, neighborhood_bundle, section
from .patterns import contains_f4_at, contains_f5


@dataclass(frozen=True)
class Cut:
    """Vertex set X and fiber-edge set S with all S-touching fibers over X."""

    vertices: frozenset
    fiber_edges: frozenset

    @property
    def size(self) -> int:
        return len(self.fiber_edges)

    @property
    def k(self) -> int:
        return len(self.vertices)


def is_cut(bundle: FiberBundle, verts, fiber_edges) -> bool:
    """Exact check: no fiber outside X meets S."""
    x = set(verts)
    s = frozenset(frozenset(fe) for fe in fiber_edges)
    for v in range(bundle.base.n):
        if v not in x and bundle.gamma[v] & s:
            return False
    return True


def good_nonedges(g: Hypergraph) -> frozenset:
    """Non-adjacent vertex pairs with a common neighbor, in a graph."""
    if g.edges:
        g.require_uniform(2)
    adj = [0] * g.n
    for a, b in g.edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    out = set()
    for a in range(g.n):
        for b in range(a + 1, g.n):
            if not (adj[a] >> b) & 1 and adj[a] & adj[b]:
                out.add(frozenset((a, b)))
    return frozenset(out)


def _link_graph(g: Hypergraph, v: int) -> Hypergraph:
    pairs = set()
    for ei in g.vert_edges[v]:
        pairs.add(tuple(sorted(w for w in g.edges[ei] if w != v)))
    return Hypergraph(g.n, pairs)


def find_5cut(g: Hypergraph) -> Cut:
    """A validated cut with at most 5 base vertices in a triangle-pattern
    free 3-graph.

    Case 1: some vertex v lies in no 4-vertex double-pair copy; its link is
    then triangle-free and the good non-edges of the link are untouchable
    outside X = {} (any completion would close the forbidden pattern).
    Case 2: pool the four links of such a copy, take the neighborhood N of
    a maximum-degree vertex, split N by least certifying link, and keep all
    pairs inside the classes.
    """
    g.require_uniform(3)
    gate = contains_f5(g)
    if gate is not None:
        raise NotF5Free(gate)

    nb = neighborhood_bundle(g)
    for v in range(g.n):
        if contains_f4_at(g, v) is None:
            link = _link_graph(g, v)
            s = good_nonedges(link)
            cut = Cut(frozenset(), s)
            if not is_cut(nb, cut.vertices, cut.fiber_edges):
                raise InternalInvariant(
                    "good non-edges of a pattern-free link were touched "
                    "from outside", embedding=_extract_f5_case1(g, v, s))
            return cut

    emb = contains_f4_at(g, 0)
    u = sorted(set(emb.mapping))
    links = [frozenset(frozenset(p) for p in _link_graph(g, ui).edge_sets)
             for ui in u]
    for i, j in itertools.combinations(range(4), 2):
        two = _disjoint_pair_matching(links[i] & links[j])
        if two is not None:
            raise InternalInvariant(
                "two links of a double-pair copy share a 2-matching",
                embedding=_extract_f5_star(g, u[i], u[j], two))
    pooled = {}
    for lk in links:
        for p in lk:
            pooled.setdefault(p, None)
    deg = [0] * g.n
    for p in pooled:
        for w in p:
            deg[w] += 1
    v = max(range(g.n), key=lambda w: (deg[w], -w))
    nbrs = sorted(w for w in range(g.n)
                  if any(frozenset((v, w)) in lk for lk in links) and w != v)
    classes = [[] for _ in range(4)]
    for w in nbrs:
        for i in range(4):
            if frozenset((v, w)) in links[i]:
                classes[i].append(w)
                break
    s = set()
    for cls in classes:
        for a, b in itertools.combinations(cls, 2):
            s.add(frozenset((a, b)))
    cut = Cut(frozenset(u) | {v}, frozenset(s))
    if not is_cut(nb, cut.vertices, cut.fiber_edges):
        raise InternalInvariant(
            "class pairs were touched from outside the core",
            embedding=_extract_f5_case2(g, u, v, links, classes, cut))
    return cut


def _disjoint_pair_matching(pairs) -> Optional[tuple]:
    ps = sorted(tuple(sorted(p)) for p in pairs)
    for a, b in itertools.combinations(ps, 2):
        if not set(a) & set(b):
            return a, b
    return None


def _extract_f5_case1(g, v, s):
    from .patterns import Embedding, F5
    link = _link_graph(g, v)
    adj = {}
    for a, b in link.edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    for pair in sorted(s, key=sorted):
        uu, ww = sorted(pair)
        for ei, es in enumerate(g.edge_sets):
            if pair <= es:
                x = next(iter(es - pair))
                common = adj.get(uu, set()) & adj.get(ww, set())
                for y in sorted(common):
                    cand = Embedding((v, y, uu, ww, x))
                    if cand.validate(g, F5):
                        return cand
    return None


def _extract_f5_star(g, ui, uj, two):
    from .patterns import Embedding, F5
    (a, b), (c, d) = two
    for es in g.edge_sets:
        if {ui, uj} <= es:
            w = next(iter(es - {ui, uj}))
            pair = (c, d) if w in (a, b) else (a, b)
            cand = Embedding((pair[0], pair[1], ui, uj, w))
            if cand.validate(g, F5):
                return cand
    return None


def _extract_f5_case2(g, u, v, links, classes, cut):
    from .patterns import Embedding, F5
    for z in range(g.n):
        if z in cut.vertices:
            continue
        for ei in g.vert_edges[z]:
            pair = frozenset(set(g.edges[ei]) - {z})
            if pair in cut.fiber_edges:
                x, y = sorted(pair)
                for i in range(4):
                    if x in classes[i] and y in classes[i]:
                        cand = Embedding((u[i], v, x, y, z))
                        if cand.validate(g, F5):
                            return cand
    return None


def five_cut_report(g: Hypergraph) -> dict:
    """Measure the minimum-degree ratio, find the 5-cut, and report the
    threshold arithmetic it feeds.

    The cut-versus-degree tradeoff bounds the chromatic threshold of the
    pattern-free family by the root of 4c^2 + 5c = 1; that root and the
    6/49 construction floor are attached as reference constants, not as
    claims about the finite input.
    """
    prof = min_degree(g)
    cut = find_5cut(g)
    total = math.comb(g.n, 2)
    upper_root = (math.sqrt(41) - 5) / 8
    return {
        "vertices": g.n,
        "edges": len(g.edges),
        "min_degree": prof.delta,
        "degree_ratio": prof.ratio,
        "cut_vertices": tuple(sorted(cut.vertices)),
        "cut_size": cut.size,
        "cut_fraction": Fraction(cut.size, total) if total else None,
        "reference_upper": {"value": upper_root,
                            "equation": "5c = 1 - 4c^2"},
        "reference_lower": Fraction(6, 49),
    }


def find_low_independence_set(bundle: FiberBundle, d: int, q: int, eps,
                              seed: int, witness: Optional[DimWitness] = None,
                              attempts: int = 200) -> tuple:
    """A 5d-vertex set whose strong independence number is at most
    (1+eps) d, built from a dimension witness with biclique-bearing sections.

    One vertex-disjoint section pair is fixed per transversal (avoiding the
    witness edges); d of them are sampled with repetition until the exact
    strong-independence check passes.  Transversals whose sections offer no
    fresh disjoint pair are skipped (large biclique patterns rule that out,
    tiny instances cannot); what certifies the output is the exact final
    validation, which is never skipped.
    """
    eps = Fraction(eps)
    if bundle.r_gamma != 2:
        raise NonUniform("low-independence sets need pair fibers "
                         "(a neighborhood bundle of a 3-graph)")
    pattern = _biclique(q)
    if witness is None:
        got, witness = dim_h(bundle, pattern, d)
        if got < d or witness is None:
            raise NoWitness(f"bundle dimension below {d} for the "
                            f"{q}-by-{q} biclique pattern")
    if len(witness.edges) < d:
        raise NoWitness(f"witness carries {len(witness.edges)} edges, "
                        f"need {d}")
    medges = witness.edges[:d]
    mverts = set(v for e in medges for v in e)
    banned = set(mverts)
    pairs = []
    for tv in itertools.product(*medges):
        sec = section(bundle, tv)
        for fe in sorted(sec, key=sorted):
            if not (set(fe) & banned):
                pick = tuple(sorted(fe))
                banned |= set(pick)
                pairs.append(pick)
                break
    if not pairs:
        raise AttemptsExhausted(
            "no transversal section offered a vertex-disjoint pair")

    rng = random.Random(seed)
    bound = (1 + eps) * d
    for _ in range(attempts):
        sample = [rng.choice(pairs) for _ in range(d)]
        uset = set(mverts)
        for p in sample:
            uset |= set(p)
        if len(uset) != 5 * d:
            continue
        us = tuple(sorted(uset))
        size, _wit = strong_independence_number(induced(bundle.base, us))
        if size <= bound:
            return us
    raise AttemptsExhausted(
        f"no sampled set met the strong-independence bound in "
        f"{attempts} attempts")


def _biclique(q: int) -> Hypergraph:
    return Hypergraph(2 * q, [(i, q + j) for i in range(q)
                              for j in range(q)])
