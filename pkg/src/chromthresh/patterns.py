"""Forbidden-subhypergraph detection.

A pattern occurs in a host when some injection maps every pattern edge onto a
host edge (containment is not induced: extra host edges never hurt).  The
generic search is a backtracking embedder with degree, edge-completion and
pair-co-coverage pruning; fast specialized detectors exist for the
generalized triangle, its 4-vertex sibling and the pairwise-covered-core
families.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import SearchCapExceeded
from .hypercore import Hypergraph

DEFAULT_EMBED_BUDGET = 40_000_000


@dataclass(frozen=True)
class Embedding:
    """An injective pattern-vertex -> host-vertex map hitting host edges."""

    mapping: tuple  # mapping[p] = host vertex for pattern vertex p

    def image_edges(self, pattern: Hypergraph):
        return tuple(tuple(sorted(self.mapping[v] for v in e))
                     for e in pattern.edges)

    def validate(self, host: Hypergraph, pattern: Hypergraph) -> bool:
        m = self.mapping
        if len(m) != pattern.n or len(set(m)) != len(m):
            return False
        if any(not 0 <= v < host.n for v in m):
            return False
        return all(host.has_edge(tuple(m[v] for v in e)) for e in pattern.edges)


def _completion_table(host: Hypergraph):
    """Map (edge deprived of one vertex, as sorted tuple) -> bitmask of the
    vertices completing it to a host edge."""
    table = {}
    for e in host.edges:
        for i, v in enumerate(e):
            key = e[:i] + e[i + 1:]
            table[key] = table.get(key, 0) | (1 << v)
    return table


def _cocover_masks(host: Hypergraph):
    adj = [0] * host.n
    for e in host.edges:
        for a, b in itertools.combinations(e, 2):
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    return adj


def _pattern_order(pattern: Hypergraph, comp):
    """Order a component: max degree first, then greedily prefer vertices
    closing pattern edges early, tie-broken by index for determinism."""
    comp = sorted(comp)
    deg = {v: len(pattern.vert_edges[v]) for v in comp}
    start = max(comp, key=lambda v: (deg[v], -v))
    order = [start]
    placed = {start}
    rest = [v for v in comp if v != start]
    while rest:
        def score(v):
            closes = sum(1 for ei in pattern.vert_edges[v]
                         if all(w in placed or w == v for w in pattern.edges[ei]))
            touch = sum(1 for ei in pattern.vert_edges[v]
                        if any(w in placed for w in pattern.edges[ei]))
            return (closes, touch, deg[v], -v)
        nxt = max(rest, key=score)
        order.append(nxt)
        placed.add(nxt)
        rest.remove(nxt)
    return order


def pattern_automorphisms(pattern: Hypergraph, cap: int = 8) -> list:
    """All edge-preserving vertex bijections of a small pattern.

    Patterns above ``cap`` vertices get only the identity (the search below
    stays correct, just without symmetry pruning).
    """
    n = pattern.n
    if n > cap:
        return [tuple(range(n))]
    edge_set = set(pattern.edge_sets)
    deg = [len(pattern.vert_edges[v]) for v in range(n)]
    out = []
    for perm in itertools.permutations(range(n)):
        if any(deg[v] != deg[perm[v]] for v in range(n)):
            continue
        if all(frozenset(perm[v] for v in e) in edge_set
               for e in pattern.edges):
            out.append(perm)
    return out


def find_embedding(host: Hypergraph, pattern: Hypergraph,
                   budget: int = DEFAULT_EMBED_BUDGET) -> Optional[Embedding]:
    """First embedding of ``pattern`` in ``host`` in canonical search order,
    or None once the (budgeted) search is exhausted.

    The pattern is embedded component by component; within a component the
    candidate set for each new vertex is cut down by every pattern edge it
    completes, by co-coverage with already-placed covered partners, and by a
    host-degree filter.  Pattern automorphisms are quotiented out by a
    lex-leader test, so each embedding orbit is visited once.
    """
    if pattern.n > host.n:
        return None
    if pattern.edges and max(len(e) for e in pattern.edges) > max(
            (len(e) for e in host.edges), default=0):
        return None

    completions = _completion_table(host)
    cocover = _cocover_masks(host)
    host_deg = [len(host.vert_edges[v]) for v in range(host.n)]
    pat_deg = [len(pattern.vert_edges[v]) for v in range(pattern.n)]
    pat_cocover = [0] * pattern.n
    for e in pattern.edges:
        for a, b in itertools.combinations(e, 2):
            pat_cocover[a] |= 1 << b
            pat_cocover[b] |= 1 << a

    # degree-filter masks, built once per distinct pattern degree
    deg_masks = {}
    for d in sorted(set(pat_deg)):
        deg_masks[d] = sum(1 << v for v in range(host.n) if host_deg[v] >= d)

    # components of the pattern under shared-vertex adjacency
    parent = list(range(pattern.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in pattern.edges:
        r0 = find(e[0])
        for v in e[1:]:
            parent[find(v)] = r0
    comps = {}
    for v in range(pattern.n):
        comps.setdefault(find(v), []).append(v)
    # big components first: they are the most constrained
    comp_list = sorted(comps.values(), key=lambda c: (-len(c), c[0]))
    order = []
    for comp in comp_list:
        order.extend(_pattern_order(pattern, comp))

    # lex-leader symmetry pruning: position of each automorphism's image of
    # the j-th placed vertex within the placement order
    autos = pattern_automorphisms(pattern)
    order_pos = {p: i for i, p in enumerate(order)}
    perm_tables = []
    for a in autos:
        tbl = tuple(order_pos[a[p]] for p in order)
        if tbl != tuple(range(len(order))):
            perm_tables.append(tbl)

    mapping = [-1] * pattern.n
    vals = [-1] * len(order)  # images in placement order
    used_mask = 0
    nodes = 0
    full = (1 << host.n) - 1
    npat = len(order)

    def lex_ok(i):
        # reject partial maps that an automorphism rewrites to something
        # strictly smaller on a fully-placed prefix
        for tbl in perm_tables:
            for j in range(i):
                pj = tbl[j]
                if pj >= i:
                    break
                qv, pv = vals[pj], vals[j]
                if qv < pv:
                    return False
                if qv > pv:
                    break
        return True

    def candidates(p):
        cand = full & ~used_mask & deg_masks[pat_deg[p]]
        for ei in pattern.vert_edges[p]:
            e = pattern.edges[ei]
            key = []
            ok = True
            for w in e:
                if w == p:
                    continue
                mw = mapping[w]
                if mw == -1:
                    ok = False
                    break
                key.append(mw)
            if ok:
                key.sort()
                cand &= completions.get(tuple(key), 0)
                if not cand:
                    return 0
        rem = pat_cocover[p]
        while rem and cand:
            b = rem & -rem
            q = b.bit_length() - 1
            if mapping[q] != -1:
                cand &= cocover[mapping[q]]
            rem ^= b
        return cand

    def extend(i):
        nonlocal used_mask, nodes
        if i == npat:
            return True
        nodes += 1
        if nodes > budget:
            raise SearchCapExceeded("embedding search budget exhausted")
        p = order[i]
        cand = candidates(p)
        while cand:
            b = cand & -cand
            v = b.bit_length() - 1
            cand ^= b
            mapping[p] = v
            vals[i] = v
            used_mask |= b
            if lex_ok(i + 1) and extend(i + 1):
                return True
            mapping[p] = -1
            vals[i] = -1
            used_mask &= ~b
        return False

    if extend(0):
        emb = Embedding(tuple(mapping))
        assert emb.validate(host, pattern)
        return emb
    return None


# -- specialized detectors ---------------------------------------------------

F5 = Hypergraph(5, [(0, 1, 2), (0, 1, 3), (2, 3, 4)])
F4 = Hypergraph(4, [(0, 1, 2), (0, 1, 3), (1, 2, 3)])


def _pair_links(host: Hypergraph):
    """pair (a,b) -> sorted tuple of third vertices forming edges with it."""
    links = {}
    for e in host.edges:
        for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            links.setdefault((e[i], e[j]), []).append(e[k])
    return {p: tuple(sorted(v)) for p, v in links.items()}


def contains_f5(host: Hypergraph) -> Optional[Embedding]:
    """Generalized-triangle detector via pair links.

    Scans pairs (a,b) of co-degree at least two; a copy exists exactly when
    some edge {c,d,e} has c,d in the link of (a,b) and e outside {a,b}.
    Pattern roles follow ``F5``: 0,1 the link pair, 2,3 the doubled
    neighbors, 4 the apex of the third edge.
    """
    host.require_uniform(3)
    links = _pair_links(host)
    for (a, b), nbrs in sorted(links.items()):
        if len(nbrs) < 2:
            continue
        for c, d in itertools.combinations(nbrs, 2):
            for e5 in links.get((c, d), ()):
                if e5 != a and e5 != b:
                    emb = Embedding((a, b, c, d, e5))
                    assert emb.validate(host, F5)
                    return emb
    return None


def contains_f4_at(host: Hypergraph, v: int) -> Optional[Embedding]:
    """An F4 copy through ``v``, or None.

    Two cases up to pattern symmetry: v plays the apex (a triangle in the
    link of v) or a rim vertex (two link pairs through a common apex whose
    outer pair spans an edge).
    """
    host.require_uniform(3)
    link = {}
    for ei in host.vert_edges[v]:
        a, b = (w for w in host.edges[ei] if w != v)
        link.setdefault(a, set()).add(b)
        link.setdefault(b, set()).add(a)

    # apex: triangle a-b-c inside the link graph of v
    for a in sorted(link):
        for b, c in itertools.combinations(sorted(link[a]), 2):
            if c in link.get(b, ()):
                emb = Embedding((a, v, b, c))  # pattern apex is role 1
                assert emb.validate(host, F4)
                return emb
    # rim: apex a with link-neighbors b,c such that {a,b,c} is a host edge
    for a in sorted(link):
        nbrs = sorted(link[a])
        for b, c in itertools.combinations(nbrs, 2):
            if host.has_edge((a, b, c)):
                emb = Embedding((v, a, b, c))
                assert emb.validate(host, F4)
                return emb
    return None


def _find_clique(adj, verts, s, budget):
    """First size-s clique (sorted tuple) in the graph given by bitmask
    adjacency, restricted to ``verts``; None if there is none."""
    nodes = 0

    def extend(clique, cand):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchCapExceeded("clique search budget exhausted")
        if len(clique) == s:
            return tuple(clique)
        if len(clique) + cand.bit_count() < s:
            return None
        c = cand
        while c:
            b = c & -c
            u = b.bit_length() - 1
            c ^= b
            got = extend(clique + [u], c & adj[u])
            if got:
                return got
        return None

    start = 0
    for u in verts:
        start |= 1 << u
    return extend([], start)


def contains_tkf(host: Hypergraph, s: int,
                 budget: int = DEFAULT_EMBED_BUDGET) -> Optional[tuple]:
    """A core vertex set certifying membership in the s-core family, or None.

    For s > r the core is s vertices pairwise covered by edges (a clique in
    the co-coverage graph).  For s <= r each core pair additionally needs an
    edge meeting the core in exactly that pair, which is verified edge by
    edge on every clique candidate.
    """
    r = host.require_uniform()
    adj = _cocover_masks(host)
    verts = range(host.n)
    if s > r:
        return _find_clique(adj, verts, s, budget)

    pair_edges = {}
    for idx, es in enumerate(host.edge_sets):
        for a, b in itertools.combinations(sorted(es), 2):
            pair_edges.setdefault((a, b), []).append(idx)

    nodes = 0

    def exact_ok(core):
        cs = set(core)
        for a, b in itertools.combinations(core, 2):
            hit = False
            for idx in pair_edges.get((a, b), ()):
                if host.edge_sets[idx] & cs == {a, b}:
                    hit = True
                    break
            if not hit:
                return False
        return True

    def extend(core, cand):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchCapExceeded("core search budget exhausted")
        if len(core) == s:
            return tuple(core) if exact_ok(core) else None
        if len(core) + cand.bit_count() < s:
            return None
        c = cand
        while c:
            b = c & -c
            u = b.bit_length() - 1
            c ^= b
            got = extend(core + [u], c & adj[u])
            if got:
                return got
        return None

    start = sum(1 << u for u in verts)
    return extend([], start)
