"""Fiber bundles: sections, dimension, density-increment refinement, the
bounded-dimension coloring loop and the overlap-merging driver.

A bundle attaches to every base vertex a set of fixed-size subsets of a
ground set (its fiber).  The coloring pipeline refines a partition of
(base vertices, fiber-edge universe) until every part has density one, then
either colors each part through a maximal matching bound or exhibits a
dimension witness: disjoint base edges all of whose transversal sections
contain a prescribed pattern.

Two parameter regimes exist.  The literal regime derives every constant
from (eps, d, r_b) exactly; those constants are astronomically small, so
its preconditions are unmeetable on desk-size instances and the regime is
kept for formula identity only.  The practical regime takes user constants
and replaces a-priori guarantees with a-posteriori validation: every
postcondition is recomputed from scratch before an outcome is returned,
and a violation raises instead of returning.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Union

from .errors import (
    AttemptsExhausted,
    AuditFailed,
    EdgesOverlap,
    EmptyS,
    HypothesisViolated,
    ImproperInput,
    NonUniform,
    PostconditionFailed,
    SearchCapExceeded,
)
from .hypercore import Coloring, Hypergraph, is_weak_coloring
from .patterns import find_embedding

DEFAULT_DIM_BUDGET = 2_000_000

SINGLE_VERTEX_PATTERN = Hypergraph(1, [(0,)])
SINGLE_EDGE_2 = Hypergraph(2, [(0, 1)])


def _fekey(fe):
    return tuple(sorted(fe))


class FiberBundle:
    """Base hypergraph plus one fiber (a set of r_gamma-subsets of a ground
    set of ``fiber_size`` elements) per base vertex."""

    __slots__ = ("base", "fiber_size", "r_gamma", "gamma")

    def __init__(self, base: Hypergraph, fiber_size: int, r_gamma: int, gamma):
        gamma = tuple(frozenset(frozenset(fe) for fe in g) for g in gamma)
        if len(gamma) != base.n:
            raise NonUniform(f"{len(gamma)} fibers for {base.n} base vertices")
        for g in gamma:
            for fe in g:
                if len(fe) != r_gamma:
                    raise NonUniform(f"fiber edge {sorted(fe)} is not "
                                     f"{r_gamma}-uniform")
                if fe and (min(fe) < 0 or max(fe) >= fiber_size):
                    raise NonUniform(f"fiber edge {sorted(fe)} leaves the "
                                     f"ground set of size {fiber_size}")
        self.base = base
        self.fiber_size = fiber_size
        self.r_gamma = r_gamma
        self.gamma = gamma

    def universe(self) -> frozenset:
        return frozenset(frozenset(c) for c in
                         itertools.combinations(range(self.fiber_size),
                                                self.r_gamma))

    def universe_size(self) -> int:
        return comb(self.fiber_size, self.r_gamma)

    def is_uniform(self) -> bool:
        return isinstance(self.base.uniformity(), int)

    def base_arity(self) -> Optional[int]:
        sizes = [len(e) for e in self.base.edges]
        return max(sizes) if sizes else None

    def __repr__(self):
        return (f"FiberBundle(base={self.base!r}, |F|={self.fiber_size}, "
                f"r_gamma={self.r_gamma})")


def neighborhood_bundle(g: Hypergraph) -> FiberBundle:
    """Fiber of each vertex = its link: the (r-1)-sets completing it to an
    edge.  Ground set is the vertex set itself."""
    r = g.require_uniform()
    if r < 2:
        raise NonUniform("neighborhood bundle needs uniformity at least 2")
    gamma = [set() for _ in range(g.n)]
    for e in g.edges:
        es = set(e)
        for v in e:
            gamma[v].add(frozenset(es - {v}))
    return FiberBundle(g, g.n, r - 1, gamma)


def rainbow_partition(g: Hypergraph, r: int, threshold: int, seed: int,
                      attempts: int = 500):
    """Random equitable r-partition retried until every vertex lies in at
    least ``threshold`` edges crossing all classes.

    Returns (parts, per-vertex rainbow degree, achieved minimum).
    """
    g.require_uniform(r)
    rng = random.Random(seed)
    verts = list(range(g.n))
    sizes = [g.n // r + (1 if i < g.n % r else 0) for i in range(r)]
    for _ in range(attempts):
        rng.shuffle(verts)
        cls = [0] * g.n
        pos = 0
        parts = []
        for s in sizes:
            chunk = verts[pos:pos + s]
            for v in chunk:
                cls[v] = len(parts)
            parts.append(frozenset(chunk))
            pos += s
        cnt = [0] * g.n
        for e in g.edges:
            if len({cls[v] for v in e}) == r:
                for v in e:
                    cnt[v] += 1
        low = min(cnt) if cnt else 0
        if low >= threshold:
            return parts, tuple(cnt), low
    raise AttemptsExhausted(
        f"no equitable partition reached rainbow degree {threshold} "
        f"in {attempts} attempts")


def section(bundle: FiberBundle, verts) -> frozenset:
    """Fiber edges appearing in every fiber over ``verts``; the full
    universe when ``verts`` is empty."""
    vs = sorted(set(verts))
    if not vs:
        return bundle.universe()
    out = bundle.gamma[vs[0]]
    for v in vs[1:]:
        out = out & bundle.gamma[v]
    return frozenset(out)


def section_hypergraph(bundle: FiberBundle, fiber_edges) -> Hypergraph:
    return Hypergraph(bundle.fiber_size, [_fekey(fe) for fe in fiber_edges])


@dataclass(frozen=True)
class DimWitness:
    """Disjoint base edges whose every transversal section contains the
    pattern; ``copies`` optionally records one embedding per transversal."""

    edges: tuple
    copies: Optional[tuple] = None

    def audit(self, bundle: FiberBundle, pattern: Hypergraph):
        """Exhaustively re-check the witness; returns the embeddings found
        or raises ``AuditFailed``."""
        used = set()
        for e in self.edges:
            if used & set(e):
                raise AuditFailed(f"witness edges overlap at {sorted(used & set(e))}")
            used |= set(e)
        copies = []
        for tv in itertools.product(*self.edges):
            sec = section(bundle, tv)
            emb = find_embedding(section_hypergraph(bundle, sec), pattern)
            if emb is None:
                raise AuditFailed(f"section of transversal {tv} lacks the pattern")
            copies.append((tv, emb))
        return tuple(copies)


def dim_h(bundle: FiberBundle, pattern: Hypergraph, d_max: int,
          budget: int = DEFAULT_DIM_BUDGET):
    """Exact bundle dimension up to ``d_max`` with a witness.

    The dimension is monotone (a sub-matching of a witness is a witness), so
    matchings are searched by increasing size until one size has none.
    """
    edges = bundle.base.edges
    best = (0, None)
    for d in range(1, d_max + 1):
        found = _matching_witness(bundle, pattern, edges, d, budget)
        if found is None:
            break
        best = (d, found)
    return best


def _matching_witness(bundle, pattern, edges, d, budget):
    nodes = [0]

    def grow(start, chosen, used):
        nodes[0] += 1
        if nodes[0] > budget:
            raise SearchCapExceeded("dimension search budget exhausted")
        if len(chosen) == d:
            try:
                w = DimWitness(tuple(chosen))
                copies = w.audit(bundle, pattern)
            except AuditFailed:
                return None
            return DimWitness(tuple(chosen), copies)
        for i in range(start, len(edges)):
            e = edges[i]
            if used & set(e):
                continue
            got = grow(i + 1, chosen + [e], used | set(e))
            if got is not None:
                return got
        return None

    return grow(0, [], set())


# -- partitions and densities -------------------------------------------------

def density(bundle: FiberBundle, verts, fiber_edges) -> Fraction:
    """Worst fiber density into ``fiber_edges`` over ``verts``; one when
    either side is empty."""
    vs = set(verts)
    s = frozenset(fiber_edges)
    if not vs or not s:
        return Fraction(1)
    return min(Fraction(len(bundle.gamma[v] & s), len(s)) for v in vs)


def min_section_density(bundle: FiberBundle, edges, fiber_edges) -> Fraction:
    """Minimum over transversals of the density of their common section."""
    s = frozenset(fiber_edges)
    if not s:
        raise EmptyS("the reference family of fiber edges is empty")
    used = set()
    for e in edges:
        if used & set(e):
            raise EdgesOverlap("edges must be pairwise disjoint")
        used |= set(e)
    best = Fraction(1)
    for tv in itertools.product(*[tuple(e) for e in edges]):
        sec = section(bundle, tv) & s
        best = min(best, Fraction(len(sec), len(s)))
    return best


@dataclass(frozen=True)
class BundlePartition:
    """Pairs (X_i, S_i) partitioning the base vertices and the fiber-edge
    universe; empty sides are allowed."""

    pairs: tuple

    @staticmethod
    def initial(bundle: FiberBundle) -> "BundlePartition":
        return BundlePartition(((frozenset(range(bundle.base.n)),
                                 bundle.universe()),))

    def validate(self, bundle: FiberBundle) -> bool:
        seen_v, seen_s = set(), set()
        for x, s in self.pairs:
            if x & seen_v or s & seen_s:
                return False
            seen_v |= x
            seen_s |= s
        return (seen_v == set(range(bundle.base.n))
                and seen_s == bundle.universe())

    def rank(self) -> Optional[int]:
        sizes = [len(s) for _, s in self.pairs if s]
        return min(sizes) if sizes else None

    def density(self, bundle: FiberBundle) -> Fraction:
        return min((density(bundle, x, s) for x, s in self.pairs),
                   default=Fraction(1))

    def is_partial_coloring(self, bundle: FiberBundle) -> bool:
        for x, s in self.pairs:
            if not s and x:
                if any(set(e) <= x for e in bundle.base.edges):
                    return False
        return True


def is_partial_coloring(bundle: FiberBundle, partition: BundlePartition) -> bool:
    return partition.is_partial_coloring(bundle)


def partition_density(bundle: FiberBundle, partition: BundlePartition) -> Fraction:
    return partition.density(bundle)


def rank(partition: BundlePartition) -> Optional[int]:
    return partition.rank()


# -- parameters ---------------------------------------------------------------

@dataclass(frozen=True)
class TinyPower:
    """Exact ``coeff * base ** exponent`` kept symbolic because expanding the
    power is unrepresentable; supports only magnitude comparisons."""

    coeff: Fraction
    base: Fraction
    exponent: Fraction

    def log10(self) -> float:
        return (math.log10(self.coeff) +
                float(self.exponent) * math.log10(self.base))

    def times_at_most(self, total: int, count: int) -> bool:
        """Decide ``count >= self * total`` by logarithm with a wide guard
        band; desk-scale quantities are dozens of orders apart."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        target = self.log10() + math.log10(max(total, 1))
        if count == 0:
            return False
        gap = math.log10(count) - target
        if abs(gap) < 1e-3:
            raise ArithmeticError("log comparison too close to call")
        return gap > 0


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RefineParams:
    """Constant ledger for the refinement machinery.

    ``pattern`` is the fiber pattern whose presence in sections defines the
    dimension; ``psis`` are the greedy thresholds (index m holds the factor
    for selecting the (m+1)-th edge).
    """

    mode: str  # "literal" or "practical"
    eps: Fraction
    d: int
    pattern: Hypergraph
    r_b: int
    alpha: Fraction
    eta: Fraction
    beta: Union[Fraction, TinyPower]
    lam: Union[Fraction, TinyPower]
    psis: tuple
    l1: Optional[int] = None
    l2: Union[int, TinyPower, None] = None

    @staticmethod
    def _psi_ladder(eps: Fraction, d: int) -> tuple:
        psis = [Fraction(1)]
        for _ in range(d - 1):
            psis.append(eps * psis[-1] / 4)
        return tuple(psis)

    @staticmethod
    def literal(eps, d: int, r_b: int, pattern: Hypergraph) -> "RefineParams":
        eps = _as_fraction(eps)
        if not 0 < eps < Fraction(1, 4) / r_b ** d:
            raise ValueError(f"literal mode needs 0 < eps < (1/4) r_b^-d = "
                             f"{Fraction(1, 4) / r_b ** d}")
        alpha = Fraction(1, 1000) * (eps / 4) ** (d + 1)
        eta = eps * eps * alpha / 4
        inv_eta = 1 / eta
        beta = TinyPower(Fraction(1), alpha, inv_eta)
        lam = TinyPower(eps ** (d + 1) / (d * r_b ** 2 * 4 ** d), alpha, inv_eta)
        l2 = TinyPower(Fraction(r_b * d), Fraction(r_b ** d + 2), inv_eta)
        return RefineParams("literal", eps, d, pattern, r_b, alpha, eta,
                            beta, lam, RefineParams._psi_ladder(eps, d),
                            l1=None, l2=l2)

    @staticmethod
    def practical(eps, d: int, pattern: Hypergraph, r_b: int,
                  alpha, eta, lam, beta=None, psis=None,
                  l1: Optional[int] = None) -> "RefineParams":
        eps, alpha, eta, lam = map(_as_fraction, (eps, alpha, eta, lam))
        for name, val in (("eps", eps), ("alpha", alpha), ("eta", eta),
                          ("lam", lam)):
            if not 0 < val < 1:
                raise ValueError(f"{name}={val} must lie strictly in (0,1)")
        if lam >= eps:
            raise ValueError(f"lam={lam} must be below eps={eps}")
        if beta is None:
            beta = alpha ** math.ceil(1 / eta)
        beta = _as_fraction(beta)
        if not 0 < beta < 1:
            raise ValueError(f"beta={beta} must lie strictly in (0,1)")
        psis = (RefineParams._psi_ladder(eps, d) if psis is None
                else tuple(map(_as_fraction, psis)))
        if len(psis) != d or any(b >= a for a, b in zip(psis, psis[1:])) \
                or psis[0] != 1 or min(psis) <= 0:
            raise ValueError("psis must be d positive decreasing factors "
                             "starting at 1")
        return RefineParams("practical", eps, d, pattern, r_b, alpha, eta,
                            beta, lam, psis, l1=l1, l2=None)

    def with_eps(self, eps, r_b: Optional[int] = None) -> "RefineParams":
        """Practical-mode copy at a new density floor (used when recursing
        on merged bundles)."""
        if self.mode != "practical":
            raise ValueError("only practical parameters support re-basing")
        eps = _as_fraction(eps)
        lam = min(self.lam, eps / 2)
        return RefineParams("practical", eps, self.d, self.pattern,
                            r_b if r_b is not None else self.r_b,
                            self.alpha, self.eta, self.beta, lam,
                            RefineParams._psi_ladder(eps, self.d),
                            l1=self.l1, l2=None)

    def size_floor_met(self, size: int, total: int) -> bool:
        """Check |S| >= beta * universe."""
        if isinstance(self.beta, TinyPower):
            return self.beta.times_at_most(total, size)
        return size >= self.beta * total


# -- refinement ---------------------------------------------------------------

@dataclass(frozen=True)
class Refined:
    """Replacement pairs (Y_i, T_i) plus the leftover independent part Z."""

    pairs: tuple
    zpart: frozenset


@dataclass(frozen=True)
class GreedyRanLong:
    """The greedy selection assembled d disjoint edges: a dimension witness."""

    witness: DimWitness


RefineOutcome = Union[Refined, GreedyRanLong]


def _edges_within(base: Hypergraph, verts):
    vs = set(verts)
    return [e for e in base.edges if vs.issuperset(e)]


def refine_pair(bundle: FiberBundle, verts, fiber_edges,
                params: RefineParams) -> RefineOutcome:
    """Split one partition pair, raising its density by eta, or detect that
    the greedy edge selection ran to d edges (a dimension witness).

    Follows the increment argument: greedily pick disjoint edges inside X
    while all transversal section densities into S stay above the psi
    thresholds; when stuck after m edges, the r_b^m deduplicated sections
    become the new fiber classes (trimmed below 2 eps |S|), vertices join
    the first class they are dense into, and the leftovers Z span no edge.
    All three postconditions are recomputed before returning.
    """
    x = frozenset(verts)
    s = frozenset(fiber_edges)
    if not x:
        raise ValueError("X must be nonempty")
    if not s:
        raise EmptyS("S must be nonempty")
    total = bundle.universe_size()
    if not params.size_floor_met(len(s), total):
        raise ValueError(f"|S|={len(s)} is below the beta floor")
    dxs = density(bundle, x, s)
    if dxs < params.eps:
        raise ValueError(f"density {dxs} below eps={params.eps}")
    if dxs >= 1:
        return Refined(((x, s),), frozenset())

    bx_edges = _edges_within(bundle.base, x)
    if not bx_edges:
        return Refined(((frozenset(), s),), x)

    # greedy selection of disjoint edges under the psi ladder
    chosen = []
    used = set()
    while len(chosen) < params.d:
        nxt = None
        for e in bx_edges:
            if used & set(e):
                continue
            if min_section_density(bundle, chosen + [e], s) >= \
                    params.eps * params.psis[len(chosen)]:
                nxt = e
                break
        if nxt is None:
            break
        chosen.append(nxt)
        used |= set(nxt)

    if len(chosen) == params.d:
        witness = DimWitness(tuple(chosen))
        copies = witness.audit(bundle, params.pattern)  # AuditFailed if not
        return GreedyRanLong(DimWitness(tuple(chosen), copies))

    # sections of the stuck greedy state, deduplicated to least index
    seen = set()
    raw = []
    for tv in itertools.product(*[tuple(e) for e in chosen]):
        sec = (section(bundle, tv) & s) - seen
        seen |= sec
        raw.append(set(sec))

    # trim each class to the largest size strictly below 2 eps |S|, dropping
    # largest keys first; never annihilate a class (the upper bound is
    # internal to the increment argument, not a postcondition, and an
    # emptied class would only swell the unclassified remainder)
    cap = max(math.ceil(2 * params.eps * len(s)) - 1, 1)
    tclasses = []
    for r_i in raw:
        if len(r_i) > cap:
            keep = sorted(r_i, key=_fekey)[:max(cap, 0)]
            r_i = set(keep)
        if r_i:
            tclasses.append(frozenset(r_i))
    rest = s - frozenset().union(*tclasses) if tclasses else s
    if rest:
        tclasses.append(frozenset(rest))

    threshold = min(Fraction(1), params.eta + dxs)
    yclasses = [set() for _ in tclasses]
    zpart = set()
    for v in sorted(x):
        for i, t_i in enumerate(tclasses):
            if Fraction(len(bundle.gamma[v] & t_i), len(t_i)) >= threshold:
                yclasses[i].add(v)
                break
        else:
            zpart.add(v)

    out = Refined(tuple((frozenset(y), t) for y, t in zip(yclasses, tclasses)),
                  frozenset(zpart))
    problems = validate_refined(bundle, x, s, params, out)
    if problems:
        raise PostconditionFailed(
            "refinement postconditions failed: " + "; ".join(problems),
            details=problems)
    return out


def validate_refined(bundle: FiberBundle, verts, fiber_edges,
                     params: RefineParams, outcome: Refined) -> list:
    """Independent recomputation of the three postconditions plus the
    partition bookkeeping; returns a list of violations (empty = valid)."""
    x = frozenset(verts)
    s = frozenset(fiber_edges)
    problems = []
    ys = [y for y, _ in outcome.pairs]
    ts = [t for _, t in outcome.pairs]
    cover_v = set()
    for part in ys + [outcome.zpart]:
        if part & cover_v:
            problems.append("vertex parts overlap")
        cover_v |= part
    if cover_v != x:
        problems.append("vertex parts do not partition X")
    cover_s = set()
    for t in ts:
        if t & cover_s:
            problems.append("fiber classes overlap")
        cover_s |= t
    if cover_s != s:
        problems.append("fiber classes do not partition S")
    if len(outcome.pairs) > params.r_b ** params.d + 1:
        problems.append(f"{len(outcome.pairs)} classes exceed r_b^d + 1")
    dxs = density(bundle, x, s)
    need = min(Fraction(1), params.eta + dxs)
    for i, (y, t) in enumerate(outcome.pairs):
        if t and len(t) < params.alpha * len(s):
            problems.append(f"|T_{i}|={len(t)} below alpha |S|")
        if density(bundle, y, t) < need:
            problems.append(f"density of class {i} below {need}")
    if any(set(e) <= outcome.zpart for e in bundle.base.edges):
        problems.append("leftover part spans an edge")
    return problems


def refine_partition(bundle: FiberBundle, partition: BundlePartition,
                     params: RefineParams
                     ) -> Union[BundlePartition, DimWitness]:
    """Refine every dense pair of a partial coloring, or surface a dimension
    witness found along the way.

    The result is re-verified: part count within (r_b^d + 2) |P|, rank at
    least alpha times the old rank, still a partial coloring, and density
    up by eta (capped at one).
    """
    if not partition.validate(bundle):
        raise ValueError("input is not a partition of the bundle")
    if not partition.is_partial_coloring(bundle):
        raise ValueError("input partition is not a partial coloring")
    old_density = partition.density(bundle)
    old_rank = partition.rank()
    new_pairs = []
    for idx, (x, s) in enumerate(partition.pairs):
        if not x or not s:
            new_pairs.append((x, s))
            continue
        try:
            out = refine_pair(bundle, x, s, params)
        except PostconditionFailed as exc:
            raise PostconditionFailed(f"pair {idx}: {exc}",
                                      details=exc.details) from exc
        if isinstance(out, GreedyRanLong):
            return out.witness
        new_pairs.extend(out.pairs)
        if out.zpart:
            new_pairs.append((out.zpart, frozenset()))
    refined = BundlePartition(tuple(new_pairs))
    problems = []
    if len(refined.pairs) > (params.r_b ** params.d + 2) * len(partition.pairs):
        problems.append("part count grew beyond (r_b^d + 2) |P|")
    if not refined.validate(bundle):
        problems.append("result is not a partition")
    if not refined.is_partial_coloring(bundle):
        problems.append("result is not a partial coloring")
    new_rank = refined.rank()
    if old_rank is not None and new_rank is not None \
            and new_rank < params.alpha * old_rank:
        problems.append("rank fell below alpha times the previous rank")
    if refined.density(bundle) < min(Fraction(1), params.eta + old_density):
        problems.append("partition density did not gain eta")
    if problems:
        raise PostconditionFailed("partition refinement postconditions "
                                  "failed: " + "; ".join(problems),
                                  details=problems)
    return refined


# -- bounded-dimension coloring -------------------------------------------------

@dataclass
class DimColoringResult:
    """Outcome of the coloring pipeline: a proper coloring of the base minus
    the inherently uncolorable singleton edges, or a dimension witness."""

    coloring: Optional[Coloring]
    witness: Optional[DimWitness]
    singleton_edges: tuple = ()
    colors_used: int = 0
    rounds: int = 0
    parts: int = 0

    @property
    def kind(self) -> str:
        return "witness" if self.witness is not None else "coloring"


def _check_fiber_density(bundle: FiberBundle, eps: Fraction):
    total = bundle.universe_size()
    for v in range(bundle.base.n):
        if len(bundle.gamma[v]) < eps * total:
            raise HypothesisViolated(
                f"fiber of vertex {v} has {len(bundle.gamma[v])} of {total} "
                f"edges, below eps={eps}")


def bounded_dim_coloring(bundle: FiberBundle,
                         params: RefineParams) -> DimColoringResult:
    """Iterate partition refinement to density one, then color.

    Parts that kept fiber edges are colored through a greedy maximal
    matching: a matching of size d inside such a part is audited and, if
    sound, returned as a dimension witness; otherwise the matched vertices
    get private colors and the rest of the part one shared color.  Parts
    without fiber edges are independent and take a single color.  For a
    1-uniform base the edges of dense parts are collected as uncolorable
    singletons instead.
    """
    r_b = bundle.base.uniformity()
    if r_b == "mixed":
        raise NonUniform("bounded-dimension coloring needs a uniform base")
    _check_fiber_density(bundle, params.eps)
    part = BundlePartition.initial(bundle)
    max_rounds = math.ceil(1 / params.eta) + 1
    rounds = 0
    while part.density(bundle) < 1:
        if rounds >= max_rounds:
            raise PostconditionFailed(
                f"density did not reach one within {max_rounds} refinements")
        got = refine_partition(bundle, part, params)
        if isinstance(got, DimWitness):
            return DimColoringResult(None, got, rounds=rounds,
                                     parts=len(part.pairs))
        part = got
        rounds += 1

    colors = [-1] * bundle.base.n
    next_color = 0
    singletons = []
    for x, s in part.pairs:
        if not x:
            continue
        if not s:
            for v in x:
                colors[v] = next_color
            next_color += 1
            continue
        matching = []
        used = set()
        for e in _edges_within(bundle.base, x):
            if not (used & set(e)):
                matching.append(e)
                used |= set(e)
        if len(matching) >= params.d:
            witness = DimWitness(tuple(matching[:params.d]))
            copies = witness.audit(bundle, params.pattern)
            return DimColoringResult(None, DimWitness(witness.edges, copies),
                                     rounds=rounds, parts=len(part.pairs))
        if r_b == 1:
            singletons.extend(matching)
            for v in x:
                colors[v] = next_color
            next_color += 1
            continue
        for v in sorted(used):
            colors[v] = next_color
            next_color += 1
        for v in x - used:
            colors[v] = next_color
        next_color += 1

    coloring = Coloring.from_raw(colors)
    check_base = Hypergraph(
        bundle.base.n,
        [e for e in bundle.base.edges if len(e) > 1]) \
        if singletons else bundle.base
    if not is_weak_coloring(check_base, coloring):
        raise PostconditionFailed("assembled coloring is not proper")
    return DimColoringResult(coloring, None, tuple(singletons),
                             coloring.color_count, rounds, len(part.pairs))


# -- merging ------------------------------------------------------------------

@dataclass(frozen=True)
class MergeStep:
    x: int
    y: int
    z: int
    edges_before: tuple
    edges_after: tuple


@dataclass(frozen=True)
class MergeTrace:
    original_n: int
    steps: tuple

    def final_vertex_map(self):
        """original vertex -> the vertex representing it after all merges."""
        out = {v: v for v in range(self.original_n)}
        for st in self.steps:
            for v, tgt in list(out.items()):
                if tgt in (st.x, st.y):
                    out[v] = st.z
        return out


def _overlap_qualifies(lam, count: int, total: int) -> bool:
    if isinstance(lam, TinyPower):
        return lam.times_at_most(total, count)
    return count >= lam * total


def merge_overlaps(bundle: FiberBundle, lam,
                   full_size: Optional[int] = None):
    """Repeatedly merge vertex pairs with large common fiber inside
    full-size edges; merged vertices keep the intersected fiber.

    The merged vertex gets a fresh index; the swallowed vertices stay as
    isolated placeholders so indices remain stable for the trace.  Merging
    stops when no full-size edge carries a qualifying pair (a zero-merge
    trace is valid output).
    """
    base = bundle.base
    sizes = [len(e) for e in base.edges]
    full = full_size if full_size is not None else (max(sizes) if sizes else 0)
    total = bundle.universe_size()
    gamma = list(bundle.gamma)
    edges = list(base.edges)
    n = base.n
    steps = []
    while True:
        hit = None
        for e in sorted(edges):
            if len(e) != full:
                continue
            for a, b in itertools.combinations(e, 2):
                if _overlap_qualifies(lam, len(gamma[a] & gamma[b]), total):
                    hit = (a, b)
                    break
            if hit:
                break
        if hit is None:
            break
        a, b = hit
        z = n
        before = tuple(sorted(edges))
        new_edges = set()
        for e in edges:
            es = set(e)
            if es & {a, b}:
                es = (es - {a, b}) | {z}
            new_edges.add(tuple(sorted(es)))
        edges = sorted(new_edges)
        gamma.append(gamma[a] & gamma[b])
        n += 1
        steps.append(MergeStep(a, b, z, before, tuple(edges)))
    merged = FiberBundle(Hypergraph(n, edges), bundle.fiber_size,
                         bundle.r_gamma, gamma)
    return merged, MergeTrace(base.n, tuple(steps))


def unmerge_coloring(trace: MergeTrace, coloring: Coloring) -> Coloring:
    """Unwind a merge trace: a merged vertex inside a singleton edge splits
    into two fresh colors, otherwise both preimages inherit its color."""
    n_final = trace.original_n + len(trace.steps)
    if len(coloring.assignment) != n_final:
        raise ImproperInput(
            f"coloring covers {len(coloring.assignment)} vertices, "
            f"merged bundle has {n_final}")
    if trace.steps:
        a = coloring.assignment
        for e in trace.steps[-1].edges_after:
            if len(e) > 1 and len({a[v] for v in e}) == 1:
                raise ImproperInput(
                    f"input coloring leaves edge {e} monochromatic")
    colors = list(coloring.assignment)
    fresh = max(colors, default=-1) + 1
    for st in reversed(trace.steps):
        in_singleton = (st.z,) in st.edges_after
        if in_singleton:
            colors[st.x] = fresh
            colors[st.y] = fresh + 1
            fresh += 2
        else:
            colors[st.x] = colors[st.z]
            colors[st.y] = colors[st.z]
    return Coloring.from_raw(colors[:trace.original_n])


def _map_witness_back(trace: MergeTrace, pre_bundle: FiberBundle,
                      witness: DimWitness, pattern: Hypergraph) -> DimWitness:
    """Translate a witness on the merged bundle to one on the pre-merge
    bundle by choosing preimage edges, then re-audit."""
    fmap = trace.final_vertex_map()
    image = {}
    for e in pre_bundle.base.edges:
        image.setdefault(tuple(sorted({fmap[v] for v in e})), e)
    pre_edges = []
    for e in witness.edges:
        key = tuple(sorted(e))
        if key in image:
            pre_edges.append(image[key])
        else:
            raise AuditFailed(f"no preimage for merged witness edge {key}")
    out = DimWitness(tuple(pre_edges))
    copies = out.audit(pre_bundle, pattern)
    return DimWitness(out.edges, copies)


def _product_coloring(c1: Coloring, c2: Coloring, n: int) -> Coloring:
    if n == 0:
        return Coloring((), 0)
    width = c2.color_count
    return Coloring.from_raw([c1.assignment[v] * width + c2.assignment[v]
                              for v in range(n)])


def color_with_dimension(bundle: FiberBundle,
                         params: RefineParams) -> DimColoringResult:
    """Full driver for bases with edge sizes 1..r_b.

    Full-size edges whose vertex pairs all have small fiber overlap are
    colored by the bounded-dimension loop; the remaining full-size edges are
    shrunk by merging their high-overlap pairs and the shrunken bundle is
    recursed on at the merge threshold as the new density floor.  Colorings
    are combined as products and pulled back through the merge trace.
    Singleton edges are collected and reported; they are never colorable.
    """
    _check_fiber_density(bundle, params.eps)
    base = bundle.base
    singleton_edges = tuple(e for e in base.edges if len(e) == 1)
    sizes = [len(e) for e in base.edges]
    r_b = max(sizes) if sizes else 0

    if r_b <= 1:
        d_got, witness = dim_h(bundle, params.pattern, params.d)
        if d_got >= params.d:
            return DimColoringResult(None, witness)
        col = Coloring.from_raw([0] * base.n) if base.n else Coloring((), 0)
        return DimColoringResult(col, None, singleton_edges, 1 if base.n else 0)

    lam = params.lam
    total = bundle.universe_size()

    def pair_small(e):
        return all(not _overlap_qualifies(lam, len(bundle.gamma[a] & bundle.gamma[b]), total)
                   for a, b in itertools.combinations(e, 2))

    bprime = [e for e in base.edges if len(e) == r_b and pair_small(e)]
    bpset = set(bprime)
    rest = [e for e in base.edges if e not in bpset]

    sub = FiberBundle(Hypergraph(base.n, bprime), bundle.fiber_size,
                      bundle.r_gamma, bundle.gamma)
    out1 = bounded_dim_coloring(sub, params)
    if out1.witness is not None:
        return DimColoringResult(None, out1.witness)

    rest_bundle = FiberBundle(Hypergraph(base.n, rest), bundle.fiber_size,
                              bundle.r_gamma, bundle.gamma)
    merged, trace = merge_overlaps(rest_bundle, lam, full_size=r_b)

    # full-size edges surviving the merge now satisfy the small-overlap
    # condition (otherwise the loop would have continued); color them as a
    # second bounded-dimension batch at the merge threshold
    stall = [e for e in merged.base.edges if len(e) == r_b]
    deeper = [e for e in merged.base.edges if len(e) < r_b]
    stall_params = params.with_eps(min(params.eps, lam), r_b=r_b)
    if stall:
        stall_bundle = FiberBundle(Hypergraph(merged.base.n, stall),
                                   bundle.fiber_size, bundle.r_gamma,
                                   merged.gamma)
        out_stall = bounded_dim_coloring(stall_bundle, stall_params)
        if out_stall.witness is not None:
            back = _map_witness_back(trace, rest_bundle, out_stall.witness,
                                     params.pattern)
            return DimColoringResult(None, back)
        c_stall = out_stall.coloring
    else:
        c_stall = Coloring.from_raw([0] * merged.base.n) \
            if merged.base.n else Coloring((), 0)

    deep_bundle = FiberBundle(Hypergraph(merged.base.n, deeper),
                              bundle.fiber_size, bundle.r_gamma, merged.gamma)
    out_deep = color_with_dimension(deep_bundle,
                                    params.with_eps(min(params.eps, lam),
                                                    r_b=max(r_b - 1, 1)))
    if out_deep.witness is not None:
        back = _map_witness_back(trace, rest_bundle, out_deep.witness,
                                 params.pattern)
        return DimColoringResult(None, back)

    c_merged = _product_coloring(c_stall, out_deep.coloring, merged.base.n)
    c_rest = unmerge_coloring(trace, c_merged)
    final = _product_coloring(out1.coloring, c_rest, base.n)
    colorable = Hypergraph(base.n, [e for e in base.edges if len(e) > 1])
    if not is_weak_coloring(colorable, final):
        raise PostconditionFailed("combined coloring is not proper")
    return DimColoringResult(final, None, singleton_edges,
                             final.color_count)
