"""Canonical text formats: hypergraphs (nhg), fiber bundles (nfb), set
families (nsf), and label sidecars.

Writers emit a unique canonical byte stream (sorted everything), readers
accept any order; write -> read -> write is byte-identical.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ImproperInput
from .hypercore import Hypergraph
from .bundles import FiberBundle
from .kneserlab import SetFamily


def write_nhg(hg: Hypergraph) -> str:
    lines = ["nhg 1", f"{hg.n} {len(hg.edges)}"]
    lines.extend(" ".join(map(str, e)) for e in hg.edges)
    return "\n".join(lines) + "\n"


def read_nhg(text: str) -> Hypergraph:
    lines = [ln for ln in text.splitlines()]
    if not lines or lines[0].strip() != "nhg 1":
        raise ImproperInput("missing 'nhg 1' header")
    n, m = map(int, lines[1].split())
    edges = [tuple(map(int, ln.split())) for ln in lines[2:2 + m] if ln.strip()]
    if len(edges) != m:
        raise ImproperInput(f"expected {m} edges, found {len(edges)}")
    return Hypergraph(n, edges)


def write_labels(labels) -> str:
    return "".join(f"{i} {lab}\n" for i, lab in enumerate(labels))


def read_labels(text: str) -> dict:
    out = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        idx, lab = ln.split(maxsplit=1)
        out[int(idx)] = lab
    return out


def write_nfb(bundle: FiberBundle) -> str:
    lines = ["nfb 1", f"{bundle.fiber_size} {bundle.r_gamma}"]
    lines.append(write_nhg(bundle.base).rstrip("\n"))
    for v in range(bundle.base.n):
        fes = sorted(tuple(sorted(fe)) for fe in bundle.gamma[v])
        lines.append(f"{v} {len(fes)}")
        lines.extend(" ".join(map(str, fe)) for fe in fes)
    return "\n".join(lines) + "\n"


def read_nfb(text: str) -> FiberBundle:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "nfb 1":
        raise ImproperInput("missing 'nfb 1' header")
    fiber_size, r_gamma = map(int, lines[1].split())
    if lines[2].strip() != "nhg 1":
        raise ImproperInput("expected inline 'nhg 1' base block")
    n, m = map(int, lines[3].split())
    base = read_nhg("\n".join(lines[2:4 + m]) + "\n")
    gamma = [set() for _ in range(n)]
    pos = 4 + m
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        v, count = map(int, lines[pos].split())
        pos += 1
        for _ in range(count):
            gamma[v].add(tuple(map(int, lines[pos].split())))
            pos += 1
    return FiberBundle(base, fiber_size, r_gamma, gamma)


def write_nsf(fam: SetFamily) -> str:
    lines = ["nsf 1", f"{fam.n} {len(fam.members)}"]
    for m in fam.members:
        lines.append(" ".join(map(str, m)) if m else "-")
    return "\n".join(lines) + "\n"


def read_nsf(text: str) -> SetFamily:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "nsf 1":
        raise ImproperInput("missing 'nsf 1' header")
    n, count = map(int, lines[1].split())
    members = []
    for ln in lines[2:2 + count]:
        ln = ln.strip()
        members.append(() if ln == "-" else tuple(map(int, ln.split())))
    if len(members) != count:
        raise ImproperInput(f"expected {count} members, found {len(members)}")
    return SetFamily.build(n, members)


def format_fraction(x) -> str:
    """Exact rational plus a presentation decimal."""
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator} (~{float(f):.6g})"
