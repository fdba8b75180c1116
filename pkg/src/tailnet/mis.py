"""Independent sets of dependence graphs.

``greedy_mis`` is the production heuristic (minimum-degree greedy);
``exact_mis`` is a bitmask branch-and-bound used on small blocks and as a
test oracle.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

from .depnet import DependenceGraph
from .errors import ParseError, SizeLimitError
from .partition import Partition, subgraph

EXACT_LIMIT = 30
DEFAULT_EXACT_CUTOFF = 25


@dataclass(frozen=True)
class IndependentSet:
    vertices: frozenset
    source_block: int | None = None
    exact: bool = False

    def __len__(self):
        return len(self.vertices)

    def sorted(self) -> list[str]:
        return sorted(self.vertices)


def is_independent(g: DependenceGraph, vs) -> bool:
    vs = set(vs)
    return all(not (g.adj[v] & vs) for v in vs)


def is_maximal(g: DependenceGraph, vs) -> bool:
    vs = set(vs)
    return all(g.adj[v] & vs for v in g.vertices if v not in vs)


def greedy_mis(g: DependenceGraph) -> IndependentSet:
    """Pick the minimum-degree vertex of the remaining graph until it is empty.

    Degree ties go to the lexicographically smallest ticker.
    """
    remaining = {v: set(g.adj[v]) for v in g.vertices}
    chosen = set()
    while remaining:
        v = min(remaining, key=lambda u: (len(remaining[u]), u))
        chosen.add(v)
        gone = {v} | remaining[v]
        for u in gone:
            for w in remaining.pop(u):
                if w not in gone:
                    remaining[w].discard(u)
    return IndependentSet(frozenset(chosen))


def _popcount(x: int) -> int:
    return bin(x).count("1")


def exact_mis(g: DependenceGraph, limit: int = EXACT_LIMIT) -> IndependentSet:
    """Maximum independent set by branch and bound.

    Branches on a maximum-degree vertex of the remaining graph (include it
    and drop its neighbourhood, then exclude it).  The greedy solution seeds
    the incumbent; the first strictly better set found replaces it, so the
    witness is deterministic.
    """
    n = len(g.vertices)
    if n > limit:
        raise SizeLimitError(f"exact_mis is limited to {limit} vertices, got {n}")
    verts = sorted(g.vertices)
    index = {v: i for i, v in enumerate(verts)}
    nbr = [0] * n
    for a, b in g.edges:
        nbr[index[a]] |= 1 << index[b]
        nbr[index[b]] |= 1 << index[a]

    best_set = 0
    for v in greedy_mis(g).vertices:
        best_set |= 1 << index[v]
    best_size = _popcount(best_set)

    def search(rem: int, chosen: int, size: int) -> None:
        nonlocal best_set, best_size
        # vertices with no remaining neighbour are always taken
        free = 0
        r = rem
        while r:
            low = r & -r
            i = low.bit_length() - 1
            if not nbr[i] & rem:
                free |= low
            r ^= low
        if free:
            rem &= ~free
            chosen |= free
            size += _popcount(free)
        if not rem:
            if size > best_size:
                best_size, best_set = size, chosen
            return
        if size + _upper_bound(rem) <= best_size:
            return
        pivot, pdeg = -1, -1
        r = rem
        while r:
            low = r & -r
            i = low.bit_length() - 1
            d = _popcount(nbr[i] & rem)
            if d > pdeg:
                pivot, pdeg = i, d
            r ^= low
        search(rem & ~(1 << pivot) & ~nbr[pivot], chosen | (1 << pivot), size + 1)
        search(rem & ~(1 << pivot), chosen, size)

    def _upper_bound(rem: int) -> int:
        # greedy clique cover: an independent set takes at most one vertex per clique
        cliques = 0
        while rem:
            low = rem & -rem
            clique = low
            cand = nbr[low.bit_length() - 1] & rem
            while cand:
                c = cand & -cand
                clique |= c
                cand &= nbr[c.bit_length() - 1]
            rem &= ~clique
            cliques += 1
        return cliques

    search((1 << n) - 1, 0, 0)
    members = frozenset(verts[i] for i in range(n) if best_set >> i & 1)
    return IndependentSet(members, exact=True)


def mis_per_block(g: DependenceGraph, p: Partition,
                  use_exact_below: int = DEFAULT_EXACT_CUTOFF) -> list[IndependentSet]:
    out = []
    for b, members in enumerate(p.blocks):
        if len(members) == 1:
            out.append(IndependentSet(frozenset(members), b, exact=True))
            continue
        sub = subgraph(g, members)
        s = exact_mis(sub) if len(members) <= use_exact_below else greedy_mis(sub)
        out.append(IndependentSet(s.vertices, b, s.exact))
    return out


def union_members(sets) -> list[str]:
    return sorted(set().union(*(s.vertices for s in sets))) if sets else []


def write_mis_csv(sets: list[IndependentSet], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["block_id", "ticker", "exact_flag"])
        for s in sets:
            for t in s.sorted():
                w.writerow(["" if s.source_block is None else s.source_block, t, int(s.exact)])


def read_mis_csv(path) -> list[IndependentSet]:
    groups: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["block_id", "ticker", "exact_flag"]:
            raise ParseError("expected header 'block_id,ticker,exact_flag'", 1)
        for row in reader:
            if not row:
                continue
            try:
                b, t, flag = row
                key = int(b) if b != "" else None
                members, exact = groups.setdefault(key, (set(), int(flag) == 1))
            except ValueError:
                raise ParseError(f"malformed row {row!r}", reader.line_num) from None
            members.add(t)
    return [IndependentSet(frozenset(m), b, e) for b, (m, e) in groups.items()]
