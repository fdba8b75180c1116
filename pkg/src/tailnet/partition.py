"""Sector and Girvan-Newman partitions of a dependence graph."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .depnet import DependenceGraph
from .errors import ParseError, ValidationError

SECTOR = "sector"
GIRVAN_NEWMAN = "girvan_newman"


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[str, ...], ...]
    method: str
    modularity: float | None = None
    labels: tuple[str, ...] | None = None  # e.g. sector name per block
    block_of: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        block_of = {}
        for b, members in enumerate(self.blocks):
            for v in members:
                if v in block_of:
                    raise ValidationError(f"vertex {v!r} appears in two blocks")
                block_of[v] = b
        object.__setattr__(self, "block_of", block_of)

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class RemovalEvent:
    edge: tuple[str, str]
    betweenness: float
    components: int


@dataclass
class Dendrogram:
    events: list[RemovalEvent] = field(default_factory=list)
    # (removals so far, component count, modularity) whenever the count changes
    modularity_trace: list[tuple[int, int, float]] = field(default_factory=list)


def make_partition(blocks: Iterable[Iterable[str]], method: str, g: DependenceGraph | None = None,
                   labels: Mapping[tuple[str, ...], str] | None = None) -> Partition:
    """Canonical ordering: larger blocks first, then by smallest member."""
    blocks = [tuple(sorted(b)) for b in blocks if b]
    blocks.sort(key=lambda b: (-len(b), b[0]))
    q = modularity(g, blocks) if g is not None else None
    lab = tuple(labels[b] for b in blocks) if labels is not None else None
    return Partition(tuple(blocks), method, q, lab)


def _check_cover(g: DependenceGraph, blocks) -> None:
    seen = [v for b in blocks for v in b]
    if sorted(seen) != sorted(g.vertices):
        raise ValidationError("partition does not exactly cover the graph vertices")


def modularity(g: DependenceGraph, p: Partition | Iterable[Iterable[str]]) -> float:
    blocks = p.blocks if isinstance(p, Partition) else [tuple(b) for b in p]
    _check_cover(g, blocks)
    m = len(g.edges)
    if m == 0:
        return 0.0
    q = 0.0
    for b in blocks:
        members = set(b)
        intra = sum(1 for v in b for w in g.adj[v] if w in members) / 2
        deg = sum(len(g.adj[v]) for v in b)
        q += intra / m - (deg / (2.0 * m)) ** 2
    return q


def sector_partition(g: DependenceGraph, sectors: Mapping[str, str] | None = None) -> Partition:
    sectors = sectors if sectors is not None else g.sectors
    if sectors is None:
        raise ValidationError("no sector labels available")
    groups: dict[str, list[str]] = {}
    for v in g.vertices:
        if v not in sectors:
            raise ValidationError(f"vertex {v!r} has no sector")
        groups.setdefault(sectors[v], []).append(v)
    labels = {tuple(sorted(members)): s for s, members in groups.items()}
    return make_partition(groups.values(), SECTOR, g, labels)


def connected_components(g: DependenceGraph, within: Iterable[str] | None = None) -> list[list[str]]:
    todo = list(g.vertices) if within is None else sorted(within)
    seen, comps = set(), []
    for s in todo:
        if s in seen:
            continue
        comp, queue = [], deque([s])
        seen.add(s)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for w in g.adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def _betweenness_matrix(a: np.ndarray) -> np.ndarray:
    """Edge betweenness of a dense 0/1 adjacency matrix, one count per unordered pair.

    Brandes' accumulation run for all sources at once: the BFS advances one
    hop per step as a matrix product, so ``sigma[s, v]`` counts shortest
    ``s``-``v`` paths and ``delta[s, v]`` is the dependency of ``s`` on ``v``.
    """
    k = len(a)
    if k == 0:
        return np.zeros((0, 0))
    seen = np.eye(k, dtype=bool)
    frontier = np.eye(k)
    sigma = np.eye(k)
    levels = [seen.copy()]
    while True:
        reach = frontier @ a
        new = (reach > 0) & ~seen
        if not new.any():
            break
        seen |= new
        frontier = np.where(new, reach, 0.0)
        sigma += frontier
        levels.append(new)
    delta = np.zeros((k, k))
    eb = np.zeros((k, k))
    safe = np.where(sigma > 0, sigma, 1.0)
    for d in range(len(levels) - 1, 0, -1):
        y = np.where(levels[d], (1.0 + delta) / safe, 0.0)
        x = np.where(levels[d - 1], sigma, 0.0)
        eb += (x.T @ y) * a
        delta += x * (y @ a)
    return (eb + eb.T) / 2.0


def _adjacency(g: DependenceGraph, names) -> np.ndarray:
    index = {v: i for i, v in enumerate(names)}
    a = np.zeros((len(names), len(names)))
    for u, v in g.edges:
        a[index[u], index[v]] = a[index[v], index[u]] = 1.0
    return a


def edge_betweenness(g: DependenceGraph) -> dict:
    """Shortest-path betweenness of every edge, one count per unordered pair."""
    names = sorted(g.vertices)
    index = {v: i for i, v in enumerate(names)}
    eb = _betweenness_matrix(_adjacency(g, names))
    return {(u, v): float(eb[index[u], index[v]]) for u, v in g.edges}


def _pick_edge(a: np.ndarray, eb: np.ndarray):
    live = np.triu(a, 1) > 0
    top = eb[live].max()
    tol = 1e-9 * max(1.0, top)
    # argwhere scans row-major, so the first hit is the smallest index pair
    i, j = np.argwhere(live & (eb >= top - tol))[0]
    return (int(i), int(j)), float(eb[i, j])


def _component(a: np.ndarray, s: int) -> list:
    seen, queue = {s}, deque([s])
    while queue:
        u = queue.popleft()
        for w in np.flatnonzero(a[u]).tolist():
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return sorted(seen)


def girvan_newman(g: DependenceGraph, target_blocks: int | None = None) -> tuple[Partition, Dendrogram]:
    """Divisive community detection by repeated removal of the top-betweenness edge.

    With ``target_blocks`` the process stops as soon as the component count
    reaches it.  Otherwise edges are removed until no later level can beat
    the best modularity (measured on ``g``) seen so far, and that level is
    returned; the earliest level wins ties.  Betweenness is recomputed
    exactly after each removal, but only inside the component that lost
    the edge.
    """
    n = len(g.vertices)
    if target_blocks is not None and not 1 <= target_blocks <= n:
        raise ValidationError(f"target_blocks must be in [1, {n}], got {target_blocks}")

    names = sorted(g.vertices)
    index = {v: i for i, v in enumerate(names)}
    a = _adjacency(g, names)

    def as_names(comps):
        return [[names[i] for i in c] for c in comps]

    comps = [[index[v] for v in c] for c in connected_components(g)]
    dendro = Dendrogram()
    q = modularity(g, as_names(comps))
    dendro.modularity_trace.append((0, len(comps), q))
    best_q, best = q, list(comps)
    if target_blocks is not None and len(comps) >= target_blocks:
        return make_partition(as_names(comps), GIRVAN_NEWMAN, g), dendro

    eb = _betweenness_matrix(a)
    step = 0
    while a.any():
        # ties resolve to the lexicographically smallest ticker pair; index
        # order equals ticker order because ``names`` is sorted
        (i, j), value = _pick_edge(a, eb)
        a[i, j] = a[j, i] = 0.0
        step += 1
        comp_i = _component(a, i)
        split = j not in comp_i
        touched = [comp_i, _component(a, j)] if split else [comp_i]
        idx = np.array(sorted(v for c in touched for v in c))
        sub = np.ix_(idx, idx)
        eb[sub] = _betweenness_matrix(a[sub])
        eb[i, j] = eb[j, i] = 0.0
        if split:
            comps = [c for c in comps if i not in c] + touched
        dendro.events.append(RemovalEvent((names[i], names[j]), value, len(comps)))
        if split:
            q = modularity(g, as_names(comps))
            dendro.modularity_trace.append((step, len(comps), q))
            if q > best_q:
                best_q, best = q, list(comps)
            if target_blocks is not None and len(comps) >= target_blocks:
                return make_partition(as_names(comps), GIRVAN_NEWMAN, g), dendro
            # later partitions refine this one, so their modularity stays below
            # the current fraction of intra-block edges
            if target_blocks is None and _intra_fraction(g, as_names(comps)) <= best_q:
                break
    return make_partition(as_names(best), GIRVAN_NEWMAN, g), dendro


def _intra_fraction(g: DependenceGraph, blocks) -> float:
    label = {v: i for i, b in enumerate(blocks) for v in b}
    return sum(1 for a, b in g.edges if label[a] == label[b]) / len(g.edges)


def subgraph(g: DependenceGraph, vs: Iterable[str]) -> DependenceGraph:
    vs = set(vs)
    unknown = vs - set(g.vertices)
    if unknown:
        raise ValidationError(f"unknown vertices {sorted(unknown)}")
    keep = tuple(v for v in g.vertices if v in vs)
    edges = {e for e in g.edges if e[0] in vs and e[1] in vs}
    sectors = {v: g.sectors[v] for v in keep if v in g.sectors} if g.sectors else None
    return DependenceGraph(keep, edges, g.threshold, sectors)


# ---- artifact IO -----------------------------------------------------------

def write_partition_csv(p: Partition, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "block_id", "method"])
        for v in sorted(p.block_of):
            w.writerow([v, p.block_of[v], p.method])


def read_partition_csv(path, g: DependenceGraph | None = None) -> Partition:
    blocks: dict[int, list[str]] = {}
    methods = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["ticker", "block_id", "method"]:
            raise ParseError("expected header 'ticker,block_id,method'", 1)
        for row in reader:
            if not row:
                continue
            try:
                t, b, m = row
                blocks.setdefault(int(b), []).append(t)
            except ValueError:
                raise ParseError(f"malformed row {row!r}", reader.line_num) from None
            methods.add(m)
    if len(methods) > 1:
        raise ParseError(f"mixed partition methods {sorted(methods)}")
    if sorted(blocks) != list(range(len(blocks))):
        raise ParseError("block ids must be dense 0..B-1")
    ordered = [tuple(sorted(blocks[i])) for i in range(len(blocks))]
    labels = None
    if g is not None and g.sectors and methods == {SECTOR}:
        labels = tuple(g.sectors[b[0]] for b in ordered)
    q = modularity(g, ordered) if g is not None else None
    return Partition(tuple(ordered), methods.pop() if methods else GIRVAN_NEWMAN, q, labels)


def write_dendrogram_csv(d: Dendrogram, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "edge_a", "edge_b", "betweenness", "components"])
        for i, ev in enumerate(d.events, start=1):
            w.writerow([i, ev.edge[0], ev.edge[1], repr(ev.betweenness), ev.components])
