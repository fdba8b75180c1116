"""Threshold dependence networks and their summary statistics.

An undirected edge joins two tickers whenever their EDM estimate is at
least the threshold.  Distances are unweighted hop counts; path length and
diameter are taken over connected, distinct vertex pairs only.
"""
from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError
from .extremal_dep import EDMMatrix

DEFAULT_THRESHOLDS = (0.05, 0.1, 0.15, 0.2, 0.25)


def _edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class DependenceGraph:
    vertices: tuple[str, ...]
    edges: frozenset
    threshold: float | None = None
    sectors: Mapping[str, str] | None = None
    adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if len(set(vertices)) != len(vertices):
            raise ValidationError("duplicate vertices")
        vset = set(vertices)
        edges = set()
        for a, b in self.edges:
            if a == b:
                raise ValidationError(f"self-loop on {a!r}")
            if a not in vset or b not in vset:
                raise ValidationError(f"edge ({a}, {b}) references an unknown vertex")
            edges.add(_edge(a, b))
        adj = {v: set() for v in vertices}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "adj", {v: frozenset(n) for v, n in adj.items()})
        if self.sectors is not None:
            object.__setattr__(self, "sectors", dict(self.sectors))

    def __eq__(self, other):
        if not isinstance(other, DependenceGraph):
            return NotImplemented
        return (self.vertices == other.vertices and self.edges == other.edges
                and self.threshold == other.threshold and self.sectors == other.sectors)

    def degree(self, v: str) -> int:
        return len(self.adj[v])

    def has_edge(self, a: str, b: str) -> bool:
        return b in self.adj.get(a, ())

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def without_edge(self, a: str, b: str) -> "DependenceGraph":
        return DependenceGraph(self.vertices, self.edges - {_edge(a, b)},
                               self.threshold, self.sectors)


@dataclass(frozen=True)
class NetworkStats:
    n_vertices: int
    n_edges: int
    isolated_count: int
    average_degree: float
    diameter: int
    density: float
    average_clustering: float
    average_path_length: float
    degrees: dict
    clustering: dict

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DegreeCCDF:
    degrees: tuple[int, ...]  # every vertex degree, ascending
    points: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class PowerLawFit:
    alpha_hat: float
    xmin: float
    n_tail: int


def build_graph(m: EDMMatrix, theta: float, sectors: Mapping[str, str] | None = None) -> DependenceGraph:
    v = m.values
    iu, ju = np.triu_indices(len(m.tickers), k=1)
    keep = v[iu, ju] >= theta
    edges = {(m.tickers[i], m.tickers[j]) for i, j in zip(iu[keep], ju[keep])}
    return DependenceGraph(m.tickers, edges, theta, sectors)


def bfs_distances(g: DependenceGraph, source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _clustering_fraction(g: DependenceGraph, v: str) -> Fraction:
    nbrs = sorted(g.adj[v])
    k = len(nbrs)
    if k < 2:
        return Fraction(0)
    links = sum(1 for i, a in enumerate(nbrs) for b in nbrs[i + 1:] if b in g.adj[a])
    return Fraction(2 * links, k * (k - 1))


def local_clustering(g: DependenceGraph, v: str) -> float:
    return float(_clustering_fraction(g, v))


def network_stats(g: DependenceGraph) -> NetworkStats:
    n = len(g.vertices)
    if n < 1:
        raise ValidationError("network_stats needs at least one vertex")
    m = len(g.edges)
    degrees = {v: g.degree(v) for v in g.vertices}
    # exact rationals, so the average is correctly rounded
    exact = {v: _clustering_fraction(g, v) for v in g.vertices}
    clustering = {v: float(c) for v, c in exact.items()}
    total, pairs, diameter = 0, 0, 0
    for s in g.vertices:
        for t, d in bfs_distances(g, s).items():
            if t > s:
                total += d
                pairs += 1
                diameter = max(diameter, d)
    return NetworkStats(
        n_vertices=n,
        n_edges=m,
        isolated_count=sum(1 for d in degrees.values() if d == 0),
        average_degree=2.0 * m / n,
        diameter=diameter,
        density=m / (n * (n - 1) / 2) if n > 1 else 0.0,
        average_clustering=float(sum(exact.values(), Fraction(0)) / n),
        average_path_length=total / pairs if pairs else 0.0,
        degrees=degrees,
        clustering=clustering,
    )


def degree_ccdf(g: DependenceGraph | Iterable[int]) -> DegreeCCDF:
    """Empirical ``P(degree >= d)`` at each distinct degree ``d``."""
    if isinstance(g, DependenceGraph):
        degrees = sorted(g.degree(v) for v in g.vertices)
    else:
        degrees = sorted(int(d) for d in g)
    if not degrees:
        raise ValidationError("degree_ccdf needs at least one vertex")
    n = len(degrees)
    points = []
    for i, d in enumerate(degrees):
        if i == 0 or d != degrees[i - 1]:
            points.append((d, (n - i) / n))
    return DegreeCCDF(tuple(degrees), tuple(points))


def fit_power_law(c: DegreeCCDF | Iterable[int], xmin: float | None = None) -> PowerLawFit:
    """Hill-type maximum likelihood fit of the degree tail exponent.

    ``alpha_hat = 1 + n_tail / sum(log(d / xmin))`` over degrees ``d >= xmin``.
    ``xmin`` defaults to the smallest positive degree.
    """
    degrees = np.asarray(c.degrees if isinstance(c, DegreeCCDF) else list(c), dtype=float)
    positive = degrees[degrees > 0]
    if positive.size == 0:
        raise InsufficientDataError("no positive degrees")
    if xmin is None:
        xmin = float(positive.min())
    if xmin < 1:
        raise ValidationError(f"xmin must be >= 1, got {xmin}")
    tail = positive[positive >= xmin]
    if tail.size < 2 or np.unique(tail).size < 2:
        raise InsufficientDataError(
            f"need at least 2 distinct degrees >= {xmin}, got {np.unique(tail).tolist()}")
    alpha = 1.0 + tail.size / float(np.log(tail / xmin).sum())
    return PowerLawFit(alpha_hat=alpha, xmin=float(xmin), n_tail=int(tail.size))


def threshold_sweep(m: EDMMatrix, thresholds: Iterable[float]) -> list[tuple[float, NetworkStats]]:
    thresholds = list(thresholds)
    if not thresholds:
        raise ValidationError("threshold list is empty")
    return [(float(t), network_stats(build_graph(m, t))) for t in thresholds]


# ---- artifact IO -----------------------------------------------------------

def write_edge_list(g: DependenceGraph, m: EDMMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker_a", "ticker_b", "edm_value"])
        for a, b in g.sorted_edges():
            w.writerow([a, b, f"{m.value(a, b):.6f}"])


def graph_to_dict(g: DependenceGraph) -> dict:
    return {
        "threshold": g.threshold,
        "vertices": list(g.vertices),
        "sectors": g.sectors,
        "edges": [list(e) for e in g.sorted_edges()],
    }


def graph_from_dict(d: dict) -> DependenceGraph:
    try:
        return DependenceGraph(d["vertices"], {tuple(e) for e in d["edges"]},
                               d.get("threshold"), d.get("sectors"))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed graph document: {exc}") from None


def write_graph_json(g: DependenceGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(g), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_graph_json(path) -> DependenceGraph:
    with open(path, encoding="utf-8") as fh:
        return graph_from_dict(json.load(fh))


def write_stats_json(s: NetworkStats, path, power_law: PowerLawFit | None = None,
                     threshold: float | None = None) -> None:
    doc = s.to_dict()
    doc["threshold"] = threshold
    doc["power_law"] = asdict(power_law) if power_law else None
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


SWEEP_COLUMNS = ("threshold", "isolated_vertices", "n_edges", "average_degree",
                 "network_diameter", "graph_density", "average_clustering",
                 "average_path_length")


def sweep_rows(sweep: list[tuple[float, NetworkStats]]) -> list[list[str]]:
    return [[repr(t), str(s.isolated_count), str(s.n_edges), f"{s.average_degree:.5f}",
             str(s.diameter), f"{s.density:.5f}", f"{s.average_clustering:.5f}",
             f"{s.average_path_length:.5f}"] for t, s in sweep]


def write_sweep_csv(sweep: list[tuple[float, NetworkStats]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        w.writerows(sweep_rows(sweep))


def write_ccdf_csv(c: DegreeCCDF, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["degree", "ccdf"])
        for d, f in c.points:
            w.writerow([d, repr(f)])
