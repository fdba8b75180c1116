import itertools

import numpy as np
import pytest

import oracles
from conftest import make_graph
from tailnet.errors import ValidationError
from tailnet.partition import (Partition, edge_betweenness, girvan_newman, make_partition,
                               modularity, read_partition_csv, sector_partition, subgraph,
                               write_dendrogram_csv, write_partition_csv)


def random_graph(n, p, rng, prefix="v"):
    verts = [f"{prefix}{i:02d}" for i in range(n)]
    edges = [(a, b) for a, b in itertools.combinations(verts, 2) if rng.random() < p]
    return make_graph(verts, edges)


def test_sector_partition_examples(triangle):
    p = sector_partition(triangle, {"a": "Energy", "b": "Energy", "c": "Energy"})
    assert p.blocks == (("a", "b", "c"),) and p.labels == ("Energy",)
    two = make_graph("ab", [])
    assert len(sector_partition(two, {"a": "X", "b": "Y"})) == 2


def test_sector_partition_missing():
    with pytest.raises(ValidationError, match="'b'"):
        sector_partition(make_graph("ab", []), {"a": "X"})


def test_block_ordering():
    p = make_partition([["z"], ["b", "c"], ["a"], ["d", "e", "f"]], "sector")
    assert p.blocks == (("d", "e", "f"), ("b", "c"), ("a",), ("z",))
    assert p.block_of["c"] == 1


def test_betweenness_examples(triangle, path3, barbell):
    assert edge_betweenness(triangle) == {("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 1.0}
    assert edge_betweenness(path3) == {("a", "b"): 2.0, ("b", "c"): 2.0}
    eb = edge_betweenness(barbell)
    assert eb[("c", "d")] == 9.0
    assert all(v < 9.0 for e, v in eb.items() if e != ("c", "d"))


def test_betweenness_matches_path_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(60):
        g = random_graph(int(rng.integers(2, 9)), 0.4, rng)
        ours = edge_betweenness(g)
        ref = oracles.edge_betweenness(list(g.vertices), sorted(g.edges))
        assert set(ours) == set(ref)
        for e in ref:
            assert ours[e] == pytest.approx(float(ref[e]), abs=1e-12)
        # total equals the sum of distances over connected unordered pairs
        total = sum(ours.values())
        d = oracles.floyd_warshall(oracles.adjacency_matrix(list(g.vertices), sorted(g.edges)))
        dist_sum = sum(d[i][j] for i in range(len(d)) for j in range(i + 1, len(d)) if d[i][j] != float("inf"))
        assert total == pytest.approx(dist_sum, abs=1e-9)


def test_modularity_examples(barbell):
    g = make_graph("abcdef", [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")])
    assert modularity(g, [list("abcdef")]) == pytest.approx(0.0, abs=1e-15)
    assert modularity(g, [list("abc"), list("def")]) == pytest.approx(0.5, abs=1e-15)
    assert modularity(barbell, [list("abc"), list("def")]) == pytest.approx(6 / 7 - 0.5, abs=1e-15)
    assert modularity(make_graph("ab", []), [["a"], ["b"]]) == 0.0


def test_modularity_random_vs_oracle():
    rng = np.random.default_rng(9)
    for _ in range(100):
        g = random_graph(int(rng.integers(2, 15)), 0.3, rng)
        labels = rng.integers(0, 4, size=len(g.vertices))
        blocks = [[v for v, l in zip(g.vertices, labels) if l == k] for k in range(4)]
        blocks = [b for b in blocks if b]
        q = modularity(g, blocks)
        assert q == pytest.approx(oracles.modularity(g.vertices, sorted(g.edges), blocks), abs=1e-12)
        assert -0.5 <= q < 1


def test_modularity_requires_cover(triangle):
    with pytest.raises(ValidationError):
        modularity(triangle, [["a", "b"]])


def test_gn_disconnected_cliques():
    g = make_graph("abcdef", [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")])
    p, d = girvan_newman(g)
    assert p.blocks == (("a", "b", "c"), ("d", "e", "f"))
    assert p.modularity == pytest.approx(0.5)
    # optimum at level 0: the trace starts there and nothing after beats it
    assert d.modularity_trace[0] == (0, 2, pytest.approx(0.5))


def test_gn_barbell(barbell):
    p, d = girvan_newman(barbell)
    assert p.blocks == (("a", "b", "c"), ("d", "e", "f"))
    assert d.events[0].edge == ("c", "d") and d.events[0].betweenness == 9.0
    assert p.modularity == pytest.approx(oracles.modularity(barbell.vertices, sorted(barbell.edges),
                                                            [list("abc"), list("def")]), abs=1e-15)
    p2, _ = girvan_newman(barbell, target_blocks=2)
    assert p2.blocks == p.blocks


def test_gn_isolated_are_singletons():
    g = make_graph("abcxy", [("a", "b"), ("b", "c")])
    p, _ = girvan_newman(g, target_blocks=3)
    assert ("x",) in p.blocks and ("y",) in p.blocks


def test_gn_target_too_large(triangle):
    with pytest.raises(ValidationError):
        girvan_newman(triangle, target_blocks=4)


def test_gn_target_equal_components():
    rng = np.random.default_rng(12)
    for _ in range(30):
        g = random_graph(int(rng.integers(1, 14)), 0.15, rng)
        comps = oracles.components(g.vertices, sorted(g.edges))
        p, d = girvan_newman(g, target_blocks=len(comps))
        assert [list(b) for b in p.blocks] == comps
        assert not d.events


def test_gn_dendrogram_monotone_and_exhaustive():
    rng = np.random.default_rng(13)
    for _ in range(30):
        g = random_graph(int(rng.integers(2, 14)), 0.3, rng)
        p, d = girvan_newman(g, target_blocks=len(g.vertices))
        counts = [e.components for e in d.events]
        assert counts == sorted(counts)
        assert sorted(v for b in p.blocks for v in b) == sorted(g.vertices)
        assert len(p.blocks) == len(g.vertices)


def test_gn_max_modularity_is_best_level():
    rng = np.random.default_rng(14)
    for _ in range(20):
        g = random_graph(int(rng.integers(4, 16)), 0.25, rng)
        p, d = girvan_newman(g)
        assert p.modularity == pytest.approx(max(q for _, _, q in d.modularity_trace), abs=1e-12)
        comps = oracles.components(g.vertices, sorted(g.edges))
        assert modularity(g, comps) >= 0


def test_subgraph(triangle):
    assert subgraph(triangle, "abc") == triangle
    assert subgraph(triangle, "ab").edges == {("a", "b")}
    s = subgraph(make_graph("abc", [("a", "b")]), "ac")
    assert s.vertices == ("a", "c") and not s.edges
    with pytest.raises(ValidationError):
        subgraph(triangle, "az")


def test_partition_rejects_overlap():
    with pytest.raises(ValidationError):
        Partition((("a", "b"), ("b",)), "sector")


def test_csv_roundtrip(tmp_path, barbell):
    p, d = girvan_newman(barbell)
    write_partition_csv(p, tmp_path / "c.csv")
    text = (tmp_path / "c.csv").read_text()
    assert text.splitlines()[:2] == ["ticker,block_id,method", "a,0,girvan_newman"]
    back = read_partition_csv(tmp_path / "c.csv", barbell)
    assert back.blocks == p.blocks and back.modularity == p.modularity
    write_dendrogram_csv(d, tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[1] == "1,c,d,9.0,2"
