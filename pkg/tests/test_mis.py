import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import make_graph
from tailnet.errors import SizeLimitError
from tailnet.mis import (exact_mis, greedy_mis, is_independent, is_maximal, mis_per_block,
                         read_mis_csv, union_members, write_mis_csv)
from tailnet.partition import make_partition


def random_graph(n, p, rng):
    verts = [f"v{i:02d}" for i in range(n)]
    return make_graph(verts, [e for e in itertools.combinations(verts, 2) if rng.random() < p])


def cycle(n):
    vs = [f"c{i}" for i in range(n)]
    return make_graph(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)])


def petersen():
    outer = [(f"o{i}", f"o{(i + 1) % 5}") for i in range(5)]
    inner = [(f"i{i}", f"i{(i + 2) % 5}") for i in range(5)]
    spokes = [(f"o{i}", f"i{i}") for i in range(5)]
    vs = [f"o{i}" for i in range(5)] + [f"i{i}" for i in range(5)]
    return make_graph(vs, outer + inner + spokes)


def test_path(path3):
    assert greedy_mis(path3).vertices == {"a", "c"}
    assert exact_mis(path3).vertices == {"a", "c"}


def test_named_graphs():
    k5 = make_graph("abcde", itertools.combinations("abcde", 2))
    assert len(exact_mis(k5)) == 1 and len(greedy_mis(k5)) == 1
    assert greedy_mis(k5).vertices == {"a"}
    assert len(exact_mis(cycle(5))) == 2
    assert len(exact_mis(cycle(6))) == 3
    assert exact_mis(make_graph("abcd", [])).vertices == set("abcd")
    assert len(exact_mis(petersen())) == 4


def test_exact_matches_brute_force():
    rng = np.random.default_rng(21)
    for _ in range(150):
        g = random_graph(int(rng.integers(1, 17)), float(rng.uniform(0.05, 0.7)), rng)
        s = exact_mis(g)
        assert s.exact
        assert is_independent(g, s.vertices) and is_maximal(g, s.vertices)
        assert len(s) == oracles.max_independent_set_size(g.vertices, sorted(g.edges))


def test_exact_handles_thirty_vertices():
    rng = np.random.default_rng(22)
    g = random_graph(30, 0.2, rng)
    s = exact_mis(g)
    assert is_independent(g, s.vertices) and len(s) >= len(greedy_mis(g))


def test_size_limit():
    g = make_graph([f"v{i:02d}" for i in range(31)], [])
    with pytest.raises(SizeLimitError):
        exact_mis(g)
    assert len(greedy_mis(g)) == 31


def test_greedy_close_to_optimum():
    rng = np.random.default_rng(23)
    close = 0
    for _ in range(1000):
        g = random_graph(15, 0.3, rng)
        close += len(greedy_mis(g)) >= len(exact_mis(g)) - 2
    assert close >= 950


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_greedy_is_maximal_independent(n, p, seed):
    g = random_graph(n, p, np.random.default_rng(seed))
    s = greedy_mis(g)
    assert is_independent(g, s.vertices) and is_maximal(g, s.vertices)
    isolated = {v for v in g.vertices if g.degree(v) == 0}
    assert isolated <= s.vertices


def test_per_block(barbell, tmp_path):
    p = make_partition([list("abc"), list("def")], "girvan_newman", barbell)
    sets = mis_per_block(barbell, p)
    assert [len(s) for s in sets] == [1, 1]
    assert [s.source_block for s in sets] == [0, 1]
    assert all(s.exact for s in sets)
    # the induced subgraph ignores the bridge, so c and d may both be picked
    assert union_members(sets) == ["a", "d"]
    greedy = mis_per_block(barbell, p, use_exact_below=0)
    assert not any(s.exact for s in greedy)
    write_mis_csv(sets, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text() == "block_id,ticker,exact_flag\n0,a,1\n1,d,1\n"
    back = read_mis_csv(tmp_path / "m.csv")
    assert back == sets


def test_singleton_blocks():
    g = make_graph("xyz", [])
    p = make_partition([["x"], ["y"], ["z"]], "girvan_newman", g)
    assert union_members(mis_per_block(g, p)) == ["x", "y", "z"]
