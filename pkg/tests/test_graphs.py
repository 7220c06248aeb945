import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dfs_paths, reach_by_powers
from stabchain.graphs import (Graph, GraphError, Interval, NotUniformlyConnected, Path, count_matrix,
                              enumerate_paths, load_graph, path_count, path_index, single_vertex_graph,
                              uniform_reach)

small_matrices = st.integers(1, 3).flatmap(
    lambda t: st.lists(st.lists(st.integers(0, 2), min_size=t, max_size=t), min_size=t, max_size=t)
).filter(lambda rows: any(any(r) for r in rows))


def as_keys(paths):
    return [p.key() for p in paths]


class TestLoading:
    def test_single_loop(self):
        g = load_graph('{"vertices": 1, "multiplicities": [[1]]}')
        assert g.vertex_count == 1 and g.N.tolist() == [[1]]

    def test_fibonacci_accepted(self):
        g = load_graph({'vertices': 2, 'multiplicities': [[0, 1], [1, 1]]})
        assert g.N.tolist() == [[0, 1], [1, 1]]

    def test_no_edges(self):
        with pytest.raises(GraphError, match='no edges'):
            load_graph({'vertices': 2, 'multiplicities': [[0, 0], [0, 0]]})

    @pytest.mark.parametrize('text', [
        '{"vertices": 2, "multiplicities": [[0, 1]]}',
        '{"vertices": 1, "multiplicities": [[-1]]}',
        '{"vertices": 1, "multiplicities": [[1.5]]}',
        '{"multiplicities": 3}',
        'not json',
    ])
    def test_rejects_malformed(self, text):
        with pytest.raises(GraphError):
            load_graph(text)

    def test_round_trip(self, fib):
        assert load_graph(fib.to_dict()).N.tolist() == fib.N.tolist()


class TestReach:
    def test_single_loop(self):
        assert uniform_reach(single_vertex_graph(1)) == 1

    def test_fibonacci(self, fib):
        assert uniform_reach(fib) == 2

    def test_two_cycle_parity(self):
        with pytest.raises(NotUniformlyConnected):
            uniform_reach(Graph(np.array([[0, 1], [1, 0]])))

    @settings(max_examples=60, deadline=None)
    @given(small_matrices)
    def test_matches_power_oracle(self, rows):
        g = Graph(np.array(rows))
        expected = reach_by_powers(rows)
        if expected is None:
            with pytest.raises(NotUniformlyConnected):
                uniform_reach(g)
        else:
            assert uniform_reach(g) == expected


class TestPaths:
    def test_fibonacci_counts(self, fib):
        assert path_count(fib, 3, 0, 0) == 1
        assert count_matrix(fib, 3).tolist() == [[1, 2], [2, 3]]

    def test_loops(self):
        assert path_count(single_vertex_graph(3), 4, 0, 0) == 81

    def test_zero_length(self, fib):
        assert path_count(fib, 0, 0, 1) == 0
        assert enumerate_paths(fib, 0, 1, 1) == (Path(1),)

    def test_vertex_range(self, fib):
        with pytest.raises(IndexError):
            path_count(fib, 2, 0, 5)
        with pytest.raises(IndexError):
            enumerate_paths(fib, 2, -1, 0)

    def test_fibonacci_lex_order(self, fib):
        paths = enumerate_paths(fib, 2, 1, 1)
        assert [p.vertices() for p in paths] == [(1, 0, 1), (1, 1, 1)]

    def test_single_step(self, skew):
        for i, j in itertools.product(range(3), repeat=2):
            assert len(enumerate_paths(skew, 1, i, j)) == skew.N[i, j]

    @settings(max_examples=40, deadline=None)
    @given(small_matrices, st.integers(0, 4))
    def test_enumeration_matches_dfs(self, rows, length):
        g = Graph(np.array(rows))
        t = g.vertex_count
        for i, j in itertools.product(range(t), repeat=2):
            paths = enumerate_paths(g, length, i, j)
            assert as_keys(paths) == dfs_paths(rows, length, i, j)
            assert len(paths) == path_count(g, length, i, j)
            assert path_index(g, length, i, j) == {p: n for n, p in enumerate(paths)}

    @settings(max_examples=30, deadline=None)
    @given(small_matrices, st.integers(0, 3), st.integers(0, 3))
    def test_concatenation_is_order_preserving(self, rows, l1, l2):
        g = Graph(np.array(rows))
        t = g.vertex_count
        for i, j in itertools.product(range(t), repeat=2):
            glued = [p + q for k in range(t) for p in enumerate_paths(g, l1, i, k)
                     for q in enumerate_paths(g, l2, k, j)]
            glued.sort(key=Path.key)
            assert glued == list(enumerate_paths(g, l1 + l2, i, j))
            for p in glued:
                left, right = p.split(l1)
                assert left + right == p


class TestInterval:
    def test_basic(self):
        I = Interval(1, 3)
        assert len(I) == 3 and list(I.sites()) == [1, 2, 3]
        assert I.enlarge(1) == Interval(0, 4)
        assert Interval(2, 2).issubset(I) and not Interval(0, 2).issubset(I)
        assert I.clip(Interval(2, 9)) == Interval(2, 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Interval(3, 1)
