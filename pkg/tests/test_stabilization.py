import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import lambda_codes, phi_table, psi_table
from stabchain.algebra import BlockOperator, LocalAlgebra, RegisterShape, include, trace_data
from stabchain.checks import gaussian_integer_operator
from stabchain.graphs import Graph, Interval, NotUniformlyConnected, fibonacci_graph, single_vertex_graph
from stabchain.stabilization import (RegisterMismatch, StabilizedState, alpha, build_lambda, lambda_family,
                                     merge_forward, merge_inverse, phi, psi, register_algebra, spread_certificate,
                                     stabilized_state_eval)

register_dims = st.lists(st.integers(1, 4), min_size=1, max_size=3)


def mapping(bij):
    return {tuple(int(x) for x in bij.domain[i]): tuple(int(x) for x in bij.codomain[bij.forward[i]])
            for i in range(bij.size)}


class TestMerges:
    def test_phi_example(self):
        bij = phi(3, RegisterShape.uniform(range(2), 2))
        assert bij.map_label((2, 1, 0)) == (5, 0)

    def test_psi_example(self):
        bij = psi(2, RegisterShape.uniform(range(1), 3))
        assert bij.map_label((1, 0)) == (1,)

    def test_zero_rejected(self):
        regs = RegisterShape.uniform(range(1), 2)
        with pytest.raises(ValueError):
            phi(0, regs)
        with pytest.raises(ValueError):
            psi(0, regs)

    def test_merge_helpers_invert(self):
        n = np.arange(60)
        low, high = merge_inverse(n, 7)
        assert np.array_equal(merge_forward(low, high, 7), n)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6), register_dims)
    def test_phi_matches_formula(self, l, dims):
        bij = phi(l, RegisterShape(tuple(enumerate(dims))))
        assert mapping(bij) == phi_table(l, dims)
        assert bij.is_permutation() and bij.composition_errors() == (0, 0)
        assert bij.codomain_shape.dims == (l * dims[0],) + tuple(dims[1:])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6), register_dims)
    def test_psi_matches_formula(self, t, dims):
        bij = psi(t, RegisterShape(tuple(enumerate(dims))))
        assert mapping(bij) == psi_table(t, dims)
        assert bij.is_permutation()

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(1, 3))
    def test_ragged_psi_ranks_by_register_then_branch(self, branch, rest):
        t = len(branch)
        bij = psi(t, RegisterShape(((0, max(branch)), (1, rest))), branch_dims=branch)
        pairs = sorted(((n, j) for j in range(t) for n in range(branch[j])))
        for (j, n, r), (merged, r2) in mapping(bij).items():
            assert pairs.index((n, j)) == merged and r == r2
        assert bij.is_permutation()

    def test_dense_matrix_agrees_with_index_maps(self, rng):
        bij = phi(2, RegisterShape.uniform(range(2), 2))
        u = bij.matrix()
        assert np.allclose(u @ u.T, np.eye(bij.size))
        m = rng.normal(size=(bij.size, bij.size))
        assert np.allclose(bij.pull_back(m), u.T @ m @ u)
        assert np.allclose(bij.push_forward(m), u @ m @ u.T)


class TestLambda:
    def test_fibonacci_example_size(self, fib):
        lam = build_lambda(fib, 0, 1, 2, 1, 2)
        assert lam.size == 48 == 3 * 16
        assert lam.codomain_shape.dims == (2, 4, 4, 2)

    @pytest.mark.parametrize('n,D', [(2, 1), (2, 2), (3, 1), (2, 3)])
    def test_matches_code_oracle(self, fib, n, D):
        for i, j in itertools.product(range(2), repeat=2):
            lam = build_lambda(fib, i, j, n, 1, D)
            want = lambda_codes(fib.N, i, j, n, 1, D)
            assert mapping(lam) == want
            assert [tuple(r) for r in lam.codomain] == sorted(want.values())
            assert lam.is_permutation()

    def test_three_vertex_graph(self, skew):
        for i, j in itertools.product(range(3), repeat=2):
            lam = build_lambda(skew, i, j, 2, 1, 2)
            assert mapping(lam) == lambda_codes(skew.N, i, j, 2, 1, 2)

    def test_reach_violated(self):
        ring = Graph(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 1]]))
        with pytest.raises(ValueError, match='uniform reach'):
            build_lambda(ring, 0, 0, 2, 1, 1)

    def test_vertex_range_and_blocks(self, fib):
        with pytest.raises(IndexError):
            build_lambda(fib, 0, 2, 2, 1, 1)
        with pytest.raises(ValueError):
            build_lambda(fib, 0, 0, 1, 1, 1)

    def test_not_connected(self):
        with pytest.raises(NotUniformlyConnected):
            build_lambda(Graph(np.array([[0, 1], [1, 0]])), 0, 0, 2, 1, 1)


@pytest.fixture(scope='module')
def loop_family():
    g = single_vertex_graph(2)
    return g, lambda_family(g, 2, 1, 2)


class TestAlpha:
    def test_identity(self, loop_family):
        g, fam = loop_family
        shape = fam[(0, 0)].codomain_shape
        a = register_algebra(Interval(1, 1), [shape.dim_of(1)]).identity()
        out = alpha(a, fam, g, 1)
        assert (out - out.algebra.identity()).max_abs() == 0

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31), st.sampled_from([(1, 1), (2, 2), (1, 2)]))
    def test_exact_star_homomorphism(self, loop_family, seed, window):
        g, fam = loop_family
        shape = fam[(0, 0)].codomain_shape
        win = Interval(*window)
        alg = register_algebra(win, [shape.dim_of(s) for s in win.sites()])
        rng = np.random.default_rng(seed)
        a, b = gaussian_integer_operator(alg, rng), gaussian_integer_operator(alg, rng)
        assert (alpha(a @ b, fam, g, 1) - alpha(a, fam, g, 1) @ alpha(b, fam, g, 1)).max_abs() == 0
        assert (alpha(a.H, fam, g, 1) - alpha(a, fam, g, 1).H).max_abs() == 0

    def test_rank_one_projection_trace(self, loop_family):
        g, fam = loop_family
        d = fam[(0, 0)].codomain_shape.dim_of(2)
        alg = register_algebra(Interval(2, 2), [d])
        proj = np.zeros((d, d))
        proj[0, 0] = 1
        out = alpha(BlockOperator(alg, {(0, 0): proj}), fam, g, 1)
        m = out.blocks[(0, 0)]
        assert np.array_equal(m @ m, m)
        assert np.trace(m).real == len(m) / d

    def test_fibonacci_registers_not_free(self, fib):
        fam = lambda_family(fib, 3, 1, 1)
        alg = register_algebra(Interval(2, 2), [2])
        with pytest.raises(RegisterMismatch):
            alpha(alg.identity(), fam, fib, 1)

    def test_outside_middle(self, loop_family):
        g, fam = loop_family
        with pytest.raises(RegisterMismatch):
            alpha(register_algebra(Interval(0, 0), [4]).identity(), fam, g, 1)


class TestSpread:
    def test_identity(self, loop_family):
        g, fam = loop_family
        out = alpha(register_algebra(Interval(1, 1), [2]).identity(), fam, g, 1)
        rep = spread_certificate(out, Interval(1, 1), 1)
        assert rep.passed and rep.params['spread'] == 0

    @pytest.mark.parametrize('site,expected', [(1, 0), (2, 1)])
    def test_interior_register(self, loop_family, rng, site, expected):
        g, fam = loop_family
        d = fam[(0, 0)].codomain_shape.dim_of(site)
        a = gaussian_integer_operator(register_algebra(Interval(site, site), [d]), rng)
        rep = spread_certificate(alpha(a, fam, g, 1), Interval(site, site), 1)
        assert rep.passed and rep.params['spread'] == expected
        assert rep.max_residual == 0

    def test_mislocalized(self, rng):
        g = single_vertex_graph(2)
        far = LocalAlgebra.stabilized(g, Interval(3, 3), 2).random(rng)
        out = include(far, LocalAlgebra.stabilized(g, Interval(0, 3), 2))
        rep = spread_certificate(out, Interval(1, 1), 1)
        assert not rep.passed
        assert rep.params['witness'] is not None


class TestStabilizedState:
    def setup_method(self):
        self.g = fibonacci_graph()
        self.alg = LocalAlgebra.stabilized(self.g, Interval(0, 1), 2)

    def _register_projection(self, level):
        m = {}
        for b, d in self.alg.block_dims.items():
            p = d // 4
            reg = np.zeros((2, 2))
            reg[level, level] = 1
            m[b] = np.kron(np.eye(p), np.kron(reg, np.eye(2)))
        return BlockOperator(self.alg, m)

    def test_identity(self):
        s = StabilizedState(trace_data(self.g), np.array([1, 0]))
        assert abs(stabilized_state_eval(s, self.alg.identity()) - 1) < 1e-12

    def test_projection_on_zero(self):
        s = StabilizedState(trace_data(self.g), np.array([1, 0]))
        assert abs(stabilized_state_eval(s, self._register_projection(0)) - 1) < 1e-12

    def test_superposition(self):
        s = StabilizedState(trace_data(self.g), np.array([1, 1]) / np.sqrt(2))
        assert abs(stabilized_state_eval(s, self._register_projection(1)) - 0.5) < 1e-12

    def test_density_base(self):
        rho = {(0, 0): np.array([[1.0]])}
        s = StabilizedState(rho, np.array([1, 0]))
        assert abs(stabilized_state_eval(s, self.alg.identity()) - 1) < 1e-12

    def test_rejects(self):
        with pytest.raises(ValueError):
            StabilizedState(trace_data(self.g), np.array([1, 1]))
        with pytest.raises(ValueError):
            StabilizedState({(0, 0): np.array([[2.0]])}, np.array([1, 0]))
        s = StabilizedState(trace_data(self.g), np.array([1, 0, 0]))
        with pytest.raises(ValueError):
            stabilized_state_eval(s, self.alg.identity())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_state_ignores_ancilla_vector_for_path_operators(seed):
    rng = np.random.default_rng(seed)
    g = fibonacci_graph()
    alg = LocalAlgebra.stabilized(g, Interval(0, 1), 2)
    blocks = {}
    for b, d in alg.block_dims.items():
        p = d // 4
        blocks[b] = np.kron(rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p)), np.eye(4))
    x = BlockOperator(alg, blocks)
    values = []
    for _ in range(3):
        xi = rng.normal(size=2) + 1j * rng.normal(size=2)
        values.append(stabilized_state_eval(StabilizedState(trace_data(g), xi / np.linalg.norm(xi)), x))
    assert np.allclose(values, values[0], atol=1e-12)
