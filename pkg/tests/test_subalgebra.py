import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_commutant_dim
from stabchain.algebra import BlockOperator, LocalAlgebra, include, markov_trace, trace_data
from stabchain.commutant import haag_check
from stabchain.graphs import Graph, Interval, fibonacci_graph, single_vertex_graph
from stabchain.subalgebra import (PimsnerPopaError, SubalgebraSpec, conditional_expectation, full_spec,
                                  generated_basis, jones_projection, pp_basis, pp_reconstruction_residual,
                                  relative_haag_check, scalar_spec, tl_relative_haag_check, tl_spec)

TOL = 1e-10


def diagonal_spec(m):
    alg = LocalAlgebra(single_vertex_graph(m), Interval(0, 0))
    units = []
    for i in range(m):
        mat = np.zeros((m, m), dtype=complex)
        mat[i, i] = 1
        units.append(BlockOperator(alg, {(0, 0): mat}))
    return SubalgebraSpec(alg, units)


class TestExpectation:
    def test_ambient_is_identity_map(self, fib):
        alg = LocalAlgebra(fib, Interval(0, 1))
        E = conditional_expectation(full_spec(alg), trace_data(fib))
        assert np.allclose(E.matrix, np.eye(alg.dim), atol=TOL)

    def test_scalars_give_trace(self, fib, rng):
        td = trace_data(fib)
        alg = LocalAlgebra(fib, Interval(0, 2))
        E = conditional_expectation(scalar_spec(alg), td)
        x = alg.random(rng)
        assert (E(x) - markov_trace(x, td) * alg.identity()).max_abs() < TOL
        assert E.rank == 1

    def test_diagonal_part(self, rng):
        spec = diagonal_spec(3)
        E = conditional_expectation(spec, trace_data(spec.ambient.graph))
        x = spec.ambient.random(rng)
        m = x.blocks[(0, 0)]
        assert np.allclose(E(x).blocks[(0, 0)], np.diag(np.diag(m)), atol=TOL)

    @pytest.mark.parametrize('length', [2, 3, 4])
    def test_tl_axioms(self, fib, rng, length):
        td = trace_data(fib)
        E = conditional_expectation(tl_spec(fib, td, Interval(0, length - 1)), td)
        res = E.residuals(rng, samples=4)
        assert max(res.values()) < 1e-9, res

    def test_generator_from_other_algebra(self, fib):
        a = LocalAlgebra(fib, Interval(0, 1))
        b = LocalAlgebra(fib, Interval(0, 2))
        with pytest.raises(ValueError):
            SubalgebraSpec(a, [b.identity()])


class TestPimsnerPopa:
    def test_ambient_needs_only_identity(self, fib):
        alg = LocalAlgebra(fib, Interval(0, 1))
        spec = full_spec(alg)
        basis = pp_basis(spec, conditional_expectation(spec, trace_data(fib)))
        assert len(basis) == 1
        assert (basis[0] - alg.identity()).max_abs() < TOL

    def test_diagonal_in_matrices(self, rng):
        spec = diagonal_spec(2)
        E = conditional_expectation(spec, trace_data(spec.ambient.graph))
        basis = pp_basis(spec, E)
        assert len(basis) == 2
        assert pp_reconstruction_residual(basis, E, spec.ambient.random(rng)) < TOL

    def test_tl_in_fibonacci(self, fib, rng):
        td = trace_data(fib)
        spec = tl_spec(fib, td, Interval(0, 2))
        E = conditional_expectation(spec, td)
        basis = pp_basis(spec, E)
        for _ in range(5):
            assert pp_reconstruction_residual(basis, E, spec.ambient.random(rng)) < 1e-9

    def test_unreachable_tolerance(self, fib):
        td = trace_data(fib)
        spec = tl_spec(fib, td, Interval(0, 2))
        with pytest.raises(PimsnerPopaError):
            pp_basis(spec, conditional_expectation(spec, td), tol=-1.0)


class TestJones:
    @pytest.mark.parametrize('m', [1, 2, 3])
    def test_loop_projection(self, m):
        g = single_vertex_graph(m)
        e = jones_projection(g, trace_data(g), 0).blocks[(0, 0)]
        want = np.zeros((m * m, m * m))
        diag = [x * m + x for x in range(m)]
        want[np.ix_(diag, diag)] = 1.0 / m
        assert np.allclose(e, want, atol=TOL)

    def test_asymmetric_graph_rejected(self, skew):
        with pytest.raises(ValueError):
            jones_projection(skew, trace_data(skew), 0)

    @settings(max_examples=15, deadline=None)
    @given(st.sampled_from([[[0, 1], [1, 1]], [[2]], [[0, 1, 0], [1, 0, 1], [0, 1, 1]], [[1, 1], [1, 1]]]),
           st.integers(0, 2))
    def test_projection_and_trace(self, N, site):
        g = Graph(np.array(N))
        td = trace_data(g)
        e = jones_projection(g, td, site)
        assert (e @ e - e).max_abs() < TOL
        assert (e - e.H).max_abs() < TOL
        assert abs(markov_trace(e, td) - td.lam ** -2) < TOL

    def test_neighbour_relation(self, fib):
        td = trace_data(fib)
        amb = LocalAlgebra(fib, Interval(0, 2))
        e0 = include(jones_projection(fib, td, 0), amb)
        e1 = include(jones_projection(fib, td, 1), amb)
        assert (e0 @ e1 @ e0 - td.lam ** -2 * e0).max_abs() < TOL
        assert (e1 @ e0 @ e1 - td.lam ** -2 * e1).max_abs() < TOL


class TestRelativeHaag:
    def setup_method(self):
        self.g = fibonacci_graph()
        self.amb = LocalAlgebra(self.g, Interval(0, 3))

    def test_full_complement_matches_plain_commutant(self):
        comp = [include(u, self.amb) for s in (Interval(0, 0), Interval(3, 3))
                for u in LocalAlgebra(self.g, s).basis()]
        rep = relative_haag_check(self.amb, Interval(1, 2), comp, max_spread=2)
        basis = [u.blocks for u in self.amb.basis()]
        assert rep.params['commutant_dim'] == brute_commutant_dim([c.blocks for c in comp], basis)
        plain = haag_check(self.g, Interval(0, 3), Interval(1, 2), margin=0)
        assert rep.params['commutant_dim'] == plain.params['commutant_dim']

    def test_scalars_warn(self):
        rep = relative_haag_check(self.amb, Interval(1, 2), [])
        assert rep.params['commutant_dim'] == self.amb.dim
        assert rep.warnings and not rep.passed

    @pytest.mark.parametrize('margin,dim,spread', [(2, 7, 0), (None, 7, 0), (0, 47, 1)])
    def test_tl(self, margin, dim, spread):
        rep = tl_relative_haag_check(self.g, trace_data(self.g), Interval(0, 3), Interval(1, 2), margin=margin)
        assert rep.params['commutant_dim'] == dim
        assert rep.params['spread'] == spread
        assert rep.passed

    def test_inner_outside(self):
        with pytest.raises(ValueError):
            relative_haag_check(self.amb, Interval(2, 5), [])


def test_generated_basis_dimension_of_tl(fib):
    td = trace_data(fib)
    # words 1, e0, e1, e0e1, e1e0
    assert generated_basis(tl_spec(fib, td, Interval(0, 2))).shape[1] == 5
