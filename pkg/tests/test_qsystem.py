import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import group_half_braiding, skeletal_associativity_defect
from stabchain.diagrams import Calculus
from stabchain.fusion import SHIPPED_FUSION, load_fusion_data, shipped_fusion
from stabchain.qsystem import (AlgebraObject, build_lagrangian_qsystem, half_braiding, multiplication_morphism,
                               unit_morphism, verify_half_braiding, verify_qsystem)

TOL = 1e-10
FUSION = {name: shipped_fusion(name) for name in SHIPPED_FUSION}
CALCS = {name: Calculus(fd) for name, fd in FUSION.items()}
QS = {name: build_lagrangian_qsystem(FUSION[name], FUSION[name].labels, CALCS[name]) for name in SHIPPED_FUSION}


@pytest.mark.parametrize('name,summands', [('fibonacci', ['1', '1', 't']), ('ising', ['1', '1', 'p', '1']),
                                           ('vec_z2', ['0', '0']), ('vec_z3', ['0', '0', '0'])])
def test_skeletal_summands(name, summands):
    assert QS[name].summands == summands


@pytest.mark.parametrize('name', SHIPPED_FUSION)
def test_associativity_by_hand(name):
    q = QS[name]
    assert skeletal_associativity_defect(q.summands, q.multiplication, FUSION[name]) < TOL


@pytest.mark.parametrize('name', SHIPPED_FUSION)
def test_axioms(name):
    rep = verify_qsystem(QS[name], FUSION[name], calc=CALCS[name])
    assert rep.passed, rep.summary()
    assert rep.max_residual < TOL


@pytest.mark.parametrize('name', SHIPPED_FUSION)
def test_total_dimension(name):
    fd, q = FUSION[name], QS[name]
    assert abs(q.total_dim(fd) - fd.global_dim) < 1e-12
    assert abs(q.global_dim - fd.global_dim) < 1e-12


@pytest.mark.parametrize('order', [2, 3])
def test_group_algebra_contraction(order):
    q = QS[f'vec_z{order}']
    m = q.multiplication
    assert np.allclose(np.einsum('ijp,plk->ijlk', m, m), np.einsum('jlq,iqk->ijlk', m, m), atol=TOL)
    e = np.einsum('i,ijk->jk', q.unit, m)
    assert np.allclose(e, np.eye(order), atol=TOL)


@pytest.mark.parametrize('order', [2, 3])
def test_group_half_braiding_permutes(order):
    name = f'vec_z{order}'
    fd, q = FUSION[name], QS[name]
    for w in range(order):
        s = half_braiding(fd, q, str(w), CALCS[name])
        assert np.allclose(s.blocks[str(w)], group_half_braiding(order, w), atol=TOL)


@pytest.mark.parametrize('name', SHIPPED_FUSION)
def test_half_braiding_identities(name):
    rep = verify_half_braiding(FUSION[name], QS[name], calc=CALCS[name])
    assert rep.passed, rep.summary()


@pytest.mark.parametrize('name', SHIPPED_FUSION)
def test_unit_label_is_exact_identity(name):
    fd, q = FUSION[name], QS[name]
    s = half_braiding(fd, q, fd.unit, CALCS[name])
    for blk in s.blocks.values():
        assert np.array_equal(blk, np.eye(len(blk)))


def test_partial_module_is_algebra_but_not_lagrangian():
    fd = FUSION['fibonacci']
    q = build_lagrangian_qsystem(fd, ['1'], CALCS['fibonacci'])
    assert verify_qsystem(q, fd, calc=CALCS['fibonacci']).passed
    assert not verify_half_braiding(fd, q, calc=CALCS['fibonacci']).passed


def test_trivial_category():
    fd = load_fusion_data({'labels': ['1'], 'unit': '1', 'dual': {'1': '1'}, 'fusion': [['1', '1', '1']]})
    q = build_lagrangian_qsystem(fd, ['1'])
    assert q.summands == ['1']
    assert np.allclose(q.multiplication, [[[1]]]) and np.allclose(q.unit, [1])
    assert verify_qsystem(q, fd).passed and verify_half_braiding(fd, q).passed


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SHIPPED_FUSION), st.integers(0, 2 ** 32 - 1))
def test_multiplication_is_coisometry_up_to_dimension(name, seed):
    fd, q, calc = FUSION[name], QS[name], CALCS[name]
    m = multiplication_morphism(calc, q)
    # special Frobenius: m m^dagger is a multiple of the identity
    mm = m @ m.H
    ratio = mm.blocks[fd.unit][0, 0]
    assert mm.distance(ratio * calc.identity(q.obj)) < TOL
    rng = np.random.default_rng(seed)
    u = unit_morphism(calc, q)
    assert abs((u.H @ u).blocks[fd.unit][0, 0] - 1) < TOL
    i, j = rng.integers(len(q.summands), size=2)
    admissible = [k for k in range(len(q.summands)) if fd.N(q.summands[i], q.summands[j], q.summands[k])]
    assert all(q.multiplication[i, j, k] == 0 for k in set(range(len(q.summands))) - set(admissible))


class TestRejects:
    def test_unknown_label(self):
        with pytest.raises(ValueError, match='inadmissible'):
            build_lagrangian_qsystem(FUSION['fibonacci'], ['x'])

    def test_repeated_label(self):
        with pytest.raises(ValueError, match='distinct'):
            build_lagrangian_qsystem(FUSION['fibonacci'], ['t', 't'])

    def test_half_braiding_needs_modules(self):
        fd = FUSION['vec_z2']
        q = AlgebraObject(['0'], [[[1]]], [1])
        with pytest.raises(ValueError):
            half_braiding(fd, q, '1')

    def test_inadmissible_coefficient(self):
        fd = FUSION['vec_z2']
        q = AlgebraObject(['1'], [[[1]]], [0])
        with pytest.raises(ValueError, match='inadmissible'):
            multiplication_morphism(Calculus(fd), q)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            AlgebraObject(['0', '1'], np.zeros((2, 2, 1)), np.zeros(2))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            AlgebraObject(['0'], [[[np.nan]]], [1])
