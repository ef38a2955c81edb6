from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sectorial_kit import (
    DEFAULT_TOL,
    DimensionError,
    Subspace,
    add_relations,
    adjoint,
    apply_left,
    complement,
    compose,
    gap,
    graph_of,
    identity_relation,
    join,
    make_relation,
    meet,
    operator_part,
    parts,
    relation_eq,
    relation_gap,
    relation_leq,
)

from conftest import cgauss, pinned_t, random_relation

C = complex
EQ = DEFAULT_TOL.subspace_eq_tol


def scalar(a) -> object:
    return graph_of(np.array([[a]], dtype=complex))


def test_make_relation_scalar():
    t = make_relation(1, 1, np.array([[1], [2]], dtype=complex))
    assert relation_gap(t, scalar(2)) < 1e-14


def test_pinned_instance_parts():
    p = parts(pinned_t())
    assert p.dom.dim == 1 and p.ran.dim == 2 and p.ker.dim == 0
    assert gap(p.mul, Subspace.coordinate(2, [1])) < 1e-14


def test_zero_relation():
    t = make_relation(2, 3, np.zeros((5, 0)))
    assert t.graph.dim == 0
    assert parts(t).dom.dim == 0


def test_parts_of_scalar_and_pure_mul():
    p = parts(scalar(2))
    assert (p.dom.dim, p.ran.dim, p.ker.dim, p.mul.dim) == (1, 1, 0, 0)
    p = parts(make_relation(1, 1, np.array([[0], [1]], dtype=complex)))
    assert p.dom.dim == 0 and p.mul.dim == 1


def test_adjoint_examples():
    assert relation_gap(adjoint(scalar(2)), scalar(2)) < 1e-14
    # T* = {((k, 0), k)}
    expected = make_relation(2, 1, np.array([[1], [0], [1]], dtype=complex))
    assert relation_gap(adjoint(pinned_t()), expected) < 1e-14
    pure_mul = make_relation(2, 3, np.vstack([np.zeros((2, 3)), np.eye(3)]).astype(complex))
    star = adjoint(pure_mul)
    assert parts(star).dom.dim == 0 and parts(star).mul.dim == 2


def test_adjoint_of_complex_scalar_conjugates():
    assert relation_gap(adjoint(scalar(1 + 2j)), scalar(1 - 2j)) < 1e-14


def test_operator_part_examples():
    op = operator_part(scalar(2))
    assert np.allclose(op.apply(np.array([1.0])), [2.0])
    ts = operator_part(pinned_t())
    assert np.allclose(ts.apply(np.array([1.0])), [1.0, 0.0])
    pure = make_relation(1, 2, np.vstack([np.zeros((1, 2)), np.eye(2)]).astype(complex))
    assert operator_part(pure).domain.dim == 0


def test_compose_examples():
    assert relation_gap(compose(scalar(3), scalar(2)), scalar(6)) < 1e-14
    t = pinned_t()
    assert relation_gap(compose(adjoint(t), t), scalar(1)) < 1e-14
    zero = make_relation(1, 1, np.zeros((2, 0)))
    assert parts(compose(scalar(5), zero)).dom.dim == 0


def test_add_examples():
    assert relation_gap(add_relations(scalar(1), scalar(2)), scalar(3)) < 1e-14
    h1 = make_relation(2, 2, np.array([[1, 0], [0, 0], [1, 0], [0, 1]], dtype=C))
    total = add_relations(h1, identity_relation(2))
    expected = make_relation(2, 2, np.array([[1, 0], [0, 0], [2, 0], [0, 1]], dtype=C))
    assert relation_gap(total, expected) < 1e-14
    h = random_relation(np.random.default_rng(3), 3, 3)
    assert relation_gap(add_relations(h, graph_of(np.zeros((3, 3)))), h) < 1e-12


def test_add_rejects_mismatched_spaces():
    with pytest.raises(DimensionError):
        add_relations(scalar(1), identity_relation(2))


def test_apply_left_examples():
    t = pinned_t()
    assert relation_gap(apply_left(np.eye(2), t), t) < 1e-14
    zero_out = apply_left(np.zeros((2, 2)), t)
    assert parts(zero_out).mul.dim == 0 and parts(zero_out).dom.dim == 1
    b = np.array([[1, 1], [1, 1]], dtype=C)
    got = apply_left(np.eye(2) + 1j * b, t)
    expected = make_relation(1, 2, np.array([[1, 0], [1 + 1j, 1j], [1j, 1 + 1j]], dtype=C))
    assert relation_gap(got, expected) < 1e-14


def test_leq_examples():
    t = pinned_t()
    assert relation_leq(t, t) and relation_eq(t, t)
    assert not relation_leq(scalar(2), scalar(3))
    assert relation_leq(operator_part(t).to_relation(), t)


seeds = st.integers(0, 2**32 - 1)
small = st.integers(1, 5)


@given(small, small, seeds)
def test_double_adjoint(h, k, seed):
    t = random_relation(np.random.default_rng(seed), h, k)
    assert relation_gap(adjoint(adjoint(t)), t) <= EQ


@given(small, small, seeds)
def test_adjoint_parts_and_dimension(h, k, seed):
    t = random_relation(np.random.default_rng(seed), h, k)
    star = adjoint(t)
    assert gap(parts(star).mul, complement(parts(t).dom)) <= EQ
    assert gap(parts(star).ker, complement(parts(t).ran)) <= EQ
    assert t.graph.dim + star.graph.dim == h + k


@given(small, small, seeds)
def test_graph_dimension_splits(h, k, seed):
    t = random_relation(np.random.default_rng(seed), h, k)
    p = parts(t)
    assert t.graph.dim == p.dom.dim + p.mul.dim


@given(small, small, small, small, seeds)
def test_compose_associative(a, b, c, d, seed):
    rng = np.random.default_rng(seed)
    r = random_relation(rng, a, b)
    s = random_relation(rng, b, c)
    t = random_relation(rng, c, d)
    left = compose(t, compose(s, r))
    right = compose(compose(t, s), r)
    assert relation_gap(left, right) <= 1e-7


@given(small, seeds)
def test_add_dom_mul_law(n, seed):
    rng = np.random.default_rng(seed)
    h1, h2 = random_relation(rng, n, n), random_relation(rng, n, n)
    total = add_relations(h1, h2)
    assert gap(parts(total).dom, meet(parts(h1).dom, parts(h2).dom)) <= EQ
    assert gap(parts(total).mul, join(parts(h1).mul, parts(h2).mul)) <= EQ


@given(small, small, seeds)
def test_operator_part_sits_inside(h, k, seed):
    t = random_relation(np.random.default_rng(seed), h, k)
    assert relation_leq(operator_part(t).to_relation(), t)


def test_operator_roundtrip(rng):
    a = cgauss(rng, 3, 2)
    op = operator_part(graph_of(a))
    assert np.allclose(op.ambient_matrix(), a)
    assert relation_gap(op.to_relation(), graph_of(a)) < 1e-12
