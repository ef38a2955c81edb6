from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sectorial_kit import (
    DEFAULT_TOL,
    NotFiniteError,
    NotHermitianError,
    NotPSDError,
    Subspace,
    ToleranceConfig,
    complement,
    gap,
    join,
    meet,
    op_norm,
    orthonormalize,
    pseudo_inverse,
    psd_sqrt,
)

from conftest import cgauss, random_subspace

e1, e2, e3 = np.eye(3, dtype=complex)


def test_tolerance_bounds():
    with pytest.raises(ValueError):
        ToleranceConfig(rank_rel_tol=0.0)
    with pytest.raises(ValueError):
        DEFAULT_TOL.replace(psd_tol=0.5)
    assert DEFAULT_TOL.replace(psd_tol=1e-6).psd_tol == 1e-6


def test_orthonormalize_dependent_columns():
    s = orthonormalize(np.array([[1, 2], [0, 0]], dtype=complex))
    assert s.dim == 1
    assert gap(s, Subspace.coordinate(2, [0])) < 1e-14


def test_orthonormalize_empty_and_full():
    assert orthonormalize(np.zeros((3, 0)), ambient_dim=3).dim == 0
    s = orthonormalize(np.array([[1, 1], [1, -1]], dtype=complex))
    assert s.dim == 2


def test_orthonormalize_rejects_nan():
    with pytest.raises(NotFiniteError):
        orthonormalize(np.array([[np.nan], [1.0]]))


def test_phase_convention():
    s = orthonormalize(np.array([[1j], [1j]]))
    assert abs(s.basis[0, 0].imag) < 1e-15 and s.basis[0, 0].real > 0


def test_complement_examples():
    assert gap(complement(Subspace.coordinate(2, [0])), Subspace.coordinate(2, [1])) < 1e-14
    assert complement(Subspace.zero(3)).dim == 3
    line = orthonormalize(np.array([[1], [1]], dtype=complex))
    anti = orthonormalize(np.array([[1], [-1]], dtype=complex))
    assert gap(complement(line), anti) < 1e-14


def test_meet_join_examples():
    a = Subspace.coordinate(3, [0, 1])
    b = Subspace.coordinate(3, [1, 2])
    assert gap(meet(a, b), Subspace.coordinate(3, [1])) < 1e-12
    j = join(Subspace.coordinate(2, [0]), Subspace.coordinate(2, [1]))
    assert j.dim == 2
    diag = orthonormalize(np.array([[1], [1]], dtype=complex))
    assert meet(Subspace.coordinate(2, [0]), diag).dim == 0


def test_gap_examples():
    s = Subspace.coordinate(2, [0])
    assert gap(s, s) == 0.0
    assert gap(s, Subspace.coordinate(2, [1])) == pytest.approx(1.0)
    diag = orthonormalize(np.array([[1], [1]], dtype=complex))
    assert gap(s, diag) == pytest.approx(np.sin(np.pi / 4), abs=1e-14)


def test_psd_sqrt_examples():
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(psd_sqrt(np.zeros((2, 2))), 0)
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    v = np.array([[1, 1], [-1, 1]]) / np.sqrt(2)
    expected = v @ np.diag([1.0, np.sqrt(3)]) @ v.T
    assert np.allclose(psd_sqrt(m), expected, atol=1e-14)


def test_psd_sqrt_errors():
    with pytest.raises(NotHermitianError):
        psd_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1.0]))


def test_pseudo_inverse_examples():
    assert np.allclose(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    assert np.allclose(pseudo_inverse(np.ones((2, 2))), np.full((2, 2), 0.25))


def test_op_norm_examples():
    assert op_norm(np.eye(4)) == pytest.approx(1.0)
    assert op_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)
    assert op_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)
    assert op_norm(np.zeros((0, 0))) == 0.0


dims = st.tuples(st.integers(1, 6), st.integers(0, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))


@given(dims)
def test_double_complement(args):
    n, d, _, seed = args
    s = random_subspace(np.random.default_rng(seed), n, min(d, n))
    assert gap(complement(complement(s)), s) <= DEFAULT_TOL.subspace_eq_tol


@given(dims)
def test_de_morgan(args):
    n, d1, d2, seed = args
    rng = np.random.default_rng(seed)
    s1, s2 = random_subspace(rng, n, min(d1, n)), random_subspace(rng, n, min(d2, n))
    lhs = complement(meet(s1, s2))
    rhs = join(complement(s1), complement(s2))
    assert gap(lhs, rhs) <= DEFAULT_TOL.subspace_eq_tol


@given(dims)
def test_reorthonormalize_is_idempotent(args):
    n, d, _, seed = args
    s = random_subspace(np.random.default_rng(seed), n, min(d, n))
    assert gap(orthonormalize(s.basis, ambient_dim=n), s) <= DEFAULT_TOL.subspace_eq_tol


@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_psd_sqrt_squares_back(n, r, seed):
    y = cgauss(np.random.default_rng(seed), n, min(r, n))
    m = y @ y.conj().T
    s = psd_sqrt(m)
    assert op_norm(s @ s - m) <= 1e-8 * max(op_norm(m), 1e-300) or op_norm(m) == 0


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_penrose_identities(rows, cols, seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, min(rows, cols) + 1))
    m = cgauss(rng, rows, r) @ cgauss(rng, r, cols)
    p = pseudo_inverse(m)
    scale = max(op_norm(m), 1.0) * max(op_norm(p), 1.0) ** 2
    assert op_norm(m @ p @ m - m) <= 1e-8 * scale
    assert op_norm(p @ m @ p - p) <= 1e-8 * scale
    assert op_norm((m @ p).conj().T - m @ p) <= 1e-8 * scale
    assert op_norm((p @ m).conj().T - p @ m) <= 1e-8 * scale
