"""Linear relations between C^dim_h and C^dim_k, stored as graph subspaces.

A graph vector is the stacked column ``(f, f')`` with the input component in
the first ``dim_h`` coordinates and the output component in the remaining
``dim_k`` coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, VerificationError
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    as_matrix,
    complement,
    fix_phases,
    gap,
    join,
    meet,
    orthonormalize,
)

__all__ = [
    "LinearRelation",
    "OperatorOnSubspace",
    "Parts",
    "make_relation",
    "graph_of",
    "identity_relation",
    "parts",
    "section",
    "adjoint",
    "operator_part",
    "compose",
    "add_relations",
    "apply_left",
    "relation_leq",
    "relation_eq",
    "relation_gap",
]


@dataclass(frozen=True, eq=False)
class LinearRelation:
    dim_h: int
    dim_k: int
    graph: Subspace

    def __post_init__(self):
        if self.dim_h < 1 or self.dim_k < 1:
            raise DimensionError("relation dimensions must be positive")
        if self.graph.ambient_dim != self.dim_h + self.dim_k:
            raise DimensionError("graph ambient dimension must equal dim_h + dim_k")

    @property
    def q_in(self) -> np.ndarray:
        return self.graph.basis[: self.dim_h]

    @property
    def q_out(self) -> np.ndarray:
        return self.graph.basis[self.dim_h :]

    @property
    def dom(self) -> Subspace:
        return parts(self).dom

    @property
    def ran(self) -> Subspace:
        return parts(self).ran

    @property
    def ker(self) -> Subspace:
        return parts(self).ker

    @property
    def mul(self) -> Subspace:
        return parts(self).mul

    def __repr__(self):
        return f"LinearRelation(dim_h={self.dim_h}, dim_k={self.dim_k}, graph_dim={self.graph.dim})"


@dataclass(frozen=True, eq=False)
class OperatorOnSubspace:
    """Single-valued map from ``domain`` into C^codomain_dim.

    ``matrix`` is ``codomain_dim x domain.dim`` and acts on coordinates with
    respect to ``domain.basis``.
    """

    domain: Subspace
    codomain_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, name="matrix").reshape(self.codomain_dim, self.domain.dim)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> np.ndarray:
        """Apply to ambient vectors (a vector or columns) assumed to lie in the domain."""
        flat = np.ndim(x) == 1
        x = as_matrix(x, self.domain.ambient_dim, "x")
        y = self.matrix @ (self.domain.basis.conj().T @ x)
        return y[:, 0] if flat else y

    def ambient_matrix(self) -> np.ndarray:
        """``codomain_dim x ambient`` matrix, extended by zero off the domain."""
        return self.matrix @ self.domain.basis.conj().T

    def to_relation(self, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
        gens = np.vstack([self.domain.basis, self.matrix])
        return make_relation(self.domain.ambient_dim, self.codomain_dim, gens, tol)


class Parts(NamedTuple):
    dom: Subspace
    ran: Subspace
    ker: Subspace
    mul: Subspace


def make_relation(dim_h: int, dim_k: int, generators, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Relation whose graph is the span of the generator columns (length dim_h + dim_k)."""
    n = dim_h + dim_k
    g = np.asarray(generators, dtype=np.complex128)
    if g.size == 0:
        g = np.zeros((n, 0), dtype=np.complex128)
    if g.ndim == 1:
        g = g.reshape(-1, 1)
    if g.shape[0] != n:
        raise DimensionError(f"generators must have {n} rows, got {g.shape[0]}")
    return LinearRelation(dim_h, dim_k, orthonormalize(g, tol))


def _from_orthonormal_gens(dim_h: int, dim_k: int, gens: np.ndarray, tol: ToleranceConfig) -> LinearRelation:
    return LinearRelation(
        dim_h, dim_k, orthonormalize(gens, tol, ambient_dim=dim_h + dim_k, reference=1.0)
    )


def graph_of(a, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Graph of an everywhere defined matrix ``a`` (dim_k x dim_h)."""
    a = as_matrix(a, name="a")
    k, h = a.shape
    return make_relation(h, k, np.vstack([np.eye(h), a]), tol)


def identity_relation(n: int, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    return graph_of(np.eye(n), tol)


def section(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[Subspace, np.ndarray, Subspace]:
    """Domain, a right inverse of the input projection, and the multivalued part.

    Returns ``(dom, z, mul)`` where ``z`` maps coordinates ``c`` (``h = dom.basis @ c``)
    to graph coefficients with ``q_in @ z @ c = h``; ``q_out @ z`` then picks one
    output per domain vector (the one orthogonal to ``mul`` up to the choice of
    representative). One SVD of the input block decides both ranks, so
    ``dim graph = dim dom + dim mul`` holds exactly.
    """
    qh, qk = t.q_in, t.q_out
    if t.graph.dim == 0:
        return Subspace.zero(t.dim_h), np.zeros((0, 0), dtype=np.complex128), Subspace.zero(t.dim_k)
    u, s, vh = np.linalg.svd(qh, full_matrices=True)
    # graph bases are orthonormal, so singular values live on the unit scale
    r = int(np.count_nonzero(s >= tol.rank_rel_tol))
    basis = fix_phases(u[:, :r])
    dom = Subspace(t.dim_h, basis)
    z = (vh[:r].conj().T / s[:r]) @ (u[:, :r].conj().T @ basis)
    mul = orthonormalize(qk @ vh[r:].conj().T, tol, ambient_dim=t.dim_k, reference=1.0)
    return dom, z, mul


def parts(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> Parts:
    """Domain, range, kernel and multivalued part."""
    dom, _, mul = section(t, tol)
    if t.graph.dim == 0:
        return Parts(dom, Subspace.zero(t.dim_k), Subspace.zero(t.dim_h), mul)
    u2, s2, vh2 = np.linalg.svd(t.q_out, full_matrices=True)
    r2 = int(np.count_nonzero(s2 >= tol.rank_rel_tol))
    ran = Subspace(t.dim_k, fix_phases(u2[:, :r2]))
    ker = orthonormalize(t.q_in @ vh2[r2:].conj().T, tol, ambient_dim=t.dim_h, reference=1.0)
    return Parts(dom, ran, ker, mul)


def adjoint(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Adjoint relation from K to H.

    ``{k, k'}`` is in the adjoint iff it is orthogonal in K (+) H to every
    ``{f', -f}`` with ``{f, f'}`` in the graph; this is exactly
    ``(k', f) = (k, f')`` under the inner-product convention.
    """
    flipped = np.vstack([t.q_out, -t.q_in])
    s = Subspace(t.dim_k + t.dim_h, flipped)
    return LinearRelation(t.dim_k, t.dim_h, complement(s))


def operator_part(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorOnSubspace:
    """The single-valued relation ``P T`` with ``P`` the projector onto ``(mul T)^perp``."""
    dom, z, mul = section(t, tol)
    if dom.dim == 0:
        return OperatorOnSubspace(dom, t.dim_k, np.zeros((t.dim_k, 0)))
    proj = np.eye(t.dim_k) - mul.projector()
    return OperatorOnSubspace(dom, t.dim_k, proj @ t.q_out @ z)


def compose(s: LinearRelation, t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Product ``S T = {(h, g) : (h, k) in T, (k, g) in S for some k}``.

    Works in the joint space H (+) K (+) G: intersects ``graph T (+) G`` with
    ``H (+) graph S`` and projects the intersection onto the (h, g)
    coordinates.
    """
    if t.dim_k != s.dim_h:
        raise DimensionError(f"cannot compose: T maps into C^{t.dim_k}, S starts from C^{s.dim_h}")
    h, k, g = t.dim_h, t.dim_k, s.dim_k
    n = h + k + g
    a = np.zeros((n, t.graph.dim + g), dtype=np.complex128)
    a[: h + k, : t.graph.dim] = t.graph.basis
    a[h + k :, t.graph.dim :] = np.eye(g)
    b = np.zeros((n, h + s.graph.dim), dtype=np.complex128)
    b[:h, :h] = np.eye(h)
    b[h:, h:] = s.graph.basis
    both = meet(Subspace(n, a), Subspace(n, b), tol)
    proj = np.vstack([both.basis[:h], both.basis[h + k :]])
    return _from_orthonormal_gens(h, g, proj, tol)


def add_relations(h1: LinearRelation, h2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Operator-style sum ``{(h, h1' + h2')}`` over the common domain."""
    if (h1.dim_h, h1.dim_k) != (h2.dim_h, h2.dim_k):
        raise DimensionError("summands must act between the same spaces")
    h, k = h1.dim_h, h1.dim_k
    n = h + 2 * k
    # joint coordinates (h, k1, k2)
    a = np.zeros((n, h1.graph.dim + k), dtype=np.complex128)
    a[: h + k, : h1.graph.dim] = h1.graph.basis
    a[h + k :, h1.graph.dim :] = np.eye(k)
    b = np.zeros((n, h2.graph.dim + k), dtype=np.complex128)
    b[:h, : h2.graph.dim] = h2.q_in
    b[h + k :, : h2.graph.dim] = h2.q_out
    b[h : h + k, h2.graph.dim :] = np.eye(k)
    both = meet(Subspace(n, a), Subspace(n, b), tol)
    v = both.basis
    gens = np.vstack([v[:h], v[h : h + k] + v[h + k :]])
    out = orthonormalize(gens, tol, ambient_dim=h + k, reference=1.0)
    result = LinearRelation(h, k, out)

    p1, p2, pr = parts(h1, tol), parts(h2, tol), parts(result, tol)
    g_dom = gap(pr.dom, meet(p1.dom, p2.dom, tol))
    g_mul = gap(pr.mul, join(p1.mul, p2.mul, tol))
    if max(g_dom, g_mul) > tol.subspace_eq_tol:
        raise VerificationError(
            "sum of relations violates dom/mul bookkeeping",
            {"dom_gap": g_dom, "mul_gap": g_mul},
        )
    return result


def apply_left(b, t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """``{(h, B f') : (h, f') in T}`` for a square matrix ``B`` on the output space."""
    b = as_matrix(b, name="b")
    if b.shape != (t.dim_k, t.dim_k):
        raise DimensionError(f"b must be {t.dim_k}x{t.dim_k}, got {b.shape}")
    gens = np.vstack([t.q_in, b @ t.q_out])
    return make_relation(t.dim_h, t.dim_k, gens, tol)


def _check_same_shape(t1: LinearRelation, t2: LinearRelation) -> None:
    if (t1.dim_h, t1.dim_k) != (t2.dim_h, t2.dim_k):
        raise DimensionError("relations act between different spaces")


def relation_leq(t1: LinearRelation, t2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Graph inclusion ``t1 ⊂ t2``."""
    _check_same_shape(t1, t2)
    return t2.graph.residual(t1.graph.basis) <= tol.subspace_eq_tol


def relation_gap(t1: LinearRelation, t2: LinearRelation) -> float:
    _check_same_shape(t1, t2)
    return gap(t1.graph, t2.graph)


def relation_eq(t1: LinearRelation, t2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return relation_gap(t1, t2) <= tol.subspace_eq_tol
