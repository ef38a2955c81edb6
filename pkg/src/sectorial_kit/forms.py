"""Sectoriality of relations and forms, and the two representation theorems.

At finite dimension the domain of a closed sectorial form coincides with the
domain of its maximal sectorial relation, so forms here always live on
``dom H``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotHermitianError, NotPSDError, NotSectorialError, VerificationError
from .relation import (
    LinearRelation,
    OperatorOnSubspace,
    add_relations,
    identity_relation,
    make_relation,
    parts,
    section,
)
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    as_matrix,
    complement,
    gap,
    op_norm,
)

__all__ = [
    "SesquilinearForm",
    "SectorialityVerdict",
    "SecondRepresentation",
    "MatrixSectoriality",
    "matrix_sectoriality",
    "graph_pairing",
    "sectoriality",
    "is_maximal_sectorial",
    "form_of",
    "relation_of_form",
    "real_part_relation",
    "second_representation",
    "reconstruct_second_rep",
    "form_gap",
]


def _real(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _imag(m: np.ndarray) -> np.ndarray:
    return (m - m.conj().T) / 2j


@dataclass(frozen=True, eq=False)
class SesquilinearForm:
    """``t[h, k] = (coords k)^H @ matrix @ (coords h)`` on ``domain``."""

    domain: Subspace
    matrix: np.ndarray

    def __post_init__(self):
        d = self.domain.dim
        m = as_matrix(self.matrix, name="form matrix").reshape(d, d)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def real_part(self) -> np.ndarray:
        return _real(self.matrix)

    @property
    def imag_part(self) -> np.ndarray:
        return _imag(self.matrix)

    def __call__(self, h, k) -> complex:
        b = self.domain.basis.conj().T
        x = b @ np.asarray(h, dtype=np.complex128)
        y = b @ np.asarray(k, dtype=np.complex128)
        return complex(np.vdot(y, self.matrix @ x))

    def in_basis(self, basis) -> np.ndarray:
        """Coordinate matrix with respect to another basis of (a subspace of) the domain."""
        c = self.domain.basis.conj().T @ as_matrix(basis, self.domain.ambient_dim, "basis")
        return c.conj().T @ self.matrix @ c

    def restrict(self, sub: Subspace) -> "SesquilinearForm":
        return SesquilinearForm(sub, self.in_basis(sub.basis))


def form_gap(f1: SesquilinearForm, f2: SesquilinearForm) -> tuple[float, float]:
    """(domain gap, matrix discrepancy) of two forms.

    The discrepancy is relative to the larger norm, floored at 1 since form
    matrices read off unit-scale graph bases carry absolute rounding error.
    """
    g = gap(f1.domain, f2.domain)
    if f1.domain.dim != f2.domain.dim:
        return g, float("inf")
    m2 = f2.in_basis(f1.domain.basis)
    scale = max(op_norm(f1.matrix), op_norm(m2), 1.0)
    return g, op_norm(f1.matrix - m2) / scale


@dataclass(frozen=True)
class MatrixSectoriality:
    accretive: bool
    sectorial: bool
    tan_alpha: float | None
    # orthonormal eigenbasis of the strictly positive part of the real part
    positive_vectors: np.ndarray
    positive_values: np.ndarray


def matrix_sectoriality(n, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixSectoriality:
    """Sectoriality of the quadratic form ``z -> z^H n z``.

    The real part is split by one Hermitian eigendecomposition into a positive
    part and a kernel; ``tan_alpha`` is the norm of the imaginary part
    congruence-reduced by the inverse square root of the positive part.
    """
    n = as_matrix(n, name="n")
    d = n.shape[0]
    empty = np.zeros((d, 0), dtype=np.complex128)
    scale = op_norm(n)
    if d == 0 or scale <= tol.rank_rel_tol:
        return MatrixSectoriality(True, True, 0.0, empty, np.zeros(0))
    nr, ni = _real(n), _imag(n)
    w, v = np.linalg.eigh(nr)
    thr = tol.psd_tol * scale
    if w[0] < -thr:
        return MatrixSectoriality(False, False, None, empty, np.zeros(0))
    pos = w > thr
    kernel = v[:, ~pos]
    if kernel.size and op_norm(ni @ kernel) > tol.subspace_eq_tol * scale:
        return MatrixSectoriality(True, False, None, v[:, pos], w[pos])
    vp, wp = v[:, pos], w[pos]
    reduced = (vp.conj().T @ ni @ vp) / np.sqrt(np.outer(wp, wp))
    return MatrixSectoriality(True, True, op_norm(reduced), vp, wp)


@dataclass(frozen=True)
class SectorialityVerdict:
    is_accretive: bool
    is_sectorial: bool
    tan_alpha: float | None
    is_maximal: bool

    @property
    def is_maximal_sectorial(self) -> bool:
        return self.is_sectorial and self.is_maximal


def graph_pairing(t: LinearRelation) -> np.ndarray:
    """``N`` with ``(h', h) = z^H N z`` for graph coordinates ``z``."""
    if t.dim_h != t.dim_k:
        raise DimensionError("sectoriality needs a relation in one space")
    return t.q_in.conj().T @ t.q_out


def sectoriality(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> SectorialityVerdict:
    ms = matrix_sectoriality(graph_pairing(t), tol)
    # maximal accretive <=> ran(I + H) is the whole space
    plus = add_relations(identity_relation(t.dim_h, tol), t, tol)
    maximal = parts(plus, tol).ran.dim == t.dim_h
    return SectorialityVerdict(ms.accretive, ms.sectorial, ms.tan_alpha, maximal)


def is_maximal_sectorial(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return sectoriality(t, tol).is_maximal_sectorial


def form_of(h: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> SesquilinearForm:
    """Closed sectorial form of a maximal sectorial relation: ``t[h, k] = (h', k)``."""
    verdict = sectoriality(h, tol)
    if not verdict.is_maximal_sectorial:
        raise NotSectorialError(f"relation is not maximal sectorial: {verdict}")
    dom, z, mul = section(h, tol)
    g = gap(mul, complement(dom))
    if g > tol.subspace_eq_tol:
        raise VerificationError("mul H differs from (dom H)^perp", {"gap": g})
    if dom.dim == 0:
        return SesquilinearForm(dom, np.zeros((0, 0)))
    return SesquilinearForm(dom, dom.basis.conj().T @ h.q_out @ z)


def relation_of_form(f: SesquilinearForm, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Maximal sectorial relation ``{(h, M h + m) : h in domain, m in domain^perp}``."""
    ms = matrix_sectoriality(f.matrix, tol)
    if not ms.sectorial:
        raise NotSectorialError("form matrix is not sectorial")
    d = f.domain.basis
    n = f.domain.ambient_dim
    perp = complement(f.domain).basis
    gens = np.hstack([
        np.vstack([d, d @ f.matrix]),
        np.vstack([np.zeros((n, perp.shape[1])), perp]),
    ])
    return make_relation(n, n, gens, tol)


def real_part_relation(h: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    f = form_of(h, tol)
    return relation_of_form(SesquilinearForm(f.domain, f.real_part), tol)


@dataclass(frozen=True, eq=False)
class SecondRepresentation:
    h_r: LinearRelation
    # (H_r)_s^{1/2}: domain dom H, values in C^n
    s_half: OperatorOnSubspace
    # Hermitian n x n, zero on ker(s_half) and on mul H_r
    g: np.ndarray
    tan_alpha: float

    def domain_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """``(S, G)`` in coordinates of ``s_half.domain``."""
        d = self.s_half.domain.basis
        return d.conj().T @ self.s_half.matrix, d.conj().T @ self.g @ d


def _root_pair(m: np.ndarray, tol: ToleranceConfig, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """``(m^{1/2}, (m^{1/2})^+)`` from one eigendecomposition sharing one numerical kernel."""
    if m.size == 0:
        return m.copy(), m.copy()
    w, v = np.linalg.eigh(m)
    thr = tol.psd_tol * scale
    if w[0] < -thr:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} of the real part is materially negative")
    keep = w > thr
    vp, root = v[:, keep], np.sqrt(w[keep])
    return (vp * root) @ vp.conj().T, (vp / root) @ vp.conj().T


def second_representation(h: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> SecondRepresentation:
    verdict = sectoriality(h, tol)
    f = form_of(h, tol)
    dom = f.domain
    n = h.dim_h
    mr, mi = f.real_part, f.imag_part
    # M comes from a unit-scale graph basis, so its rounding error is absolute
    scale = max(op_norm(f.matrix), 1.0)
    s, s_inv = _root_pair(mr, tol, scale)
    g = s_inv @ mi @ s_inv
    scale_g = max(op_norm(g), 1.0)
    if op_norm(g - g.conj().T) > tol.hermitian_tol * scale_g * 1e2:
        raise NotHermitianError("reduced imaginary part is not Hermitian")
    g = (g + g.conj().T) / 2
    resid = op_norm(mi - s @ g @ s) / max(scale, 1e-300)
    if resid > 1e-8:
        raise VerificationError(
            "imaginary part is not carried by the real part (ker M_r not inside ker M_i)",
            {"residual": resid},
        )
    tan_alpha = verdict.tan_alpha or 0.0
    if abs(op_norm(g) - tan_alpha) > 1e-8 * max(1.0, tan_alpha):
        raise VerificationError(
            "norm of G differs from tan(alpha)",
            {"norm_g": op_norm(g), "tan_alpha": tan_alpha},
        )
    d = dom.basis
    h_r = relation_of_form(SesquilinearForm(dom, mr), tol)
    return SecondRepresentation(
        h_r=h_r,
        s_half=OperatorOnSubspace(dom, n, d @ s),
        g=d @ g @ d.conj().T,
        tan_alpha=tan_alpha,
    )


def reconstruct_second_rep(rep: SecondRepresentation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """``(S^x)(I + iG) S`` rebuilt through its form ``S (I + iG) S``."""
    s, g = rep.domain_matrices()
    m = s @ (np.eye(s.shape[0]) + 1j * g) @ s
    return relation_of_form(SesquilinearForm(rep.s_half.domain, m), tol)
