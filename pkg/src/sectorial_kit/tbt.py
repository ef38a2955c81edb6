"""The relation ``T*(I + iB)T``: block decomposition of ``B``, the operators
``C0`` and ``C``, the direct product of relations and its reduced form.

``K`` is split as ``closure(dom T*) (+) mul T``; ``B`` is cut into blocks
``b11, b12, b22`` along that split. With ``R = (I + b22^2)^{-1/2}``::

    C0 = I + b12 (I + b22^2)^{-1} b12^H
    C  = C0^{-1/2} (b11 - b12 R b22 R b12^H) C0^{-1/2}

and ``T*(I+iB)T`` is the relation of the form ``W^H (I + iC) W`` on ``dom T``,
``W = C0^{1/2} T_s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotHermitianError, VerificationError
from .forms import (
    SesquilinearForm,
    real_part_relation,
    relation_of_form,
    sectoriality,
)
from .relation import (
    LinearRelation,
    OperatorOnSubspace,
    adjoint,
    apply_left,
    compose,
    operator_part,
    parts,
    relation_gap,
)
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    as_matrix,
    complement,
    gap,
    is_hermitian,
    op_norm,
    pseudo_inverse,
)

__all__ = [
    "SectorialDecomposition",
    "decompose_blocks",
    "compute_c0_c",
    "construct_direct",
    "construct_reduced",
    "reduced_form",
    "invariant_case_form",
    "verify_identity",
    "IdentityReport",
    "closure_membership_check",
    "remark32_check",
    "invariance_flags",
    "InvarianceFlags",
    "unitary_equivalence",
    "operator_part_product",
]


def _hermitian_function(m: np.ndarray, fn) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * fn(w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class SectorialDecomposition:
    p_dom_tstar: Subspace
    mul_t: Subspace
    b: np.ndarray
    b11: np.ndarray
    b12: np.ndarray
    b22: np.ndarray
    t_s: OperatorOnSubspace
    c0: np.ndarray | None = field(default=None)
    c: np.ndarray | None = field(default=None)

    @property
    def tan_gamma_bound(self) -> float:
        return op_norm(self.c) if self.c is not None else float("nan")

    def with_c0_c(self) -> "SectorialDecomposition":
        c0, c = compute_c0_c(self)
        return SectorialDecomposition(
            self.p_dom_tstar, self.mul_t, self.b, self.b11, self.b12, self.b22, self.t_s, c0, c
        )

    def w_matrix(self) -> np.ndarray:
        """``C0^{1/2} T_s`` in coordinates: dom T basis -> closure(dom T*) basis."""
        ts = self.p_dom_tstar.basis.conj().T @ self.t_s.matrix
        return _hermitian_function(self.c0, np.sqrt) @ ts

    def middle(self) -> np.ndarray:
        """``C0^{1/2}(I + iC)C0^{1/2}`` as a K x K matrix vanishing off closure(dom T*)."""
        half = _hermitian_function(self.c0, np.sqrt)
        mid = half @ (np.eye(self.c.shape[0]) + 1j * self.c) @ half
        p = self.p_dom_tstar.basis
        return p @ mid @ p.conj().T


def _check_b(t: LinearRelation, b, tol: ToleranceConfig) -> np.ndarray:
    b = as_matrix(b, name="b")
    if b.shape != (t.dim_k, t.dim_k):
        raise DimensionError(f"b must be {t.dim_k}x{t.dim_k}, got {b.shape}")
    if not is_hermitian(b, tol):
        raise NotHermitianError("b must be Hermitian")
    return b


def decompose_blocks(t: LinearRelation, b, tol: ToleranceConfig = DEFAULT_TOL) -> SectorialDecomposition:
    b = _check_b(t, b, tol)
    mul = parts(t, tol).mul
    dom_star = complement(mul)
    p, q = dom_star.basis, mul.basis
    return SectorialDecomposition(
        p_dom_tstar=dom_star,
        mul_t=mul,
        b=b,
        b11=p.conj().T @ b @ p,
        b12=p.conj().T @ b @ q,
        b22=q.conj().T @ b @ q,
        t_s=operator_part(t, tol),
    )


def compute_c0_c(dec: SectorialDecomposition, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    b11, b12, b22 = dec.b11, dec.b12, dec.b22
    p = b11.shape[0]
    if p == 0:
        empty = np.zeros((0, 0), dtype=np.complex128)
        return empty, empty
    if b22.shape[0] == 0:
        return np.eye(p, dtype=np.complex128), b11.copy()
    inv = _hermitian_function(b22, lambda w: 1.0 / (1.0 + w**2))
    inv_half = _hermitian_function(b22, lambda w: 1.0 / np.sqrt(1.0 + w**2))
    c0 = np.eye(p) + b12 @ inv @ b12.conj().T
    c0 = (c0 + c0.conj().T) / 2
    c0_eigs = np.linalg.eigvalsh(c0)
    if c0_eigs[0] < 1.0 - tol.psd_tol * max(1.0, c0_eigs[-1]):
        raise VerificationError("C0 is not >= I", {"min_eigenvalue": float(c0_eigs[0])})
    c0_inv_half = _hermitian_function(c0, lambda w: 1.0 / np.sqrt(w))
    inner = b11 - b12 @ inv_half @ b22 @ inv_half @ b12.conj().T
    c = c0_inv_half @ inner @ c0_inv_half
    if not is_hermitian(c, tol.replace(hermitian_tol=max(tol.hermitian_tol, 1e-9))):
        raise VerificationError("C is not Hermitian")
    return c0, (c + c.conj().T) / 2


def _full(t: LinearRelation, b, tol: ToleranceConfig) -> SectorialDecomposition:
    return decompose_blocks(t, b, tol).with_c0_c()


def construct_direct(t: LinearRelation, b, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """The literal product ``T*((I + iB)T)`` of relations."""
    b = _check_b(t, b, tol)
    return compose(adjoint(t, tol), apply_left(np.eye(t.dim_k) + 1j * b, t, tol), tol)


def reduced_form(dec: SectorialDecomposition) -> SesquilinearForm:
    w = dec.w_matrix()
    m = w.conj().T @ (np.eye(w.shape[0]) + 1j * dec.c) @ w
    return SesquilinearForm(dec.t_s.domain, m)


def construct_reduced(t: LinearRelation, b, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """``(T_s)^x C0^{1/2}(I + iC)C0^{1/2} T_s`` through its form on ``dom T``."""
    return relation_of_form(reduced_form(_full(t, b, tol)), tol)


def invariant_case_form(dec: SectorialDecomposition) -> SesquilinearForm:
    """``((I + i b11) T_s h, T_s k)``: the form when mul T is invariant under B."""
    ts = dec.p_dom_tstar.basis.conj().T @ dec.t_s.matrix
    m = ts.conj().T @ (np.eye(ts.shape[0]) + 1j * dec.b11) @ ts
    return SesquilinearForm(dec.t_s.domain, m)


def operator_part_product(t: LinearRelation, b, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """``(T_s)*(I + iB)T_s`` with ``T_s`` regarded as a relation into all of K."""
    b = _check_b(t, b, tol)
    ts = operator_part(t, tol).to_relation(tol)
    return compose(adjoint(ts, tol), apply_left(np.eye(t.dim_k) + 1j * b, ts, tol), tol)


@dataclass
class IdentityReport:
    direct_vs_reduced_gap: float
    mul_gap: float
    is_sectorial: bool
    is_maximal: bool
    tan_alpha: float | None
    norm_c: float
    norm_b: float
    real_part_gap: float
    adjoint_used: str = "(T_s)^x: adjoint of T_s as an operator into closure(dom T*)"

    @property
    def bound_ok(self) -> bool:
        return self.tan_alpha is not None and self.tan_alpha <= min(self.norm_c, self.norm_b) + 1e-8

    @property
    def passed(self) -> bool:
        return (
            self.direct_vs_reduced_gap <= 1e-8
            and self.mul_gap <= 1e-8
            and self.real_part_gap <= 1e-8
            and self.is_sectorial
            and self.is_maximal
            and self.bound_ok
        )


def verify_identity(t: LinearRelation, b, tol: ToleranceConfig = DEFAULT_TOL) -> IdentityReport:
    dec = _full(t, b, tol)
    direct = construct_direct(t, b, tol)
    reduced = relation_of_form(reduced_form(dec), tol)
    verdict = sectoriality(direct, tol)
    mul_star = parts(adjoint(t, tol), tol).mul
    w = dec.w_matrix()
    real_expected = relation_of_form(SesquilinearForm(dec.t_s.domain, w.conj().T @ w), tol)
    try:
        real_gap = relation_gap(real_part_relation(direct, tol), real_expected)
    except ValueError:
        real_gap = 1.0
    return IdentityReport(
        direct_vs_reduced_gap=relation_gap(direct, reduced),
        mul_gap=gap(parts(direct, tol).mul, mul_star),
        is_sectorial=verdict.is_sectorial,
        is_maximal=verdict.is_maximal,
        tan_alpha=verdict.tan_alpha,
        norm_c=dec.tan_gamma_bound,
        norm_b=op_norm(dec.b),
        real_part_gap=real_gap,
    )


def closure_membership_check(dec: SectorialDecomposition, phi, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether ``(I + iB) phi`` lies in closure(dom T*).

    Raises ``VerificationError`` if the three equivalent conditions disagree.
    """
    if dec.c0 is None:
        dec = dec.with_c0_c()
    k = dec.b.shape[0]
    phi = as_matrix(phi, k, "phi")[:, 0]
    p, q = dec.p_dom_tstar.basis, dec.mul_t.basis
    c1, c2 = p.conj().T @ phi, q.conj().T @ phi
    eta = (np.eye(k) + 1j * dec.b) @ phi
    scale = max(np.linalg.norm(phi), 1e-300) * (1.0 + op_norm(dec.b))
    thr = tol.subspace_eq_tol * scale

    in_dom = np.linalg.norm(q.conj().T @ eta) <= thr
    reduced = dec.middle() @ (p @ c1)
    eq_reduced = np.linalg.norm(eta - reduced) <= thr
    if q.shape[1]:
        expected_c2 = -1j * np.linalg.solve(np.eye(q.shape[1]) + 1j * dec.b22, dec.b12.conj().T @ c1)
        eq_phi2 = np.linalg.norm(c2 - expected_c2) <= thr
    else:
        eq_phi2 = True
    if not (in_dom == eq_reduced == eq_phi2):
        raise VerificationError(
            "the three characterisations of (I+iB)phi in closure(dom T*) disagree",
            {"in_dom": bool(in_dom), "eq_reduced": bool(eq_reduced), "eq_phi2": bool(eq_phi2)},
        )
    return bool(in_dom)


# name kept for interface compatibility
remark32_check = closure_membership_check


@dataclass(frozen=True)
class InvarianceFlags:
    diag: bool
    b12_zero: bool
    c0_is_identity: bool
    mul_invariant: bool

    @property
    def all_true(self) -> bool:
        return self.diag and self.b12_zero and self.c0_is_identity and self.mul_invariant

    @property
    def all_false(self) -> bool:
        return not (self.diag or self.b12_zero or self.c0_is_identity or self.mul_invariant)


def invariance_flags(t: LinearRelation, b, tol: ToleranceConfig = DEFAULT_TOL) -> InvarianceFlags:
    """The four equivalent invariance conditions, each computed on its own.

    ``C0 - I`` is quadratic in ``b12``, hence its threshold is the square of
    the linear one.
    """
    dec = _full(t, b, tol)
    eps = tol.subspace_eq_tol * max(op_norm(dec.b), 1.0)
    pd, pm = dec.p_dom_tstar.projector(), dec.mul_t.projector()
    diag = op_norm(dec.b - pd @ dec.b @ pd - pm @ dec.b @ pm) <= eps
    b12_zero = op_norm(dec.b12) <= eps
    c0_id = dec.c0.size == 0 or op_norm(dec.c0 - np.eye(dec.c0.shape[0])) <= eps**2
    mul_inv = op_norm((np.eye(pm.shape[0]) - pm) @ dec.b @ dec.mul_t.basis) <= eps
    flags = InvarianceFlags(diag, b12_zero, c0_id, mul_inv)
    if not (flags.all_true or flags.all_false):
        raise VerificationError("invariance conditions disagree", {"flags": flags.__dict__})
    if flags.all_true:
        scale = max(op_norm(dec.b), 1e-300)
        if dec.c.size and op_norm(dec.c - dec.b11) > 1e-10 * scale:
            raise VerificationError("C differs from B11 under invariance")
        g = relation_gap(
            relation_of_form(reduced_form(dec), tol), relation_of_form(invariant_case_form(dec), tol)
        )
        if g > tol.subspace_eq_tol:
            raise VerificationError("reduced form differs from the invariant-case form", {"gap": g})
    return flags


def unitary_equivalence(t: LinearRelation, b, t2: LinearRelation, b2, tol: ToleranceConfig = DEFAULT_TOL):
    """Unitary ``U`` with ``T2 = U T`` and ``B2_bb = U B_bb U^H`` when both give one form.

    Operator case only. Returns a ``dim_k2 x dim_k`` matrix acting as ``U`` on
    ran T (zero on its complement), or ``None`` when the forms differ or the
    domains are unequal.
    """
    b = _check_b(t, b, tol)
    b2 = _check_b(t2, b2, tol)
    if parts(t, tol).mul.dim or parts(t2, tol).mul.dim:
        raise DimensionError("unitary_equivalence expects single-valued relations")
    if t.dim_h != t2.dim_h:
        raise DimensionError("relations start from different spaces")
    op1, op2 = operator_part(t, tol), operator_part(t2, tol)
    if gap(op1.domain, op2.domain) > tol.subspace_eq_tol:
        return None
    a1 = op1.matrix
    a2 = op2.apply(op1.domain.basis)
    scale = max(op_norm(a1) ** 2, op_norm(a2) ** 2, 1e-300) * max(1.0, op_norm(b), op_norm(b2))
    thr = tol.subspace_eq_tol * scale
    if op_norm(a1.conj().T @ a1 - a2.conj().T @ a2) > thr:
        return None
    if op_norm(a1.conj().T @ b @ a1 - a2.conj().T @ b2 @ a2) > thr:
        return None

    u = a2 @ pseudo_inverse(a1, tol)
    return u
