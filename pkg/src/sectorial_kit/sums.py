"""Maximal sectorial extensions of a sum ``H1 + H2`` of maximal sectorial relations.

Each summand is factored as ``H_j = A_j^{1/2}(I + iB_j)A_j^{1/2}`` with ``A_j``
its real part. From the factors one builds the relations

* ``Phi``: (H x H) -> H, ``{(f1, f2), f1' + f2'}`` with ``{f_j, f_j'}`` in ``A_j^{1/2}``
* ``Psi``: H -> H x H, ``h -> (A_1s^{1/2} h, A_2s^{1/2} h)`` on ``dom H1 ∩ dom H2``
* ``K``: (H x H) -> H, ``Phi`` restricted to ``(I + iB_+) ran Psi``

and from them the Friedrichs extension ``Psi*(I+iB_+)Psi**``, the Krein
extension ``K**(I+iB_+)K*`` and the form sum ``Phi**(I+iB_+)Phi*``.

In finite dimensions ``H1 + H2`` is already maximal sectorial, so all of these
coincide with it; each is still computed along its own route so that the
routes check one another.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DimensionError, NotSectorialError, VerificationError
from .forms import (
    SesquilinearForm,
    form_gap,
    form_of,
    is_maximal_sectorial,
    relation_of_form,
    second_representation,
)
from .relation import (
    LinearRelation,
    OperatorOnSubspace,
    add_relations,
    adjoint,
    apply_left,
    compose,
    make_relation,
    parts,
    relation_gap,
    relation_leq,
)
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    complement,
    gap,
    join,
    meet,
    orthonormalize,
)
from .tbt import SectorialDecomposition, decompose_blocks, reduced_form

__all__ = [
    "SummandData",
    "SumExtensionWorkspace",
    "prepare_summand",
    "build_workspace",
    "friedrichs",
    "krein",
    "form_sum",
    "is_form_sum_extremal",
    "extremal_from_domain",
    "relation_to_json",
    "sample_intermediate_domains",
    "inclusion_chain",
    "friedrichs_routes",
    "krein_routes",
    "form_sum_form",
]


def relation_to_json(t: LinearRelation) -> dict[str, Any]:
    """Graph generators of a relation as nested ``[re, im]`` lists."""
    cols = t.graph.basis.T
    return {
        "dim_h": t.dim_h,
        "dim_k": t.dim_k,
        "graph": [[[float(z.real), float(z.imag)] for z in col] for col in cols],
    }


def _fail(message: str, summands, **extra) -> VerificationError:
    details = {"summands": [relation_to_json(s.h) for s in summands]}
    details.update({k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in extra.items()})
    return VerificationError(message, details)


@dataclass(frozen=True, eq=False)
class SummandData:
    h: LinearRelation
    a: LinearRelation
    a_s_half: OperatorOnSubspace
    a_half: LinearRelation
    b_small: np.ndarray

    @property
    def n(self) -> int:
        return self.h.dim_h

    def root_matrix(self) -> np.ndarray:
        """``A_s^{1/2}`` as an n x n matrix, zero on ``mul A``."""
        return self.a_s_half.ambient_matrix()


def prepare_summand(h: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> SummandData:
    if not is_maximal_sectorial(h, tol):
        raise NotSectorialError("summand is not maximal sectorial")
    rep = second_representation(h, tol)
    dom = rep.s_half.domain
    s, _ = rep.domain_matrices()
    # A^{1/2} = A_s^{1/2} (+) ({0} x mul A): the relation of the form S on dom A
    a_half = relation_of_form(SesquilinearForm(dom, s), tol)
    n = h.dim_h
    back = compose(a_half, apply_left(np.eye(n) + 1j * rep.g, a_half, tol), tol)
    g = relation_gap(back, h)
    if g > tol.subspace_eq_tol:
        raise VerificationError("A^{1/2}(I+iB)A^{1/2} does not reproduce H", {"gap": g})
    return SummandData(h=h, a=rep.h_r, a_s_half=rep.s_half, a_half=a_half, b_small=rep.g)


@dataclass(frozen=True, eq=False)
class SumExtensionWorkspace:
    s1: SummandData
    s2: SummandData
    phi: LinearRelation
    phi_star: LinearRelation
    psi: LinearRelation
    k_rel: LinearRelation
    k_star: LinearRelation
    b_oplus: np.ndarray
    e_space: Subspace
    f_space: Subspace
    d_space: Subspace
    dec: SectorialDecomposition
    tol: ToleranceConfig = DEFAULT_TOL

    @property
    def n(self) -> int:
        return self.s1.n

    @property
    def c0(self) -> np.ndarray:
        return self.dec.c0

    @property
    def c(self) -> np.ndarray:
        return self.dec.c

    @property
    def p_d(self) -> np.ndarray:
        return self.d_space.projector()

    @property
    def sum_relation(self) -> LinearRelation:
        return add_relations(self.s1.h, self.s2.h, self.tol)

    def fail(self, message: str, **extra) -> VerificationError:
        return _fail(message, (self.s1, self.s2), **extra)


def _inclusions(ws_parts) -> dict[str, bool]:
    phi, phi_star, psi, k_rel, k_star, tol = ws_parts
    psi_star = adjoint(psi, tol)
    return {
        "K <= Phi": relation_leq(k_rel, phi, tol),
        "Phi <= Psi*": relation_leq(phi, psi_star, tol),
        "Psi <= Phi*": relation_leq(psi, phi_star, tol),
        "Phi* <= K*": relation_leq(phi_star, k_star, tol),
    }


def inclusion_chain(ws: SumExtensionWorkspace) -> dict[str, bool]:
    """The four inclusions ``K ⊂ Phi ⊂ Psi*`` and ``Psi ⊂ Phi* ⊂ K*``."""
    return _inclusions((ws.phi, ws.phi_star, ws.psi, ws.k_rel, ws.k_star, ws.tol))


def build_workspace(s1: SummandData, s2: SummandData, tol: ToleranceConfig = DEFAULT_TOL) -> SumExtensionWorkspace:
    if s1.n != s2.n:
        raise DimensionError("summands act in different spaces")
    n = s1.n
    z = np.zeros

    # Phi from graph bases of A_1^{1/2} and A_2^{1/2}
    g1, g2 = s1.a_half, s2.a_half
    gens_phi = np.hstack([
        np.vstack([g1.q_in, z((n, g1.graph.dim)), g1.q_out]),
        np.vstack([z((n, g2.graph.dim)), g2.q_in, g2.q_out]),
    ])
    phi = make_relation(2 * n, n, gens_phi, tol)
    phi_star = adjoint(phi, tol)

    r1, r2 = s1.root_matrix(), s2.root_matrix()
    common = meet(parts(s1.h, tol).dom, parts(s2.h, tol).dom, tol)
    e = common.basis
    psi = make_relation(n, 2 * n, np.vstack([e, r1 @ e, r2 @ e]), tol)

    u1 = (np.eye(n) + 1j * s1.b_small) @ r1 @ e
    u2 = (np.eye(n) + 1j * s2.b_small) @ r2 @ e
    mul_sum = join(parts(s1.h, tol).mul, parts(s2.h, tol).mul, tol).basis
    gens_k = np.hstack([
        np.vstack([u1, u2, r1 @ u1 + r2 @ u2]),
        np.vstack([z((2 * n, mul_sum.shape[1])), mul_sum]),
    ])
    k_rel = make_relation(2 * n, n, gens_k, tol)
    k_star = adjoint(k_rel, tol)

    b_oplus = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    b_oplus[:n, :n] = s1.b_small
    b_oplus[n:, n:] = s2.b_small

    e_space = orthonormalize(np.vstack([r1 @ e, r2 @ e]), tol, ambient_dim=2 * n)
    # F_0 ranges over dom A_1^{1/2} ∩ dom A_2^{1/2}; with finite dimension that is dom H1 ∩ dom H2
    common_half = meet(parts(s1.a_half, tol).dom, parts(s2.a_half, tol).dom, tol)
    f = common_half.basis
    f_space = orthonormalize(np.vstack([r1 @ f, r2 @ f]), tol, ambient_dim=2 * n)
    d_space = parts(k_rel, tol).dom

    dec = decompose_blocks(k_star, b_oplus, tol).with_c0_c()
    ws = SumExtensionWorkspace(
        s1, s2, phi, phi_star, psi, k_rel, k_star, b_oplus, e_space, f_space, d_space, dec, tol
    )

    incl = inclusion_chain(ws)
    if not all(incl.values()):
        raise ws.fail("inclusion chain K ⊂ Phi ⊂ Psi*, Psi ⊂ Phi* ⊂ K* broken", inclusions=incl)
    image = orthonormalize((np.eye(2 * n) + 1j * b_oplus) @ e_space.basis, tol, ambient_dim=2 * n)
    g = gap(d_space, image)
    if g > tol.subspace_eq_tol:
        raise ws.fail("dom K differs from (I+iB_+) E", gap=g)
    g = gap(d_space, dec.p_dom_tstar)
    if g > tol.subspace_eq_tol:
        raise ws.fail("closure(dom K) differs from (mul K*)^perp", gap=g)
    return ws


def friedrichs_routes(ws: SumExtensionWorkspace) -> tuple[LinearRelation, LinearRelation]:
    """``Psi*(I+iB_+)Psi**`` and ``Psi* C0^{1/2}(I+iC)C0^{1/2} P_D Psi_s``."""
    tol = ws.tol
    psi_star = adjoint(ws.psi, tol)
    psi_cc = adjoint(psi_star, tol)
    direct = compose(psi_star, apply_left(np.eye(2 * ws.n) + 1j * ws.b_oplus, psi_cc, tol), tol)
    # ws.dec.middle() vanishes off closure(dom K), which folds in P_D
    reduced = compose(psi_star, apply_left(ws.dec.middle(), ws.psi, tol), tol)
    return direct, reduced


def friedrichs(ws: SumExtensionWorkspace) -> LinearRelation:
    direct, reduced = friedrichs_routes(ws)
    g = relation_gap(direct, reduced)
    if g > 1e-8:
        raise ws.fail("the two Friedrichs expressions disagree", gap=g)
    return direct


def krein_routes(ws: SumExtensionWorkspace) -> tuple[LinearRelation, LinearRelation, SesquilinearForm]:
    """``K**(I+iB_+)K*``, ``((K*)_s)^x C0^{1/2}(I+iC)C0^{1/2}(K*)_s`` and its form."""
    tol = ws.tol
    k_cc = adjoint(ws.k_star, tol)
    direct = compose(k_cc, apply_left(np.eye(2 * ws.n) + 1j * ws.b_oplus, ws.k_star, tol), tol)
    form = reduced_form(ws.dec)
    return direct, relation_of_form(form, tol), form


def krein(ws: SumExtensionWorkspace) -> tuple[LinearRelation, SesquilinearForm]:
    direct, reduced, form = krein_routes(ws)
    g = relation_gap(direct, reduced)
    if g > 1e-8:
        raise ws.fail("the two Krein expressions disagree", gap=g)
    return direct, form


def form_sum_form(ws: SumExtensionWorkspace) -> SesquilinearForm:
    """Sum of ``((I+iB_j)A_js^{1/2} h, A_js^{1/2} k)`` on ``dom A_1^{1/2} ∩ dom A_2^{1/2}``."""
    tol = ws.tol
    n = ws.n
    dom = meet(parts(ws.s1.a_half, tol).dom, parts(ws.s2.a_half, tol).dom, tol)
    d = dom.basis
    m = np.zeros((dom.dim, dom.dim), dtype=np.complex128)
    for s in (ws.s1, ws.s2):
        r = s.root_matrix() @ d
        m += r.conj().T @ (np.eye(n) + 1j * s.b_small) @ r
    return SesquilinearForm(dom, m)


def form_sum(ws: SumExtensionWorkspace) -> LinearRelation:
    tol = ws.tol
    phi_cc = adjoint(ws.phi_star, tol)
    result = compose(phi_cc, apply_left(np.eye(2 * ws.n) + 1j * ws.b_oplus, ws.phi_star, tol), tol)
    if not relation_leq(ws.sum_relation, result, tol):
        raise ws.fail("form sum does not extend H1 + H2")
    dg, mg = form_gap(form_of(result, tol), form_sum_form(ws))
    if dg > tol.subspace_eq_tol or mg > 1e-8:
        raise ws.fail("form of the form sum differs from the summed forms", domain_gap=dg, matrix_gap=mg)
    return result


def is_form_sum_extremal(ws: SumExtensionWorkspace, tol: ToleranceConfig | None = None) -> bool:
    """``E = F``, cross-checked against "form of the form sum restricts the Krein form"."""
    tol = tol or ws.tol
    by_spaces = gap(ws.e_space, ws.f_space) <= tol.subspace_eq_tol
    fs_form = form_of(form_sum(ws), tol)
    _, k_form = krein(ws)
    dom_phi_star = parts(ws.phi_star, tol).dom
    inside = k_form.domain.residual(dom_phi_star.basis) <= tol.subspace_eq_tol
    by_forms = False
    if inside:
        dg, mg = form_gap(fs_form, k_form.restrict(dom_phi_star))
        by_forms = dg <= tol.subspace_eq_tol and mg <= 1e-8
    if by_spaces != by_forms:
        raise ws.fail(
            "E = F verdict disagrees with the Krein-restriction verdict",
            by_spaces=by_spaces, by_forms=by_forms,
        )
    return by_spaces


def extremal_from_domain(ws: SumExtensionWorkspace, d_sub: Subspace, tol: ToleranceConfig | None = None) -> LinearRelation:
    """``R*(I+iC)R`` with ``R`` the restriction of ``C0^{1/2}(K*)_s`` to ``d_sub``.

    ``d_sub`` must satisfy ``dom Psi ⊂ d_sub ⊂ dom K*``.
    """
    tol = tol or ws.tol
    if d_sub.ambient_dim != ws.n:
        raise DimensionError("d_sub lives in the wrong space")
    dom_psi = parts(ws.psi, tol).dom
    dom_kstar = ws.dec.t_s.domain
    if d_sub.residual(dom_psi.basis) > tol.subspace_eq_tol or (
        d_sub.dim and dom_kstar.residual(d_sub.basis) > tol.subspace_eq_tol
    ):
        raise ValueError("d_sub must lie between dom Psi and dom K*")
    w = ws.dec.w_matrix() @ (dom_kstar.basis.conj().T @ d_sub.basis)
    m = w.conj().T @ (np.eye(w.shape[0]) + 1j * ws.c) @ w
    result = relation_of_form(SesquilinearForm(d_sub, m), tol)
    if not relation_leq(ws.sum_relation, result, tol):
        raise ws.fail("extremal extension does not extend H1 + H2")
    if not is_maximal_sectorial(result, tol):
        raise ws.fail("extremal extension is not maximal sectorial")
    return result


def sample_intermediate_domains(ws: SumExtensionWorkspace, count: int, rng: np.random.Generator) -> list[Subspace]:
    """``dom Psi (+) V`` for random subspaces ``V`` of the complement of dom Psi in dom K*.

    Each sample is built from freshly rotated generators, so the returned bases
    differ even when the admissible interval is a single subspace.
    """
    tol = ws.tol
    n = ws.n
    dom_psi = parts(ws.psi, tol).dom
    dom_kstar = ws.dec.t_s.domain
    extra = meet(dom_kstar, complement(dom_psi), tol)
    out = []
    for _ in range(count):
        k = int(rng.integers(0, extra.dim + 1))
        mix = rng.normal(size=(extra.dim, k)) + 1j * rng.normal(size=(extra.dim, k))
        rot = rng.normal(size=(dom_psi.dim, dom_psi.dim)) + 1j * rng.normal(size=(dom_psi.dim, dom_psi.dim))
        gens = np.hstack([dom_psi.basis @ rot, extra.basis @ mix])
        out.append(orthonormalize(gens, tol, ambient_dim=n))
    return out
