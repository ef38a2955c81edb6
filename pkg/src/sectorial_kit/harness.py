"""Verification suites: per-instance check lists and seeded multi-trial runs.

Trial ``i`` of a suite with base seed ``s`` draws everything from
``trial_seed(s, i)``, a fixed function of the pair, so trials can run in any
order (or in parallel) and give the same aggregate.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import VerificationError
from .forms import (
    form_of,
    is_maximal_sectorial,
    reconstruct_second_rep,
    relation_of_form,
    second_representation,
)
from .instance import (
    InstanceDocument,
    instance_digest,
    parse_instance,
    random_instance,
    serialize_instance,
    sum_inputs,
    tbt_inputs,
    tolerance_of,
)
from .relation import LinearRelation, adjoint, add_relations, operator_part, parts, relation_gap
from .subspace import DEFAULT_TOL, Subspace, ToleranceConfig, complement, gap, join, op_norm
from .sums import (
    build_workspace,
    extremal_from_domain,
    friedrichs_routes,
    form_sum,
    inclusion_chain,
    is_form_sum_extremal,
    krein_routes,
    prepare_summand,
    sample_intermediate_domains,
)
from .tbt import (
    construct_direct,
    construct_reduced,
    invariant_case_form,
    decompose_blocks,
    invariance_flags,
    reduced_form,
    closure_membership_check,
    verify_identity,
)

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "SUITES",
    "trial_seed",
    "trial_document",
    "tbt_checks",
    "secondrep_checks",
    "sums_checks",
    "check_instance",
    "run_suite",
]

SUITES = ("tbt", "secondrep", "sums")

# residual reported by a check whose computation raised
FAILED = math.inf


@dataclass
class CheckRecord:
    name: str
    anchor: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.threshold

    def to_dict(self) -> dict[str, Any]:
        r = self.residual
        return {
            "name": self.name,
            "anchor": self.anchor,
            "residual": r if math.isfinite(r) else repr(r),
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    instance_digest: str
    checks: list[CheckRecord]
    elapsed_ms: float
    failures: list[dict[str, Any]] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, normalize_timing: bool = True) -> dict[str, Any]:
        return {
            "instance_digest": self.instance_digest,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": "pass" if self.verdict else "fail",
            "elapsed_ms": None if normalize_timing else round(self.elapsed_ms, 3),
            "failures": self.failures,
        }

    def to_json(self, normalize_timing: bool = True) -> str:
        return json.dumps(self.to_dict(normalize_timing), sort_keys=True, indent=2) + "\n"


class _Checks:
    """Collects records; a raising block marks its checks as failed."""

    def __init__(self):
        self.records: list[CheckRecord] = []
        self.errors: list[str] = []

    def add(self, name: str, anchor: str, residual: float, threshold: float) -> None:
        self.records.append(CheckRecord(name, anchor, float(residual), threshold))

    def guarded(self, names: list[tuple[str, str, float]], fn: Callable[[], list[float]]) -> None:
        try:
            values = fn()
        except (ValueError, ArithmeticError, np.linalg.LinAlgError, VerificationError) as exc:
            self.errors.append(f"{names[0][0]}: {type(exc).__name__}: {exc}")
            values = [FAILED] * len(names)
        for (name, anchor, thr), v in zip(names, values):
            self.add(name, anchor, v, thr)


def _is_true(ok: bool) -> float:
    return 0.0 if ok else 1.0


def tbt_checks(t: LinearRelation, b, tol: ToleranceConfig, rng: np.random.Generator) -> _Checks:
    out = _Checks()
    b = np.asarray(b, dtype=np.complex128)

    def identity():
        rep = verify_identity(t, b, tol)
        direct = construct_direct(t, b, tol)
        mul_vs_dom = gap(parts(direct, tol).mul, complement(parts(t, tol).dom))
        return [
            rep.direct_vs_reduced_gap,
            max(rep.mul_gap, mul_vs_dom),
            _is_true(rep.is_sectorial and rep.is_maximal),
            max(0.0, rep.tan_alpha - min(rep.norm_c, rep.norm_b)) if rep.tan_alpha is not None else FAILED,
            rep.real_part_gap,
            relation_gap(construct_reduced(t, b, tol), direct),
        ]

    out.guarded(
        [
            ("identity_gap", "T*(I+iB)T = (T_s)^x C0^{1/2}(I+iC)C0^{1/2} T_s", 1e-8),
            ("mul_law", "mul T*(I+iB)T = mul T* = (dom T)^perp", 1e-8),
            ("maximal_sectorial", "T*(I+iB)T is maximal sectorial", 0.0),
            ("semi_angle_bound", "tan of the semi-angle is at most min(||C||, ||B||)", 1e-8),
            ("real_part", "real part of T*(I+iB)T is (C0^{1/2}T_s)^x (C0^{1/2}T_s)", 1e-8),
            ("reduced_construction", "construct_reduced reproduces the direct product", 1e-8),
        ],
        identity,
    )
    out.guarded(
        [("adjoint_involution", "T** = T for a closed relation", 1e-8)],
        lambda: [relation_gap(adjoint(adjoint(t, tol), tol), t)],
    )

    def forced():
        dec = decompose_blocks(t, b, tol)
        pd, pm = dec.p_dom_tstar.projector(), dec.mul_t.projector()
        bf = pd @ b @ pd + pm @ b @ pm
        flags = invariance_flags(t, bf, tol)
        decf = decompose_blocks(t, bf, tol).with_c0_c()
        scale = max(op_norm(bf), 1e-300)
        c_gap = op_norm(decf.c - decf.b11) / scale if decf.c.size else 0.0
        cor_gap = relation_gap(
            relation_of_form(reduced_form(decf), tol), relation_of_form(invariant_case_form(decf), tol)
        )
        return [_is_true(flags.all_true), c_gap, cor_gap]

    out.guarded(
        [
            ("invariance_forced", "B12 = 0 iff B = P B P + Q B Q iff C0 = I iff mul T reduces B", 0.0),
            ("invariance_c_equals_b11", "C = B11 when mul T reduces B", 1e-10),
            ("invariance_reduced_form", "T*(I+iB)T = T_s^x (I+iB11) T_s when mul T reduces B", 1e-8),
        ],
        forced,
    )

    def generic():
        dec = decompose_blocks(t, b, tol)
        m = dec.mul_t.dim
        eps = tol.subspace_eq_tol * max(op_norm(b), 1.0)
        if not (0 < m < t.dim_k) or op_norm(dec.b12) <= 1e3 * eps:
            return [0.0]
        return [_is_true(invariance_flags(t, b, tol).all_false)]

    out.guarded(
        [("invariance_generic", "all four invariance conditions fail together when B12 != 0", 0.0)],
        generic,
    )

    def closure_membership():
        dec = decompose_blocks(t, b, tol).with_c0_c()
        k = t.dim_k
        p = dec.p_dom_tstar.basis
        mismatches = 0
        # phi with (I+iB)phi in closure(dom T*) by construction
        if p.shape[1]:
            target = p @ (rng.normal(size=p.shape[1]) + 1j * rng.normal(size=p.shape[1]))
            phi = np.linalg.solve(np.eye(k) + 1j * b, target)
            mismatches += not closure_membership_check(dec, phi, tol)
        # generic phi misses it whenever mul T != {0}
        phi = rng.normal(size=k) + 1j * rng.normal(size=k)
        expected = dec.mul_t.dim == 0
        mismatches += closure_membership_check(dec, phi, tol) != expected
        return [float(mismatches)]

    out.guarded(
        [("closure_membership", "(I+iB)phi in closure(dom T*) iff phi2 = -i(I+iB22)^{-1}B12^* phi1", 0.0)],
        closure_membership,
    )
    return out


def secondrep_checks(h: LinearRelation, tol: ToleranceConfig, label: str = "") -> _Checks:
    out = _Checks()
    suffix = f"[{label}]" if label else ""

    def run():
        ok = is_maximal_sectorial(h, tol)
        rep = second_representation(h, tol)
        back = reconstruct_second_rep(rep, tol)
        s, g = rep.domain_matrices()
        w, v = np.linalg.eigh(s @ s) if s.size else (np.zeros(0), np.zeros((0, 0)))
        kernel = v[:, w <= tol.psd_tol * max(op_norm(s @ s), 1.0)] if s.size else v
        g_off = op_norm(g @ kernel) / max(op_norm(g), 1.0) if kernel.size else 0.0
        mul_gap = gap(parts(h, tol).mul, parts(rep.h_r, tol).mul)
        first = relation_gap(relation_of_form(form_of(h, tol), tol), h)
        return [
            _is_true(ok),
            relation_gap(back, h),
            abs(op_norm(rep.g) - rep.tan_alpha),
            first,
            mul_gap,
            g_off,
        ]

    out.guarded(
        [
            ("input_maximal_sectorial" + suffix, "input relation is maximal sectorial", 0.0),
            ("second_rep_roundtrip" + suffix, "H = ((H_r)_s^{1/2})^x (I+iG) (H_r)_s^{1/2}", 1e-8),
            ("norm_g_equals_tan_alpha" + suffix, "||G|| = tan(alpha)", 1e-8),
            ("first_rep_roundtrip" + suffix, "t[h,k] = (h',k) is a bijection onto closed sectorial forms", 1e-8),
            ("mul_real_part" + suffix, "mul H_r = mul H", 1e-8),
            ("g_vanishes_off_range" + suffix, "G vanishes on ker (H_r)_s^{1/2}", 1e-8),
        ],
        run,
    )
    return out


def sums_checks(h1: LinearRelation, h2: LinearRelation, tol: ToleranceConfig, rng: np.random.Generator) -> _Checks:
    out = _Checks()

    def run():
        both = _is_true(is_maximal_sectorial(h1, tol) and is_maximal_sectorial(h2, tol))
        total = add_relations(h1, h2, tol)
        sum_ok = _is_true(is_maximal_sectorial(total, tol))
        try:
            ws = build_workspace(prepare_summand(h1, tol), prepare_summand(h2, tol), tol)
        except VerificationError as exc:
            incl = exc.details.get("inclusions")
            if incl is None:
                raise
            return [both, float(sum(not v for v in incl.values()))] + [FAILED] * 11
        incl = inclusion_chain(ws)
        f_direct, f_reduced = friedrichs_routes(ws)
        k_direct, k_reduced, _ = krein_routes(ws)
        fs = form_sum(ws)
        extremals = [extremal_from_domain(ws, d) for d in sample_intermediate_domains(ws, 3, rng)]
        family = [total, f_direct, k_direct, fs, *extremals]
        spread = max(relation_gap(a, c) for a, c in itertools.combinations(family, 2))
        n = ws.n
        # (I+iB_+) Psi f = C0^{1/2}(I+iC)C0^{1/2} P_D Psi f on dom Psi
        psi_s = operator_part(ws.psi, tol).matrix
        lhs = (np.eye(2 * n) + 1j * ws.b_oplus) @ psi_s
        psi_red = op_norm(lhs - ws.dec.middle() @ psi_s) / max(op_norm(psi_s), 1.0)
        p1, p2 = parts(ws.s1.a_half, tol), parts(ws.s2.a_half, tol)
        dom_prod = Subspace(2 * n, np.block([
            [p1.dom.basis, np.zeros((n, p2.dom.dim))],
            [np.zeros((n, p1.dom.dim)), p2.dom.basis],
        ]))
        mul_join = join(parts(h1, tol).mul, parts(h2, tol).mul, tol)
        phi_parts = parts(ws.phi, tol)
        phi_gap = max(gap(phi_parts.dom, dom_prod), gap(phi_parts.mul, mul_join))
        return [
            both,
            float(sum(not v for v in incl.values())),
            sum_ok,
            relation_gap(f_direct, f_reduced),
            relation_gap(k_direct, k_reduced),
            spread,
            float(len(extremals) < 3),
            _is_true(is_form_sum_extremal(ws)),
            gap(ws.e_space, ws.f_space),
            gap(ws.d_space, ws.dec.p_dom_tstar),
            psi_red,
            phi_gap,
            gap(parts(total, tol).mul, mul_join),
        ]

    out.guarded(
        [
            ("summands_maximal_sectorial", "H1 and H2 are maximal sectorial", 0.0),
            ("inclusion_chain", "K ⊂ Phi ⊂ Psi* and Psi ⊂ Phi* ⊂ K*", 0.0),
            ("sum_maximal_sectorial", "H1 + H2 is maximal sectorial in finite dimension", 0.0),
            ("friedrichs_routes", "Psi*(I+iB_+)Psi** = Psi* C0^{1/2}(I+iC)C0^{1/2} P_D Psi_s", 1e-8),
            ("krein_routes", "K**(I+iB_+)K* = ((K*)_s)^x C0^{1/2}(I+iC)C0^{1/2} (K*)_s", 1e-8),
            ("extensions_coincide", "Friedrichs, Krein, form sum and extremal extensions equal H1 + H2", 1e-7),
            ("extremal_samples", "at least three intermediate domains sampled", 0.0),
            ("form_sum_extremal", "form sum is extremal iff E = F iff its form restricts the Krein form", 0.0),
            ("e_equals_f", "E = F in finite dimension", 1e-8),
            ("dom_k_closure", "closure(dom K) = (mul K*)^perp = (I+iB_+)E", 1e-8),
            ("psi_reduction", "(I+iB_+) Psi f = C0^{1/2}(I+iC)C0^{1/2} P_D Psi f on dom Psi", 1e-8),
            ("phi_parts", "dom Phi = dom A1^{1/2} x dom A2^{1/2}, mul Phi = mul H1 + mul H2", 1e-8),
            ("sum_mul_law", "mul(H1 + H2) = mul H1 + mul H2", 1e-8),
        ],
        run,
    )
    return out


def _check_rng(doc: InstanceDocument) -> np.random.Generator:
    return np.random.default_rng((doc.seed or 0, 1))


def _document_checks(doc: InstanceDocument, suite: str | None = None, tol: ToleranceConfig | None = None) -> _Checks:
    tol = tol if tol is not None else tolerance_of(doc)
    rng = _check_rng(doc)
    if doc.kind == "tbt":
        t, b = tbt_inputs(doc)
        return tbt_checks(t, b, tol, rng)
    h1, h2 = sum_inputs(doc)
    out = _Checks()
    parts_ = []
    if suite in (None, "sums"):
        parts_.append(sums_checks(h1, h2, tol, rng))
    if suite in (None, "secondrep"):
        # the checks are per-relation; the two summands share one record per name
        c1 = secondrep_checks(h1, tol)
        c2 = secondrep_checks(h2, tol)
        merged = _Checks()
        for r1, r2 in zip(c1.records, c2.records):
            merged.add(r1.name, r1.anchor, max(r1.residual, r2.residual), r1.threshold)
        merged.errors = c1.errors + c2.errors
        parts_.append(merged)
    for p in parts_:
        out.records += p.records
        out.errors += p.errors
    return out


def check_instance(doc: InstanceDocument, tol: ToleranceConfig | None = None) -> VerificationReport:
    """Every check that applies to ``doc``; the document's own seed drives any sampling."""
    start = time.perf_counter()
    checks = _document_checks(doc, None, tol)
    report = VerificationReport(instance_digest(doc), checks.records, (time.perf_counter() - start) * 1e3)
    if not report.verdict:
        report.failures.append({
            "checks": [c.name for c in checks.records if not c.passed],
            "errors": checks.errors,
            "instance": doc.to_dict(),
        })
    return report


def trial_seed(seed: int, index: int) -> int:
    """Seed of trial ``index``: first word of ``SeedSequence(seed, spawn_key=(index,))``."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint32)[0])


def trial_document(name: str, index: int, max_dim: int, seed: int) -> InstanceDocument:
    """Instance of trial ``index``; tbt trials with even index have mul T != {0}."""
    s = trial_seed(seed, index)
    rng = np.random.default_rng((s, 2))
    if name == "tbt":
        h = int(rng.integers(1, max_dim + 1))
        k = int(rng.integers(1, max_dim + 1))
        # even trials force mul T != {0}
        g = int(rng.integers(h + 1, h + k + 1)) if index % 2 == 0 else int(rng.integers(1, h + k + 1))
        return random_instance("tbt", (h, k), g, float(rng.uniform(0.0, 10.0)), s)
    n = int(rng.integers(1, max_dim + 1))
    return random_instance("sum", n, seed=s)


def run_suite(
    name: str,
    trials: int,
    max_dim: int,
    seed: int,
    tol: ToleranceConfig | None = None,
    instances: list[InstanceDocument] | None = None,
) -> VerificationReport:
    """Run ``trials`` seeded trials of suite ``name`` (or the given ``instances``).

    Residuals are aggregated by maximum per check name; a failing trial is
    recorded with its full instance document for replay.
    """
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    if instances is None:
        if not isinstance(trials, int) or trials < 1:
            raise ValueError("trials must be a positive integer")
        if not 1 <= max_dim <= 32:
            raise ValueError("max_dim must be in [1, 32]")
    start = time.perf_counter()
    worst: dict[str, CheckRecord] = {}
    digests = []
    failures = []
    count = len(instances) if instances is not None else trials
    for i in range(count):
        doc = instances[i] if instances is not None else trial_document(name, i, max_dim, seed)
        # replay goes through the serialised form, so run on exactly that
        doc = parse_instance(serialize_instance(doc))
        digests.append(instance_digest(doc))
        checks = _document_checks(doc, name, tol)
        for rec in checks.records:
            prev = worst.get(rec.name)
            if prev is None or not rec.residual <= prev.residual:
                worst[rec.name] = rec
        bad = [r.name for r in checks.records if not r.passed]
        if bad:
            failures.append({"trial": i, "checks": bad, "errors": checks.errors, "instance": doc.to_dict()})
    head = f"{name}:{count}:{max_dim}:{seed}:{tol or DEFAULT_TOL}:".encode()
    digest = hashlib.sha256(head + "".join(sorted(digests)).encode()).hexdigest()
    return VerificationReport(digest, list(worst.values()), (time.perf_counter() - start) * 1e3, failures)
