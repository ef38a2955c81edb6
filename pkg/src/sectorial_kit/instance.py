"""JSON instance documents and seeded random instances.

Schema::

    {
      "kind": "tbt" | "sum",
      "dims": {"dim_h": h, "dim_k": k}            # tbt
              {"n": n}                            # sum
      "payload": {"t": [vector, ...], "b": matrix}                       # tbt
                 {"summands": [summand, summand]}                        # sum
      "tolerances": {"rank_rel_tol": ..., ...}    # optional
      "seed": int                                  # optional
    }

A complex scalar is ``[re, im]``, a vector a list of scalars, a matrix a list
of rows. A summand is ``{"graph": [vector, ...]}`` (generators of length 2n)
or ``{"form": {"domain": [vector, ...], "matrix": matrix}}`` where the matrix
acts on coordinates with respect to the (independent) domain generators.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .forms import SesquilinearForm, relation_of_form
from .relation import LinearRelation, make_relation
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    is_hermitian,
    op_norm,
    orthonormalize,
)

__all__ = [
    "InstanceError",
    "InstanceDocument",
    "MAX_DIM",
    "parse_instance",
    "serialize_instance",
    "instance_digest",
    "tbt_inputs",
    "sum_inputs",
    "tolerance_of",
    "random_instance",
    "random_sectorial_form",
    "encode_matrix",
    "encode_vectors",
]

MAX_DIM = 32


class InstanceError(ValueError):
    """Schema violation; ``path`` locates the offending entry."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class InstanceDocument:
    kind: str
    dims: dict[str, int]
    payload: dict[str, Any]
    tolerances: dict[str, float] | None = None
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "dims": self.dims, "payload": self.payload}
        if self.tolerances is not None:
            out["tolerances"] = self.tolerances
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def encode_scalar(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def encode_matrix(m) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=np.complex128)
    return [[encode_scalar(z) for z in row] for row in m]


def encode_vectors(columns) -> list[list[list[float]]]:
    """Columns of a matrix as a list of vectors."""
    return encode_matrix(np.asarray(columns, dtype=np.complex128).T)


def _scalar(x, path: str) -> complex:
    if (
        not isinstance(x, list)
        or len(x) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)
    ):
        raise InstanceError(path, "complex scalar must be [re, im]")
    z = complex(float(x[0]), float(x[1]))
    if not np.isfinite(z):
        raise InstanceError(path, "non-finite entry")
    return z


def _matrix(x, path: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    if not isinstance(x, list):
        raise InstanceError(path, "matrix must be a list of rows")
    if rows is not None and len(x) != rows:
        raise InstanceError(path, f"expected {rows} rows, got {len(x)}")
    out = []
    for i, row in enumerate(x):
        if not isinstance(row, list):
            raise InstanceError(f"{path}[{i}]", "row must be a list")
        if cols is not None and len(row) != cols:
            raise InstanceError(f"{path}[{i}]", f"expected {cols} entries, got {len(row)}")
        out.append([_scalar(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    if rows == 0 or not out:
        return np.zeros((0, cols or 0), dtype=np.complex128)
    width = {len(r) for r in out}
    if len(width) != 1:
        raise InstanceError(path, "ragged matrix")
    return np.array(out, dtype=np.complex128)


def _vectors(x, path: str, length: int) -> np.ndarray:
    """A list of vectors, returned as a ``length x count`` column matrix."""
    if not isinstance(x, list):
        raise InstanceError(path, "generators must be a list of vectors")
    m = _matrix(x, path, cols=length)
    return m.T.reshape(length, len(x))


def _dim(x, path: str) -> int:
    if not isinstance(x, int) or isinstance(x, bool) or not (1 <= x <= MAX_DIM):
        raise InstanceError(path, f"dimension must be an integer in [1, {MAX_DIM}]")
    return x


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise InstanceError(path, "expected an object")
    if key not in obj:
        raise InstanceError(f"{path}.{key}" if path else key, "missing")
    return obj[key]


def tolerance_of(doc: InstanceDocument, base: ToleranceConfig = DEFAULT_TOL) -> ToleranceConfig:
    return base.replace(**(doc.tolerances or {}))


def _validate(doc: InstanceDocument) -> None:
    if doc.tolerances is not None:
        if not isinstance(doc.tolerances, dict):
            raise InstanceError("tolerances", "expected an object")
        for k, v in doc.tolerances.items():
            if k not in DEFAULT_TOL.__dataclass_fields__:
                raise InstanceError(f"tolerances.{k}", "unknown tolerance")
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise InstanceError(f"tolerances.{k}", "must be a number")
        try:
            tolerance_of(doc)
        except ValueError as exc:
            raise InstanceError("tolerances", str(exc)) from None
    if doc.seed is not None and (not isinstance(doc.seed, int) or isinstance(doc.seed, bool)):
        raise InstanceError("seed", "must be an integer")
    if doc.kind == "tbt":
        tbt_inputs(doc)
    elif doc.kind == "sum":
        sum_inputs(doc)
    else:
        raise InstanceError("kind", "must be 'tbt' or 'sum'")


def tbt_inputs(doc: InstanceDocument) -> tuple[LinearRelation, np.ndarray]:
    tol = tolerance_of(doc)
    h = _dim(_require(doc.dims, "dim_h", "dims"), "dims.dim_h")
    k = _dim(_require(doc.dims, "dim_k", "dims"), "dims.dim_k")
    gens = _vectors(_require(doc.payload, "t", "payload"), "payload.t", h + k)
    b = _matrix(_require(doc.payload, "b", "payload"), "payload.b", rows=k, cols=k)
    if not is_hermitian(b, tol):
        raise InstanceError("payload.b", "matrix is not Hermitian")
    return make_relation(h, k, gens, tol), b


def _summand(x, path: str, n: int, tol: ToleranceConfig) -> LinearRelation:
    if not isinstance(x, dict) or len(x) != 1 or not ({"graph", "form"} & set(x)):
        raise InstanceError(path, "summand must be {'graph': ...} or {'form': ...}")
    if "graph" in x:
        return make_relation(n, n, _vectors(x["graph"], f"{path}.graph", 2 * n), tol)
    form = x["form"]
    gens = _vectors(_require(form, "domain", f"{path}.form"), f"{path}.form.domain", n)
    d = gens.shape[1]
    m = _matrix(_require(form, "matrix", f"{path}.form"), f"{path}.form.matrix", rows=d, cols=d)
    dom = orthonormalize(gens, tol, ambient_dim=n)
    if dom.dim != d:
        raise InstanceError(f"{path}.form.domain", "domain generators are linearly dependent")
    # coordinates w.r.t. the generators -> coordinates w.r.t. the orthonormal basis
    r_inv = np.linalg.inv(dom.basis.conj().T @ gens) if d else np.zeros((0, 0))
    m_on = r_inv.conj().T @ m @ r_inv
    try:
        return relation_of_form(SesquilinearForm(dom, m_on), tol)
    except ValueError as exc:
        raise InstanceError(f"{path}.form.matrix", str(exc)) from None


def sum_inputs(doc: InstanceDocument) -> tuple[LinearRelation, LinearRelation]:
    tol = tolerance_of(doc)
    n = _dim(_require(doc.dims, "n", "dims"), "dims.n")
    summands = _require(doc.payload, "summands", "payload")
    if not isinstance(summands, list) or len(summands) != 2:
        raise InstanceError("payload.summands", "expected exactly two summands")
    return tuple(_summand(s, f"payload.summands[{i}]", n, tol) for i, s in enumerate(summands))


def parse_instance(text: str) -> InstanceDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("$", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InstanceError("$", "top level must be an object")
    unknown = set(raw) - {"kind", "dims", "payload", "tolerances", "seed"}
    if unknown:
        raise InstanceError(sorted(unknown)[0], "unknown key")
    kind = _require(raw, "kind", "")
    dims = _require(raw, "dims", "")
    payload = _require(raw, "payload", "")
    if not isinstance(dims, dict):
        raise InstanceError("dims", "expected an object")
    if not isinstance(payload, dict):
        raise InstanceError("payload", "expected an object")
    doc = InstanceDocument(kind, dims, payload, raw.get("tolerances"), raw.get("seed"))
    _validate(doc)
    return doc


def serialize_instance(doc: InstanceDocument) -> str:
    """Canonical JSON: sorted keys, two-space indent, shortest float repr."""
    return json.dumps(doc.to_dict(), sort_keys=True, indent=2) + "\n"


def instance_digest(doc: InstanceDocument) -> str:
    return hashlib.sha256(serialize_instance(doc).encode("utf-8")).hexdigest()


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _hermitian(rng: np.random.Generator, n: int, norm: float) -> np.ndarray:
    x = _gaussian(rng, (n, n))
    b = (x + x.conj().T) / 2
    s = op_norm(b)
    return b * (norm / s) if s > 0 else b


def random_sectorial_form(rng: np.random.Generator, n: int, tol: ToleranceConfig = DEFAULT_TOL):
    """Random (domain, form matrix) of a maximal sectorial relation in C^n.

    With probability 1/2 the domain is a proper subspace (nontrivial mul) and,
    independently, with probability 1/2 the real part is rank deficient.
    Then ``M = M_r + i S G S`` with ``S = M_r^{1/2}`` and Hermitian ``G``.
    """
    d = n if rng.random() < 0.5 else int(rng.integers(0, n))
    dom = orthonormalize(_gaussian(rng, (n, d)), tol, ambient_dim=n) if d else Subspace.zero(n)
    r = d if rng.random() < 0.5 else int(rng.integers(0, d + 1))
    # explicit spectral factors keep the kernel of M_r exact
    u, _ = np.linalg.qr(_gaussian(rng, (d, d)))
    lam = np.zeros(d)
    lam[:r] = rng.uniform(0.1, 5.0, size=r)
    mr = (u * lam) @ u.conj().T
    s = (u * np.sqrt(lam)) @ u.conj().T
    g = _hermitian(rng, d, rng.uniform(0.0, 3.0)) if d else np.zeros((0, 0))
    return dom, mr + 1j * (s @ g @ s)


def random_instance(
    kind: str,
    dims,
    graph_dim: int | None = None,
    norm_cap: float = 10.0,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> InstanceDocument:
    """Deterministic random instance.

    ``kind="tbt"``: ``dims = (dim_h, dim_k)``; the graph of T is an
    orthonormalised complex Gaussian of dimension ``graph_dim`` (default
    ``dim_h``) and ``B`` a random Hermitian matrix of norm ``norm_cap``.
    ``kind="sum"``: ``dims = n`` (or ``(n,)``); two maximal sectorial summands
    from :func:`random_sectorial_form`, each stored as a form or as graph
    generators at random. ``graph_dim`` and ``norm_cap`` are unused there.
    """
    rng = np.random.default_rng(seed)
    if kind == "tbt":
        h, k = (int(v) for v in dims)
        for v, name in ((h, "dim_h"), (k, "dim_k")):
            if not 1 <= v <= MAX_DIM:
                raise ValueError(f"{name} must be in [1, {MAX_DIM}]")
        g = h if graph_dim is None else int(graph_dim)
        if not 0 <= g <= h + k:
            raise ValueError(f"graph_dim must be in [0, {h + k}]")
        if not norm_cap >= 0:
            raise ValueError("norm_cap must be nonnegative")
        graph = orthonormalize(_gaussian(rng, (h + k, g)), tol, ambient_dim=h + k)
        b = _hermitian(rng, k, norm_cap)
        return InstanceDocument(
            "tbt",
            {"dim_h": h, "dim_k": k},
            {"t": encode_vectors(graph.basis), "b": encode_matrix(b)},
            seed=int(seed),
        )
    if kind == "sum":
        n = int(dims if np.isscalar(dims) else dims[0])
        if not 1 <= n <= MAX_DIM:
            raise ValueError(f"n must be in [1, {MAX_DIM}]")
        summands = []
        for _ in range(2):
            dom, m = random_sectorial_form(rng, n, tol)
            if rng.random() < 0.5:
                summands.append({"form": {"domain": encode_vectors(dom.basis), "matrix": encode_matrix(m)}})
            else:
                rel = relation_of_form(SesquilinearForm(dom, m), tol)
                summands.append({"graph": encode_vectors(rel.graph.basis)})
        return InstanceDocument("sum", {"n": n}, {"summands": summands}, seed=int(seed))
    raise ValueError("kind must be 'tbt' or 'sum'")

