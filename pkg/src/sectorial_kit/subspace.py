"""Dense complex linear algebra and the lattice of subspaces of C^n.

Every subspace is stored through an orthonormal basis (columns). The inner
product is ``(x, y) = sum(x_i * conj(y_i)) = vdot(y, x)``: linear in the first
argument, conjugate-linear in the second.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotFiniteError, NotHermitianError, NotPSDError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "Subspace",
    "as_matrix",
    "orthonormalize",
    "complement",
    "join",
    "meet",
    "gap",
    "psd_sqrt",
    "pseudo_inverse",
    "op_norm",
    "null_space",
    "is_hermitian",
    "fix_phases",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Dimensionless tolerances, each relative to the scale of the tested object."""

    rank_rel_tol: float = 1e-10
    subspace_eq_tol: float = 1e-8
    psd_tol: float = 1e-10
    hermitian_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_rel_tol", "subspace_eq_tol", "psd_tol", "hermitian_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2), got {value!r}")

    def replace(self, **overrides: float) -> "ToleranceConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(overrides)
        return ToleranceConfig(**values)


DEFAULT_TOL = ToleranceConfig()


def as_matrix(m, rows: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array (a 1-D input becomes a column)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise DimensionError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise NotFiniteError(f"{name} has non-finite entries")
    return a


def fix_phases(basis: np.ndarray) -> np.ndarray:
    # first non-negligible component of each column made real positive
    out = basis.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-10 * max(np.linalg.norm(col), 1e-300))
        if big.size:
            z = col[big[0]]
            out[:, j] = col * (np.conj(z) / abs(z))
    return out


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^ambient_dim held through an orthonormal basis."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise DimensionError("ambient_dim must be positive")
        b = np.asarray(self.basis, dtype=np.complex128).reshape(self.ambient_dim, -1)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0), dtype=np.complex128))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n, dtype=np.complex128))

    @classmethod
    def coordinate(cls, n: int, indices) -> "Subspace":
        """Span of the standard basis vectors ``e_i`` for ``i`` in ``indices``."""
        idx = list(indices)
        b = np.zeros((n, len(idx)), dtype=np.complex128)
        for j, i in enumerate(idx):
            b[i, j] = 1.0
        return cls(n, b)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, vectors, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return self.residual(vectors) <= tol.subspace_eq_tol

    def residual(self, vectors) -> float:
        """Largest distance from the subspace of the given columns, relative to their norm."""
        v = as_matrix(vectors, self.ambient_dim, "vectors")
        if v.shape[1] == 0:
            return 0.0
        r = v - self.basis @ (self.basis.conj().T @ v)
        scale = max(np.linalg.norm(v, axis=0).max(), 1e-300)
        return float(np.linalg.norm(r, axis=0).max() / scale)

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def orthonormalize(
    generators,
    tol: ToleranceConfig = DEFAULT_TOL,
    *,
    ambient_dim: int | None = None,
    reference: float | None = None,
) -> Subspace:
    """Column span of ``generators``.

    Rank is the number of singular values at least ``rank_rel_tol * reference``
    where ``reference`` defaults to the largest singular value. Callers whose
    generators are built from orthonormal bases pass ``reference=1.0`` so that
    pure round-off is never promoted to a direction.
    """
    g = np.asarray(generators, dtype=np.complex128)
    if g.ndim == 1:
        g = g.reshape(-1, 1)
    if ambient_dim is None:
        ambient_dim = g.shape[0]
    g = as_matrix(g.reshape(ambient_dim, -1), ambient_dim, "generators")
    if g.shape[1] == 0:
        return Subspace.zero(ambient_dim)
    u, s, _ = np.linalg.svd(g, full_matrices=False)
    smax = s[0] if s.size else 0.0
    ref = smax if reference is None else reference
    if smax == 0.0:
        return Subspace.zero(ambient_dim)
    r = int(np.count_nonzero(s >= tol.rank_rel_tol * ref))
    return Subspace(ambient_dim, fix_phases(u[:, :r]))


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement within the ambient space."""
    n, d = s.ambient_dim, s.dim
    if d == 0:
        return Subspace.full(n)
    if d == n:
        return Subspace.zero(n)
    u, _, _ = np.linalg.svd(s.basis, full_matrices=True)
    return Subspace(n, fix_phases(u[:, d:]))


def _check_ambient(s1: Subspace, s2: Subspace) -> None:
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {s1.ambient_dim} vs {s2.ambient_dim}"
        )


def join(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    _check_ambient(s1, s2)
    return orthonormalize(
        np.hstack([s1.basis, s2.basis]), tol, ambient_dim=s1.ambient_dim, reference=1.0
    )


def meet(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    _check_ambient(s1, s2)
    return complement(join(complement(s1), complement(s2), tol))


def gap(s1: Subspace, s2: Subspace) -> float:
    """Operator norm of the difference of the orthogonal projectors, in [0, 1]."""
    _check_ambient(s1, s2)
    if s1.dim == 0 and s2.dim == 0:
        return 0.0
    value = float(np.linalg.norm(s1.projector() - s2.projector(), 2))
    return min(value, 1.0)


def op_norm(m) -> float:
    """Largest singular value (0 for an empty matrix)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_hermitian(m, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    a = np.asarray(m, dtype=np.complex128)
    if a.size == 0:
        return True
    return op_norm(a - a.conj().T) <= tol.hermitian_tol * max(op_norm(a), 1e-300)


def _check_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def psd_sqrt(m, tol: ToleranceConfig = DEFAULT_TOL, *, scale: float | None = None) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues within ``psd_tol`` of zero are clamped.

    ``scale`` (default ``||m||``) sets what counts as materially negative; pass
    the norm of a parent matrix when ``m`` is a part of it.
    """
    a = as_matrix(m, name="m")
    _check_square(a, "m")
    if a.size == 0:
        return a.copy()
    if not is_hermitian(a, tol):
        raise NotHermitianError("psd_sqrt needs a Hermitian matrix")
    h = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(h)
    scale = op_norm(a) if scale is None else max(scale, op_norm(a))
    if w.size and w[0] < -tol.psd_tol * scale:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} is materially negative")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def pseudo_inverse(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse; singular values below ``rank_rel_tol * sigma_max`` count as zero."""
    a = as_matrix(m, name="m")
    rows, cols = a.shape
    if a.size == 0:
        return np.zeros((cols, rows), dtype=np.complex128)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((cols, rows), dtype=np.complex128)
    keep = s >= tol.rank_rel_tol * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * inv) @ u.conj().T


def null_space(m, tol: ToleranceConfig = DEFAULT_TOL, *, reference: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of ``m``."""
    a = np.asarray(m, dtype=np.complex128)
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if rows == 0:
        return np.eye(cols, dtype=np.complex128)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    ref = smax if reference is None else reference
    r = int(np.count_nonzero(s >= tol.rank_rel_tol * ref)) if smax > 0 else 0
    return vh[r:].conj().T
