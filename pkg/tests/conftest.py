from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from sectorial_kit import Subspace, make_relation, orthonormalize

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def cgauss(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_subspace(rng: np.random.Generator, n: int, d: int) -> Subspace:
    if d == 0:
        return Subspace.zero(n)
    return orthonormalize(cgauss(rng, n, d), ambient_dim=n)


def random_relation(rng: np.random.Generator, h: int, k: int, g: int | None = None):
    g = int(rng.integers(0, h + k + 1)) if g is None else g
    return make_relation(h, k, cgauss(rng, h + k, g))


def random_hermitian(rng: np.random.Generator, n: int, norm: float = 1.0) -> np.ndarray:
    x = cgauss(rng, n, n)
    b = (x + x.conj().T) / 2
    return b * (norm / np.linalg.norm(b, 2))


def pinned_t():
    """T = span{(1, (1, 0)), (0, (0, 1))} with dim H = 1, dim K = 2."""
    return make_relation(1, 2, np.array([[1, 0], [1, 0], [0, 1]], dtype=complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
