"""
Shared fixtures: registry models, seeded random forms and metric samples.
"""

import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np
import pytest

# Add the repository root to the import path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from engine.forms import CoframeAlgebra, Weight, WForm  # noqa: E402
from engine.scalars import GaussRat  # noqa: E402
from models.dsl import ModelFile, parse  # noqa: E402
from models.registry import registry  # noqa: E402

REGISTRY = ("iwasawa", "nakamura-i", "nakamura-ii")

# dη³ = η¹∧η̄¹: a nilpotent structure whose identity metric is not balanced
NON_BALANCED = """
model non-balanced
dim 3
d e3 = e1 ^ ~e1
metric g {
  row 1, 0, 0
  row 0, 1, 0
  row 0, 0, 1
}
"""


@pytest.fixture
def iwasawa() -> ModelFile:
    return registry("iwasawa")


@pytest.fixture
def nakamura_i() -> ModelFile:
    return registry("nakamura-i")


@pytest.fixture
def nakamura_ii() -> ModelFile:
    return registry("nakamura-ii")


@pytest.fixture(params=REGISTRY)
def any_model(request) -> ModelFile:
    return registry(request.param)


@pytest.fixture
def non_balanced() -> ModelFile:
    return parse(NON_BALANCED, source="non-balanced.balg")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def random_gauss(rng: np.random.Generator) -> GaussRat:
    return GaussRat(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))


def random_form(
    algebra: CoframeAlgebra,
    rng: np.random.Generator,
    p: int,
    q: int,
    weights: Optional[Sequence[Weight]] = None,
    terms: int = 3,
) -> WForm:
    """A (p,q)-form with a few Gaussian-integer terms spread over the given weights."""
    weights = list(weights or [algebra.zero_weight])
    basis = algebra.basis(p, q)
    out = algebra.zero()
    for _ in range(terms):
        h, a = basis[int(rng.integers(len(basis)))]
        w = weights[int(rng.integers(len(weights)))]
        out = out + algebra.mono(h, a, w, coeff=random_gauss(rng))
    return out


@pytest.fixture
def form_factory(rng) -> Callable[..., WForm]:
    def make(algebra: CoframeAlgebra, p: int, q: int, weights=None, terms: int = 3) -> WForm:
        return random_form(algebra, rng, p, q, weights, terms)
    return make


def random_metric(rng: np.random.Generator, n: int) -> np.ndarray:
    """A well-conditioned positive-definite Hermitian matrix."""
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return b @ b.conj().T / n + np.eye(n)


@pytest.fixture
def metric_samples(rng) -> List[np.ndarray]:
    return [np.eye(3, dtype=complex)] + [random_metric(rng, 3) for _ in range(4)]
