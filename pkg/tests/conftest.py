import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spinmix import (
    Mixture,
    ModelSpec,
    SpeciesSet,
    pure_model,
    sk_model,
    two_species_quadratic_model,
)

MODELS_DIR = Path(__file__).parent.parent / "models"


@pytest.fixture
def sk() -> ModelSpec:
    return sk_model()


@pytest.fixture
def pure3() -> ModelSpec:
    return pure_model(3)


@pytest.fixture
def pure4() -> ModelSpec:
    return pure_model(4)


@pytest.fixture
def two_quad() -> ModelSpec:
    return two_species_quadratic_model()


@pytest.fixture
def cubic_two_species() -> ModelSpec:
    """Two-species cubic mixture satisfying positivity off the origin."""
    return ModelSpec(
        SpeciesSet(("a", "b"), np.array([0.6, 0.4])),
        Mixture.from_terms(
            ("a", "b"),
            {(2, 0): 0.7, (0, 2): 0.3, (1, 1): 0.5, (2, 1): 0.9, (3, 0): 0.2},
        ),
    )


@pytest.fixture
def cross_only() -> ModelSpec:
    """Two species coupled only through the (1,1) term; positivity fails."""
    return ModelSpec(
        SpeciesSet(("a", "b"), np.array([0.5, 0.5])),
        Mixture.from_terms(("a", "b"), {(1, 1): 1.0}),
    )


def random_mixture(rng: np.random.Generator, n_species: int, max_total: int = 4) -> Mixture:
    names = ("a", "b", "c")[:n_species]
    terms = {}
    for _ in range(int(rng.integers(1, 5))):
        while True:
            degs = tuple(int(d) for d in rng.integers(0, max_total + 1, size=n_species))
            if 2 <= sum(degs) <= max_total:
                break
        terms[degs] = terms.get(degs, 0.0) + float(rng.uniform(0.1, 2.0))
    return Mixture.from_terms(names, terms)


def random_model(rng: np.random.Generator, n_species: int, max_total: int = 4) -> ModelSpec:
    names = ("a", "b", "c")[:n_species]
    if n_species == 1:
        lam = np.array([1.0])
    else:
        w = rng.uniform(0.2, 0.8, size=n_species)
        lam = w / w.sum()
    return ModelSpec(SpeciesSet(names, lam), random_mixture(rng, n_species, max_total))
