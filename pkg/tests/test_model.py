import json

import numpy as np
import pytest

from spinmix import (
    ModelFormatError,
    loads_model,
    dumps_model,
    model_hash,
    sk_model,
    two_species_quadratic_model,
)
from spinmix.model import load_model

from conftest import MODELS_DIR


def test_round_trip():
    m = two_species_quadratic_model()
    again = loads_model(dumps_model(m))
    assert again.species.names == m.species.names
    assert np.allclose(again.species.lam, m.species.lam)
    assert again.mixture == m.mixture


def test_shipped_fixtures_load():
    for name in ("sk", "pure3", "pure4", "two_species_quadratic"):
        model = load_model(MODELS_DIR / f"{name}.json")
        assert model.xi1() > 0.0


def test_missing_lambda_names_the_field():
    doc = {"species": [{"name": "a"}], "terms": [{"degrees": {"a": 2}, "delta_sq": 1.0}]}
    with pytest.raises(ModelFormatError, match="species\\[0\\].*lambda"):
        loads_model(json.dumps(doc))


def test_missing_terms_field():
    with pytest.raises(ModelFormatError, match="terms"):
        loads_model(json.dumps({"species": [{"name": "a", "lambda": 1.0}]}))


def test_unknown_species_in_term():
    doc = {
        "species": [{"name": "a", "lambda": 1.0}],
        "terms": [{"degrees": {"zz": 2}, "delta_sq": 1.0}],
    }
    with pytest.raises(ModelFormatError, match="unknown species 'zz'"):
        loads_model(json.dumps(doc))


def test_negative_degree_rejected():
    doc = {
        "species": [{"name": "a", "lambda": 1.0}],
        "terms": [{"degrees": {"a": -1}, "delta_sq": 1.0}],
    }
    with pytest.raises(ModelFormatError, match="degrees"):
        loads_model(json.dumps(doc))


def test_duplicate_terms_accumulate():
    doc = {
        "species": [{"name": "a", "lambda": 1.0}],
        "terms": [
            {"degrees": {"a": 2}, "delta_sq": 0.25},
            {"degrees": {"a": 2}, "delta_sq": 0.75},
        ],
    }
    model = loads_model(json.dumps(doc))
    assert model.mixture.terms() == {(2,): 1.0}


def test_invalid_json_reported():
    with pytest.raises(ModelFormatError, match="invalid JSON"):
        loads_model("{not json")


def test_model_hash_distinguishes_models():
    assert model_hash(sk_model()) != model_hash(two_species_quadratic_model())
    assert model_hash(sk_model()) == model_hash(sk_model())
