from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sectorial_kit import (
    InstanceError,
    graph_of,
    instance_digest,
    is_maximal_sectorial,
    parse_instance,
    random_instance,
    relation_gap,
    serialize_instance,
    sum_inputs,
    tbt_inputs,
)

from conftest import pinned_t

R1, R0 = [1.0, 0.0], [0.0, 0.0]

PINNED = {
    "kind": "tbt",
    "dims": {"dim_h": 1, "dim_k": 2},
    "payload": {
        "t": [[R1, R1, R0], [R0, R0, R1]],
        "b": [[R1, R1], [R1, R1]],
    },
}


def normalize(text: str) -> str:
    return json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_pinned_document_parses_and_roundtrips():
    text = json.dumps(PINNED)
    doc = parse_instance(text)
    assert serialize_instance(doc) == normalize(text)
    t, b = tbt_inputs(doc)
    assert relation_gap(t, pinned_t()) < 1e-15
    assert np.allclose(b, np.ones((2, 2)))
    again = serialize_instance(parse_instance(serialize_instance(doc)))
    assert again == serialize_instance(doc)


def test_non_hermitian_b_names_path():
    bad = json.loads(json.dumps(PINNED))
    bad["payload"]["b"][0][1] = [2.0, 0.0]
    with pytest.raises(InstanceError) as err:
        parse_instance(json.dumps(bad))
    assert err.value.path == "payload.b"


def test_sum_of_scalar_graphs():
    doc = {
        "kind": "sum",
        "dims": {"n": 1},
        "payload": {"summands": [{"graph": [[R1, [2.0, 0.0]]]}, {"graph": [[R1, [1.5, 0.5]]]}]},
    }
    h1, h2 = sum_inputs(parse_instance(json.dumps(doc)))
    assert relation_gap(h1, graph_of(np.array([[2.0]]))) < 1e-15
    assert relation_gap(h2, graph_of(np.array([[1.5 + 0.5j]]))) < 1e-15


def test_form_summand_uses_generator_coordinates():
    # t[c g, c g] = 4|c|^2 with g = 2 e, so the operator is 1
    doc = {
        "kind": "sum",
        "dims": {"n": 1},
        "payload": {"summands": [
            {"form": {"domain": [[[2.0, 0.0]]], "matrix": [[[4.0, 0.0]]]}},
            {"form": {"domain": [], "matrix": []}},
        ]},
    }
    h1, h2 = sum_inputs(parse_instance(json.dumps(doc)))
    assert relation_gap(h1, graph_of(np.array([[1.0]]))) < 1e-14
    assert h2.graph.dim == 1 and h2.dim_h == 1


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d.pop("payload"), "payload"),
        (lambda d: d.__setitem__("kind", "other"), "kind"),
        (lambda d: d["dims"].__setitem__("dim_h", 0), "dims.dim_h"),
        (lambda d: d["dims"].__setitem__("dim_k", 33), "dims.dim_k"),
        (lambda d: d["payload"]["t"][0].pop(), "payload.t[0]"),
        (lambda d: d["payload"]["t"][1].__setitem__(0, [1.0]), "payload.t[1][0]"),
        (lambda d: d["payload"]["b"].pop(), "payload.b"),
        (lambda d: d.__setitem__("extra", 1), "extra"),
        (lambda d: d.__setitem__("tolerances", {"psd_tol": 1.0}), "tolerances"),
        (lambda d: d.__setitem__("tolerances", {"bogus": 1e-8}), "tolerances.bogus"),
        (lambda d: d.__setitem__("seed", "x"), "seed"),
    ],
)
def test_schema_errors(mutate, path):
    doc = json.loads(json.dumps(PINNED))
    mutate(doc)
    with pytest.raises(InstanceError) as err:
        parse_instance(json.dumps(doc))
    assert err.value.path == path


def test_invalid_json_and_dependent_domain():
    with pytest.raises(InstanceError):
        parse_instance("{not json")
    doc = {
        "kind": "sum",
        "dims": {"n": 2},
        "payload": {"summands": [
            {"form": {"domain": [[R1, R0], [[2.0, 0.0], R0]], "matrix": [[R1, R0], [R0, R1]]}},
            {"graph": []},
        ]},
    }
    with pytest.raises(InstanceError) as err:
        parse_instance(json.dumps(doc))
    assert err.value.path == "payload.summands[0].form.domain"


def test_tolerance_overrides_are_kept():
    doc = dict(PINNED, tolerances={"subspace_eq_tol": 1e-9}, seed=5)
    parsed = parse_instance(json.dumps(doc))
    assert parsed.tolerances == {"subspace_eq_tol": 1e-9} and parsed.seed == 5
    assert serialize_instance(parsed) == normalize(json.dumps(doc))


def test_random_instance_determinism():
    a = random_instance("tbt", (3, 4), 5, 7.0, 11)
    b = random_instance("tbt", (3, 4), 5, 7.0, 11)
    assert serialize_instance(a) == serialize_instance(b)
    assert instance_digest(a) != instance_digest(random_instance("tbt", (3, 4), 5, 7.0, 12))


def test_random_tbt_shape_and_norm():
    doc = random_instance("tbt", (2, 3), 4, 2.5, 0)
    t, b = tbt_inputs(doc)
    assert t.graph.dim == 4
    assert np.linalg.norm(b, 2) == pytest.approx(2.5)


def test_random_sum_is_maximal_sectorial():
    h1, h2 = sum_inputs(random_instance("sum", 4, seed=7))
    assert is_maximal_sectorial(h1) and is_maximal_sectorial(h2)


@pytest.mark.parametrize(
    "args",
    [("tbt", (0, 2), None), ("tbt", (2, 40), None), ("tbt", (2, 2), 5), ("sum", 33, None), ("bogus", 2, None)],
)
def test_random_instance_rejects_bad_dims(args):
    kind, dims, g = args
    with pytest.raises(ValueError):
        random_instance(kind, dims, g, 1.0, 0)


@given(st.sampled_from(["tbt", "sum"]), st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_random_documents_roundtrip(kind, h, k, seed):
    doc = random_instance(kind, (h, k) if kind == "tbt" else h, seed=seed)
    text = serialize_instance(doc)
    assert serialize_instance(parse_instance(text)) == text
