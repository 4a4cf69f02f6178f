import json

import pytest

from core.errors import ConfigParseError, ConstraintError, UnknownKeyError
from safeguards.config_parser import parse_config


def test_empty_document_uses_defaults():
    cfg = parse_config("{}")
    assert cfg.params.m == 1.0
    assert cfg.params.n == 1
    assert cfg.field.kind == "power_law"
    assert cfg.field.gamma == 0.5
    assert cfg.times.t_max == 1e4
    assert cfg.tolerances.mode == 1e-10
    assert cfg.alpha_list == [0.25, -0.25]
    assert cfg.experiment is None


def test_zero_mass_diagnostic():
    with pytest.raises(ConstraintError) as exc:
        parse_config(json.dumps({"params": {"m": 0}}))
    assert exc.value.constraint == "params.m > 0"
    assert exc.value.exit_code == 4


@pytest.mark.parametrize("doc, key", [
    ({"params": {"mass": 1}}, "params.mass"),
    ({"colour": "blue"}, "colour"),
    ({"field": {"kind": "logarithmic", "gamma": 0.5}}, "field.gamma"),
])
def test_unknown_keys(doc, key):
    with pytest.raises(UnknownKeyError) as exc:
        parse_config(json.dumps(doc))
    assert exc.value.key == key
    assert exc.value.exit_code == 3


@pytest.mark.parametrize("text", ["{not json", "[1, 2]", "3"])
def test_malformed_documents(text):
    with pytest.raises(ConfigParseError) as exc:
        parse_config(text)
    assert exc.value.exit_code == 2


@pytest.mark.parametrize("doc, key", [
    ({"field": {"gamma": 1.5}}, "field.gamma"),
    ({"field": {"coefficient": 0}}, "field.coefficient"),
    ({"params": {"q": 0}}, "params.q"),
    ({"params": {"n": 3}}, "params.n"),
    ({"tolerances": {"mode": 1e-3}}, "tolerances.mode"),
    ({"initial": {"states": 2}}, "initial.states"),
    ({"operator_norm": {"samples": 32}}, "operator_norm.samples"),
    ({"experiment": "teleport"}, "experiment"),
])
def test_constraints(doc, key):
    with pytest.raises(ConstraintError) as exc:
        parse_config(json.dumps(doc))
    assert exc.value.key == key


def test_field_kind_dispatch():
    cfg = parse_config(json.dumps({"field": {"kind": "sinusoidal", "amplitude": 2.0}}))
    assert cfg.field.kind == "sinusoidal"
    assert cfg.field.amplitude == 2.0
    cfg = parse_config(json.dumps({"field": {"gamma": 1.0}}))
    assert cfg.field.kind == "power_law"


def test_unknown_field_kind():
    with pytest.raises(ConstraintError) as exc:
        parse_config(json.dumps({"field": {"kind": "pulsed"}}))
    assert "kind" in exc.value.constraint


def test_tabulated_needs_exactly_one_source():
    with pytest.raises(ConstraintError) as exc:
        parse_config(json.dumps({"field": {"kind": "tabulated"}}))
    assert "field.samples" in exc.value.constraint


def test_dimension_mismatch():
    with pytest.raises(ConstraintError) as exc:
        parse_config(json.dumps({"params": {"n": 2}, "grid": {"points": [64]}}))
    assert "grid.points" in exc.value.constraint


def test_time_window_order():
    with pytest.raises(ConstraintError) as exc:
        parse_config(json.dumps({"times": {"t_min": 10, "t_max": 5}}))
    assert "times.t_max" in exc.value.constraint
