import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tippetop.errors import ParameterError
from tippetop.model import (
    TopParams,
    calligraphic_B,
    height,
    height_prime,
    height_second,
    load_params,
    save_params,
    validate,
)

from .conftest import generic_params


def test_ratios_are_derived():
    p = TopParams(m=0.015, R=0.025, eps=0.0075, A=1.6e-6, C=2e-6)
    assert p.inertia_ratio == pytest.approx(0.8)
    assert p.eccentricity_ratio == pytest.approx(0.3)
    assert p.ratios.inertia_ratio == p.inertia_ratio


def test_from_ratios_round_trip():
    p = TopParams.from_ratios(0.015, 0.025, 2e-6, 1.2, 0.3, mu=0.2)
    assert p.A == pytest.approx(2.4e-6)
    assert p.eps == pytest.approx(0.0075)
    assert p.mu == 0.2


@pytest.mark.parametrize("field,value,msg", [
    ("mu", -0.1, "μ must be ≥ 0"),
    ("eps", 0.025, "eccentricity must satisfy 0<ε<R"),
    ("eps", 0.0, "eccentricity must satisfy 0<ε<R"),
    ("eps", 0.03, "eccentricity must satisfy 0<ε<R"),
    ("m", 0.0, "m must be > 0"),
    ("A", -1.0, "A must be > 0"),
    ("C", 0.0, "C must be > 0"),
    ("g", math.nan, "g must be a finite number"),
])
def test_validate_rejects(field, value, msg):
    with pytest.raises(ParameterError, match=msg):
        validate(generic_params(**{field: value}))


def test_validate_allows_frictionless():
    assert validate(generic_params(mu=0.0)).mu == 0.0


def test_height_range_and_poles():
    p = generic_params()
    assert height(p, 0.0) == pytest.approx(p.R - p.eps, abs=0, rel=1e-15)
    assert height(p, math.pi) == pytest.approx(p.R + p.eps, rel=1e-15)


@given(st.floats(0.001, math.pi - 0.001))
def test_height_strictly_inside_range(theta):
    p = generic_params()
    h = height(p, theta)
    assert p.R - p.eps < h < p.R + p.eps


@given(st.floats(0.01, math.pi - 0.01))
def test_height_derivatives_match_finite_differences(theta):
    p = generic_params()
    d = 1e-4
    fd1 = (height(p, theta + d) - height(p, theta - d)) / (2 * d)
    fd2 = (height_prime(p, theta + d) - height_prime(p, theta - d)) / (2 * d)
    assert abs(fd1 - height_prime(p, theta)) < 1e-8
    assert abs(fd2 - height_second(p, theta)) < 1e-8


def test_calligraphic_B_examples():
    p = TopParams.from_ratios(0.015, 0.025, 2e-6, 1.0, 0.3)
    for th in (0.0, 0.7, 2.0):
        assert calligraphic_B(p, th) == pytest.approx(p.C * 0.3, rel=1e-12)
    q = TopParams.from_ratios(0.015, 0.025, 2e-6, 1.2, 0.3)
    assert calligraphic_B(q, math.pi / 2) == pytest.approx(q.C * 0.3, rel=1e-9)
    assert calligraphic_B(q, 0.0) == pytest.approx(1.0e-6, rel=1e-12)


def test_preset_json_round_trip(tmp_path):
    p = generic_params()
    path = tmp_path / "p.json"
    save_params(p, path)
    assert set(json.loads(path.read_text())) == {"m", "R", "eps", "A", "C", "mu", "g"}
    assert load_params(path) == p


def test_preset_json_requires_exact_keys(tmp_path):
    path = tmp_path / "p.json"
    d = generic_params().to_dict()
    d["extra"] = 1.0
    path.write_text(json.dumps(d))
    with pytest.raises(ParameterError, match="unexpected"):
        load_params(path)
    del d["extra"], d["g"]
    path.write_text(json.dumps(d))
    with pytest.raises(ParameterError, match="missing"):
        load_params(path)


def test_load_params_validates(tmp_path):
    path = tmp_path / "p.json"
    d = generic_params().to_dict()
    d["eps"] = d["R"] * 2
    path.write_text(json.dumps(d))
    with pytest.raises(ParameterError):
        load_params(path)
