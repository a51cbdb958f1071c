import json

import numpy as np
import pytest

from conftest import example_params
from src.asymptotics import coeffs_matched_determinant
from src.criteria import VERDICTS, evaluate_criteria
from src.model import ModelParams, WaveParams, derive_wave


def _checklist(params, kappa=0.0, coefficients=None):
    dq = derive_wave(params, WaveParams(kappa=kappa))
    return evaluate_criteria(dq, params, coefficients)


def test_example_is_stable_at_zero_wavenumber(example):
    checklist = _checklist(example)
    assert checklist.verdict == "stable"
    assert checklist.translational.ok
    assert checklist.ccond[0].ok
    assert checklist.ccond[0].margin == pytest.approx(1.0 / 9.0)
    assert checklist.scalar_pair.ok
    assert checklist.eckhaus.ok
    assert checklist.reasons == []


def test_example_is_unstable_off_centre(example):
    checklist = _checklist(example, 0.5)
    assert checklist.verdict == "unstable"
    assert not checklist.translational.ok
    assert not checklist.eckhaus.ok
    assert any(reason.startswith("translational mode") for reason in checklist.reasons)


def test_matched_coefficients_give_same_verdict(example):
    dq = derive_wave(example, WaveParams(kappa=0.0))
    checklist = evaluate_criteria(dq, example, coeffs_matched_determinant(dq, example))
    assert checklist.verdict == "stable"


def test_decoupled_case_is_inconclusive():
    # Im d = Re d·Im c/Re c: жорданова связь r обнуляется
    params = example_params().replace(d=[complex(-1.0, -1.0 * 2.0 / -3.0)])
    checklist = _checklist(params)
    assert checklist.verdict == "inconclusive"
    assert not checklist.gencase.ok
    assert checklist.decoup.ok
    assert "genericity fails: gencase" in checklist.reasons
    assert any("decoupled" in reason for reason in checklist.reasons)


def test_complex_flux_spectrum_is_first_order_unstable():
    params = ModelParams(
        a=1.0, b=1.0, c=-1.0, d=[1 + 1j, 1 + 0.5j], e_B=np.eye(2), f=np.diag([1.0, 1.1]),
        g=[0j, 0j], h=[1.0, -1.0], epsilon=1e-3, m=2,
    )
    checklist = _checklist(params)
    assert not checklist.preccond.ok
    assert checklist.verdict == "unstable"
    assert any("first-order instability" in reason for reason in checklist.reasons)
    assert any("unavailable" in reason for reason in checklist.reasons)


def test_vector_flags_present():
    params = ModelParams(
        a=1 + 1j, b=1.0, c=-3 + 2j, d=[-1 + 2j, -1 + 1j], e_B=np.eye(2), f=np.diag([1.0, 3.0]),
        g=[0j, 0j], h=[1.0, 1.0], epsilon=1e-3, m=2,
    )
    checklist = _checklist(params)
    assert checklist.genz1 is None
    assert checklist.scalar_pair is None
    assert [f.name for f in checklist.indcouple] == ["indcouple[0]", "indcouple[1]"]
    assert len(checklist.ccond) == 2
    assert checklist.splitass.ok
    assert checklist.verdict in VERDICTS


def test_reasons_survive_serialisation(example):
    doc = _checklist(example, 0.5).as_dict()
    assert doc["verdict"] == "unstable"
    assert any(reason.startswith("translational mode") for reason in doc["reasons"])
    json.dumps(doc)


def test_checklist_serialises(example):
    doc = _checklist(example).as_dict()
    text = json.dumps(doc)
    assert doc["verdict"] == "stable"
    assert doc["splitass"]["margin"] is None
    assert "NaN" not in text
