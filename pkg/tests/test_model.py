import json
import math
from pathlib import Path

import numpy as np
import pytest

from conftest import example_params
from src.errors import ExistenceError, HypothesisError, ModelDimensionError, ModelFileError
from src.model import (
    WaveParams,
    algebraic_residual,
    compat_check,
    derive_wave,
    effective_flux_direct,
    existence_bound,
    load_model,
    model_from_dict,
    model_to_dict,
    validate_model,
)


def test_example_model_satisfies_hypotheses(example):
    assert validate_model(example) == []


def test_validate_names_failed_inequality():
    params = example_params().replace(c=3 + 2j)
    issues = validate_model(params)
    assert [i["rule"] for i in issues] == ["Re(c)<0"]
    assert "Re(c)=3" in issues[0]["detail"]
    assert issues[0]["severity"] == "critical"


def test_validate_complex_flux_spectrum():
    params = example_params().replace(
        m=2, d=[-1 + 2j, -1 + 1j], e_B=np.eye(2), f=[[0.0, 1.0], [-1.0, 0.0]], g=[0j, 0j], h=[1.0, 1.0]
    )
    assert "spec(f) real" in [i["rule"] for i in validate_model(params)]


def test_derived_quantities_at_zero_wavenumber(example_wave):
    dq, _ = example_wave
    assert dq.A0_sq == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert dq.p[0] == pytest.approx(-0.288675, abs=1e-6)
    assert dq.c_hat == pytest.approx(-1 - 2j, abs=1e-14)
    assert dq.q_hat == pytest.approx(-2.0, abs=1e-14)
    assert dq.r[0] == pytest.approx(0.7698, abs=1e-4)
    assert dq.effective_flux[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert dq.m0 == pytest.approx(-2.0, abs=1e-14)
    assert dq.b_hat == pytest.approx(1.0 / 3.0 + 4j / 3.0, abs=1e-14)


def test_amplitude_shrinks_with_wavenumber(example):
    dq = derive_wave(example, WaveParams(kappa=0.5))
    assert dq.A0_sq == pytest.approx(0.25, abs=1e-14)


@pytest.mark.parametrize("kappa", [0.0, 0.2, 0.5, 0.9])
def test_wave_identity_holds(example, kappa):
    dq = derive_wave(example, WaveParams(kappa=kappa))
    assert algebraic_residual(example, dq) <= 1e-13


def test_outside_existence_range(example):
    with pytest.raises(ExistenceError) as info:
        derive_wave(example, WaveParams(kappa=1.5))
    assert info.value.kappa_sq == pytest.approx(2.25)
    assert info.value.kappa_e_sq == pytest.approx(1.0)


def test_existence_bound_shifts_with_b0(example):
    assert existence_bound(example, [0.0]) == pytest.approx(1.0)
    # Re(d) = −1: положительный B₀ сужает диапазон
    assert existence_bound(example, [0.5]) == pytest.approx(0.5)


def test_invalid_model_rejected_by_derive_wave():
    with pytest.raises(HypothesisError) as info:
        derive_wave(example_params().replace(a=-1 + 1j), WaveParams(kappa=0.0))
    assert info.value.violations[0]["rule"] == "Re(a)>0"


def test_dimension_mismatch():
    with pytest.raises(ModelDimensionError):
        example_params().replace(d=[1j, 2j])
    with pytest.raises(ModelDimensionError):
        derive_wave(example_params(), WaveParams(kappa=0.0, B0=[0.1, 0.2]))


def test_effective_flux_direct_matches(example_wave, example):
    dq, _ = example_wave
    np.testing.assert_allclose(effective_flux_direct(example), dq.effective_flux, atol=1e-14)


def test_compat_check_uses_stable_sign(example):
    res = compat_check(example, [-3.0, -0.1, 0.1, 3.0])
    assert res.ok
    assert res.worst_margin == pytest.approx(-0.01)
    assert res.sign_note["rule"] == "compat-sign"


def test_compat_check_rejects_bad_grid(example):
    with pytest.raises(ValueError):
        compat_check(example, [])
    with pytest.raises(ValueError):
        compat_check(example, [0.0, 1.0])


def test_model_file_round_trip(model_file, example):
    loaded = load_model(str(model_file))
    assert model_to_dict(loaded) == model_to_dict(example)


def test_bare_scalars_accepted_for_single_mode():
    doc = {"a": [1, 1], "b": 1, "c": [-3, 2], "d": [-1, 2], "eB": 1, "f": 1, "g": [2, 2], "h": 2, "epsilon": 0.01}
    params = model_from_dict(doc)
    assert params.d[0] == -1 + 2j
    assert params.f.shape == (1, 1)


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "a": [1, 1],\n  oops\n}\n', encoding="utf-8")
    with pytest.raises(ModelFileError, match=r"broken\.json:3:"):
        load_model(str(path))


def test_missing_fields_reported(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"a": [1, 1]}), encoding="utf-8")
    with pytest.raises(ModelFileError, match="missing fields"):
        load_model(str(path))


def test_real_gl_existence():
    params = example_params().replace(a=1.0, c=-1.0, d=[0j])
    dq = derive_wave(params, WaveParams(kappa=0.0))
    assert dq.A0 == pytest.approx(1.0)
    assert math.isclose(existence_bound(params, [0.0]), 1.0)


def test_bundled_models_load():
    root = Path(__file__).resolve().parent.parent / "models"
    assert model_to_dict(load_model(str(root / "example.json"))) == model_to_dict(example_params())
    two = load_model(str(root / "two_modes.json"))
    assert two.m == 2
    assert validate_model(two) == []
