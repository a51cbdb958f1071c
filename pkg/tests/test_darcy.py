import pytest

from conftest import example_params
from src.darcy import darcy_necessity
from src.errors import SingularFluxError
from src.model import WaveParams, derive_wave
from src.symbol import build_darcy_symbol, build_full_symbol


def _compare(params, kappa=0.0, points=21, interval=(0.25, 4.0)):
    dq = derive_wave(params, WaveParams(kappa=kappa))
    full = build_full_symbol(dq, params)
    darcy = build_darcy_symbol(dq, params)
    return darcy_necessity(full, darcy, dq, params, interval, points)


def test_example_reduction_is_close(serial):
    res = _compare(example_params(1e-3))
    assert res.sign_agree
    assert res.sign_mismatches == []
    assert res.d_darcy < 0.05
    assert res.darcy_max_re < 0
    assert res.sigma_interval == (0.25, 4.0)


def test_distance_shrinks_with_epsilon(serial):
    distances = [_compare(example_params(eps)).d_darcy for eps in (1e-2, 1e-3, 1e-4)]
    assert distances[1] * 3 <= distances[0]
    assert distances[2] * 3 <= distances[1]


def test_unstable_wave_is_unstable_for_darcy(serial):
    res = _compare(example_params(1e-3), kappa=0.5, interval=(0.01, 1.0))
    assert res.darcy_max_re > 0


def test_singular_flux_rejected(example):
    dq = derive_wave(example, WaveParams(kappa=0.0))
    full = build_full_symbol(dq, example)
    singular = example.replace(f=0.0)
    with pytest.raises(SingularFluxError):
        darcy_necessity(full, full, dq, singular)


def test_report_is_json_ready(serial):
    doc = _compare(example_params(1e-3), points=5).as_dict()
    assert set(doc) == {
        "sigma_interval", "d_darcy", "d_fast_rel", "darcy_max_re", "sign_agree", "sign_mismatches", "issues",
    }
