import numpy as np
import pytest

from conftest import example_params, random_scalar_params
from src.criteria import evaluate_criteria
from src.dss import (
    DssConfig,
    default_check_grid,
    imaginary_root_scan,
    reduced_neutral_matrix,
    region_ii_affine_check,
    region_partition,
    verify_dss,
)
from src.model import WaveParams, derive_wave
from src.symbol import build_full_symbol

FAST = DssConfig(C=4.0, points_per_region=12)


def _wave(params, kappa=0.0):
    dq = derive_wave(params, WaveParams(kappa=kappa))
    return dq, build_full_symbol(dq, params)


def test_partition_covers_all_frequencies():
    regions, merged = region_partition(0.001, 10.0)
    assert not merged
    assert [r[0] for r in regions] == ["i", "ii", "iii", "iv", "v", "vi"]
    for left, right in zip(regions, regions[1:]):
        assert left[2] == pytest.approx(right[1])
    assert regions[1][1:] == pytest.approx((1e-4, 1e-2))
    assert regions[4][1:] == pytest.approx((100.0, 10000.0))


def test_partition_merges_when_middle_region_is_empty():
    regions, merged = region_partition(0.01, 10.0)
    assert merged
    assert [r[0] for r in regions] == ["i", "ii-iv", "v", "vi"]


def test_region_constant_validation():
    with pytest.raises(ValueError):
        DssConfig(C=2.0)
    with pytest.raises(ValueError):
        DssConfig(points_per_region=1)


def test_example_is_spectrally_stable(serial, example):
    dq, symbol = _wave(example)
    res = verify_dss(symbol, dq, example, FAST)
    assert res.verdict
    assert res.c_dss > 0
    assert not res.merged
    assert abs(res.origin_max_re) <= 1e-6
    assert all(r.passed for r in res.regions)
    assert res.as_dict()["verdict"] == "stable"


def test_example_is_spectrally_unstable_off_centre(serial, example):
    dq, symbol = _wave(example, 0.5)
    res = verify_dss(symbol, dq, example, FAST)
    assert not res.verdict
    failed = [r.region for r in res.regions if not r.passed]
    assert failed
    assert res.as_dict()["verdict"] == "unstable"


def test_merged_regions_reported(serial, example):
    dq, symbol = _wave(example)
    res = verify_dss(symbol, dq, example, DssConfig(C=10.0, points_per_region=8))
    assert res.merged
    assert res.issues[0]["rule"] == "regions-merged"


def test_reduced_matrix_layout(example_wave, example):
    dq, _ = example_wave
    R = reduced_neutral_matrix(dq, example, 2.0)
    assert R.shape == (2, 2)
    assert R[0, 0] == pytest.approx(dq.m0)
    assert R[1, 1] == pytest.approx(2j)


def test_no_imaginary_roots_for_example(serial, example_wave, example):
    dq, _ = example_wave
    scan = imaginary_root_scan(dq, example, default_check_grid(4.0, 33))
    assert scan.ok
    assert scan.margin > 1e-3
    assert scan.warning == ""


def test_imaginary_scan_rejects_zero(example_wave, example):
    dq, _ = example_wave
    with pytest.raises(ValueError):
        imaginary_root_scan(dq, example, [0.0, 1.0])


def test_neutral_branch_is_affine_in_region_ii(serial):
    params = example_params(1e-4)
    _, symbol = _wave(params)
    check = region_ii_affine_check(symbol, 4.0, points=9)
    assert check.ok


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_criteria_agree_with_spectrum(serial, seed):
    params = random_scalar_params(200 + seed)
    dq, symbol = _wave(params)
    checklist = evaluate_criteria(dq, params)
    if checklist.verdict == "inconclusive":
        pytest.skip("genericity fails for this draw")
    res = verify_dss(symbol, dq, params, DssConfig(C=10.0, points_per_region=24))
    assert res.verdict == (checklist.verdict == "stable")
