import numpy as np
import pytest

from conftest import assert_same_spectrum, example_params, random_scalar_params
from src.eig import eigenvalues
from src.errors import SingularFluxError
from src.model import WaveParams, derive_wave
from src.symbol import (
    FrequencyCoordinate,
    assemble,
    assemble_rescaled,
    build_darcy_symbol,
    build_full_symbol,
    darcy_embedding_residual,
    frequency_adapted_darcy_symbol,
    singular_part_in_darcy_frame,
    symbol_to_dict,
)


def test_constant_part_at_zero_wavenumber(example_wave):
    _, symbol = example_wave
    expected = np.array([[-2.0, 0.0, -0.57735], [1.3333, 0.0, 1.1547], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(symbol.C0, expected, atol=1e-4)
    np.testing.assert_array_equal(assemble(symbol, 0.0), symbol.C0)


def test_darcy_constant_part(example_wave, example):
    dq, _ = example_wave
    darcy = build_darcy_symbol(dq, example)
    np.testing.assert_allclose(darcy.C0, [[-0.6667, 0.0], [-1.3333, 0.0]], atol=1e-4)


def test_frequency_adapted_darcy_has_own_amplitude(example_wave, example):
    dq, _ = example_wave
    adapted = frequency_adapted_darcy_symbol(dq, example)
    # A₀² = Re b̃/(−Re ĉ) = 1
    np.testing.assert_allclose(adapted.C0, [[-2.0, 0.0], [-4.0, 0.0]], atol=1e-13)


def test_singular_flux_rejected():
    params = example_params().replace(f=0.0)
    dq = derive_wave(params, WaveParams(kappa=0.0))
    with pytest.raises(SingularFluxError):
        build_darcy_symbol(dq, params)


@pytest.mark.parametrize("seed", range(20))
def test_darcy_embedding_is_exact(seed):
    params = random_scalar_params(seed, epsilon=10.0 ** -(1 + seed % 3))
    rng = np.random.default_rng(1000 + seed)
    kappa = rng.uniform(0.0, 0.9) * np.sqrt(params.b.real / params.a.real)
    dq = derive_wave(params, WaveParams(kappa=kappa))
    full = build_full_symbol(dq, params)
    darcy = build_darcy_symbol(dq, params)
    grid = rng.uniform(-10.0, 10.0, 5)
    norm = max(np.linalg.norm(assemble(full, s)) for s in grid)
    assert darcy_embedding_residual(full, darcy, dq, params, grid) <= 1e-12 * norm


def test_darcy_frame_decouples_singular_part(example_wave, example):
    dq, symbol = example_wave
    transformed = singular_part_in_darcy_frame(symbol, dq, example)
    np.testing.assert_allclose(transformed[2:, :2], 0.0, atol=1e-14)


@pytest.mark.parametrize("sigma", [1e-4, 0.03, 0.7, 12.0, 300.0])
def test_conjugation_symmetry(example_wave, sigma):
    _, symbol = example_wave
    plus = eigenvalues(assemble(symbol, sigma), vectors=False).eigenvalues
    minus = eigenvalues(assemble(symbol, -sigma), vectors=False).eigenvalues
    scale = max(1.0, float(np.max(np.abs(plus))))
    assert_same_spectrum(minus, np.conj(plus), 1e-10 * scale)


def test_generalised_kernel_at_origin(example_wave, example):
    _, symbol = example_wave
    m = example.m
    C0 = symbol.C0
    assert C0.shape[0] - np.linalg.matrix_rank(C0, tol=1e-12) == m
    power = np.linalg.matrix_power(C0, m + 2)
    assert power.shape[0] - np.linalg.matrix_rank(power, tol=1e-10) == m + 1


def test_rescaled_family_matches_on_diagonal(example_wave):
    _, symbol = example_wave
    eps = symbol.epsilon
    for sigma_check in (0.1, 1.0, 7.0):
        np.testing.assert_allclose(
            assemble_rescaled(symbol, sigma_check, eps * sigma_check),
            assemble(symbol, eps * sigma_check),
            atol=1e-12,
        )


def test_frequency_coordinates():
    eps = 0.01
    assert FrequencyCoordinate(2.0, "check").to_hat(eps) == pytest.approx(0.02)
    assert FrequencyCoordinate(0.001, "pde").to_hat(eps) == pytest.approx(0.1)
    assert FrequencyCoordinate(0.5, "hat").to("check", eps).value == pytest.approx(50.0)
    with pytest.raises(ValueError):
        FrequencyCoordinate(1.0, "bogus")


def test_assemble_accepts_coordinates(example_wave):
    _, symbol = example_wave
    np.testing.assert_allclose(
        assemble(symbol, FrequencyCoordinate(3.0, "check")), assemble(symbol, 0.03), atol=1e-15
    )


def test_symbol_dump_has_all_parts(example_wave):
    _, symbol = example_wave
    doc = symbol_to_dict(symbol)
    assert set(doc) == {"C0", "C1", "C2", "epsilon", "C1_singular"}
    assert doc["epsilon"] == 0.01
