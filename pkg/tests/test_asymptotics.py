import numpy as np
import pytest

from conftest import example_params, random_scalar_params
from src.asymptotics import (
    alpha_t_kato,
    bfn_check,
    bfn_value,
    coeffs_closed_form,
    coeffs_matched_determinant,
    coeffs_numerical_fit,
    darcy_translational,
    eckhaus_bound,
    fit_coefficients,
    fit_grid,
    frequency_adapted_bound,
    gl_reference,
    matched_p0_coefficients,
    matched_p1,
)
from src.branches import track_branches
from src.errors import ExistenceError, FitWindowError, GenericityError
from src.model import ModelParams, WaveParams, derive_wave
from src.symbol import build_full_symbol


def _wave(params, kappa=0.0):
    dq = derive_wave(params, WaveParams(kappa=kappa))
    return dq, build_full_symbol(dq, params)


def _vector_params(epsilon=1e-3):
    return ModelParams(
        a=1 + 1j, b=1.0, c=-3 + 2j, d=[-1 + 2j, -1 + 1j], e_B=np.eye(2), f=np.diag([1.0, 3.0]),
        g=[0j, 0j], h=[1.0, 1.0], epsilon=epsilon, m=2,
    )


def _close(x, y, rel):
    return abs(x - y) <= rel * max(1.0, abs(x), abs(y))


# --- замкнутые формулы ---

def test_closed_form_at_zero_wavenumber(example, example_wave):
    dq, _ = example_wave
    co = coeffs_closed_form(dq, example)
    assert co.lambda_s0 == pytest.approx(-2.0)
    assert co.alpha_t == pytest.approx(0.0, abs=1e-14)
    assert co.mu_t == pytest.approx(-3.0)
    assert co.alpha_c[0] == pytest.approx(1.0 / 3.0)
    assert co.mu_c[0] == pytest.approx(-1.0 / 9.0)
    assert co.route == "closed_form"


def test_closed_form_off_centre(example):
    dq, _ = _wave(example, 0.5)
    co = coeffs_closed_form(dq, example)
    assert co.alpha_t == pytest.approx(1.0)
    assert co.mu_t == pytest.approx(7.0)


@pytest.mark.parametrize("kappa", [0.1, 0.25, 0.4])
def test_kato_form_matches(example, kappa):
    dq, _ = _wave(example, kappa)
    assert alpha_t_kato(dq, example) == pytest.approx(coeffs_closed_form(dq, example).alpha_t, abs=1e-12)


def test_kato_form_value(example):
    dq, _ = _wave(example, 0.25)
    assert alpha_t_kato(dq, example) == pytest.approx(0.5, abs=1e-12)


def test_eckhaus_band(example, example_wave):
    dq, _ = example_wave
    eck = eckhaus_bound(dq, example)
    assert eck.has_band
    assert eck.kappa_sq == pytest.approx(1.0 / 11.0)
    assert eck.bfn_holds


def test_eckhaus_real_gl():
    params = example_params().replace(a=1.0, c=-1.0, d=[0j])
    dq, _ = _wave(params)
    assert eckhaus_bound(dq, params).kappa_sq == pytest.approx(1.0 / 3.0)


def test_frequency_adapted_band_is_wider(example, example_wave):
    dq, _ = example_wave
    # амплитуда Дарси считается с Re ĉ = −1: κ̃_S² = 6/26
    assert frequency_adapted_bound(dq, example).kappa_sq == pytest.approx(3.0 / 13.0)
    assert frequency_adapted_bound(dq, example).kappa_sq > eckhaus_bound(dq, example).kappa_sq


def test_bfn(example, example_wave):
    dq, _ = example_wave
    res = bfn_check(dq, example)
    assert res.value == pytest.approx(1.0)
    assert res.mu_t0 == pytest.approx(-3.0)
    assert res.holds and res.consistent


def test_bfn_negative_case():
    assert bfn_value(1 + 10j, 1.0, -0.1 + 10j) == pytest.approx(-9.99)
    assert bfn_value(1 + 10j, 1.0, -0.1 - 10j) == pytest.approx(10.01)


def test_gl_reference_real_gl():
    alpha, mu = gl_reference(1.0, 1.0, -1.0, 0.0)
    assert alpha == 0.0
    assert mu == pytest.approx(-1.0)


def test_gl_reference_errors():
    with pytest.raises(ExistenceError):
        gl_reference(1.0, 1.0, -1.0, 1.5)
    with pytest.raises(GenericityError):
        gl_reference(1.0, 1.0, 1.0, 0.0)


@pytest.mark.parametrize("kappa", [0.0, 0.3, 0.7])
def test_decoupled_model_reduces_to_gl(kappa):
    params = example_params().replace(d=[0j], h=0.0)
    dq, _ = _wave(params, kappa)
    co = coeffs_closed_form(dq, params)
    alpha, mu = gl_reference(params.a, params.b, params.c, kappa)
    assert abs(co.alpha_t - alpha) <= 1e-13
    assert abs(co.mu_t - mu) <= 1e-13


def test_darcy_translational_equals_full_leading_order(example):
    dq, _ = _wave(example, 0.2)
    co = coeffs_closed_form(dq, example)
    alpha, mu = darcy_translational(dq, example)
    assert alpha == pytest.approx(co.alpha_t)
    assert mu == pytest.approx(co.mu_t)


def test_conservative_sign_rule_sign_patterns():
    signs = (-1.0, 1.0)
    for sh in signs:
        for sd in signs:
            for sf in signs:
                for mag in (0.2, 0.9, 1.7, 4.0):
                    params = example_params().replace(d=[sd * mag + 1j], h=sh * 1.0, f=sf * 1.3, c=-2.0 + 0.5j)
                    dq, _ = _wave(params)
                    x = params.d[0].real * params.h[0] / params.f[0, 0]
                    if abs(x - params.c.real) < 1e-9 or x == 0:
                        continue
                    mu_c = coeffs_closed_form(dq, params).mu_c[0]
                    assert (mu_c < 0) == (params.c.real < x < 0)


def test_conservative_sign_rule_random():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        c = complex(-rng.uniform(0.1, 5.0), rng.normal())
        d = complex(rng.normal() * 2.0, rng.normal())
        h = float(rng.normal())
        f = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0))
        params = example_params().replace(c=c, d=[d], h=h, f=f)
        dq, _ = _wave(params)
        x = d.real * h / f
        if min(abs(x - c.real), abs(x)) < 1e-6:
            continue
        mu_c = coeffs_closed_form(dq, params).mu_c[0]
        assert (mu_c < 0) == (c.real < x < 0)


# --- определитель сшивки ---

def test_matched_polynomial_example(example_wave):
    _, symbol = example_wave
    coeffs = matched_p0_coefficients(symbol)
    np.testing.assert_allclose(coeffs, [3.5555, 66.67, -2.0], rtol=1e-3)


def test_first_order_term_is_affine_in_mu(example_wave):
    _, symbol = example_wave
    for alpha in (-0.05, 1.3, 40.0):
        p0, p1, p2 = (matched_p1(symbol, alpha, mu) for mu in (0.0, 1.0, 2.0))
        assert abs(p2 - 2.0 * p1 + p0) <= 1e-9 * max(1.0, abs(p0), abs(p1))


def test_matched_route_example(example, example_wave):
    dq, _ = example_wave
    eps = example.epsilon
    co = coeffs_matched_determinant(dq, example)
    # поправка конечного ε к α_t у этого примера ≈ 5.3ε
    assert abs(co.alpha_t) <= 10 * eps
    assert _close(co.mu_t, -3.0, 20 * eps)
    assert _close(co.alpha_c[0], 1.0 / 3.0, 20 * eps)
    assert _close(co.mu_c[0], -1.0 / 9.0, 20 * eps)


# --- подгонка ---

def test_fit_route_example(example, example_wave):
    dq, symbol = example_wave
    eps = example.epsilon
    co, residuals = fit_coefficients(symbol, dq, example)
    matched = coeffs_matched_determinant(dq, example)
    assert co.lambda_s0 == pytest.approx(-2.0, abs=1e-3)
    assert _close(co.alpha_t, matched.alpha_t, eps)
    assert _close(co.mu_t, matched.mu_t, 5 * eps)
    assert _close(co.alpha_c[0], matched.alpha_c[0], eps)
    assert _close(co.mu_c[0], matched.mu_c[0], 5 * eps)
    assert _close(co.mu_t, -3.0, 20 * eps)
    assert set(residuals) == {"t", "c1"}


def test_fit_rejects_stable_branch(example_wave):
    _, symbol = example_wave
    curve = track_branches(symbol, fit_grid(1e-4, 16))
    with pytest.raises(FitWindowError, match="does not pass through 0"):
        coeffs_numerical_fit(curve, "s", 1e-4)


def test_fit_window_without_points(example_wave):
    _, symbol = example_wave
    curve = track_branches(symbol, fit_grid(1e-4, 16))
    with pytest.raises(FitWindowError):
        coeffs_numerical_fit(curve, "t", (0.5, 1.0))


def _three_routes(params, kappa):
    dq, symbol = _wave(params, kappa)
    closed = coeffs_closed_form(dq, params)
    matched = coeffs_matched_determinant(dq, params)
    fitted, _ = fit_coefficients(symbol, dq, params)
    return closed, matched, fitted


def _assert_routes_agree(params, kappa):
    eps = params.epsilon
    closed, matched, fitted = _three_routes(params, kappa)
    for name in ("alpha_t", "mu_t"):
        assert _close(getattr(closed, name), getattr(matched, name), 50 * eps), name
        assert _close(getattr(matched, name), getattr(fitted, name), 20 * eps), name
    assert _close(closed.alpha_c[0], matched.alpha_c[0], 50 * eps)
    assert _close(closed.mu_c[0], matched.mu_c[0], 50 * eps)
    assert _close(matched.mu_c[0], fitted.mu_c[0], 20 * eps)


@pytest.mark.parametrize("seed", range(5))
def test_three_routes_agree(seed):
    params = random_scalar_params(seed)
    _assert_routes_agree(params, 0.0)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_three_routes_agree_random_wave(seed):
    params = random_scalar_params(100 + seed)
    kappa = 0.4 * np.sqrt(params.b.real / params.a.real) * ((seed % 3) / 2.0)
    _assert_routes_agree(params, kappa)


def test_vector_case_conservative_modes():
    params = _vector_params()
    dq, symbol = _wave(params)
    w = np.linalg.eigvals(dq.effective_flux)
    assert np.max(np.abs(np.imag(w))) <= 1e-12
    assert abs(w[0] - w[1]) > 0.1
    closed = coeffs_closed_form(dq, params)
    fitted, _ = fit_coefficients(symbol, dq, params)
    for mu_closed, mu_fit in zip(closed.mu_c, fitted.mu_c):
        assert mu_fit == pytest.approx(mu_closed, rel=0.05)
    matched = coeffs_matched_determinant(dq, params)
    np.testing.assert_allclose(matched.alpha_c, closed.alpha_c, rtol=0.05)
