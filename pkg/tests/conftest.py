"""Общие фикстуры: модель из численного примера и генератор случайных скалярных моделей."""
import json

import numpy as np
import pytest

import config
from src.eig import match_multisets
from src.model import ModelParams, WaveParams, derive_wave, model_to_dict
from src.symbol import build_full_symbol


def example_params(epsilon: float = 0.01) -> ModelParams:
    return ModelParams(
        a=1 + 1j, b=1.0, c=-3 + 2j, d=[-1 + 2j], e_B=1.0, f=1.0, g=[2 + 2j], h=2.0, epsilon=epsilon
    )


def random_scalar_params(seed: int, epsilon: float = 1e-3, margin: float = 0.1) -> ModelParams:
    """Случайная допустимая скалярная модель с запасом генеричности ≥ margin."""
    rng = np.random.default_rng(seed)
    while True:
        a = complex(rng.uniform(0.5, 2.0), rng.uniform(-1.5, 1.5))
        b = complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        c = complex(-rng.uniform(1.0, 4.0), rng.uniform(-2.0, 2.0))
        d = complex(rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.5), rng.uniform(-2.0, 2.0))
        f = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        h = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 2.0))
        e_B = float(rng.uniform(0.5, 2.0))
        g = complex(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))
        params = ModelParams(a=a, b=b, c=c, d=[d], e_B=e_B, f=f, g=[g], h=h, epsilon=epsilon)
        c_hat_re = c.real - d.real * h / f
        flux = f - h * d.real / c.real
        r = d.imag - d.real * c.imag / c.real
        if min(abs(c_hat_re), abs(flux), abs(r), abs(h * d.real)) > margin:
            return params


@pytest.fixture
def example():
    return example_params()


@pytest.fixture
def example_wave(example):
    dq = derive_wave(example, WaveParams(kappa=0.0))
    return dq, build_full_symbol(dq, example)


@pytest.fixture
def model_file(tmp_path, example):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model_to_dict(example)), encoding="utf-8")
    return path


@pytest.fixture
def serial(monkeypatch):
    """Последовательный расчёт сетки (без пула)."""
    monkeypatch.setattr(config, "THREADS", 1)


def assert_same_spectrum(first, second, tol):
    dist, _ = match_multisets(first, second)
    assert dist <= tol, f"spectra differ by {dist:.3g} > {tol:.3g}"
