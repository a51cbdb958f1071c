"""
Модель mcGL: параметры, проверка гипотез, экспоненциально-периодическая волна.

Система амплитуд (A — комплексная амплитуда, B ∈ R^m — законы сохранения):
    A_t = a A_xx + b A + c |A|²A + d·B A
    B_t = ε⁻¹ f B_x + e_B B_xx + ε⁻¹ h (|A|²)_x + (g |A|²)_xx

Волна: A = A₀ exp(i(κx − ωt)), B ≡ B₀. Соглашение о знаке ω записывается в
шапку каждого отчёта (OMEGA_CONVENTION).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.errors import ExistenceError, HypothesisError, ModelDimensionError, ModelFileError

LOG = logging.getLogger("mcgl.model")

OMEGA_CONVENTION = "A = A0*exp(i*(kappa*x - omega*t)); omega = Im(a)*kappa^2 - Im(b_tilde) - Im(c)*A0^2"
COMPAT_SIGN_NOTE = (
    "compatibility evaluated as Re spec(i z f - z^2 e_B) < 0; "
    "the +z^2 e_B variant contradicts Re spec(e_B) > 0"
)


def _complex_vector(values: Any, m: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=complex))
    if arr.ndim != 1 or arr.shape[0] != m:
        raise ModelDimensionError(f"{name}: expected length {m}, got shape {arr.shape}")
    return arr


def _real_vector(values: Any, m: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != m:
        raise ModelDimensionError(f"{name}: expected length {m}, got shape {arr.shape}")
    return arr


def _real_matrix(values: Any, m: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.shape != (m, m):
        raise ModelDimensionError(f"{name}: expected {m}x{m}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Коэффициенты mcGL. Векторы/матрицы приводятся к numpy при создании."""

    a: complex
    b: complex
    c: complex
    d: np.ndarray
    e_B: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    epsilon: float
    m: int = 1

    def __post_init__(self):
        m = int(self.m)
        if m < 1:
            raise ModelDimensionError(f"m must be a positive integer, got {self.m}")
        if not float(self.epsilon) > 0:
            raise ModelDimensionError(f"epsilon must be > 0, got {self.epsilon}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "d", _complex_vector(self.d, m, "d"))
        object.__setattr__(self, "e_B", _real_matrix(self.e_B, m, "e_B"))
        object.__setattr__(self, "f", _real_matrix(self.f, m, "f"))
        object.__setattr__(self, "g", _complex_vector(self.g, m, "g"))
        object.__setattr__(self, "h", _real_vector(self.h, m, "h"))

    @property
    def g_re(self) -> np.ndarray:
        return self.g.real

    @property
    def g_im(self) -> np.ndarray:
        return self.g.imag

    def replace(self, **changes: Any) -> "ModelParams":
        values = {k: getattr(self, k) for k in ("a", "b", "c", "d", "e_B", "f", "g", "h", "epsilon", "m")}
        values.update(changes)
        return ModelParams(**values)


@dataclass(frozen=True, eq=False)
class WaveParams:
    kappa: float
    B0: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "B0", np.atleast_1d(np.asarray(self.B0, dtype=float)))


@dataclass(frozen=True, eq=False)
class DerivedQuantities:
    """Все производные величины волны; считаются сразу в derive_wave."""

    kappa: float
    B0: np.ndarray
    A0: float
    omega: float
    b_tilde: complex
    b_hat: complex
    c_hat: complex
    p: np.ndarray
    q: float
    q_hat: float
    r: np.ndarray
    effective_flux: np.ndarray
    m0: float

    @property
    def A0_sq(self) -> float:
        return self.A0 * self.A0

    def as_dict(self) -> Dict[str, Any]:
        return {
            "kappa": self.kappa,
            "B0": self.B0.tolist(),
            "A0": self.A0,
            "A0_sq": self.A0_sq,
            "omega": self.omega,
            "b_tilde": [self.b_tilde.real, self.b_tilde.imag],
            "b_hat": [self.b_hat.real, self.b_hat.imag],
            "c_hat": [self.c_hat.real, self.c_hat.imag],
            "p": self.p.tolist(),
            "q": self.q,
            "q_hat": self.q_hat,
            "r": self.r.tolist(),
            "effective_flux": self.effective_flux.tolist(),
            "m0": self.m0,
        }


@dataclass(frozen=True)
class CompatResult:
    ok: bool
    worst_margin: float
    margins: List[float]
    sign_note: Dict[str, str]


def _issue(rule: str, detail: str, severity: str = "critical") -> Dict[str, str]:
    return {"rule": rule, "severity": severity, "detail": detail}


def validate_model(params: ModelParams) -> List[Dict[str, str]]:
    """
    Проверить структурные гипотезы: Re a > 0, Re b > 0, Re c < 0,
    spec(f) вещественный, Re spec(e_B) > 0. Пустой список — всё выполнено.
    """
    issues: List[Dict[str, str]] = []
    if not params.a.real > 0:
        issues.append(_issue("Re(a)>0", f"Re(a)>0 fails: Re(a)={params.a.real:.6g}"))
    if not params.b.real > 0:
        issues.append(_issue("Re(b)>0", f"Re(b)>0 fails: Re(b)={params.b.real:.6g}"))
    if not params.c.real < 0:
        issues.append(_issue("Re(c)<0", f"Re(c)<0 fails: Re(c)={params.c.real:.6g}"))
    f_spec = np.linalg.eigvals(params.f)
    f_imag = float(np.max(np.abs(f_spec.imag)))
    if f_imag > 1e-12 * max(1.0, float(np.max(np.abs(f_spec)))):
        issues.append(_issue("spec(f) real", f"spec(f) not real: eigenvalues {np.round(f_spec, 12).tolist()}"))
    eb_re = float(np.min(np.linalg.eigvals(params.e_B).real))
    if not eb_re > 0:
        issues.append(_issue("Re spec(e_B)>0", f"Re spec(e_B)>0 fails: min Re spec(e_B)={eb_re:.6g}"))
    for item in issues:
        LOG.debug("Нарушена гипотеза: %s", item["detail"])
    return issues


def existence_bound(params: ModelParams, B0: Sequence[float]) -> float:
    """κ_E² = (Re b + Re(d)·B₀)/Re a; отрицательное значение — пустой диапазон существования."""
    B0 = _real_vector(B0, params.m, "B0")
    return float((params.b.real + float(np.dot(params.d.real, B0))) / params.a.real)


def derive_wave(params: ModelParams, wave: WaveParams) -> DerivedQuantities:
    """
    Волна с волновым числом κ и сдвигом B₀ и все производные величины.

    A₀² = (Re b̃ − Re a κ²)/(−Re c), ĉ = c − d f⁻¹ h, b̂ = b̃ + d f⁻¹ h A₀².
    """
    issues = validate_model(params)
    if issues:
        raise HypothesisError(issues)
    B0 = wave.B0
    if B0.shape[0] != params.m:
        # нулевой B₀ по умолчанию подходит для любого m
        if np.any(B0):
            raise ModelDimensionError(f"B0: expected length {params.m}, got {B0.shape[0]}")
        B0 = np.zeros(params.m)
    kappa = wave.kappa
    kappa_e_sq = existence_bound(params, B0)
    if not kappa * kappa < kappa_e_sq:
        raise ExistenceError(kappa * kappa, kappa_e_sq)

    a, c, d, h, f = params.a, params.c, params.d, params.h, params.f
    b_tilde = params.b + complex(np.dot(d, B0))
    A0_sq = (b_tilde.real - a.real * kappa * kappa) / (-c.real)
    A0 = float(np.sqrt(A0_sq))
    omega = a.imag * kappa * kappa - b_tilde.imag - c.imag * A0_sq

    try:
        finv_h = np.linalg.solve(f, h)
        coupling = complex(np.dot(d, finv_h))
    except np.linalg.LinAlgError:
        # без обратимого f редукция Дарси не определена: ĉ, b̂ оставляем несдвинутыми
        LOG.warning("det f = 0: ĉ и b̂ не определены, используются c и b̃")
        coupling = 0j
    c_hat = c - coupling
    b_hat = b_tilde + coupling * A0_sq

    q = -c.imag / c.real
    q_hat = -c_hat.imag / c_hat.real if c_hat.real != 0 else float("inf")
    p = -d.real / (2.0 * A0 * c.real)
    r = A0 * (d.imag + q * d.real)
    effective_flux = f + 2.0 * A0 * np.outer(h, p)
    m0 = 2.0 * A0_sq * c.real

    dq = DerivedQuantities(
        kappa=kappa,
        B0=B0,
        A0=A0,
        omega=float(omega),
        b_tilde=b_tilde,
        b_hat=b_hat,
        c_hat=c_hat,
        p=p,
        q=float(q),
        q_hat=float(q_hat),
        r=r,
        effective_flux=effective_flux,
        m0=float(m0),
    )
    LOG.debug("Волна κ=%.6g: A0²=%.6g ω=%.6g ĉ=%s", kappa, A0_sq, omega, c_hat)
    return dq


def effective_flux_direct(params: ModelParams) -> np.ndarray:
    """Эффективный поток без амплитуды: f − h Re(d)/Re(c)."""
    return params.f - np.outer(params.h, params.d.real) / params.c.real


def algebraic_residual(params: ModelParams, dq: DerivedQuantities) -> float:
    """|−iω + aκ² − b̃ − cA₀²| — невязка алгебраического соотношения волны."""
    k2 = dq.kappa * dq.kappa
    return float(abs(-1j * dq.omega + params.a * k2 - dq.b_tilde - params.c * dq.A0_sq))


def compat_check(params: ModelParams, z_grid: Sequence[float]) -> CompatResult:
    """
    Совместимость уравнения для B: max Re spec(iz f − z² e_B) < 0 на сетке z ≠ 0.
    """
    z_values = [float(z) for z in z_grid]
    if not z_values:
        raise ValueError("compat_check: z_grid is empty")
    if any(z == 0.0 for z in z_values):
        raise ValueError("compat_check: z_grid must not contain 0")
    margins = []
    for z in z_values:
        block = 1j * z * params.f - z * z * params.e_B
        margins.append(float(np.max(np.linalg.eigvals(block).real)))
    worst = max(margins)
    note = {"rule": "compat-sign", "severity": "minor", "detail": COMPAT_SIGN_NOTE}
    return CompatResult(ok=worst < 0, worst_margin=worst, margins=margins, sign_note=note)


# --- JSON ---

def _as_complex(value: Any, name: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ModelFileError(f"{name}: complex numbers are [re, im], got {value!r}")


def _as_complex_list(value: Any, m: int, name: str) -> List[complex]:
    if m == 1 and not (isinstance(value, list) and value and isinstance(value[0], list)):
        return [_as_complex(value, name)]
    if not isinstance(value, list):
        raise ModelFileError(f"{name}: expected a list of [re, im], got {value!r}")
    return [_as_complex(v, f"{name}[{i}]") for i, v in enumerate(value)]


def model_from_dict(doc: Dict[str, Any]) -> ModelParams:
    """Собрать ModelParams из JSON-словаря (ключ eB для e_B; комплексные — [re, im])."""
    missing = [k for k in ("a", "b", "c", "d", "eB", "f", "g", "h", "epsilon") if k not in doc]
    if missing:
        raise ModelFileError(f"missing fields: {', '.join(missing)}")
    m = int(doc.get("m", 1))
    return ModelParams(
        a=_as_complex(doc["a"], "a"),
        b=_as_complex(doc["b"], "b"),
        c=_as_complex(doc["c"], "c"),
        d=_as_complex_list(doc["d"], m, "d"),
        e_B=doc["eB"],
        f=doc["f"],
        g=_as_complex_list(doc["g"], m, "g"),
        h=doc["h"],
        epsilon=float(doc["epsilon"]),
        m=m,
    )


def model_to_dict(params: ModelParams) -> Dict[str, Any]:
    def cpx(z: complex) -> List[float]:
        return [float(z.real), float(z.imag)]

    return {
        "a": cpx(params.a),
        "b": cpx(params.b),
        "c": cpx(params.c),
        "d": [cpx(z) for z in params.d],
        "eB": params.e_B.tolist(),
        "f": params.f.tolist(),
        "g": [cpx(z) for z in params.g],
        "h": params.h.tolist(),
        "epsilon": params.epsilon,
        "m": params.m,
    }


def load_model(path: str) -> ModelParams:
    """Прочитать модель из JSON-файла. Ошибки разбора — ModelFileError с путь:строка:столбец."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFileError(f"{path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ModelFileError(f"{path}:1:1: top-level JSON value must be an object")
    try:
        return model_from_dict(doc)
    except (TypeError, ValueError) as e:
        raise ModelFileError(f"{path}: {e}") from e


__all__ = [
    "ModelParams",
    "WaveParams",
    "DerivedQuantities",
    "CompatResult",
    "OMEGA_CONVENTION",
    "COMPAT_SIGN_NOTE",
    "validate_model",
    "existence_bound",
    "derive_wave",
    "effective_flux_direct",
    "algebraic_residual",
    "compat_check",
    "model_from_dict",
    "model_to_dict",
    "load_model",
]
