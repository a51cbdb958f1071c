"""
Коэффициенты низкочастотного разложения спектра.

λ_s(σ̂) = m₀ + O(σ̂),  λ_t = iα_tσ̂ + μ_tσ̂² + ...,  λ_{c,i} = iα_{c,i}σ̂ + μ_{c,i}σ̂² + ...

Три независимых маршрута:
- closed_form — формулы главного порядка по ε;
- matched_determinant — корни P₀(α) и линейное по μ уравнение P₁ = 0 при
  рабочем ε (определители численно, через LU);
- numerical_fit — МНК по отслеженным ветвям спектра.

α_c хранится в масштабе ε·α_c, μ_c — в масштабе ε²·μ_c (т.е. μ_c⁰).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

import config
from src.branches import SpectrumCurve, select_branch, track_branches
from src.charpoly import aberth_roots
from src.errors import (
    DegenerateFluxError,
    ExistenceError,
    FirstOrderInstabilityError,
    FitWindowError,
    GenericityError,
    McglError,
    SingularFluxError,
)
from src.model import DerivedQuantities, ModelParams
from src.symbol import SymbolTriple, build_full_symbol

LOG = logging.getLogger("mcgl.asymptotics")

ROUTES = ("closed_form", "matched_determinant", "numerical_fit")


@dataclass(frozen=True)
class ExpansionCoefficients:
    lambda_s0: float
    alpha_t: float
    mu_t: float
    alpha_c: Tuple[float, ...]
    mu_c: Tuple[float, ...]
    route: str
    epsilon: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "route": self.route,
            "lambda_s0": self.lambda_s0,
            "alpha_t": self.alpha_t,
            "mu_t": self.mu_t,
            "alpha_c0": list(self.alpha_c),
            "mu_c0": list(self.mu_c),
        }


@dataclass(frozen=True)
class FitResult:
    alpha: float
    mu: float
    residual: float
    first_order_real: float = 0.0


@dataclass(frozen=True)
class EckhausBound:
    kappa_sq: float
    has_band: bool
    bfn_holds: bool
    detail: str = ""


@dataclass(frozen=True)
class BfnResult:
    holds: bool
    value: float
    mu_t0: float
    consistent: bool


# --- замкнутые формулы ---

def _translational(a: complex, c_eff: complex, kappa: float, A0_sq: float) -> Tuple[float, float]:
    """α_t, μ_t волны cGL с коэффициентами (a, c_eff) при амплитуде A₀²."""
    alpha_t = -2.0 * kappa * a.imag + 2.0 * kappa * a.real * c_eff.imag / c_eff.real
    shifted = -2.0 * kappa * a.imag - alpha_t
    numer = shifted ** 2 + 4.0 * kappa ** 2 * a.real ** 2 + 2.0 * A0_sq * (a.real * c_eff.real + a.imag * c_eff.imag)
    mu_t = -numer / (2.0 * A0_sq * c_eff.real)
    return float(alpha_t), float(mu_t)


def gl_reference(a: complex, b: complex, c: complex, kappa: float, A0_sq: Optional[float] = None) -> Tuple[float, float]:
    """
    Классическое уравнение Гинзбурга–Ландау: (α_t, μ_t) нейтральной трансляционной моды.
    A0_sq по умолчанию берётся из существования волны: (Re b − Re a κ²)/(−Re c).
    """
    a, b, c = complex(a), complex(b), complex(c)
    if A0_sq is None:
        if not (a.real > 0 and c.real < 0):
            raise GenericityError(f"GL reference needs Re(a)>0, Re(c)<0: a={a}, c={c}")
        kappa_e_sq = b.real / a.real
        if not kappa * kappa < kappa_e_sq:
            raise ExistenceError(kappa * kappa, kappa_e_sq)
        A0_sq = (b.real - a.real * kappa * kappa) / (-c.real)
    return _translational(a, c, float(kappa), float(A0_sq))


def _flux_eigenpairs(dq: DerivedQuantities, params: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Собственные значения эффективного потока по возрастанию и биортонормированные (ℓ_i, r_i)."""
    flux = dq.effective_flux
    w, vl, vr = scipy.linalg.eig(flux, left=True, right=True)
    scale = max(1.0, float(np.max(np.abs(w))))
    if float(np.max(np.abs(w.imag))) > 1e-12 * scale:
        raise FirstOrderInstabilityError(w)
    order = np.argsort(w.real)
    w = w.real[order]
    vl = vl[:, order]
    vr = vr[:, order]
    if w.size > 1 and float(np.min(np.diff(w))) <= 1e-9 * scale:
        raise DegenerateFluxError(f"effective flux spectrum not simple: {w.tolist()}")
    left = vl.conj().T
    for i in range(w.size):
        left[i] = left[i] / (left[i] @ vr[:, i])
    return w, left, vr


def _check_closed_form_pre(dq: DerivedQuantities, params: ModelParams) -> None:
    if abs(np.linalg.det(params.f)) == 0.0:
        raise SingularFluxError("f is singular")
    if dq.c_hat.real == 0.0:
        raise GenericityError("Re(c_hat) = 0: coefficients undefined")


def coeffs_closed_form(dq: DerivedQuantities, params: ModelParams) -> ExpansionCoefficients:
    """Формулы главного порядка; векторный случай через биортонормированные пары потока."""
    _check_closed_form_pre(dq, params)
    a, c = params.a, params.c
    alpha_t, mu_t = _translational(a, dq.c_hat, dq.kappa, dq.A0_sq)
    w, left, right = _flux_eigenpairs(dq, params)
    coupling = np.outer(params.h, params.d.real) / (2.0 * dq.A0_sq * c.real ** 2)
    mu_c = []
    for i in range(w.size):
        val = left[i] @ coupling @ dq.effective_flux @ right[:, i]
        mu_c.append(float(np.real(val)))
    return ExpansionCoefficients(
        lambda_s0=dq.m0,
        alpha_t=alpha_t,
        mu_t=mu_t,
        alpha_c=tuple(float(x) for x in w),
        mu_c=tuple(mu_c),
        route="closed_form",
        epsilon=params.epsilon,
    )


def alpha_t_kato(dq: DerivedQuantities, params: ModelParams) -> float:
    """Вторая форма α_t (через жорданов коэффициент r); только m = 1."""
    if params.m != 1:
        raise ValueError("alpha_t_kato is defined for m = 1")
    a = params.a
    flux = float(dq.effective_flux[0, 0])
    r, h = float(dq.r[0]), float(params.h[0])
    return float(
        -2.0 * dq.kappa * (a.real * dq.q + a.imag)
        - 4.0 * dq.kappa * dq.A0 * a.real * r * h / (dq.m0 * flux)
    )


def darcy_translational(dq: DerivedQuantities, params: ModelParams) -> Tuple[float, float]:
    """(α_D,t, μ_D,t): GL с (a, b̂, ĉ); амплитуда совпадает с амплитудой полной модели."""
    return gl_reference(params.a, dq.b_hat, dq.c_hat, dq.kappa)


def _eckhaus(a: complex, b_tilde: complex, c_amp: float, c_hat: complex) -> Tuple[float, float, float]:
    """(κ², числитель, знаменатель) границы Экхауса; c_amp — Re коэффициента из формулы амплитуды."""
    mix = a.imag * c_hat.imag + a.real * c_hat.real
    q_hat = -c_hat.imag / c_hat.real
    numer = 2.0 * (b_tilde.real / c_amp) * mix
    denom = 4.0 * a.real ** 2 * (1.0 + q_hat ** 2) + 2.0 * (a.real / c_amp) * mix
    return numer / denom if denom != 0 else math.nan, numer, denom


def eckhaus_bound(dq: DerivedQuantities, params: ModelParams) -> EckhausBound:
    """κ_S²: граница диффузионной устойчивости; b̃ и Re c (не ĉ) — из подстановки A₀²."""
    kappa_sq, numer, denom = _eckhaus(params.a, dq.b_tilde, params.c.real, dq.c_hat)
    bfn = bfn_check(dq, params)
    if not denom > 0:
        return EckhausBound(kappa_sq=math.nan, has_band=False, bfn_holds=bfn.holds, detail="no stable band: denominator <= 0")
    has_band = kappa_sq > 0
    detail = "" if has_band else "no stable band: kappa_S^2 <= 0"
    return EckhausBound(kappa_sq=float(kappa_sq), has_band=has_band, bfn_holds=bfn.holds, detail=detail)


def frequency_adapted_bound(dq: DerivedQuantities, params: ModelParams) -> EckhausBound:
    """κ̃_S²: та же граница для редукции Дарси со своей амплитудой (Re ĉ вместо Re c)."""
    kappa_sq, numer, denom = _eckhaus(params.a, dq.b_tilde, dq.c_hat.real, dq.c_hat)
    bfn = bfn_check(dq, params)
    if not denom > 0:
        return EckhausBound(kappa_sq=math.nan, has_band=False, bfn_holds=bfn.holds, detail="no stable band: denominator <= 0")
    return EckhausBound(kappa_sq=float(kappa_sq), has_band=kappa_sq > 0, bfn_holds=bfn.holds)


def bfn_value(a: complex, b_hat: complex, c_hat: complex) -> float:
    return float(a.imag * c_hat.imag * b_hat.real * c_hat.real + a.real * b_hat.real * c_hat.real ** 2)


def bfn_check(dq: DerivedQuantities, params: ModelParams) -> BfnResult:
    """Условие Бенджамина–Фейра–Ньюэлла и его форма при κ=0: μ_t = −Re a − Im a Im ĉ/Re ĉ."""
    a, c_hat, b_hat = params.a, dq.c_hat, dq.b_hat
    value = bfn_value(a, b_hat, c_hat)
    mu_t0 = float(-a.real - a.imag * c_hat.imag / c_hat.real) if c_hat.real != 0 else math.nan
    consistent = True
    if b_hat.real > 0 and not math.isnan(mu_t0) and value != 0 and mu_t0 != 0:
        consistent = (value > 0) == (mu_t0 < 0)
        if not consistent:
            LOG.warning("BFN: знак значения %.6g не согласован с μ_t(0)=%.6g", value, mu_t0)
    return BfnResult(holds=value > 0, value=value, mu_t0=mu_t0, consistent=consistent)


# --- определитель сшивки ---

def _matched_blocks(symbol: SymbolTriple, alpha: complex, mu: complex) -> Tuple[np.ndarray, np.ndarray]:
    """
    K0(α) и K1(α, μ): det(M − iασ̂ − μσ̂²)/(iσ̂)^{m+1} = det(K0 + iσ̂K1) + O(σ̂²).
    Строки B и столбец фазы поделены на iσ̂.
    """
    C0, C1, C2 = symbol.C0, symbol.C1, symbol.C2
    n = symbol.size
    K0 = np.zeros((n, n), dtype=complex)
    K1 = np.zeros((n, n), dtype=complex)
    # строки амплитуды
    K0[:2, 0] = C0[:2, 0]
    K0[:2, 1] = C1[:2, 1]
    K0[:2, 2:] = C0[:2, 2:]
    K0[1, 1] -= alpha
    K1[:2, 0] = C1[:2, 0]
    K1[0, 0] -= alpha
    K1[:2, 1] = C2[:2, 1]
    K1[1, 1] += mu
    # строки B
    K0[2:, 0] = C1[2:, 0]
    K0[2:, 1] = C2[2:, 1]
    K0[2:, 2:] = C1[2:, 2:] - alpha * np.eye(n - 2)
    K1[2:, 0] = C2[2:, 0]
    K1[2:, 2:] = C2[2:, 2:] + mu * np.eye(n - 2)
    return K0, K1


def matched_p0(symbol: SymbolTriple, alpha: complex) -> complex:
    K0, _ = _matched_blocks(symbol, alpha, 0.0)
    return complex(np.linalg.det(K0))


def matched_p1(symbol: SymbolTriple, alpha: complex, mu: complex) -> complex:
    """Поправка первого порядка: сумма определителей K0 с j-м столбцом из K1 (полилинейность)."""
    K0, K1 = _matched_blocks(symbol, alpha, mu)
    total = 0j
    for j in range(symbol.size):
        if not np.any(K1[:, j]):
            continue
        K = K0.copy()
        K[:, j] = K1[:, j]
        total += np.linalg.det(K)
    return complex(total)


def matched_p0_coefficients(symbol: SymbolTriple) -> np.ndarray:
    """Коэффициенты P₀ по возрастанию степеней α: интерполяция по окружности |α| = ε^{−1/2}."""
    degree = symbol.size - 1
    npts = degree + 1
    radius = symbol.epsilon ** -0.5
    nodes = radius * np.exp(2j * np.pi * np.arange(npts) / npts)
    values = np.array([matched_p0(symbol, z) for z in nodes])
    coeffs = np.fft.fft(values) / npts / radius ** np.arange(npts)
    return coeffs.real


def coeffs_matched_determinant(dq: DerivedQuantities, params: ModelParams) -> ExpansionCoefficients:
    """
    α — корни P₀ при рабочем ε: |α| < ε^{−1/2} — трансляционный, остальные m — консервативные.
    μ для каждого корня из линейного уравнения P₁(α, μ) = 0.
    """
    _check_closed_form_pre(dq, params)
    symbol = build_full_symbol(dq, params)
    eps = params.epsilon
    coeffs = matched_p0_coefficients(symbol)
    roots = aberth_roots(coeffs[::-1])
    scale = np.maximum(1.0, np.abs(roots))
    if np.any(np.abs(roots.imag) > 1e-6 * scale):
        raise FirstOrderInstabilityError(roots)
    roots = np.sort(roots.real)
    threshold = eps ** -0.5
    small = [x for x in roots if abs(x) < threshold]
    large = [x for x in roots if abs(x) >= threshold]
    if len(small) != 1 or len(large) != params.m:
        raise DegenerateFluxError(
            f"matched-determinant roots do not split at eps^-1/2={threshold:.3g}: {roots.tolist()}"
        )

    def solve_mu(alpha: float) -> float:
        p0 = matched_p1(symbol, alpha, 0.0)
        p1 = matched_p1(symbol, alpha, 1.0)
        slope = p1 - p0
        if slope == 0:
            raise DegenerateFluxError(f"P1 does not depend on mu at alpha={alpha:.6g}")
        return float(np.real(-p0 / slope))

    alpha_t = float(small[0])
    mu_t = solve_mu(alpha_t)
    alpha_c = tuple(float(x * eps) for x in large)
    mu_c = tuple(solve_mu(x) * eps * eps for x in large)
    LOG.debug("Сшивка: α_t=%.6g μ_t=%.6g α_c0=%s μ_c0=%s", alpha_t, mu_t, alpha_c, mu_c)
    return ExpansionCoefficients(
        lambda_s0=dq.m0,
        alpha_t=alpha_t,
        mu_t=mu_t,
        alpha_c=alpha_c,
        mu_c=mu_c,
        route="matched_determinant",
        epsilon=eps,
    )


# --- подгонка по спектру ---

def _branch_index(curve: SpectrumCurve, which: Union[int, str], alpha_t: Optional[float] = None) -> int:
    if isinstance(which, (int, np.integer)):
        return int(which)
    kind = str(which)
    if kind in ("s", "t"):
        return select_branch(curve, kind, alpha_t=alpha_t)
    if kind.startswith("c"):
        index = int(kind[1:]) - 1 if len(kind) > 1 else 0
        return select_branch(curve, "c", index, alpha_t=alpha_t)
    raise ValueError(f"unknown branch id {which!r}")


def _crossing_involves(curve: SpectrumCurve, branch: int, sigma: float) -> bool:
    k = int(np.argmin(np.abs(curve.sigma_grid - sigma)))
    vals = curve.branches[:, k]
    gaps = np.abs(vals[:, np.newaxis] - vals[np.newaxis, :])
    np.fill_diagonal(gaps, np.inf)
    i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    return branch in (i, j)


def coeffs_numerical_fit(
    curve: SpectrumCurve,
    which: Union[int, str],
    fit_window: Union[float, Tuple[float, float]],
    alpha_t: Optional[float] = None,
) -> FitResult:
    """
    МНК λ(σ̂) ≈ c₁σ̂ + c₂σ̂² по точкам 0 < |σ̂| ≤ окно (обе стороны), вес σ̂⁻².
    α = Im c₁, μ = Re c₂; residual = max |λ − iασ̂ − μσ̂²|/σ̂².
    alpha_t — ожидаемый наклон трансляционной ветви для выбора 't' и 'c'.
    """
    lo, hi = (0.0, float(fit_window)) if np.isscalar(fit_window) else (float(fit_window[0]), float(fit_window[1]))
    branch = _branch_index(curve, which, alpha_t)
    s = curve.sigma_grid
    mask = (np.abs(s) > 0) & (np.abs(s) >= lo) & (np.abs(s) <= hi)
    if int(np.count_nonzero(mask)) < 3:
        raise FitWindowError(f"fit window [{lo:.3g}, {hi:.3g}] holds fewer than 3 points")
    for x in curve.crossings:
        if lo <= abs(x) <= hi and _crossing_involves(curve, branch, x):
            raise FitWindowError(f"branch crossing at sigma_hat={x:.6g} inside fit window")

    sig = s[mask]
    lam = curve.branches[branch, mask]
    # проверка λ(0) = 0 по подгонке с константой
    basis0 = np.column_stack([np.ones_like(sig), sig, sig ** 2]) / np.abs(sig)[:, np.newaxis]
    c0 = np.linalg.lstsq(basis0.astype(complex), lam / np.abs(sig), rcond=None)[0][0]
    if abs(c0) > max(1e-9, 1e-4 * float(np.max(np.abs(lam)))):
        raise FitWindowError(f"branch does not pass through 0: lambda(0) ~ {abs(c0):.3g}")

    basis = np.column_stack([sig, sig ** 2]) / np.abs(sig)[:, np.newaxis]
    c1, c2 = np.linalg.lstsq(basis.astype(complex), lam / np.abs(sig), rcond=None)[0]
    alpha, mu = float(c1.imag), float(c2.real)
    model = 1j * alpha * sig + mu * sig ** 2
    residual = float(np.max(np.abs(lam - model) / sig ** 2))
    return FitResult(alpha=alpha, mu=mu, residual=residual, first_order_real=float(c1.real))


def fit_grid(window: float, points: int) -> np.ndarray:
    """Симметричная логарифмическая сетка 0 < |σ̂| ≤ window (без нуля)."""
    side = np.geomspace(window / 50.0, window, points)
    return np.concatenate([-side[::-1], side])


def fit_coefficients(
    symbol: SymbolTriple,
    dq: DerivedQuantities,
    params: ModelParams,
    alpha_t_hint: Optional[float] = None,
) -> Tuple[ExpansionCoefficients, Dict[str, float]]:
    """
    Маршрут numerical_fit: λ_c на |σ̂| ≤ C_FIT_WINDOW_REL·ε, λ_t на |σ̂| ≤ min(T_FIT_WINDOW, то же окно).
    Член σ̂⁴ у λ_t имеет масштаб ε⁻², поэтому окно λ_t тоже ограничено долей ε.
    Трансляционная ветвь выбирается по наклону alpha_t_hint (по умолчанию — α_t определителя сшивки).
    """
    eps = params.epsilon
    if alpha_t_hint is None:
        try:
            alpha_t_hint = coeffs_matched_determinant(dq, params).alpha_t
        except McglError as e:
            LOG.debug("Подсказка α_t недоступна: %s", e)
    c_window = config.C_FIT_WINDOW_REL * eps
    t_window = min(config.T_FIT_WINDOW, c_window)
    c_curve = track_branches(symbol, fit_grid(c_window, config.FIT_POINTS))
    t_curve = c_curve if t_window == c_window else track_branches(symbol, fit_grid(t_window, config.FIT_POINTS))
    t_fit = coeffs_numerical_fit(t_curve, "t", t_window, alpha_t_hint)
    c_fits: List[FitResult] = [
        coeffs_numerical_fit(c_curve, f"c{i + 1}", c_window, alpha_t_hint) for i in range(params.m)
    ]
    s_branch = select_branch(c_curve, "s")
    k0 = int(np.argmin(np.abs(c_curve.sigma_grid)))
    lambda_s0 = float(c_curve.branches[s_branch, k0].real)
    residuals = {"t": t_fit.residual}
    residuals.update({f"c{i + 1}": fit.residual * eps * eps for i, fit in enumerate(c_fits)})
    coeffs = ExpansionCoefficients(
        lambda_s0=lambda_s0,
        alpha_t=t_fit.alpha,
        mu_t=t_fit.mu,
        alpha_c=tuple(fit.alpha * eps for fit in c_fits),
        mu_c=tuple(fit.mu * eps * eps for fit in c_fits),
        route="numerical_fit",
        epsilon=eps,
    )
    return coeffs, residuals


__all__ = [
    "ROUTES",
    "ExpansionCoefficients",
    "FitResult",
    "EckhausBound",
    "BfnResult",
    "gl_reference",
    "coeffs_closed_form",
    "coeffs_matched_determinant",
    "coeffs_numerical_fit",
    "fit_coefficients",
    "fit_grid",
    "matched_p0",
    "matched_p1",
    "matched_p0_coefficients",
    "alpha_t_kato",
    "darcy_translational",
    "eckhaus_bound",
    "frequency_adapted_bound",
    "bfn_value",
    "bfn_check",
]
