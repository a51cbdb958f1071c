"""
Модель васкулогенеза: линеаризация у однородного равновесия и поиск
бифуркации Тьюринга.

Состояние (ρ, u, c), равновесие ρ₀=1, u₀=0, c₀=ατ; давление P = Aρ², P'(1) = 2A.
Символ линеаризации на волне e^{ikx + λt}:

    [[−μk²,    −ik,       0        ],
     [−2Aik,   −γ − νk²,  βik      ],
     [α,       0,         −1/τ − Dk²]]

При k=0 спектр {0, −γ, −1/τ}. Критическая ветвь λ*(k) = θk² + O(k⁴) с
θ = (αβτ − 2A)/γ − μ; длинноволновая неустойчивость начинается при
(αβ)* = (2A + μγ)/τ.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

import config
from src.eig import eigenvalues
from src.errors import FitWindowError, HypothesisError, ModelFileError
from src.grid_pool import grid_map

LOG = logging.getLogger("mcgl.turing")

GROWTH_TOL = 1e-9
DEFAULT_K_RANGE = (1e-3, 10.0)


@dataclass(frozen=True)
class VasculogenesisParams:
    alpha_r: float
    beta_r: float
    tau: float
    A_p: float
    gamma_d: float
    D_c: float
    mu_v: float = 0.0
    nu_v: float = 0.0

    def __post_init__(self):
        issues = []
        for name in ("tau", "D_c"):
            if not getattr(self, name) > 0:
                issues.append({"rule": f"{name}>0", "severity": "critical",
                               "detail": f"{name}>0 fails: {name}={getattr(self, name)}"})
        for name in ("alpha_r", "beta_r", "A_p", "gamma_d", "mu_v", "nu_v"):
            if not getattr(self, name) >= 0:
                issues.append({"rule": f"{name}>=0", "severity": "critical",
                               "detail": f"{name}>=0 fails: {name}={getattr(self, name)}"})
        if issues:
            raise HypothesisError(issues)

    @property
    def product(self) -> float:
        return self.alpha_r * self.beta_r

    @property
    def c0(self) -> float:
        return self.alpha_r * self.tau

    def with_product(self, product: float) -> "VasculogenesisParams":
        """Та же модель с αβ = product (α фиксировано, меняется β)."""
        if self.alpha_r == 0:
            raise ValueError("with_product needs alpha_r > 0")
        return VasculogenesisParams(**{**asdict(self), "beta_r": product / self.alpha_r})

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ThetaFit:
    theta: float
    closed_form: float
    stable_near_zero: bool
    agrees: bool
    residual: float = 0.0


@dataclass(frozen=True)
class BifurcationReport:
    found: bool
    ab_star: Optional[float]
    k_star: Optional[float]
    onset: Optional[str]
    detail: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def vasculo_params_from_dict(doc: Dict[str, Any]) -> VasculogenesisParams:
    known = set(VasculogenesisParams.__dataclass_fields__)
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ModelFileError(f"unknown fields: {', '.join(unknown)}")
    try:
        return VasculogenesisParams(**{k: float(v) for k, v in doc.items()})
    except TypeError as e:
        raise ModelFileError(str(e)) from e


def load_vasculo_params(path: str) -> VasculogenesisParams:
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
        return vasculo_params_from_dict(doc)
    except (TypeError, ValueError) as e:
        raise ModelFileError(f"{path}: {e}") from e


def vasculo_symbol(p: VasculogenesisParams, k: float) -> np.ndarray:
    k2 = k * k
    return np.array(
        [
            [-p.mu_v * k2, -1j * k, 0.0],
            [-2j * p.A_p * k, -p.gamma_d - p.nu_v * k2, 1j * p.beta_r * k],
            [p.alpha_r, 0.0, -1.0 / p.tau - p.D_c * k2],
        ],
        dtype=complex,
    )


def abzero_spectrum(p: VasculogenesisParams, k: float) -> np.ndarray:
    """Спектр при αβ = 0 явно: блок (ρ, u) 2×2 и отдельное −1/τ − Dk²."""
    k2 = k * k
    trace = -p.mu_v * k2 - p.gamma_d - p.nu_v * k2
    det = p.mu_v * k2 * (p.gamma_d + p.nu_v * k2) + 2.0 * p.A_p * k2
    root = np.sqrt(complex(trace * trace - 4.0 * det))
    return np.array([(trace + root) / 2.0, (trace - root) / 2.0, -1.0 / p.tau - p.D_c * k2], dtype=complex)


def theta_closed_form(p: VasculogenesisParams) -> float:
    return (p.product * p.tau - 2.0 * p.A_p) / p.gamma_d - p.mu_v


def _spectrum(p: VasculogenesisParams, k: float) -> np.ndarray:
    return eigenvalues(vasculo_symbol(p, k), vectors=False).eigenvalues


def critical_branch_coefficient(p: VasculogenesisParams, k_window: Optional[float] = None, points: Optional[int] = None) -> ThetaFit:
    """
    θ из МНК Re λ*(k)/k² ≈ θ + θ₄k² на 0 < k ≤ k_window; λ*(k) — ветвь из λ*(0) = 0.
    По умолчанию k_window = 0.05·min(γ, 1/τ).
    """
    if not (p.gamma_d > 0 and p.tau > 0):
        raise HypothesisError([{"rule": "gamma_d>0", "severity": "critical",
                                "detail": f"spectral gap at k=0 needs gamma_d>0, got {p.gamma_d}"}])
    gap0 = min(p.gamma_d, 1.0 / p.tau)
    window = k_window if k_window is not None else 0.05 * gap0
    ks = np.geomspace(window / 20.0, window, points or config.FIT_POINTS)
    spectra = grid_map(lambda k: _spectrum(p, float(k)), list(ks))

    branch = np.empty(ks.size, dtype=complex)
    prev = 0.0 + 0.0j
    for i, lams in enumerate(spectra):
        j = int(np.argmin(np.abs(lams - prev)))
        others = np.delete(lams, j)
        if float(np.min(np.abs(others - lams[j]))) < 0.5 * gap0:
            raise FitWindowError(f"critical branch meets another eigenvalue at k={ks[i]:.6g}")
        branch[i] = lams[j]
        prev = lams[j]

    basis = np.column_stack([np.ones_like(ks), ks ** 2])
    target = branch.real / ks ** 2
    (theta, theta4), *_ = np.linalg.lstsq(basis, target, rcond=None)
    residual = float(np.max(np.abs(basis @ np.array([theta, theta4]) - target)))
    closed = theta_closed_form(p)
    agrees = abs(theta - closed) <= 0.05 * max(abs(closed), window * window)
    if not agrees:
        LOG.warning("θ: подгонка %.6g, формула %.6g", theta, closed)
    return ThetaFit(theta=float(theta), closed_form=float(closed), stable_near_zero=bool(theta < 0),
                    agrees=bool(agrees), residual=residual)


def default_k_grid(points: Optional[int] = None) -> np.ndarray:
    return np.geomspace(DEFAULT_K_RANGE[0], DEFAULT_K_RANGE[1], points or config.SCAN_POINTS)


def growth_profile(p: VasculogenesisParams, k_grid: Sequence[float]) -> np.ndarray:
    """max_j Re λ_j(k)/k² по сетке k > 0 (знак как у max Re λ, масштаб O(θ) у нуля)."""
    ks = np.asarray(k_grid, dtype=float)
    if np.any(ks <= 0):
        raise ValueError("growth_profile: k grid must be positive")
    tops = grid_map(lambda k: float(np.max(_spectrum(p, float(k)).real)), list(ks))
    return np.asarray(tops) / ks ** 2


def _classify(p: VasculogenesisParams, ks: np.ndarray) -> Tuple[bool, float]:
    growth = growth_profile(p, ks)
    j = int(np.argmax(growth))
    return bool(growth[j] > GROWTH_TOL), float(ks[j])


def bifurcation_locate(
    p: VasculogenesisParams,
    product_range: Tuple[float, float],
    k_grid: Optional[Sequence[float]] = None,
    xtol: float = 1e-8,
) -> BifurcationReport:
    """
    Бисекция по αβ (β масштабируется при фиксированном α): первое αβ, где max_k Re λ(k) > 0.
    Тип начала: long-wave, если максимум роста у наименьшего k сетки, иначе finite-k.
    """
    lo, hi = float(product_range[0]), float(product_range[1])
    if hi < lo:
        raise ValueError(f"product range is reversed: [{lo}, {hi}]")
    ks = np.asarray(k_grid if k_grid is not None else default_k_grid(), dtype=float)

    unstable_lo, k_lo = _classify(p.with_product(lo), ks)
    if hi == lo:
        state = "unstable" if unstable_lo else "stable"
        return BifurcationReport(False, None, None, None, f"single evaluation: {state} at alpha*beta={lo:.6g}")
    if unstable_lo:
        return BifurcationReport(False, None, None, None, f"unstable at the low end alpha*beta={lo:.6g} (k={k_lo:.3g})")
    unstable_hi, _ = _classify(p.with_product(hi), ks)
    if not unstable_hi:
        return BifurcationReport(False, None, None, None, f"stable on the whole range [{lo:.6g}, {hi:.6g}]")

    def excess(x: float) -> float:
        return float(np.max(growth_profile(p.with_product(x), ks))) - GROWTH_TOL

    ab_star = brentq(excess, lo, hi, xtol=xtol * max(1.0, hi))
    _, k_star = _classify(p.with_product(min(hi, ab_star * (1.0 + 1e-6) + xtol)), ks)
    onset = "long-wave" if k_star == float(ks[0]) else "finite-k"
    if onset == "long-wave":
        k_star = 0.0
    LOG.info("Тьюринг: (αβ)*=%.8g, k*=%.4g (%s)", ab_star, k_star, onset)
    return BifurcationReport(True, float(ab_star), float(k_star), onset,
                             f"closed-form long-wave onset {(2.0 * p.A_p + p.mu_v * p.gamma_d) / p.tau:.8g}")


def branches_over_k(p: VasculogenesisParams, k_grid: Sequence[float]) -> Tuple[List[str], List[List[float]]]:
    """Строки CSV: k и спектр, упорядоченный по убыванию Re."""
    ks = [float(k) for k in k_grid]
    spectra = grid_map(lambda k: _spectrum(p, k), ks)
    columns = ["k"] + [f"{part}_lambda_{j + 1}" for j in range(3) for part in ("re", "im")]
    rows = []
    for k, lams in zip(ks, spectra):
        lams = lams[np.argsort(-lams.real, kind="stable")]
        row = [k]
        for z in lams:
            row += [float(z.real), float(z.imag)]
        rows.append(row)
    return columns, rows


__all__ = [
    "VasculogenesisParams",
    "ThetaFit",
    "BifurcationReport",
    "vasculo_params_from_dict",
    "load_vasculo_params",
    "vasculo_symbol",
    "abzero_spectrum",
    "theta_closed_form",
    "critical_branch_coefficient",
    "default_k_grid",
    "growth_profile",
    "bifurcation_locate",
    "branches_over_k",
]
