"""
Фурье-символ линеаризации вокруг волны.

M(ε, σ̂) = C0 + iσ̂·C1 − σ̂²·C2, размер (m+2)×(m+2); порядок переменных —
(Re-возмущение амплитуды, фаза, B). ε⁻¹ уже внутри C1; отдельно храним
C1_singular — коэффициент при ε⁻¹, нужный для перемасштабирования в σ̌.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np

from src.errors import SingularFluxError
from src.model import DerivedQuantities, ModelParams

LOG = logging.getLogger("mcgl.symbol")

SCALES = ("hat", "check", "rho", "pde")


@dataclass(frozen=True, eq=False)
class SymbolTriple:
    C0: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    epsilon: float
    C1_singular: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return int(self.C0.shape[0])

    @property
    def C1_regular(self) -> np.ndarray:
        if self.C1_singular is None:
            return self.C1
        return self.C1 - self.C1_singular / self.epsilon


@dataclass(frozen=True)
class FrequencyCoordinate:
    """Частота в одном из масштабов: hat (σ̂), check (σ̌=σ̂/ε), rho (ρ=σ̂), pde (σ=εσ̂)."""

    value: float
    scale: str = "hat"

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ValueError(f"unknown frequency scale {self.scale!r}, expected one of {SCALES}")

    def to_hat(self, epsilon: float) -> float:
        if self.scale in ("hat", "rho"):
            return float(self.value)
        if self.scale == "check":
            return float(self.value) * epsilon
        return float(self.value) / epsilon

    def to(self, scale: str, epsilon: float) -> "FrequencyCoordinate":
        sigma_hat = self.to_hat(epsilon)
        if scale in ("hat", "rho"):
            value = sigma_hat
        elif scale == "check":
            value = sigma_hat / epsilon
        else:
            value = sigma_hat * epsilon
        return FrequencyCoordinate(value, scale)


SigmaLike = Union[float, FrequencyCoordinate]


def _sigma_hat(sigma: SigmaLike, epsilon: float) -> float:
    if isinstance(sigma, FrequencyCoordinate):
        return sigma.to_hat(epsilon)
    return float(sigma)


def build_full_symbol(dq: DerivedQuantities, params: ModelParams) -> SymbolTriple:
    """Тройка (C0, C1, C2) полной системы; векторный случай собирается блоками без особых веток."""
    m = params.m
    n = m + 2
    eps = params.epsilon
    a, c, d = params.a, params.c, params.d
    A0, kappa = dq.A0, dq.kappa
    A0_sq = A0 * A0

    C0 = np.zeros((n, n))
    C0[0, 0] = 2.0 * A0_sq * c.real
    C0[1, 0] = 2.0 * A0_sq * c.imag
    C0[0, 2:] = A0 * d.real
    C0[1, 2:] = A0 * d.imag

    singular = np.zeros((n, n))
    singular[2:, 0] = 2.0 * A0 * params.h
    singular[2:, 2:] = params.f

    C1 = np.zeros((n, n))
    C1[0, 0] = -2.0 * kappa * a.imag
    C1[0, 1] = -2.0 * kappa * a.real
    C1[1, 0] = 2.0 * kappa * a.real
    C1[1, 1] = -2.0 * kappa * a.imag
    C1[2:, 0] = 2.0 * A0 * kappa * params.g_im
    C1 += singular / eps

    C2 = np.zeros((n, n))
    C2[0, 0] = a.real
    C2[0, 1] = -a.imag
    C2[1, 0] = a.imag
    C2[1, 1] = a.real
    C2[2:, 0] = 2.0 * A0 * params.g_re
    C2[2:, 1] = 2.0 * A0 * params.g_im
    C2[2:, 2:] = params.e_B

    return SymbolTriple(C0=C0, C1=C1, C2=C2, epsilon=eps, C1_singular=singular)


def assemble(symbol: SymbolTriple, sigma: SigmaLike) -> np.ndarray:
    """M(ε, σ̂) = C0 + iσ̂C1 − σ̂²C2; σ переводится в σ̂ из своего масштаба."""
    s = _sigma_hat(sigma, symbol.epsilon)
    return symbol.C0 + 1j * s * symbol.C1 - (s * s) * symbol.C2


def assemble_rescaled(symbol: SymbolTriple, sigma_check: float, rho: float) -> np.ndarray:
    """
    Семейство области (ii): C0 + iσ̌Σ + iρ C1_reg − ρ² C2, где Σ — коэффициент при ε⁻¹.
    При ρ = εσ̌ совпадает с assemble(σ̂ = ρ).
    """
    if symbol.C1_singular is None:
        raise ValueError("assemble_rescaled needs a triple with C1_singular")
    return (
        symbol.C0
        + 1j * sigma_check * symbol.C1_singular
        + 1j * rho * symbol.C1_regular
        - (rho * rho) * symbol.C2
    )


def _solve_flux(params: ModelParams, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(params.f, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularFluxError("f is singular: Darcy reduction undefined") from e


def _darcy_triple(c_eff: complex, A0: float, full: SymbolTriple) -> SymbolTriple:
    D0 = np.array([[2.0 * A0 * A0 * c_eff.real, 0.0], [2.0 * A0 * A0 * c_eff.imag, 0.0]])
    return SymbolTriple(
        C0=D0,
        C1=full.C1[:2, :2].copy(),
        C2=full.C2[:2, :2].copy(),
        epsilon=full.epsilon,
        C1_singular=np.zeros((2, 2)),
    )


def build_darcy_symbol(dq: DerivedQuantities, params: ModelParams) -> SymbolTriple:
    """2×2 символ Дарси с ĉ вместо c при амплитуде полной модели."""
    _solve_flux(params, params.h)
    full = build_full_symbol(dq, params)
    return _darcy_triple(dq.c_hat, dq.A0, full)


def frequency_adapted_darcy_symbol(dq: DerivedQuantities, params: ModelParams) -> SymbolTriple:
    """
    Вариант Дарси с собственной амплитудой: уравнение cGL с (a, b̃, ĉ), для
    которого волна имеет A₀² = (Re b̃ − Re a κ²)/(−Re ĉ).
    """
    _solve_flux(params, params.h)
    A0_sq = (dq.b_tilde.real - params.a.real * dq.kappa ** 2) / (-dq.c_hat.real)
    if not A0_sq > 0:
        raise SingularFluxError(f"frequency-adapted wave does not exist: A0^2={A0_sq:.6g}")
    full = build_full_symbol(dq, params)
    return _darcy_triple(dq.c_hat, float(np.sqrt(A0_sq)), full)


def darcy_embedding_matrix(dq: DerivedQuantities, params: ModelParams) -> np.ndarray:
    """N = (−2A₀ f⁻¹h, 0), m×2."""
    N = np.zeros((params.m, 2))
    N[:, 0] = -2.0 * dq.A0 * _solve_flux(params, params.h)
    return N


def darcy_embedding_residual(
    full: SymbolTriple,
    darcy: SymbolTriple,
    dq: DerivedQuantities,
    params: ModelParams,
    sigma_grid: Iterable[SigmaLike],
    N: Optional[np.ndarray] = None,
) -> float:
    """max по сетке ‖m(σ) − [Id₂ 0]·M(σ)·[Id₂; N]‖_∞ (тождество точное)."""
    if N is None:
        N = darcy_embedding_matrix(dq, params)
    lift = np.vstack([np.eye(2), N])
    worst = 0.0
    for sigma in sigma_grid:
        M = assemble(full, sigma)
        projected = (M @ lift)[:2, :]
        residual = assemble(darcy, sigma) - projected
        worst = max(worst, float(np.max(np.sum(np.abs(residual), axis=1))))
    return worst


def block_similarity(dq: DerivedQuantities, params: ModelParams) -> np.ndarray:
    """S = [[Id₂, 0], [N, Id_m]]."""
    m = params.m
    S = np.eye(m + 2)
    S[2:, :2] = darcy_embedding_matrix(dq, params)
    return S


def singular_part_in_darcy_frame(symbol: SymbolTriple, dq: DerivedQuantities, params: ModelParams) -> np.ndarray:
    """S⁻¹ Σ S: при точном N блок связи (строки B, столбцы амплитуды) нулевой."""
    if symbol.C1_singular is None:
        raise ValueError("symbol has no singular part")
    S = block_similarity(dq, params)
    return np.linalg.solve(S, symbol.C1_singular @ S)


def symbol_to_dict(symbol: SymbolTriple) -> Dict[str, Any]:
    """Для --dump-symbol: матрицы построчно, как в JSON модели."""
    doc: Dict[str, Any] = {
        "C0": symbol.C0.tolist(),
        "C1": symbol.C1.tolist(),
        "C2": symbol.C2.tolist(),
        "epsilon": symbol.epsilon,
    }
    if symbol.C1_singular is not None:
        doc["C1_singular"] = symbol.C1_singular.tolist()
    return doc


__all__ = [
    "SymbolTriple",
    "FrequencyCoordinate",
    "SCALES",
    "build_full_symbol",
    "assemble",
    "assemble_rescaled",
    "build_darcy_symbol",
    "frequency_adapted_darcy_symbol",
    "darcy_embedding_matrix",
    "darcy_embedding_residual",
    "block_similarity",
    "singular_part_in_darcy_frame",
    "symbol_to_dict",
]
