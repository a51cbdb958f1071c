"""
Проверка диффузионной спектральной устойчивости по областям частот.

Области в σ̂ (C — общая константа, по умолчанию 10):
  (i)   σ̂ ≤ ε/C            (iv)  1/C ≤ σ̂ ≤ 1/(Cε)
  (ii)  ε/C ≤ σ̂ ≤ Cε        (v)   1/(Cε) ≤ σ̂ ≤ C/ε
  (iii) Cε ≤ σ̂ ≤ 1/C        (vi)  σ̂ ≥ C/ε
В каждой области — полный спектр на логарифмической сетке и проверка
max_j Re λ_j(σ̂) ≤ −c_dss·σ̂²/(1+σ̂²). Отрицательные σ̂ не считаются:
спектр при −σ̂ сопряжён спектру при σ̂, вещественные части те же.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from src.asymptotics import ExpansionCoefficients, coeffs_closed_form
from src.eig import eigenvalues
from src.errors import EigenConvergenceError, McglError
from src.grid_pool import grid_map
from src.model import DerivedQuantities, ModelParams
from src.symbol import SymbolTriple, assemble, assemble_rescaled

LOG = logging.getLogger("mcgl.dss")

REGION_IDS = ("i", "ii", "iii", "iv", "v", "vi")
NOISE_SLACK = 1e-13
IMAGINARY_MARGIN_FLOOR = 1e-8


@dataclass(frozen=True)
class DssConfig:
    C: float = 10.0
    points_per_region: int = 64

    def __post_init__(self):
        if not self.C >= 4:
            raise ValueError(f"region constant C must be >= 4, got {self.C}")
        if self.points_per_region < 2:
            raise ValueError("points_per_region must be >= 2")

    @classmethod
    def from_env(cls) -> "DssConfig":
        return cls(C=config.REGION_C, points_per_region=config.POINTS_PER_DECADE)


@dataclass
class RegionReport:
    region: str
    sigma_hat: Tuple[float, float]
    grid_size: int
    max_excess: float
    branch_excess: List[float]
    max_re: float
    passed: bool

    def as_dict(self) -> Dict[str, Any]:
        return {
            "region": self.region,
            "sigma_hat": list(self.sigma_hat),
            "grid_size": self.grid_size,
            "max_excess": self.max_excess,
            "branch_excess": self.branch_excess,
            "max_re": self.max_re,
            "passed": self.passed,
        }


@dataclass
class DssResult:
    regions: List[RegionReport]
    c_dss: float
    verdict: bool
    merged: bool
    origin_max_re: float
    pilot_min_ratio: float
    issues: List[Dict[str, str]] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "regions": [r.as_dict() for r in self.regions],
            "c_dss": self.c_dss,
            "verdict": "stable" if self.verdict else "unstable",
            "merged": self.merged,
            "origin_max_re": self.origin_max_re,
            "pilot_min_ratio": self.pilot_min_ratio,
            "issues": self.issues,
        }


@dataclass(frozen=True)
class ImaginaryScan:
    margin: float
    ok: bool
    warning: str = ""


@dataclass(frozen=True)
class AffineCheck:
    residual: float
    ok: bool
    intercept: complex
    slope: complex


def region_partition(epsilon: float, C: float) -> Tuple[List[Tuple[str, float, float]], bool]:
    """
    Интервалы областей от нижней отсечки (ε/C·10^−FLOOR) до C/ε·10^TAIL.
    При εC² ≥ 1 область (iii) пуста: (ii)–(iv) сливаются, второй элемент — True.
    """
    lo = epsilon / C * 10.0 ** (-config.SIGMA_FLOOR_DECADES)
    hi = C / epsilon * 10.0 ** config.SIGMA_TAIL_DECADES
    bounds = [lo, epsilon / C, C * epsilon, 1.0 / C, 1.0 / (C * epsilon), C / epsilon, hi]
    if epsilon * C * C < 1.0:
        return [(REGION_IDS[k], bounds[k], bounds[k + 1]) for k in range(6)], False
    LOG.warning("εC² = %.3g ≥ 1: области (ii)-(iv) слиты", epsilon * C * C)
    return [
        ("i", bounds[0], bounds[1]),
        ("ii-iv", bounds[1], bounds[4]),
        ("v", bounds[4], bounds[5]),
        ("vi", bounds[5], bounds[6]),
    ], True


def _log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    decades = max(math.log10(hi / lo), 1e-12)
    npts = max(int(math.ceil(decades * per_decade)) + 1, 8)
    return np.geomspace(lo, hi, npts)


def _spectrum_rows(symbol: SymbolTriple, grid: np.ndarray, region: str) -> List[Tuple[np.ndarray, float]]:
    def solve(s: float) -> Tuple[np.ndarray, float]:
        M = assemble(symbol, s)
        try:
            lams = eigenvalues(M, vectors=False).eigenvalues
        except EigenConvergenceError as e:
            raise EigenConvergenceError(f"region ({region}), sigma_hat={s:.6g}: {e}", partial=e.partial) from e
        return np.sort(lams.real)[::-1], float(np.linalg.norm(M))

    return grid_map(solve, list(grid))


def _weight(s: np.ndarray) -> np.ndarray:
    return s * s / (1.0 + s * s)


def verify_dss(
    symbol: SymbolTriple,
    dq: DerivedQuantities,
    params: ModelParams,
    dss_config: Optional[DssConfig] = None,
    coefficients: Optional[ExpansionCoefficients] = None,
) -> DssResult:
    """
    Пилотный проход (MCGL_PILOT_POINTS_PER_DECADE) калибрует c_dss = safety·min(|μ_t|, min отношения
    −max Re λ/(σ̂²/(1+σ̂²))), затем каждая область проверяется на полной сетке.
    """
    cfg = dss_config or DssConfig.from_env()
    eps = params.epsilon
    partition, merged = region_partition(eps, cfg.C)
    issues: List[Dict[str, str]] = []
    if merged:
        issues.append({"rule": "regions-merged", "severity": "minor",
                       "detail": f"eps*C^2={eps * cfg.C ** 2:.3g} >= 1: regions (ii)-(iv) merged"})

    origin = eigenvalues(assemble(symbol, 0.0), vectors=False).eigenvalues
    neutral = np.delete(origin, int(np.argmin(np.abs(origin - dq.m0))))
    origin_max_re = float(np.max(neutral.real)) if neutral.size else 0.0

    pilot = _log_grid(partition[0][1], partition[-1][2], config.PILOT_POINTS_PER_DECADE)
    pilot_rows = _spectrum_rows(symbol, pilot, "pilot")
    ratios = np.array([-row[0][0] for row in pilot_rows]) / _weight(pilot)
    pilot_min = float(np.min(ratios))

    if coefficients is None:
        try:
            coefficients = coeffs_closed_form(dq, params)
        except McglError as e:
            LOG.info("c_dss без μ_t: %s", e)
    candidates = [pilot_min]
    if coefficients is not None:
        candidates.append(abs(coefficients.mu_t))
    c_dss = max(0.0, config.DSS_SAFETY * min(candidates))
    LOG.info("DSS: c_dss=%.4g (пилот min=%.4g)", c_dss, pilot_min)

    reports: List[RegionReport] = []
    for region, lo, hi in partition:
        grid = _log_grid(lo, hi, cfg.points_per_region)
        rows = _spectrum_rows(symbol, grid, region)
        re_parts = np.array([row[0] for row in rows])
        norms = np.array([row[1] for row in rows])
        bound = c_dss * _weight(grid)
        excess = re_parts + bound[:, np.newaxis]
        slack = NOISE_SLACK * norms
        passed = bool(np.all(excess[:, 0] <= slack)) and bool(np.all(re_parts[:, 0] < slack)) and c_dss > 0
        report = RegionReport(
            region=region,
            sigma_hat=(float(lo), float(hi)),
            grid_size=int(grid.size),
            max_excess=float(np.max(excess[:, 0])),
            branch_excess=[float(x) for x in np.max(excess, axis=0)],
            max_re=float(np.max(re_parts[:, 0])),
            passed=passed,
        )
        if not passed:
            worst = int(np.argmax(excess[:, 0] - slack))
            LOG.info("Область (%s): нарушение при σ̂=%.6g, max Re λ=%.3g", region, grid[worst], re_parts[worst, 0])
        reports.append(report)

    verdict = all(r.passed for r in reports)
    return DssResult(
        regions=reports,
        c_dss=c_dss,
        verdict=verdict,
        merged=merged,
        origin_max_re=origin_max_re,
        pilot_min_ratio=pilot_min,
        issues=issues,
    )


def reduced_neutral_matrix(dq: DerivedQuantities, params: ModelParams, sigma_check: float) -> np.ndarray:
    """M̂₀(σ̌) = [[2A₀²Re c, A₀Re d], [2A₀h iσ̌, f iσ̌]] — ведущий порядок области (ii) без фазы."""
    m = params.m
    R = np.zeros((m + 1, m + 1), dtype=complex)
    R[0, 0] = 2.0 * dq.A0_sq * params.c.real
    R[0, 1:] = dq.A0 * params.d.real
    R[1:, 0] = 2.0j * dq.A0 * sigma_check * params.h
    R[1:, 1:] = 1j * sigma_check * params.f
    return R


def default_check_grid(C: float, points: Optional[int] = None) -> np.ndarray:
    side = np.geomspace(1.0 / C, C, points or config.SCAN_POINTS)
    return np.concatenate([-side[::-1], side])


def imaginary_root_scan(
    dq: DerivedQuantities,
    params: ModelParams,
    sigma_check_grid: Optional[Sequence[float]] = None,
) -> ImaginaryScan:
    """min по сетке σ̌ от min_j |Re λ_j(M̂₀(σ̌))|; чисто мнимых корней быть не должно."""
    grid = np.asarray(sigma_check_grid if sigma_check_grid is not None else default_check_grid(config.REGION_C))
    if np.any(grid == 0):
        raise ValueError("imaginary_root_scan: sigma_check grid must not contain 0")
    margins = grid_map(
        lambda s: float(np.min(np.abs(eigenvalues(reduced_neutral_matrix(dq, params, s), vectors=False).eigenvalues.real))),
        list(grid),
    )
    margin = float(min(margins))
    ok = margin > IMAGINARY_MARGIN_FLOOR
    warning = ""
    generic = abs(dq.c_hat.real) > config.GENERICITY_ATOL and bool(
        np.all(np.abs(params.h * params.d.real) > config.GENERICITY_ATOL)
    )
    if not ok and generic:
        warning = f"imaginary-root margin {margin:.3g} below {IMAGINARY_MARGIN_FLOOR:g} although genericity holds"
        LOG.warning("Сканирование мнимых корней: %s", warning)
    return ImaginaryScan(margin=margin, ok=ok, warning=warning)


def _neutral_second_order(symbol: SymbolTriple, sigma_check: float, step: float) -> complex:
    """λ₂(σ̌): вторая производная/2 нейтральной ветви по ρ (центральные разности + Ричардсон)."""

    def neutral(rho: float) -> complex:
        lams = eigenvalues(assemble_rescaled(symbol, sigma_check, rho), vectors=False).eigenvalues
        return complex(lams[int(np.argmin(np.abs(lams)))])

    base = neutral(0.0)

    def second(h: float) -> complex:
        return (neutral(h) + neutral(-h) - 2.0 * base) / (2.0 * h * h)

    return (4.0 * second(step) - second(2.0 * step)) / 3.0


def region_ii_affine_check(symbol: SymbolTriple, C: float, points: int = 41, step: float = 1e-3) -> AffineCheck:
    """Коэффициент λ₂ нейтральной ветви на σ̌ ∈ [1/C, C] должен быть аффинным по 1/σ̌."""
    grid = np.geomspace(1.0 / C, C, points)
    lam2 = np.array(grid_map(lambda s: _neutral_second_order(symbol, s, step), list(grid)))
    basis = np.column_stack([np.ones_like(grid), 1.0 / grid]).astype(complex)
    (intercept, slope), *_ = np.linalg.lstsq(basis, lam2, rcond=None)
    fitted = basis @ np.array([intercept, slope])
    residual = float(np.max(np.abs(lam2 - fitted)) / max(float(np.max(np.abs(lam2))), 1e-300))
    return AffineCheck(residual=residual, ok=residual <= 1e-3, intercept=complex(intercept), slope=complex(slope))


__all__ = [
    "REGION_IDS",
    "DssConfig",
    "RegionReport",
    "DssResult",
    "ImaginaryScan",
    "AffineCheck",
    "region_partition",
    "verify_dss",
    "reduced_neutral_matrix",
    "default_check_grid",
    "imaginary_root_scan",
    "region_ii_affine_check",
]
