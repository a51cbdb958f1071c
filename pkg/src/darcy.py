"""
Сравнение полного спектра с редукцией Дарси на σ̂ ∈ [1/C, C].

Кандидаты: 2 собственных значения символа Дарси и m быстрых iσ̂ε⁻¹spec(f).
Полный спектр сопоставляется с кандидатами оптимальным назначением;
устойчивость Дарси — необходимое условие устойчивости полной модели.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

import config
from src.eig import eigenvalues
from src.errors import SingularFluxError
from src.grid_pool import grid_map
from src.model import DerivedQuantities, ModelParams
from src.symbol import SymbolTriple, assemble

LOG = logging.getLogger("mcgl.darcy")

AMBIGUITY_TOL = 1e-6


@dataclass
class DarcyComparison:
    sigma_interval: Tuple[float, float]
    d_darcy: float
    d_fast_rel: float
    darcy_max_re: float
    sign_agree: bool
    sign_mismatches: List[float]
    issues: List[Dict[str, str]] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "sigma_interval": list(self.sigma_interval),
            "d_darcy": self.d_darcy,
            "d_fast_rel": self.d_fast_rel,
            "darcy_max_re": self.darcy_max_re,
            "sign_agree": self.sign_agree,
            "sign_mismatches": self.sign_mismatches,
            "issues": self.issues,
        }


def _compare_at(full: SymbolTriple, darcy: SymbolTriple, params: ModelParams, f_spec: np.ndarray, sigma: float) -> Dict[str, Any]:
    eps = params.epsilon
    lam_full = eigenvalues(assemble(full, sigma), vectors=False).eigenvalues
    lam_darcy = eigenvalues(assemble(darcy, sigma), vectors=False).eigenvalues
    fast = 1j * sigma / eps * f_spec
    candidates = np.concatenate([lam_darcy, fast])
    cost = np.abs(lam_full[:, np.newaxis] - candidates[np.newaxis, :])
    rows, cols = linear_sum_assignment(cost)
    matched = np.empty_like(lam_full)
    matched[cols] = lam_full[rows]
    dist = np.abs(matched - candidates)
    cand_gap = np.abs(candidates[:, np.newaxis] - candidates[np.newaxis, :])
    np.fill_diagonal(cand_gap, np.inf)
    return {
        "sigma": sigma,
        "d_darcy": float(np.max(dist[:2])),
        "d_fast": float(np.max(dist[2:])) if dist.size > 2 else 0.0,
        "darcy_re": lam_darcy.real,
        "matched_re": matched[:2].real,
        "ambiguous": bool(np.min(cand_gap) < AMBIGUITY_TOL),
    }


def darcy_necessity(
    full: SymbolTriple,
    darcy: SymbolTriple,
    dq: DerivedQuantities,
    params: ModelParams,
    sigma_interval: Optional[Tuple[float, float]] = None,
    points: Optional[int] = None,
) -> DarcyComparison:
    """Максимальные расстояния сопоставления и согласие знаков Re у пары Дарси."""
    if abs(np.linalg.det(params.f)) == 0.0:
        raise SingularFluxError("Darcy comparison needs det f != 0")
    C = config.REGION_C
    lo, hi = sigma_interval or (1.0 / C, C)
    grid = np.geomspace(lo, hi, points or config.DARCY_POINTS)
    f_spec = np.linalg.eigvals(params.f)
    rows = grid_map(lambda s: _compare_at(full, darcy, params, f_spec, float(s)), list(grid))

    d_darcy = max(r["d_darcy"] for r in rows)
    d_fast_rel = max(r["d_fast"] for r in rows) * params.epsilon
    darcy_max_re = float(max(np.max(r["darcy_re"]) for r in rows))
    mismatches: List[float] = []
    issues: List[Dict[str, str]] = []
    for r in rows:
        # знак считается значимым, только если |Re λ_D| больше расстояния сопоставления
        for re_d, re_full in zip(r["darcy_re"], r["matched_re"]):
            if abs(re_d) > r["d_darcy"] and np.sign(re_d) != np.sign(re_full):
                mismatches.append(r["sigma"])
                break
        if r["ambiguous"]:
            issues.append({"rule": "darcy-ambiguous", "severity": "minor",
                           "detail": f"candidates within {AMBIGUITY_TOL:g} at sigma_hat={r['sigma']:.6g}"})
    if mismatches:
        LOG.warning("Дарси: знаки Re не совпадают в %d точках", len(mismatches))
    return DarcyComparison(
        sigma_interval=(float(lo), float(hi)),
        d_darcy=float(d_darcy),
        d_fast_rel=float(d_fast_rel),
        darcy_max_re=darcy_max_re,
        sign_agree=not mismatches,
        sign_mismatches=mismatches,
        issues=issues,
    )


__all__ = ["DarcyComparison", "darcy_necessity"]
