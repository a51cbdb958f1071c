"""
Трекинг ветвей собственных значений по сетке частот.

Ветви сопоставляются между соседними точками оптимальным назначением по
|Δλ| (без собственных векторов: у жорданова блока при σ̂=0 они вырождаются).
Где стоимость шага превышает MCGL_REFINE_COST_RATIO × локальную медиану,
шаг делится пополам (до MCGL_REFINE_MAX_LEVELS уровней). Сетка, проходящая
через 0, трекается от нуля наружу в обе стороны; отрицательная половина
перенумеровывается по сопряжению: λ(−σ̂) = conj λ(σ̂).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

import config
from src.eig import eigenvalues
from src.errors import EigenConvergenceError, EigenInputError
from src.grid_pool import grid_map
from src.report import write_csv
from src.symbol import FrequencyCoordinate, SymbolTriple, assemble

LOG = logging.getLogger("mcgl.branches")

LOCAL_MEDIAN_HALF_WIDTH = 4


@dataclass(frozen=True, eq=False)
class SpectrumCurve:
    """sigma_grid — σ̂ по возрастанию (с точками уточнения); branches[j, k] — ветвь j в точке k."""

    sigma_grid: np.ndarray
    branches: np.ndarray
    matching_cost: float
    crossings: List[float] = field(default_factory=list)

    @property
    def n_branches(self) -> int:
        return int(self.branches.shape[0])

    def to_rows(self) -> Tuple[List[str], List[List[float]]]:
        columns = ["sigma"]
        for j in range(self.n_branches):
            columns += [f"re_lambda_{j + 1}", f"im_lambda_{j + 1}"]
        rows = []
        for k, s in enumerate(self.sigma_grid):
            row = [float(s)]
            for j in range(self.n_branches):
                z = self.branches[j, k]
                row += [float(z.real), float(z.imag)]
            rows.append(row)
        return columns, rows


def spectrum_at(symbol: SymbolTriple, sigma_hat: float) -> np.ndarray:
    """Собственные значения M(ε, σ̂); ошибки решателя дополняются значением σ̂."""
    try:
        return eigenvalues(assemble(symbol, sigma_hat), vectors=False).eigenvalues
    except EigenConvergenceError as e:
        raise EigenConvergenceError(f"{e} at sigma_hat={sigma_hat:.17g}", partial=e.partial) from e
    except EigenInputError as e:
        raise EigenInputError(f"{e} at sigma_hat={sigma_hat:.17g}") from e


def _assign(prev: np.ndarray, new: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """(суммарная стоимость, new в нумерации prev, максимальный сдвиг ветви)."""
    cost = np.abs(prev[:, np.newaxis] - new[np.newaxis, :])
    rows, cols = linear_sum_assignment(cost)
    labeled = np.empty_like(new)
    labeled[rows] = new[cols]
    chosen = cost[rows, cols]
    return float(np.sum(chosen)), labeled, float(np.max(chosen))


def _step_cost(prev: np.ndarray, new: np.ndarray) -> float:
    return _assign(prev, new)[0]


def _refine(
    symbol: SymbolTriple,
    sa: float,
    va: np.ndarray,
    sb: float,
    vb: np.ndarray,
    threshold: float,
    level: int,
    crossings: List[float],
) -> List[Tuple[float, np.ndarray]]:
    """Промежуточные точки между sa и sb (без концов), в направлении sa → sb."""
    mid = 0.5 * (sa + sb)
    vm = spectrum_at(symbol, mid)
    out: List[Tuple[float, np.ndarray]] = []
    for s0, v0, s1, v1, is_left in ((sa, va, mid, vm, True), (mid, vm, sb, vb, False)):
        cost = _step_cost(v0, v1)
        sub: List[Tuple[float, np.ndarray]] = []
        if cost > threshold:
            if level < config.REFINE_MAX_LEVELS:
                sub = _refine(symbol, s0, v0, s1, v1, threshold, level + 1, crossings)
            else:
                crossings.append(0.5 * (s0 + s1))
        out.extend(sub)
        if is_left:
            out.append((mid, vm))
    return out


def _track_half(symbol: SymbolTriple, points: Sequence[float]) -> Tuple[List[float], List[np.ndarray], float, List[float]]:
    """Трекинг по точкам в заданном порядке (от нуля наружу)."""
    values = grid_map(lambda s: spectrum_at(symbol, s), points)
    if len(points) == 1:
        return [points[0]], [values[0]], 0.0, []
    costs = np.array([_step_cost(values[k], values[k + 1]) for k in range(len(points) - 1)])
    scale = max(1.0, float(max(np.max(np.abs(v)) for v in values)))

    out_sigma: List[float] = [points[0]]
    out_values: List[np.ndarray] = [values[0]]
    total = 0.0
    crossings: List[float] = []
    for k in range(len(points) - 1):
        lo = max(0, k - LOCAL_MEDIAN_HALF_WIDTH)
        median = float(np.median(costs[lo:k + LOCAL_MEDIAN_HALF_WIDTH + 1]))
        threshold = max(config.REFINE_COST_RATIO * median, 1e-12 * scale)
        chain: List[Tuple[float, np.ndarray]] = []
        if costs[k] > threshold:
            LOG.debug("Уточнение шага σ̂=%.6g→%.6g: стоимость %.3g > %.3g", points[k], points[k + 1], costs[k], threshold)
            chain = _refine(symbol, points[k], values[k], points[k + 1], values[k + 1], threshold, 1, crossings)
        chain.append((points[k + 1], values[k + 1]))
        for s, v in chain:
            cost, labeled, _ = _assign(out_values[-1], v)
            total += cost
            out_sigma.append(s)
            out_values.append(labeled)
    return out_sigma, out_values, total, crossings


def track_branches(symbol: SymbolTriple, sigma_grid: Sequence[float], scale: str = "hat") -> SpectrumCurve:
    """
    Ветви спектра M(ε, σ̂) по возрастающей сетке (длина ≥ 2).
    Сетка в масштабе scale переводится в σ̂.
    """
    grid = np.asarray(
        [FrequencyCoordinate(float(s), scale).to_hat(symbol.epsilon) for s in sigma_grid], dtype=float
    )
    if grid.size < 2:
        raise ValueError("track_branches: grid needs at least 2 points")
    if not np.all(np.diff(grid) > 0):
        raise ValueError("track_branches: grid must be strictly increasing")

    pos = [float(s) for s in grid if s >= 0]
    neg = [float(s) for s in grid[::-1] if s < 0]

    sig_pos, val_pos, cost_pos, cross_pos = _track_half(symbol, pos) if pos else ([], [], 0.0, [])
    sig_neg, val_neg, cost_neg, cross_neg = _track_half(symbol, neg) if neg else ([], [], 0.0, [])

    if sig_pos and sig_neg:
        # ближайшая к нулю ненулевая точка справа задаёт нумерацию
        anchor = next((k for k, s in enumerate(sig_pos) if s > 0), 0)
        cost = np.abs(val_pos[anchor][:, np.newaxis] - np.conj(val_neg[0])[np.newaxis, :])
        rows, cols = linear_sum_assignment(cost)
        perm = np.empty_like(cols)
        perm[rows] = cols
        val_neg = [v[perm] for v in val_neg]

    sigma = np.array(sig_neg[::-1] + sig_pos, dtype=float)
    values = val_neg[::-1] + val_pos
    branches = np.column_stack(values) if values else np.zeros((symbol.size, 0), dtype=complex)
    crossings = sorted(cross_neg + cross_pos)
    if crossings:
        LOG.info("Ветви: %d неразрешённых пересечений (первое σ̂=%.6g)", len(crossings), crossings[0])
    return SpectrumCurve(
        sigma_grid=sigma,
        branches=branches,
        matching_cost=cost_pos + cost_neg,
        crossings=crossings,
    )


def curve_to_csv(curve: SpectrumCurve, path: Path) -> Path:
    """CSV ветвей: sigma, re_lambda_j, im_lambda_j."""
    columns, rows = curve.to_rows()
    return write_csv(path, columns, rows)


def select_branch(curve: SpectrumCurve, kind: str, index: int = 0, alpha_t: Optional[float] = None) -> int:
    """
    Номер ветви по поведению у σ̂→0: 's' — устойчивая (λ≈m₀<0), 't' — трансляционная,
    'c' — консервативные по возрастанию наклона Im λ/σ̂.

    Трансляционная — нейтральная ветвь с наклоном Im λ/σ̂, ближайшим к alpha_t;
    без alpha_t — с наименьшим |Im λ/σ̂|.
    """
    nonzero = np.flatnonzero(curve.sigma_grid != 0)
    if nonzero.size == 0:
        raise ValueError("select_branch: curve has no nonzero sigma")
    k = nonzero[np.argmin(np.abs(curve.sigma_grid[nonzero]))]
    s = curve.sigma_grid[k]
    vals = curve.branches[:, k]
    stable = int(np.argmin(vals.real))
    if kind == "s":
        return stable
    neutral = [j for j in range(curve.n_branches) if j != stable]
    slopes = {j: float(vals[j].imag / s) for j in neutral}
    target = 0.0 if alpha_t is None else float(alpha_t)
    t = min(neutral, key=lambda j: abs(slopes[j] - target))
    if kind == "t":
        return t
    if kind == "c":
        cons = sorted((j for j in neutral if j != t), key=lambda j: slopes[j])
        if not 0 <= index < len(cons):
            raise ValueError(f"select_branch: no conservative branch #{index}")
        return cons[index]
    raise ValueError(f"select_branch: unknown branch kind {kind!r}")


__all__ = ["SpectrumCurve", "spectrum_at", "track_branches", "curve_to_csv", "select_branch"]
