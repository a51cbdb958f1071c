"""
Плотный комплексный собственный решатель для маленьких матриц (n ≤ 16).

Путь по умолчанию: балансировка и форма Хессенберга (scipy.linalg), затем
QR-итерация со сдвигом Уилкинсона, вращениями Гивенса и дефляцией. Матрицы
символа бывают дефектными (жорданов блок при σ̂=0), поэтому QR, а не корни
многочлена. Собственные векторы — правый сингулярный вектор M − λI.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

import config
from src.errors import EigenConvergenceError, EigenInputError

LOG = logging.getLogger("mcgl.eig")

EXCEPTIONAL_SHIFT_EVERY = 10


@dataclass(frozen=True, eq=False)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    backward_error: float


def _givens(x: complex, y: complex) -> Tuple[complex, complex]:
    """(c, s) такие, что [[c̄, s̄], [−s, c]]·[x; y] = [r; 0]."""
    r = np.hypot(abs(x), abs(y))
    if r == 0.0:
        return 1.0 + 0j, 0j
    return x / r, y / r


def _wilkinson_shift(block: np.ndarray) -> complex:
    """Собственное значение правого нижнего 2×2, ближайшее к последнему диагональному."""
    a, b = block[-2, -2], block[-2, -1]
    c, d = block[-1, -2], block[-1, -1]
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    l1, l2 = half_tr + disc, half_tr - disc
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


def _eig_2x2(block: np.ndarray) -> Tuple[complex, complex]:
    a, b = block[0, 0], block[0, 1]
    c, d = block[1, 0], block[1, 1]
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    l1 = half_tr + disc if abs(half_tr + disc) >= abs(half_tr - disc) else half_tr - disc
    # второй корень через определитель: без потери точности при |l1| ≫ |l2|
    det = a * d - b * c
    l2 = det / l1 if l1 != 0 else 2.0 * half_tr - l1
    return complex(l1), complex(l2)


def _qr_sweep(block: np.ndarray, shift: complex) -> None:
    """Один шаг RQ + μI на активном блоке (in place)."""
    n = block.shape[0]
    idx = np.arange(n)
    block[idx, idx] -= shift
    rotations = []
    for k in range(n - 1):
        c, s = _givens(block[k, k], block[k + 1, k])
        top = block[k, k:].copy()
        bottom = block[k + 1, k:].copy()
        block[k, k:] = np.conj(c) * top + np.conj(s) * bottom
        block[k + 1, k:] = -s * top + c * bottom
        rotations.append((c, s))
    for k, (c, s) in enumerate(rotations):
        rows = slice(0, k + 2)
        left = block[rows, k].copy()
        right = block[rows, k + 1].copy()
        block[rows, k] = left * c + right * s
        block[rows, k + 1] = -left * np.conj(s) + right * np.conj(c)
    block[idx, idx] += shift


def hessenberg_qr(matrix: np.ndarray) -> np.ndarray:
    """Собственные значения QR-итерацией; порядок — по позиции на диагонали формы Шура."""
    A = np.asarray(matrix, dtype=complex)
    n = A.shape[0]
    if n == 1:
        return A.reshape(1).copy()
    balanced, _ = scipy.linalg.matrix_balance(A, permute=True)
    H = np.asarray(scipy.linalg.hessenberg(balanced), dtype=complex)
    norm = float(np.linalg.norm(H))
    tol = config.QR_DEFLATION_TOL
    max_iter = config.QR_MAX_ITER_FACTOR * n

    found: List[Optional[complex]] = [None] * n
    hi = n - 1
    total = 0
    stalled = 0
    while hi >= 0:
        if hi == 0:
            found[0] = complex(H[0, 0])
            break
        lo = hi
        while lo > 0:
            scale = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if scale == 0.0:
                scale = norm
            if abs(H[lo, lo - 1]) <= tol * scale:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            found[hi] = complex(H[hi, hi])
            hi -= 1
            stalled = 0
            continue
        if hi - lo == 1:
            found[hi - 1], found[hi] = _eig_2x2(H[lo:hi + 1, lo:hi + 1])
            hi -= 2
            stalled = 0
            continue

        total += 1
        stalled += 1
        if total > max_iter:
            partial = [z for z in found if z is not None]
            raise EigenConvergenceError(
                f"QR did not converge after {max_iter} iterations (n={n})", partial=partial
            )
        block = H[lo:hi + 1, lo:hi + 1]
        if stalled % EXCEPTIONAL_SHIFT_EVERY == 0:
            shift = block[-1, -1] + 0.75 * abs(block[-1, -2]) * (1.0 + 1.0j)
            LOG.debug("QR: исключительный сдвиг на итерации %d", total)
        else:
            shift = _wilkinson_shift(block)
        _qr_sweep(block, shift)
    return np.array(found, dtype=complex)


def null_vector(matrix: np.ndarray, lam: complex) -> np.ndarray:
    """Единичный вектор v с минимальным ‖(M − λI)v‖."""
    n = matrix.shape[0]
    _, _, vh = np.linalg.svd(matrix - lam * np.eye(n))
    return vh[-1].conj()


def eigenvalues(matrix: np.ndarray, vectors: bool = True) -> EigenResult:
    """
    Все собственные значения n×n матрицы с обратной ошибкой max ‖Mv−λv‖/‖M‖.
    Бэкенд задаётся MCGL_EIG_BACKEND (qr | lapack).
    """
    M = np.asarray(matrix, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise EigenInputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise EigenInputError("matrix has non-finite entries")

    if config.EIG_BACKEND == "lapack":
        lams = np.linalg.eigvals(M)
    else:
        lams = hessenberg_qr(M)

    norm = float(np.linalg.norm(M))
    vecs = np.column_stack([null_vector(M, lam) for lam in lams])
    if norm == 0.0:
        backward = 0.0
    else:
        residuals = np.linalg.norm(M @ vecs - vecs * lams[np.newaxis, :], axis=0)
        backward = float(np.max(residuals)) / norm
    return EigenResult(eigenvalues=lams, eigenvectors=vecs if vectors else None, backward_error=backward)


def match_multisets(first: Sequence[complex], second: Sequence[complex]) -> Tuple[float, np.ndarray]:
    """Оптимальное сопоставление двух мультимножеств: (max расстояние, перестановка second)."""
    a = np.asarray(first, dtype=complex)
    b = np.asarray(second, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"multisets differ in size: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0, np.zeros(0, dtype=int)
    cost = np.abs(a[:, np.newaxis] - b[np.newaxis, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty_like(cols)
    perm[rows] = cols
    return float(np.max(cost[rows, cols])), perm


__all__ = ["EigenResult", "eigenvalues", "hessenberg_qr", "null_vector", "match_multisets"]
