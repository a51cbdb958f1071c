"""
Характеристический многочлен и его корни без LAPACK.

faddeev_leverrier — коэффициенты det(λI − A) по следам; aberth_roots —
одновременный поиск всех корней (Аберт–Эрлих). Используются как независимый
оракул для QR и для корней определителя сшивки в asymptotics.
"""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

LOG = logging.getLogger("mcgl.charpoly")


def faddeev_leverrier(matrix: np.ndarray) -> np.ndarray:
    """Коэффициенты det(λI − A) по убыванию степеней: [1, c_{n−1}, ..., c_0]."""
    A = np.asarray(matrix, dtype=complex)
    n = A.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    Mk = np.zeros_like(A)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(A @ Mk) / k
    return coeffs


def _horner(coeffs: np.ndarray, x: complex) -> complex:
    res = coeffs[0]
    for ck in coeffs[1:]:
        res = res * x + ck
    return res


def aberth_roots(coeffs: Sequence[complex], tol: float = 1e-13, max_iter: int = 500) -> np.ndarray:
    """
    Все корни многочлена (коэффициенты по убыванию степеней).
    Старт — окружность радиуса границы Коши; нулевые корни отделяются точно.
    """
    c = np.asarray(coeffs, dtype=complex)
    nonzero = np.flatnonzero(c)
    if nonzero.size == 0:
        raise ValueError("aberth_roots: zero polynomial")
    c = c[nonzero[0]:]
    trailing = 0
    while c.shape[0] > 1 and c[-1] == 0:
        c = c[:-1]
        trailing += 1
    n = c.shape[0] - 1
    zeros = np.zeros(trailing, dtype=complex)
    if n == 0:
        return zeros
    c = c / c[0]
    deriv = c[:-1] * np.arange(n, 0, -1)

    R = 1.0 + float(np.max(np.abs(c[1:])))
    # сдвиг фазы, чтобы старт не был симметричен относительно вещественной оси
    x = np.array([R * np.exp(1j * (2.0 * math.pi * i / n + 0.4)) for i in range(n)], dtype=complex)

    for it in range(max_iter):
        converged = True
        for i in range(n):
            xi = x[i]
            pv = _horner(c, xi)
            if pv == 0:
                continue
            dpv = _horner(deriv, xi)
            diff = xi - np.delete(x, i)
            sum_term = complex(np.sum(1.0 / diff)) if np.all(diff != 0) else 0j
            ratio = pv / dpv if dpv != 0 else pv
            denom = 1.0 - ratio * sum_term
            delta = ratio / denom if denom != 0 else ratio
            if abs(delta) > tol * max(1.0, abs(xi)):
                converged = False
            x[i] = xi - delta
        if converged:
            LOG.debug("Aberth: %d корней за %d итераций", n, it + 1)
            break
    else:
        # кратные корни сходятся только до ~sqrt(eps): возвращаем достигнутое
        LOG.debug("Aberth: остановка по лимиту %d итераций (степень %d)", max_iter, n)
    return np.concatenate([x, zeros])


def charpoly_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Собственные значения как корни многочлена Фаддеева–Леверье."""
    return aberth_roots(faddeev_leverrier(matrix))


__all__ = ["faddeev_leverrier", "aberth_roots", "charpoly_eigenvalues"]
