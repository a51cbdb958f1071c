"""
Исключения анализатора.

Жёсткие ошибки — исключения ниже. Мягкие находки (нарушенные гипотезы в
отчёте валидации, примечания о знаке, слитые области) возвращаются словарями
{"rule", "severity", "detail"} и в исключения не превращаются.
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional


class McglError(Exception):
    """Базовая ошибка анализа (CLI: код выхода 3)."""


class UsageError(McglError):
    """Неверные аргументы или пустой диапазон (CLI: код выхода 4)."""


class ModelDimensionError(McglError):
    """Размерности d, e_B, f, g, h не согласованы с m."""


class ModelFileError(McglError):
    """Ошибка чтения/разбора JSON модели; сообщение содержит путь:строка:столбец."""


class HypothesisError(McglError):
    """Нарушена структурная гипотеза модели (Re a>0, Re b>0, Re c<0, ...)."""

    def __init__(self, violations: List[Dict[str, Any]]):
        self.violations = list(violations)
        details = "; ".join(v.get("detail", "") for v in self.violations)
        super().__init__(f"model hypotheses violated: {details}")


class ExistenceError(McglError):
    """κ² ≥ κ_E²: экспоненциально-периодической волны нет."""

    def __init__(self, kappa_sq: float, kappa_e_sq: float):
        self.kappa_sq = kappa_sq
        self.kappa_e_sq = kappa_e_sq
        super().__init__(f"no wave: kappa^2={kappa_sq:.6g} >= kappa_E^2={kappa_e_sq:.6g}")


class SingularFluxError(McglError):
    """det f = 0: редукция Дарси и эффективный поток не определены."""


class FirstOrderInstabilityError(McglError):
    """Спектр эффективного потока не вещественный (неустойчивость первого порядка)."""

    def __init__(self, spectrum: Any):
        self.spectrum = spectrum
        super().__init__(f"effective flux has non-real spectrum: {spectrum}")


class DegenerateFluxError(McglError):
    """Кратный спектр потока или неоднозначная классификация корней."""


class GenericityError(McglError):
    """Вырожденный случай (Re ĉ = 0 и т.п.), в котором формулы неприменимы."""


class EigenInputError(McglError):
    """Матрица содержит NaN/Inf или не квадратная."""


class EigenConvergenceError(McglError):
    """QR не сошёлся за отведённое число итераций; partial — найденные собственные значения."""

    def __init__(self, message: str, partial: Optional[List[complex]] = None):
        self.partial = list(partial or [])
        super().__init__(message)


class FitWindowError(McglError):
    """Окно подгонки пересекает пересечение ветвей или ветвь не проходит через 0."""


__all__ = [
    "McglError",
    "UsageError",
    "ModelDimensionError",
    "ModelFileError",
    "HypothesisError",
    "ExistenceError",
    "SingularFluxError",
    "FirstOrderInstabilityError",
    "DegenerateFluxError",
    "GenericityError",
    "EigenInputError",
    "EigenConvergenceError",
    "FitWindowError",
]
