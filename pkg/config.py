"""Конфигурация анализатора устойчивости mcGL."""
import os
from dotenv import load_dotenv

load_dotenv()


def _flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes")


# --- Выход и логирование ---
OUTPUT_DIR = os.getenv("MCGL_OUTPUT_DIR", "./mcgl_out")
LOG_LEVEL = os.getenv("MCGL_LOG_LEVEL", "INFO").strip().upper()
# Дамп тройки символа (C0, C1, C2) в symbol.json рядом с отчётом
DUMP_SYMBOL = _flag("MCGL_DUMP_SYMBOL")

# --- Параллелизм: сколько потоков считают спектр по сетке (1 = последовательно) ---
THREADS = max(1, int(os.getenv("MCGL_THREADS", "4")))

# --- Собственные значения ---
# qr — собственная реализация (Hessenberg + сдвинутый QR), lapack — numpy.linalg.eigvals
EIG_BACKEND = os.getenv("MCGL_EIG_BACKEND", "qr").strip().lower()
QR_DEFLATION_TOL = float(os.getenv("MCGL_QR_DEFLATION_TOL", "1e-14"))
QR_MAX_ITER_FACTOR = int(os.getenv("MCGL_QR_MAX_ITER_FACTOR", "100"))

# --- Трекинг ветвей ---
REFINE_MAX_LEVELS = int(os.getenv("MCGL_REFINE_MAX_LEVELS", "8"))
REFINE_COST_RATIO = float(os.getenv("MCGL_REFINE_COST_RATIO", "10"))

# --- Подгонка коэффициентов по спектру ---
T_FIT_WINDOW = float(os.getenv("MCGL_T_FIT_WINDOW", "1e-3"))
# окно для λ_c задаётся в долях ε
C_FIT_WINDOW_REL = float(os.getenv("MCGL_C_FIT_WINDOW_REL", "1e-2"))
FIT_POINTS = int(os.getenv("MCGL_FIT_POINTS", "24"))

# --- Критерии ---
GENERICITY_ATOL = float(os.getenv("MCGL_GENERICITY_ATOL", "1e-12"))

# --- Проверка по областям частот (DSS) ---
REGION_C = float(os.getenv("MCGL_REGION_C", "10"))
POINTS_PER_DECADE = int(os.getenv("MCGL_POINTS_PER_DECADE", "64"))
PILOT_POINTS_PER_DECADE = int(os.getenv("MCGL_PILOT_POINTS_PER_DECADE", "8"))
SIGMA_FLOOR_DECADES = float(os.getenv("MCGL_SIGMA_FLOOR_DECADES", "2"))
SIGMA_TAIL_DECADES = float(os.getenv("MCGL_SIGMA_TAIL_DECADES", "2"))
DSS_SAFETY = float(os.getenv("MCGL_DSS_SAFETY", "0.5"))
SCAN_POINTS = int(os.getenv("MCGL_SCAN_POINTS", "401"))
DARCY_POINTS = int(os.getenv("MCGL_DARCY_POINTS", "101"))

# --- Развёртка по κ ---
KAPPA_BISECT_TOL = float(os.getenv("MCGL_KAPPA_BISECT_TOL", "1e-3"))
