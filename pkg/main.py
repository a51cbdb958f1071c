#!/usr/bin/env python3
"""
Точка входа: анализ спектральной устойчивости экспоненциально-периодических
волн модифицированного уравнения Гинзбурга–Ландау (mcGL).

Подкоманды: analyze, spectrum, sweep-kappa, darcy-compare, regions,
turing-example, figures. Артефакты и manifest.json пишутся в --out
(по умолчанию MCGL_OUTPUT_DIR).

Exit code: 0 — устойчиво (или команда без вердикта); 1 — неустойчиво;
2 — неопределённо (условия генеричности нарушены); 3 — ошибка анализа;
4 — ошибка аргументов/ввода.
"""
import argparse
import logging
import sys

# Чтобы импорт config и src работал из корня проекта
sys.path.insert(0, ".")

import config
from src.commands import COMMANDS, RunConfig, run_command
from src.errors import McglError, UsageError
from src.grid_pool import shutdown_pool
from src.report import read_manifest

LOG = logging.getLogger("mcgl.main")

EXIT_CODES = {None: 0, "stable": 0, "unstable": 1, "inconclusive": 2}
EXIT_ANALYSIS_ERROR = 3
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    """argparse выходит с кодом 2, а 2 у нас «inconclusive»: ошибки разбора → UsageError."""

    def error(self, message):
        raise UsageError(message)


def _setup_logging() -> None:
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("[mcgl] %(levelname)s %(message)s"))
    root = logging.getLogger("mcgl")
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, config.LOG_LEVEL, logging.INFO))
    root.propagate = False


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Спектральная устойчивость волн mcGL")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Подкоманда")
    parser.add_argument("--manifest", metavar="PATH", help="Повторить запуск по manifest.json")
    parser.add_argument("--model", metavar="PATH", help="JSON модели (a, b, c, d, eB, f, g, h, epsilon, m)")
    parser.add_argument("--kappa", type=float, default=0.0, help="Волновое число κ")
    parser.add_argument("--b0", type=_floats, default=None, metavar="VEC", help="Сдвиг B₀ (через запятую)")
    parser.add_argument("--out", default=None, metavar="DIR", help="Каталог артефактов (иначе MCGL_OUTPUT_DIR)")
    parser.add_argument("--C", type=float, default=None, help="Константа областей частот (иначе MCGL_REGION_C)")
    parser.add_argument("--points", type=int, default=None, help="Точек на декаду в каждой области")
    parser.add_argument("--dump-symbol", action="store_true", help="Записать тройку (C0, C1, C2) в symbol.json")
    parser.add_argument("--sigma-min", type=float, default=None)
    parser.add_argument("--sigma-max", type=float, default=None)
    parser.add_argument("--sigma-points", type=int, default=None)
    parser.add_argument("--scale", choices=("hat", "check", "rho", "pde"), default="hat",
                        help="Масштаб частоты для spectrum")
    parser.add_argument("--kappa-start", type=float, default=None)
    parser.add_argument("--kappa-stop", type=float, default=None)
    parser.add_argument("--kappa-step", type=float, default=None)
    parser.add_argument("--params", default=None, metavar="PATH", help="JSON параметров васкулогенеза")
    parser.add_argument("--ab-range", type=_floats, default=None, metavar="LO,HI", help="Диапазон αβ")
    parser.add_argument("--threads", type=int, default=None, help="Потоков для сетки (иначе MCGL_THREADS)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Флаги CLI поверх значений config.py; --manifest поднимает сохранённую конфигурацию."""
    if args.manifest:
        try:
            doc = read_manifest(args.manifest)
        except (OSError, ValueError) as e:
            raise UsageError(f"--manifest: {e}") from e
        cfg = RunConfig.from_dict(doc["config"])
        if args.out:
            cfg.out = args.out
        return cfg
    if not args.command:
        raise UsageError("command is required (or --manifest)")
    cfg = RunConfig(
        command=args.command,
        model_file=args.model,
        kappa=args.kappa,
        b0=list(args.b0 or []),
        dump_symbol=args.dump_symbol or config.DUMP_SYMBOL,
        sigma_min=args.sigma_min,
        sigma_max=args.sigma_max,
        scale=args.scale,
        kappa_start=args.kappa_start,
        kappa_stop=args.kappa_stop,
        kappa_step=args.kappa_step,
        params_file=args.params,
        ab_range=args.ab_range,
    )
    if args.out:
        cfg.out = args.out
    if args.C is not None:
        cfg.C = args.C
    if args.points is not None:
        cfg.points = args.points
    if args.sigma_points is not None:
        cfg.sigma_points = args.sigma_points
    if args.threads is not None:
        cfg.threads = args.threads
    return cfg


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from_args(args)
        result = run_command(cfg)
    except UsageError as e:
        print(f"[main] Ошибка аргументов: {e}", file=sys.stderr)
        return EXIT_USAGE
    except McglError as e:
        LOG.error("%s: %s", type(e).__name__, e)
        return EXIT_ANALYSIS_ERROR
    except ValueError as e:
        print(f"[main] Неверные входные данные: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        LOG.exception("Непредвиденная ошибка")
        return EXIT_ANALYSIS_ERROR
    finally:
        shutdown_pool()

    for line in result.summary:
        print(line)
    print(f"[main] Файлы: {', '.join(result.files)} → {cfg.out}")
    return EXIT_CODES.get(result.verdict, EXIT_ANALYSIS_ERROR)


if __name__ == "__main__":
    sys.exit(main())
