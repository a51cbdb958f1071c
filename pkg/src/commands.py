"""
Команды CLI. Каждая команда получает RunConfig, пишет артефакты в cfg.out
(manifest.json — всегда) и возвращает CommandResult с вердиктом для кода выхода.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from src.asymptotics import (
    ExpansionCoefficients,
    bfn_check,
    coeffs_closed_form,
    coeffs_matched_determinant,
    darcy_translational,
    eckhaus_bound,
    fit_coefficients,
    frequency_adapted_bound,
)
from src.branches import curve_to_csv, track_branches
from src.criteria import evaluate_criteria
from src.darcy import darcy_necessity
from src.dss import DssConfig, default_check_grid, imaginary_root_scan, region_ii_affine_check, verify_dss
from src.errors import McglError, UsageError
from src.model import (
    DerivedQuantities,
    ModelParams,
    WaveParams,
    compat_check,
    derive_wave,
    existence_bound,
    load_model,
    model_to_dict,
)
from src.report import StabilityReport, write_csv, write_json, write_manifest
from src.symbol import SymbolTriple, build_darcy_symbol, build_full_symbol, symbol_to_dict
from src.turing_example import (
    VasculogenesisParams,
    bifurcation_locate,
    branches_over_k,
    critical_branch_coefficient,
    default_k_grid,
    growth_profile,
    load_vasculo_params,
)

LOG = logging.getLogger("mcgl.commands")

COMMANDS = ("analyze", "spectrum", "sweep-kappa", "darcy-compare", "regions", "turing-example", "figures")
ROUTE_SPREAD_REL = 20.0
TURING_DEFAULTS = {"alpha_r": 1.0, "beta_r": 1.0, "tau": 1.0, "A_p": 2.0, "gamma_d": 1.0, "D_c": 1.0}


@dataclass
class RunConfig:
    """Разрешённая конфигурация запуска; целиком пишется в manifest.json."""

    command: str
    model_file: Optional[str] = None
    kappa: float = 0.0
    b0: List[float] = field(default_factory=list)
    out: str = config.OUTPUT_DIR
    C: float = config.REGION_C
    points: int = config.POINTS_PER_DECADE
    dump_symbol: bool = config.DUMP_SYMBOL
    sigma_min: Optional[float] = None
    sigma_max: Optional[float] = None
    sigma_points: int = config.SCAN_POINTS
    scale: str = "hat"
    kappa_start: Optional[float] = None
    kappa_stop: Optional[float] = None
    kappa_step: Optional[float] = None
    params_file: Optional[str] = None
    ab_range: Optional[List[float]] = None
    threads: int = config.THREADS
    # константы config.py из манифеста; применяются перед запуском
    settings: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")

    def as_dict(self) -> Dict[str, Any]:
        doc = asdict(self)
        doc["settings"] = resolved_settings()
        return doc

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in doc.items() if k in names})

    @property
    def dss_config(self) -> DssConfig:
        return DssConfig(C=float(self.C), points_per_region=int(self.points))


@dataclass
class CommandResult:
    verdict: Optional[str]
    files: List[str] = field(default_factory=list)
    summary: List[str] = field(default_factory=list)


def resolved_settings() -> Dict[str, Any]:
    """Все константы config.py (имена в верхнем регистре)."""
    return {k: getattr(config, k) for k in sorted(dir(config)) if k.isupper()}


def apply_settings(settings: Dict[str, Any]) -> None:
    """Вернуть константы config.py к записанным в манифесте; неизвестные имена пропускаются."""
    known = resolved_settings()
    for name, value in sorted(settings.items()):
        if name not in known:
            LOG.warning("Манифест: неизвестная настройка %s пропущена", name)
            continue
        if known[name] != value:
            LOG.info("Манифест: %s = %r (было %r)", name, value, known[name])
        setattr(config, name, value)


def _require_model(cfg: RunConfig) -> ModelParams:
    if not cfg.model_file:
        raise UsageError(f"{cfg.command}: --model is required")
    return load_model(cfg.model_file)


def _wave(cfg: RunConfig, params: ModelParams, kappa: Optional[float] = None) -> Tuple[DerivedQuantities, SymbolTriple]:
    b0 = cfg.b0 or [0.0] * params.m
    dq = derive_wave(params, WaveParams(kappa=cfg.kappa if kappa is None else kappa, B0=b0))
    return dq, build_full_symbol(dq, params)


def _finish(cfg: RunConfig, files: List[Path], verdict: Optional[str], summary: List[str]) -> CommandResult:
    out = Path(cfg.out)
    names = [p.name for p in files]
    write_manifest(out, cfg.as_dict(), names)
    return CommandResult(verdict=verdict, files=names + ["manifest.json"], summary=summary)


def _maybe_dump_symbol(cfg: RunConfig, symbol: SymbolTriple, files: List[Path]) -> None:
    if cfg.dump_symbol:
        files.append(write_json(Path(cfg.out) / "symbol.json", symbol_to_dict(symbol)))


# --- analyze ---

def _try_route(name: str, fn: Callable[[], Any], issues: List[Dict[str, str]]) -> Any:
    try:
        return fn()
    except McglError as e:
        issues.append({"rule": f"route-{name}", "severity": "major", "detail": str(e)})
        LOG.info("Маршрут %s недоступен: %s", name, e)
        return None


def route_spread(routes: Dict[str, ExpansionCoefficients]) -> Dict[str, float]:
    """Попарный максимум расхождений α_t, μ_t, εα_c, ε²μ_c между маршрутами."""
    spread = {"alpha_t": 0.0, "mu_t": 0.0, "alpha_c0": 0.0, "mu_c0": 0.0}
    items = list(routes.values())
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            x, y = items[i], items[j]
            spread["alpha_t"] = max(spread["alpha_t"], abs(x.alpha_t - y.alpha_t))
            spread["mu_t"] = max(spread["mu_t"], abs(x.mu_t - y.mu_t))
            if len(x.alpha_c) == len(y.alpha_c):
                spread["alpha_c0"] = max(spread["alpha_c0"], float(np.max(np.abs(np.subtract(x.alpha_c, y.alpha_c)))))
                spread["mu_c0"] = max(spread["mu_c0"], float(np.max(np.abs(np.subtract(x.mu_c, y.mu_c)))))
    return spread


def combine_verdicts(criteria_verdict: str, dss_verdict: Optional[str], issues: List[Dict[str, str]]) -> str:
    """
    Итог по критериям; при расхождении со спектральной проверкой побеждает спектр
    (он посчитан при рабочем ε). "inconclusive" остаётся, если теоремы не применимы.
    """
    if dss_verdict is None or criteria_verdict == "inconclusive" or criteria_verdict == dss_verdict:
        return criteria_verdict
    issues.append({"rule": "verdict-mismatch", "severity": "major",
                   "detail": f"criteria say {criteria_verdict}, full spectrum says {dss_verdict}"})
    LOG.warning("Вердикты расходятся: критерии %s, спектр %s", criteria_verdict, dss_verdict)
    return dss_verdict


def analyze_model(cfg: RunConfig, params: ModelParams, kappa: Optional[float] = None) -> StabilityReport:
    """Полный анализ одной волны без записи файлов."""
    dq, symbol = _wave(cfg, params, kappa)
    eps = params.epsilon
    issues: List[Dict[str, str]] = []

    routes: Dict[str, ExpansionCoefficients] = {}
    residuals: Dict[str, float] = {}
    closed = _try_route("closed_form", lambda: coeffs_closed_form(dq, params), issues)
    if closed is not None:
        routes["closed_form"] = closed
    matched = _try_route("matched_determinant", lambda: coeffs_matched_determinant(dq, params), issues)
    if matched is not None:
        routes["matched_determinant"] = matched
    fitted = _try_route("numerical_fit", lambda: fit_coefficients(
        symbol, dq, params, matched.alpha_t if matched is not None else None), issues)
    if fitted is not None:
        routes["numerical_fit"], residuals = fitted

    spread = route_spread(routes)
    limit = ROUTE_SPREAD_REL * eps
    scale = max([1.0] + [abs(c.mu_t) for c in routes.values()])
    if spread["mu_t"] > limit * scale or spread["alpha_t"] > limit * scale:
        issues.append({"rule": "route-disagreement", "severity": "minor",
                       "detail": f"alpha_t spread {spread['alpha_t']:.3g}, mu_t spread {spread['mu_t']:.3g}"})
        LOG.warning("Маршруты расходятся: %s", spread)

    criteria = evaluate_criteria(dq, params, closed or matched)
    dss = verify_dss(symbol, dq, params, cfg.dss_config, closed or matched)
    issues.extend(dss.issues)
    dss_verdict = "stable" if dss.verdict else "unstable"

    darcy_doc = None
    if abs(np.linalg.det(params.f)) > 0:
        darcy = build_darcy_symbol(dq, params)
        comparison = darcy_necessity(symbol, darcy, dq, params)
        issues.extend(comparison.issues)
        darcy_doc = comparison.as_dict()
        darcy_doc["translational"] = dict(zip(("alpha_t", "mu_t"), _try_route(
            "darcy_translational", lambda: darcy_translational(dq, params), issues) or (math.nan, math.nan)))
    else:
        issues.append({"rule": "darcy-skipped", "severity": "minor", "detail": "det f = 0"})

    z_side = np.geomspace(1e-3, 1e3, config.SCAN_POINTS)
    compat = compat_check(params, np.concatenate([-z_side[::-1], z_side]))
    issues.append(compat.sign_note)
    scan = imaginary_root_scan(dq, params, default_check_grid(cfg.C))
    if scan.warning:
        issues.append({"rule": "imaginary-root-margin", "severity": "minor", "detail": scan.warning})
    affine = region_ii_affine_check(symbol, cfg.C)

    eck = eckhaus_bound(dq, params)
    eck_fa = frequency_adapted_bound(dq, params)
    bfn = bfn_check(dq, params)
    verdict = combine_verdicts(criteria.verdict, dss_verdict, issues)
    dss_doc = dss.as_dict()
    regions = dss_doc.pop("regions")

    return StabilityReport(
        verdict=verdict,
        criteria_verdict=criteria.verdict,
        dss_verdict=dss_verdict,
        model=model_to_dict(params),
        derived=dq.as_dict(),
        coefficients={name: c.as_dict() for name, c in routes.items()},
        route_spread=spread,
        fit_residuals=residuals,
        criteria=criteria.as_dict(),
        eckhaus={**asdict(eck), "frequency_adapted_kappa_sq": eck_fa.kappa_sq},
        bfn=asdict(bfn),
        regions=regions,
        dss=dss_doc,
        darcy=darcy_doc,
        compat={"ok": compat.ok, "worst_margin": compat.worst_margin},
        imaginary_scan=asdict(scan),
        affine_check=asdict(affine),
        issues=issues,
    )


def cmd_analyze(cfg: RunConfig) -> CommandResult:
    params = _require_model(cfg)
    report = analyze_model(cfg, params)
    files = [write_json(Path(cfg.out) / "report.json", report.as_dict())]
    if cfg.dump_symbol:
        _, symbol = _wave(cfg, params)
        _maybe_dump_symbol(cfg, symbol, files)
    return _finish(cfg, files, report.verdict, report.summary_lines())


# --- spectrum ---

def cmd_spectrum(cfg: RunConfig) -> CommandResult:
    params = _require_model(cfg)
    dq, symbol = _wave(cfg, params)
    lo = -1.0 if cfg.sigma_min is None else cfg.sigma_min
    hi = 1.0 if cfg.sigma_max is None else cfg.sigma_max
    if not hi > lo:
        raise UsageError(f"empty sigma range [{lo}, {hi}]")
    grid = np.linspace(lo, hi, cfg.sigma_points)
    curve = track_branches(symbol, grid, scale=cfg.scale)
    files = [
        curve_to_csv(curve, Path(cfg.out) / "spectrum.csv"),
        write_json(Path(cfg.out) / "spectrum.json", {
            "scale": cfg.scale,
            "sigma_range": [lo, hi],
            "points": int(curve.sigma_grid.size),
            "matching_cost": curve.matching_cost,
            "crossings": curve.crossings,
            "max_re": float(np.max(curve.branches.real)),
        }),
    ]
    _maybe_dump_symbol(cfg, symbol, files)
    summary = [f"Ветвей: {curve.n_branches}, точек: {curve.sigma_grid.size}, пересечений: {len(curve.crossings)}"]
    return _finish(cfg, files, None, summary)


# --- sweep-kappa ---

def _kappa_values(cfg: RunConfig) -> np.ndarray:
    if cfg.kappa_start is None or cfg.kappa_stop is None or cfg.kappa_step is None:
        raise UsageError("sweep-kappa needs --kappa-start, --kappa-stop and --kappa-step")
    start, stop, step = float(cfg.kappa_start), float(cfg.kappa_stop), float(cfg.kappa_step)
    if not step > 0 or stop < start:
        raise UsageError(f"empty kappa sweep: start={start}, stop={stop}, step={step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _dss_stable(cfg: RunConfig, params: ModelParams, kappa: float) -> Optional[bool]:
    """Вердикт полной спектральной проверки; None, если волны при этом κ нет."""
    b0 = cfg.b0 or [0.0] * params.m
    if not kappa * kappa < existence_bound(params, b0):
        return None
    dq, symbol = _wave(cfg, params, kappa)
    coefficients = None
    try:
        coefficients = coeffs_closed_form(dq, params)
    except McglError:
        pass
    return verify_dss(symbol, dq, params, cfg.dss_config, coefficients).verdict


def stability_boundary(cfg: RunConfig, params: ModelParams, lo: float, hi: float, lo_stable: bool = True) -> float:
    """Бисекция по κ между lo и hi (состояния различаются) до MCGL_KAPPA_BISECT_TOL."""
    while hi - lo > config.KAPPA_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if bool(_dss_stable(cfg, params, mid)) == lo_stable:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmd_sweep_kappa(cfg: RunConfig) -> CommandResult:
    params = _require_model(cfg)
    kappas = _kappa_values(cfg)
    rows: List[List[float]] = []
    states: List[Optional[bool]] = []
    per_kappa: List[Dict[str, Any]] = []
    for kappa in kappas:
        stable = _dss_stable(cfg, params, float(kappa))
        states.append(stable)
        entry: Dict[str, Any] = {"kappa": float(kappa), "exists": stable is not None}
        if stable is not None:
            dq, _ = _wave(cfg, params, float(kappa))
            criteria = evaluate_criteria(dq, params)
            entry.update({"dss": "stable" if stable else "unstable", "criteria": criteria.verdict,
                          "mu_t": -criteria.translational.margin})
            rows.append([float(kappa), 1.0 if stable else 0.0, -criteria.translational.margin])
        per_kappa.append(entry)
        LOG.info("κ=%.4g: %s", kappa, entry.get("dss", "нет волны"))

    boundaries: List[float] = []
    for k in range(len(kappas) - 1):
        pair = (states[k], states[k + 1])
        if pair in ((True, False), (False, True)):
            boundaries.append(stability_boundary(cfg, params, float(kappas[k]), float(kappas[k + 1]), lo_stable=pair[0]))

    b0 = cfg.b0 or [0.0] * params.m
    # κ_S² от κ не зависит
    dq0, _ = _wave(cfg, params, 0.0)
    eck = eckhaus_bound(dq0, params)
    kappa_s = math.sqrt(eck.kappa_sq) if eck.has_band else None
    doc = {
        "kappas": per_kappa,
        "numerical_boundaries": boundaries,
        "kappa_S": kappa_s,
        "kappa_S_sq": eck.kappa_sq,
        "kappa_E": math.sqrt(max(existence_bound(params, b0), 0.0)),
    }
    files = [
        write_csv(Path(cfg.out) / "sweep.csv", ["kappa", "dss_stable", "mu_t"], rows),
        write_json(Path(cfg.out) / "sweep.json", doc),
    ]
    summary = [f"Граница (численно): {', '.join(f'{b:.4f}' for b in boundaries) or '-'}; κ_S = "
               + (f"{kappa_s:.4f}" if kappa_s is not None else "-")]
    return _finish(cfg, files, None, summary)


# --- darcy-compare ---

def cmd_darcy_compare(cfg: RunConfig) -> CommandResult:
    params = _require_model(cfg)
    dq, symbol = _wave(cfg, params)
    darcy = build_darcy_symbol(dq, params)
    lo = 1.0 / cfg.C if cfg.sigma_min is None else cfg.sigma_min
    hi = cfg.C if cfg.sigma_max is None else cfg.sigma_max
    if not (hi > lo > 0):
        raise UsageError(f"darcy-compare needs 0 < sigma-min < sigma-max, got [{lo}, {hi}]")
    comparison = darcy_necessity(symbol, darcy, dq, params, (lo, hi))
    doc = comparison.as_dict()
    doc["epsilon"] = params.epsilon
    doc["translational"] = dict(zip(("alpha_t", "mu_t"), darcy_translational(dq, params)))
    doc["frequency_adapted_kappa_sq"] = frequency_adapted_bound(dq, params).kappa_sq
    files = [write_json(Path(cfg.out) / "darcy.json", doc)]
    summary = [f"Дарси: d={comparison.d_darcy:.3g}, ε·d_fast={comparison.d_fast_rel:.3g}, "
               f"знаки {'совпадают' if comparison.sign_agree else 'расходятся'}"]
    return _finish(cfg, files, None, summary)


# --- regions ---

def cmd_regions(cfg: RunConfig) -> CommandResult:
    params = _require_model(cfg)
    dq, symbol = _wave(cfg, params)
    dss = verify_dss(symbol, dq, params, cfg.dss_config)
    scan = imaginary_root_scan(dq, params, default_check_grid(cfg.C))
    affine = region_ii_affine_check(symbol, cfg.C)
    rows = [[float(i), r.sigma_hat[0], r.sigma_hat[1], float(r.grid_size), r.max_excess, r.max_re, 1.0 if r.passed else 0.0]
            for i, r in enumerate(dss.regions)]
    doc = dss.as_dict()
    doc["imaginary_scan"] = asdict(scan)
    doc["affine_check"] = asdict(affine)
    files = [
        write_json(Path(cfg.out) / "regions.json", doc),
        write_csv(Path(cfg.out) / "regions.csv",
                  ["region_index", "sigma_lo", "sigma_hi", "grid_size", "max_excess", "max_re", "passed"], rows),
    ]
    _maybe_dump_symbol(cfg, symbol, files)
    verdict = "stable" if dss.verdict else "unstable"
    summary = [f"({r.region}) {'ok' if r.passed else 'FAIL'} max Re={r.max_re:.3g}" for r in dss.regions]
    return _finish(cfg, files, verdict, summary)


# --- turing-example ---

def cmd_turing_example(cfg: RunConfig) -> CommandResult:
    p = load_vasculo_params(cfg.params_file) if cfg.params_file else VasculogenesisParams(**TURING_DEFAULTS)
    theta = critical_branch_coefficient(p)
    ab_range = tuple(cfg.ab_range) if cfg.ab_range else (0.0, 10.0)
    if len(ab_range) != 2:
        raise UsageError("--ab-range takes two numbers")
    if ab_range[0] > ab_range[1]:
        raise UsageError(f"--ab-range is reversed: {list(ab_range)}")
    bifurcation = bifurcation_locate(p, (float(ab_range[0]), float(ab_range[1])))
    growth = float(np.max(growth_profile(p, default_k_grid())))
    columns, rows = branches_over_k(p, np.linspace(0.0, 5.0, cfg.sigma_points))
    doc = {
        "params": p.as_dict(),
        "theta": asdict(theta),
        "bifurcation": bifurcation.as_dict(),
        "ab_range": list(ab_range),
        "max_growth_over_k2": growth,
    }
    files = [
        write_json(Path(cfg.out) / "turing.json", doc),
        write_csv(Path(cfg.out) / "turing_branches.csv", columns, rows),
    ]
    verdict = "unstable" if growth > 1e-9 else "stable"
    summary = [f"θ = {theta.theta:.6g} (формула {theta.closed_form:.6g})",
               f"Бифуркация: {bifurcation.ab_star if bifurcation.found else bifurcation.detail}"]
    return _finish(cfg, files, verdict, summary)


# --- figures ---

FIGURE_KAPPAS = (("kappa0", 0.0), ("kappaE_4", 0.25), ("kappaE_2", 0.5))


def figure_rows(symbol: SymbolTriple, grid: Sequence[float], coeffs: ExpansionCoefficients) -> Tuple[List[str], List[List[float]]]:
    """Re всех ветвей и параболы μ_tσ̂², μ_cσ̂² (μ_c = ε⁻²·μ_c⁰)."""
    curve = track_branches(symbol, grid)
    eps = coeffs.epsilon
    mu_c = [mu / (eps * eps) for mu in coeffs.mu_c]
    columns = ["sigma"] + [f"re_lambda_{j + 1}" for j in range(curve.n_branches)] + ["mu_t_parabola"]
    columns += ["mu_c_parabola"] if len(mu_c) == 1 else [f"mu_c{i + 1}_parabola" for i in range(len(mu_c))]
    rows = []
    for k, s in enumerate(curve.sigma_grid):
        row = [float(s)] + [float(z.real) for z in curve.branches[:, k]] + [coeffs.mu_t * s * s]
        row += [mu * s * s for mu in mu_c]
        rows.append(row)
    return columns, rows


def cmd_figures(cfg: RunConfig) -> CommandResult:
    params = _require_model(cfg)
    b0 = cfg.b0 or [0.0] * params.m
    kappa_e = math.sqrt(max(existence_bound(params, b0), 0.0))
    eps = params.epsilon
    files: List[Path] = []
    meta: Dict[str, Any] = {"kappa_E": kappa_e, "panels": []}
    for label, fraction in FIGURE_KAPPAS:
        kappa = fraction * kappa_e
        dq, symbol = _wave(cfg, params, kappa)
        coeffs = coeffs_closed_form(dq, params)
        for size, half in (("small", 10.0 * eps), ("large", 1.0)):
            grid = np.linspace(-half, half, cfg.sigma_points)
            columns, rows = figure_rows(symbol, grid, coeffs)
            name = f"figure_{label}_{size}.csv"
            files.append(write_csv(Path(cfg.out) / name, columns, rows))
            meta["panels"].append({"file": name, "kappa": kappa, "sigma_half_width": half,
                                   "coefficients": coeffs.as_dict()})
    files.append(write_json(Path(cfg.out) / "figures.json", meta))
    return _finish(cfg, files, None, [f"Панелей: {len(meta['panels'])}"])


HANDLERS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "analyze": cmd_analyze,
    "spectrum": cmd_spectrum,
    "sweep-kappa": cmd_sweep_kappa,
    "darcy-compare": cmd_darcy_compare,
    "regions": cmd_regions,
    "turing-example": cmd_turing_example,
    "figures": cmd_figures,
}


def run_command(cfg: RunConfig) -> CommandResult:
    apply_settings(cfg.settings)
    config.THREADS = max(1, int(cfg.threads))
    LOG.info("Команда %s → %s", cfg.command, cfg.out)
    return HANDLERS[cfg.command](cfg)


__all__ = [
    "COMMANDS",
    "RunConfig",
    "CommandResult",
    "resolved_settings",
    "apply_settings",
    "analyze_model",
    "route_spread",
    "combine_verdicts",
    "stability_boundary",
    "figure_rows",
    "run_command",
    "cmd_analyze",
    "cmd_spectrum",
    "cmd_sweep_kappa",
    "cmd_darcy_compare",
    "cmd_regions",
    "cmd_turing_example",
    "cmd_figures",
]
