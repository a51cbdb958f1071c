"""
Отчёты и артефакты: JSON (indent=2, sort_keys), CSV (%.17g, строка "# columns:"),
manifest.json с разрешённой конфигурацией. Временных меток нет: одинаковые
запуски дают побайтно одинаковые файлы.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src import __version__
from src.model import OMEGA_CONVENTION

LOG = logging.getLogger("mcgl.report")

TOOL_NAME = "mcgl-stability"
MANIFEST_NAME = "manifest.json"


def to_jsonable(obj: Any) -> Any:
    """complex → [re, im], ndarray → списки, NaN/inf → None; остальное как есть."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path: Path, doc: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc), encoding="utf-8")
    LOG.debug("Записан %s", path)
    return path


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence[float]]) -> Path:
    """Первая строка — "# columns: ...", вторая — заголовок, дальше числа в %.17g."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# columns: " + ", ".join(columns), ",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"{path.name}: row has {len(row)} values, expected {len(columns)}")
        lines.append(",".join("%.17g" % float(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    LOG.debug("Записан %s (%d строк)", path, len(rows))
    return path


def write_manifest(outdir: Path, run_config: Dict[str, Any], files: Sequence[str]) -> Path:
    doc = {
        "tool": TOOL_NAME,
        "version": __version__,
        "omega_convention": OMEGA_CONVENTION,
        "config": run_config,
        "files": sorted(set(files)),
    }
    return write_json(Path(outdir) / MANIFEST_NAME, doc)


def read_manifest(path: Path) -> Dict[str, Any]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("tool") != TOOL_NAME or "config" not in doc:
        raise ValueError(f"{path}: not a {TOOL_NAME} manifest")
    if doc.get("version") != __version__:
        LOG.warning("Манифест версии %s, инструмент %s", doc.get("version"), __version__)
    return doc


@dataclass
class StabilityReport:
    verdict: str
    criteria_verdict: str
    dss_verdict: Optional[str]
    model: Dict[str, Any]
    derived: Dict[str, Any]
    coefficients: Dict[str, Dict[str, Any]]
    route_spread: Dict[str, float]
    fit_residuals: Dict[str, float]
    criteria: Dict[str, Any]
    eckhaus: Dict[str, Any]
    bfn: Dict[str, Any]
    regions: List[Dict[str, Any]] = field(default_factory=list)
    dss: Optional[Dict[str, Any]] = None
    darcy: Optional[Dict[str, Any]] = None
    compat: Optional[Dict[str, Any]] = None
    imaginary_scan: Optional[Dict[str, Any]] = None
    affine_check: Optional[Dict[str, Any]] = None
    issues: List[Dict[str, str]] = field(default_factory=list)

    def header(self) -> Dict[str, Any]:
        return {"tool": TOOL_NAME, "version": __version__, "omega_convention": OMEGA_CONVENTION}

    def as_dict(self) -> Dict[str, Any]:
        doc = dict(self.__dict__)
        doc["header"] = self.header()
        return doc

    def summary_lines(self) -> List[str]:
        d = self.derived
        lines = [
            f"{TOOL_NAME} {__version__}; {OMEGA_CONVENTION}",
            f"Вердикт: {self.verdict} (критерии: {self.criteria_verdict}, спектр: {self.dss_verdict or '-'})",
            f"κ={d.get('kappa')}, A0²={d.get('A0_sq'):.6g}, ω={d.get('omega'):.6g}, m0={d.get('m0'):.6g}",
        ]
        for route, c in sorted(self.coefficients.items()):
            lines.append(
                f"  {route}: α_t={c['alpha_t']:.6g} μ_t={c['mu_t']:.6g} "
                f"εα_c={[round(x, 6) for x in c['alpha_c0']]} ε²μ_c={[round(x, 6) for x in c['mu_c0']]}"
            )
        for reason in self.criteria.get("reasons", []):
            lines.append(f"  - {reason}")
        for issue in self.issues:
            lines.append(f"  [{issue['severity']}] {issue['rule']}: {issue['detail']}")
        return lines


__all__ = [
    "TOOL_NAME",
    "MANIFEST_NAME",
    "to_jsonable",
    "dumps",
    "write_json",
    "write_csv",
    "write_manifest",
    "read_manifest",
    "StabilityReport",
]
