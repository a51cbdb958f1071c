"""
Критерии устойчивости и генеричности.

Каждый флаг несёт числовой запас, по которому он решён. Итог:
- провал любого условия генеричности → "inconclusive" (теоремы не применимы);
- спектр эффективного потока не вещественный → "unstable" (первый порядок);
- μ_t < 0 и все μ_c⁰ < 0 → "stable", иначе "unstable".

Устойчивость: все μ⁰ < 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

import config
from src.asymptotics import ExpansionCoefficients, bfn_check, coeffs_closed_form, eckhaus_bound
from src.errors import McglError
from src.model import DerivedQuantities, ModelParams

LOG = logging.getLogger("mcgl.criteria")

VERDICTS = ("stable", "unstable", "inconclusive")


@dataclass(frozen=True)
class Flag:
    name: str
    ok: bool
    margin: float
    detail: str = ""


@dataclass
class CriteriaChecklist:
    supercritical: Flag
    eckhaus: Flag
    bfn: Flag
    scalar_pair: Optional[Flag]
    preccond: Flag
    splitass: Flag
    ccond: List[Flag]
    gencase: Flag
    fluxcond: Flag
    genc: Flag
    genz1: Optional[Flag]
    indcouple: List[Flag]
    shyp: Flag
    decoup: Flag
    translational: Flag
    verdict: str = "inconclusive"
    reasons: List[str] = field(default_factory=list)

    def genericity_flags(self) -> List[Flag]:
        flags = [self.gencase, self.fluxcond, self.genc, self.shyp]
        if self.genz1 is not None:
            flags.append(self.genz1)
        flags.extend(self.indcouple)
        if len(self.ccond) > 1:
            flags.append(self.splitass)
        return flags

    def as_dict(self) -> Dict[str, Any]:
        def conv(x: Any) -> Any:
            if isinstance(x, Flag):
                d = asdict(x)
                d["margin"] = None if math.isnan(d["margin"]) else d["margin"]
                return d
            if isinstance(x, list):
                return [conv(v) for v in x]
            return x

        return {k: conv(v) for k, v in self.__dict__.items()}


def _nonzero(name: str, value: float, detail: str) -> Flag:
    atol = config.GENERICITY_ATOL
    return Flag(name, abs(value) > atol, float(abs(value)), detail)


def evaluate_criteria(
    dq: DerivedQuantities,
    params: ModelParams,
    coefficients: Optional[ExpansionCoefficients] = None,
) -> CriteriaChecklist:
    """Полный чек-лист; ошибки не бросаются, всё попадает в флаги и причины."""
    m = params.m
    c, c_hat = params.c, dq.c_hat
    kappa_sq = dq.kappa ** 2

    supercritical = Flag("supercritical", c.real < 0, float(-c.real), f"Re(c)={c.real:.6g}")

    eck = eckhaus_bound(dq, params)
    if eck.has_band:
        eckhaus = Flag("eckhaus", kappa_sq < eck.kappa_sq, float(eck.kappa_sq - kappa_sq),
                       f"kappa^2={kappa_sq:.6g}, kappa_S^2={eck.kappa_sq:.6g}")
    else:
        eckhaus = Flag("eckhaus", False, float("nan"), eck.detail)

    bfn = bfn_check(dq, params)
    bfn_flag = Flag("bfn", bfn.holds, bfn.value, f"mu_t(kappa=0)={bfn.mu_t0:.6g}")

    scalar_pair = None
    if m == 1:
        pair_margin = min(c_hat.real - c.real, -c_hat.real)
        scalar_pair = Flag("scalar_pair", pair_margin > 0, float(pair_margin),
                           f"Re(c)={c.real:.6g} < Re(c_hat)={c_hat.real:.6g} < 0")

    flux_spec = np.linalg.eigvals(dq.effective_flux)
    spec_scale = max(1.0, float(np.max(np.abs(flux_spec))))
    flux_imag = float(np.max(np.abs(flux_spec.imag)))
    preccond = Flag("preccond", flux_imag <= 1e-12 * spec_scale, -flux_imag,
                    f"spec(effective_flux)={np.round(flux_spec, 12).tolist()}")
    if m > 1:
        pair_gaps = np.abs(flux_spec[:, np.newaxis] - flux_spec[np.newaxis, :])
        np.fill_diagonal(pair_gaps, np.inf)
        split_gap = float(np.min(pair_gaps))
    else:
        split_gap = float("inf")
    splitass = Flag("splitass", split_gap > config.GENERICITY_ATOL, split_gap if m > 1 else float("nan"),
                    "effective flux eigenvalues distinct")

    gencase = _nonzero("gencase", float(np.max(np.abs(dq.r))), "r != 0 (Jordan coupling)")
    fluxcond = _nonzero("fluxcond", float(abs(np.linalg.det(dq.effective_flux))), "det(effective_flux) != 0")
    genc = _nonzero("genc", float(abs(c_hat.real)), "Re(c_hat) != 0")

    h_re_d = params.h * params.d.real
    genz1 = _nonzero("genz1", float(abs(np.sum(h_re_d))), "h Re(d) != 0") if m == 1 else None
    indcouple = [] if m == 1 else [
        _nonzero(f"indcouple[{j}]", float(h_re_d[j]), f"h_{j} Re(d_{j}) != 0") for j in range(m)
    ]
    f_spec = np.sort(np.linalg.eigvals(params.f).real)
    f_gap = float(np.min(np.diff(f_spec))) if m > 1 else float("inf")
    shyp = Flag("shyp", f_gap > config.GENERICITY_ATOL, f_gap if m > 1 else float("nan"), "spec(f) simple")
    decoup_gap = float(np.max(np.abs(params.d.imag - params.d.real * c.imag / c.real)))
    decoup = Flag("decoup", decoup_gap <= config.GENERICITY_ATOL, decoup_gap,
                  "Im(d) = Re(d) Im(c)/Re(c) (informational)")

    reasons: List[str] = []
    if coefficients is None:
        try:
            coefficients = coeffs_closed_form(dq, params)
        except McglError as e:
            reasons.append(f"closed-form coefficients unavailable: {e}")
            LOG.info("Коэффициенты недоступны: %s", e)

    if coefficients is not None:
        mu_t = coefficients.mu_t
        translational = Flag("translational", mu_t < 0, float(-mu_t), f"mu_t={mu_t:.6g}")
        ccond = [
            Flag(f"ccond[{i}]", mu < 0, float(-mu), f"mu_c0[{i}]={mu:.6g}")
            for i, mu in enumerate(coefficients.mu_c)
        ]
    else:
        translational = Flag("translational", False, float("nan"), "mu_t unavailable")
        ccond = [Flag(f"ccond[{i}]", False, float("nan"), "mu_c0 unavailable") for i in range(m)]

    checklist = CriteriaChecklist(
        supercritical=supercritical,
        eckhaus=eckhaus,
        bfn=bfn_flag,
        scalar_pair=scalar_pair,
        preccond=preccond,
        splitass=splitass,
        ccond=ccond,
        gencase=gencase,
        fluxcond=fluxcond,
        genc=genc,
        genz1=genz1,
        indcouple=indcouple,
        shyp=shyp,
        decoup=decoup,
        translational=translational,
        reasons=reasons,
    )

    failed_generic = [f.name for f in checklist.genericity_flags() if not f.ok]
    degenerate_mu = [f.name for f in [translational] + ccond
                     if not math.isnan(f.margin) and abs(f.margin) <= config.GENERICITY_ATOL]
    if failed_generic or degenerate_mu:
        checklist.verdict = "inconclusive"
        reasons.extend(f"genericity fails: {name}" for name in failed_generic + degenerate_mu)
        if "gencase" in failed_generic and decoup.ok:
            reasons.append("degenerate decoupled case: Im(d) = Re(d) Im(c)/Re(c)")
    elif not preccond.ok:
        checklist.verdict = "unstable"
        reasons.append("first-order instability: effective flux has non-real spectrum")
    elif coefficients is None:
        checklist.verdict = "inconclusive"
    elif translational.ok and all(f.ok for f in ccond) and supercritical.ok:
        checklist.verdict = "stable"
    else:
        checklist.verdict = "unstable"
        if not translational.ok:
            reasons.append(f"translational mode: {translational.detail}")
        reasons.extend(f"conservative mode: {f.detail}" for f in ccond if not f.ok)
    LOG.info("Критерии: %s %s", checklist.verdict, "; ".join(reasons))
    return checklist


__all__ = ["VERDICTS", "Flag", "CriteriaChecklist", "evaluate_criteria"]
