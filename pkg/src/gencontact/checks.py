"""Named checks run by the CLI, each returning a :class:`CheckResult`."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cone, poisson, structures
from .fields import Field
from .report import ERROR, FAIL, PASS, CheckResult
from .sampling import sample_points
from .structures import GenContactStructure, GenMetric


@dataclass
class Context:
    structure: GenContactStructure
    metric: GenMetric | None
    count: int = 50
    seed: int = 42
    box: tuple = (-1.0, 1.0)
    tol: float = 1e-8
    axiom_tol: float = 1e-9
    eig_tol: float = 1e-9
    route: str = "g_phi"
    partner: GenContactStructure | None = None  # second factor for product checks
    product_B: Field | None = None

    def points(self, dim: int | None = None, count: int | None = None, seed_offset: int = 0) -> np.ndarray:
        return sample_points(self.structure.dim if dim is None else dim, count or self.count,
                             self.seed + seed_offset, *self.box)


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _need_metric(ctx: Context, check: str):
    if ctx.metric is None:
        raise ValueError(f"check {check!r} needs a generalized metric; the structure has none")
    return ctx.metric


def check_axioms(ctx: Context, params: dict) -> CheckResult:
    pts = ctx.points()
    rep = structures.check_axioms(ctx.structure, pts, tol=ctx.axiom_tol)
    details = {"residuals": rep.as_dict()}
    residuals = list(rep.residuals)
    if ctx.metric is not None:
        met = structures.check_metric(ctx.structure, ctx.metric, pts, tol=ctx.axiom_tol)
        details["compatibility"] = met.residuals["compatibility"].as_dict()
        residuals.append(met.residuals["compatibility"])
    w = max(residuals, key=lambda r: r.value)
    return CheckResult("axioms", _status(all(r.ok for r in residuals)), w.value, w.witness, details)


def check_metric(ctx: Context, params: dict) -> CheckResult:
    met = structures.check_metric(ctx.structure, _need_metric(ctx, "metric"), ctx.points(), tol=ctx.axiom_tol)
    w = met.residuals.worst
    return CheckResult("metric", _status(met.ok), w.value, w.witness, met.as_dict())


def check_strong(ctx: Context, params: dict) -> CheckResult:
    integ = structures.classify_integrability(ctx.structure, ctx.points(), ctx.tol)
    w = max((integ.plus, integ.minus), key=lambda r: r.value)
    return CheckResult("strong", _status(integ.strong), w.value, w.witness, integ.as_dict())


def check_normal(ctx: Context, params: dict) -> CheckResult:
    v = structures.is_normal(ctx.structure, ctx.points(), ctx.tol)
    rs = (v.integrability.plus, v.integrability.minus, v.bracket)
    w = max(rs, key=lambda r: r.value)
    return CheckResult("normal", _status(v.normal), w.value, w.witness, v.as_dict())


def check_cokahler(ctx: Context, params: dict) -> CheckResult:
    v = structures.is_cokahler(ctx.structure, _need_metric(ctx, "cokahler"), ctx.points(), ctx.tol)
    rs = (v.normal.integrability.plus, v.normal.integrability.minus, v.normal.bracket, v.partner.plus,
          v.partner.minus)
    w = max(rs, key=lambda r: r.value)
    return CheckResult("cokahler", _status(v.cokahler), w.value, w.witness, v.as_dict())


def _route(ctx: Context, params: dict) -> str:
    route = params.get("route", ctx.route)
    if route not in poisson.ROUTES:
        raise ValueError(f"unknown route {route!r}")
    return route


def check_poisson(ctx: Context, params: dict) -> CheckResult:
    route = _route(ctx, params)
    pts = ctx.points()
    pm = poisson.canonical_piM(ctx.structure, route, ctx.metric)
    rep = poisson.bivector_report(pm, poisson.eta_of(ctx.structure), pts, ctx.tol)
    details = {"route": route, **rep.as_dict()}
    return CheckResult("poisson", _status(rep.jacobi.ok), rep.jacobi.value, rep.jacobi.witness, details)


def check_sasakian(ctx: Context, params: dict) -> CheckResult:
    route = _route(ctx, params)
    v = poisson.sasakian_criterion(ctx.structure, route, ctx.metric, ctx.points(), ctx.tol, ctx.eig_tol)
    details = {"route": route, "verdict": v.status, **v.as_dict()}
    if v.spectra:
        details["spectrum_at_first_point"] = [[complex(z).real, complex(z).imag] for z in v.spectra[0]]
    return CheckResult("sasakian", _status(v.sasakian), None, v.witness, details)


def reduction_samples(ctx: Context, count: int | None = None):
    """Seeded (p, t) pairs with p in the sampling box and t in [-2, 2]."""
    n = count or ctx.count
    pts = ctx.points(seed_offset=1000, count=n)
    ts = np.random.default_rng(ctx.seed + 2000).uniform(-2.0, 2.0, n)
    return pts, ts


def check_reduction(ctx: Context, params: dict) -> CheckResult:
    route = _route(ctx, params)
    S = ctx.structure
    piC = cone.cone_pi(S, route, ctx.metric)
    B = cone.cone_B(S)
    pts, ts = reduction_samples(ctx)
    disagree, worst, where = 0, 0.0, None
    for p, t in zip(pts, ts):
        big, det_c = cone.invertibility_on_cone(piC, B, np.append(p, t))
        small, det_m = cone.reduced_invertibility(S, route, ctx.metric, p, t)
        gap = abs(det_c - det_m)
        if gap > worst:
            worst, where = gap, tuple(np.append(p, t))
        disagree += big != small
    return CheckResult("reduction", _status(disagree == 0), worst, where,
                       {"route": route, "pairs": len(ts), "disagreements": int(disagree),
                        "max_det_gap": worst})


def check_gauge(ctx: Context, params: dict) -> CheckResult:
    route = _route(ctx, params)
    S = ctx.structure
    piC = cone.cone_pi(S, route, ctx.metric)
    B = cone.cone_B(S)
    pts = ctx.points(dim=S.dim + 1)
    worst, where, singular = 0.0, None, 0
    for p in pts:
        try:
            pi1 = poisson.gauge_transform(piC.value(p), B.value(p), p)
        except poisson.GaugeSingularityError:
            singular += 1
            continue
        r = max(poisson.gauge_graph_residual(piC.value(p), pi1, B.value(p)),
                float(np.abs(pi1 + pi1.T).max()))
        if r > worst:
            worst, where = r, tuple(float(c) for c in p)
    ok = worst < 1e-10 and singular == 0
    return CheckResult("gauge", _status(ok), worst, where, {"route": route, "singular_points": singular})


def _kahler_result(name: str, rep: cone.KahlerReport) -> CheckResult:
    fails = [c for c in rep.conditions.values() if not c.passed]
    witness = fails[0].witness if fails else None
    margin = min(c.margin for c in rep.conditions.values())
    details = rep.as_dict()
    details["min_margin"] = margin
    return CheckResult(name, _status(rep.passed), None, witness, details)


def check_cone_kahler(ctx: Context, params: dict) -> CheckResult:
    beta = params.get("beta", "real")
    if beta not in ("real", "imaginary"):
        raise ValueError("beta must be real or imaginary")
    L0, L1 = cone.cone_pair(ctx.structure, 1.0 if beta == "real" else 1j)
    rep = cone.kahler_check(L0, L1, ctx.points(dim=ctx.structure.dim + 1))
    res = _kahler_result("cone-kahler", rep)
    res.details["beta"] = beta
    return res


def check_product_kahler(ctx: Context, params: dict) -> CheckResult:
    if ctx.partner is None or ctx.product_B is None:
        raise ValueError("product-kahler needs [product] with = <builtin> and B = <two-form>")
    L0, L1 = cone.product_pair(ctx.structure, ctx.partner, ctx.product_B)
    rep = cone.kahler_check(L0, L1, ctx.points(dim=L0.dim))
    return _kahler_result("product-kahler", rep)


@dataclass(frozen=True)
class CheckSpec:
    fn: Callable[[Context, dict], CheckResult]
    summary: str
    params: tuple = ()


CHECKS = {
    "axioms": CheckSpec(check_axioms,
                        "Phi + Phi* = 0, Phi^2 = -1 + E+ (x) E- + E- (x) E+, <E+-,E+-> = 0 and 2<E+,E-> = 1; "
                        "with a metric also -Phi G Phi = G - E+ (x) E+ - E- (x) E-."),
    "metric": CheckSpec(check_metric, "G^2 = 1, G* = G, <Gu,u> > 0 and compatibility with Phi."),
    "strong": CheckSpec(check_strong, "Courant involutivity of L+ = E+ + E^(1,0) and L- = E- + E^(1,0); "
                                      "PASS when both are closed."),
    "normal": CheckSpec(check_normal, "strong and [[E+, E-]] = 0."),
    "cokahler": CheckSpec(check_cokahler, "normal, metric compatible, and G Phi strong as well."),
    "poisson": CheckSpec(check_poisson, "canonical bivector pi_M = pi0 + e+ ^ e-; PASS when its Jacobi "
                                        "residual vanishes. Reports pi_M(eta, .) too.", ("route",)),
    "sasakian": CheckSpec(check_sasakian, "d eta != 0 and no eigenvalue of (d eta) pi_M on the open negative "
                                          "real axis, i.e. 1 + e^t (d eta) pi_M invertible for all real t.",
                          ("route",)),
    "reduction": CheckSpec(check_reduction, "1 + B pi on the cone M x R (B = d(e^t eta)) is invertible exactly "
                                            "when 1 + e^t (d eta) pi_M is, at seeded (p, t) pairs.", ("route",)),
    "gauge": CheckSpec(check_gauge, "gauge transform pi (1 + B pi)^-1 of the cone bivector by d(e^t eta) and "
                                    "the graph identity e^B Gamma_pi = Gamma_pi1.", ("route",)),
    "cone-kahler": CheckSpec(check_cone_kahler,
                             "generalized Kaehler test of (L0, e^B L0) on M x R with B = d(e^t eta). "
                             "Conditions: (1) L transverse to conj(L) for L0, L1; (2) (L - conj L)/2i are "
                             "graphs of real Poisson bivectors; (3) (L0 - L1)/2i and (L0 - conj L1)/2i split "
                             "T_C into holomorphic and antiholomorphic parts; (4) <u, conj u> > 0 on L0 cap L1.",
                             ("beta",)),
    "product-kahler": CheckSpec(check_product_kahler,
                                "the four generalized Kaehler conditions for (L0, e^B L0) on a product M1 x M2 "
                                "with a user-supplied two-form B."),
}


def run_check(name: str, ctx: Context, params: dict) -> CheckResult:
    """Run one check; exceptions become ERROR records."""
    try:
        return CHECKS[name].fn(ctx, params)
    except Exception as exc:  # reported, never raised past the runner
        return CheckResult(name, ERROR, None, getattr(exc, "witness", None) and tuple(exc.witness),
                           {"error": f"{type(exc).__name__}: {exc}"})
