"""Generalized almost contact structures and generalized metrics on a chart.

A structure is the triple ``(Phi, E+, E-)`` of jet-valued fields.  This
module builds structures from classical almost contact data or a contact
form, provides the named examples, checks the defining identities and the
metric compatibility, spans the eigenbundles ``E^(1,0)`` and ``L+-``, and
classifies Courant integrability numerically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import calculus, gtb, jets, subspace
from .fields import ChartSpec, Field
from .jets import Jet
from .report import Residual, ResidualSet, sup_over
from .sampling import default_points

INTEGRABILITY_TOL = 1e-8
AXIOM_TOL = 1e-9


class ClassicalAxiomError(ValueError):
    def __init__(self, message: str, witness=None, residual: float | None = None):
        super().__init__(message if witness is None else f"{message} at {tuple(np.round(witness, 6))}")
        self.witness = witness
        self.residual = residual


class AxiomError(ClassicalAxiomError):
    """The generalized almost contact identities fail."""


class NonContactError(ClassicalAxiomError):
    pass


class RankDeficiencyError(ClassicalAxiomError):
    pass


class NonTransverseError(ValueError):
    pass


class UnknownBuiltinError(KeyError):
    pass


def _as_field(value, chart: ChartSpec, shape) -> Field:
    if isinstance(value, Field):
        f = value
    else:
        f = Field.from_exprs(value, chart)
    if f.shape != tuple(shape):
        raise gtb.DimensionError(f"expected shape {tuple(shape)}, got {f.shape}")
    return f


@dataclass(frozen=True)
class GenContactStructure:
    chart: ChartSpec
    Phi: Field
    Eplus: Field
    Eminus: Field
    name: str = ""

    def __post_init__(self):
        d = self.chart.dim
        if self.Phi.shape != (2 * d, 2 * d) or self.Eplus.shape != (2 * d,) or self.Eminus.shape != (2 * d,):
            raise gtb.DimensionError("structure fields do not match the chart dimension")

    @property
    def dim(self) -> int:
        return self.chart.dim

    @classmethod
    def validated(cls, chart, Phi, Eplus, Eminus, name="", points=None, tol=AXIOM_TOL):
        s = cls(chart, Phi, Eplus, Eminus, name)
        rep = check_axioms(s, points)
        bad = [r for r in rep.residuals if r.value >= tol]
        if bad:
            w = max(bad, key=lambda r: r.value)
            raise AxiomError(f"axiom '{w.name}' residual {w.value:.3e}", w.witness, w.value)
        return s


@dataclass(frozen=True)
class GenMetric:
    G: Field


@dataclass(frozen=True)
class DiracSpanField:
    """Pointwise spanning set of a complex subbundle; rows of a ``(k, 2d)`` field."""
    generators: Field
    rank: int
    isotropic: bool = True
    name: str = ""

    @property
    def dim(self) -> int:
        return self.generators.dim

    def at(self, p) -> Jet:
        return self.generators.at(p)

    def value(self, p) -> np.ndarray:
        return self.generators.value(p)

    def conj(self) -> "DiracSpanField":
        return DiracSpanField(self.generators.map(lambda j: j.conj()), self.rank, self.isotropic,
                              f"conj({self.name})")

    def rank_at(self, p) -> int:
        return subspace.rank(self.value(p))

    def check_rank(self, points) -> None:
        for p in points:
            r = self.rank_at(p)
            if r != self.rank:
                raise RankDeficiencyError(f"span {self.name or '?'} has rank {r}, expected {self.rank}", p)

    def isotropy(self, points) -> Residual:
        def defect(p):
            U = self.value(p)
            return np.abs(_gram(U)).max() if U.shape[0] else 0.0
        return sup_over(points, defect, "isotropy", 1e-10)


def _gram(U: np.ndarray) -> np.ndarray:
    d = U.shape[-1] // 2
    return 0.5 * (U[:, :d] @ U[:, d:].T + U[:, d:] @ U[:, :d].T)


def stack_sections(sections, name: str = "") -> Field:
    """Field of rows from several section fields (each shape ``(2d,)``)."""
    n = sections[0].shape[0]
    return Field.combine(lambda *u: jets.stack(u), list(sections), (len(sections), n), name)


# ---------------------------------------------------------------------------
# construction


def from_classical_almost_contact(chart: ChartSpec, phi, xi, eta, points=None, tol: float = AXIOM_TOL,
                                  name: str = "") -> GenContactStructure:
    """Phi = (phi, 0; 0, -phi*), E+ = xi, E- = eta; classical identities checked at ``points``."""
    d = chart.dim
    phi, xi, eta = _as_field(phi, chart, (d, d)), _as_field(xi, chart, (d,)), _as_field(eta, chart, (d,))
    pts = default_points(d) if points is None else points
    eye = np.eye(d)
    checks = {
        "eta(xi) = 1": lambda p: abs(eta.value(p) @ xi.value(p) - 1),
        "phi(xi) = 0": lambda p: np.abs(phi.value(p) @ xi.value(p)).max(),
        "eta o phi = 0": lambda p: np.abs(eta.value(p) @ phi.value(p)).max(),
        "phi^2 = -1 + xi (x) eta": lambda p: np.abs(
            phi.value(p) @ phi.value(p) + eye - np.outer(xi.value(p), eta.value(p))).max(),
    }
    for label, defect in checks.items():
        r = sup_over(pts, defect, label, tol)
        if not r.ok:
            raise ClassicalAxiomError(f"classical identity {label} fails (residual {r.value:.3e})",
                                      r.witness, r.value)
    Phi = gtb.endo_field(chart, A=phi, D=phi.map(lambda j: -j.T))
    return GenContactStructure(chart, Phi, gtb.section_field(chart, xi, None),
                               gtb.section_field(chart, None, eta), name)


def _contact_data(eta: Field):
    """Jets of (d eta, rho^-1, Reeb field, bivector) with rho(X) = i_X d eta - eta(X) eta."""
    def fn(p):
        e = eta.at(p)
        om = calculus.d_oneform(e)
        e1 = e.truncate(1)
        rho = om.T - jets.einsum("i,j->ij", e1, e1)
        ri = jets.inv(rho)
        reeb = -(ri @ e1)
        pi = ri.T @ om @ ri
        return om, ri, reeb, pi
    return fn


def from_contact(chart: ChartSpec, eta, points=None, tol: float = 1e-12, name: str = "") -> GenContactStructure:
    """Phi = (0, pi; d eta, 0), E+ = eta, E- = Reeb field, with pi(a, b) = d eta(rho^-1 a, rho^-1 b)."""
    d = chart.dim
    eta = _as_field(eta, chart, (d,))
    data = _contact_data(eta)
    pts = default_points(d) if points is None else points
    for p in pts:
        e = eta.value(p)
        om = calculus.d_oneform(eta.at(p)).val
        rho = om.T - np.outer(e, e)
        s = np.linalg.svd(rho, compute_uv=False)
        if s[-1] <= tol * max(1.0, s[0]):
            raise NonContactError("rho = i_X d eta - eta(X) eta is singular; eta is not contact", p, s[-1])

    def phi_fn(p):
        om, _, _, pi = data(p)
        zero = Jet.const(np.zeros((d, d)), d).truncate(1)
        return jets.block([[zero, pi.T], [om.T, zero]])

    def reeb_fn(p):
        return data(p)[2]

    Phi = Field(phi_fn, (2 * d, 2 * d), d, "Phi")
    reeb = Field(reeb_fn, (d,), d, "reeb")
    return GenContactStructure(chart, Phi, gtb.section_field(chart, None, eta),
                               gtb.section_field(chart, reeb, None), name)


def contact_bivector(chart: ChartSpec, eta) -> Field:
    """pi(a, b) = d eta(rho^-1 a, rho^-1 b) as a field (upper-right block of from_contact is its transpose)."""
    data = _contact_data(_as_field(eta, chart, (chart.dim,)))
    return Field(lambda p: data(p)[3], (chart.dim, chart.dim), chart.dim, "pi")


# ---------------------------------------------------------------------------
# built-in examples

HEISENBERG = ChartSpec(("x", "y", "z"))
LINE = ChartSpec(("t",))

HEIS_ETA = ["-y", "0", "1"]
HEIS_XI = ["0", "0", "1"]
HEIS_PHI = [["0", "-1", "0"], ["1", "0", "0"], ["0", "-y", "0"]]
HEIS_G = [["1 + y^2", "0", "-y"], ["0", "1", "0"], ["-y", "0", "1"]]
HEIS_G_INV = [["1", "0", "y"], ["0", "1", "0"], ["y", "0", "1 + y^2"]]

FLAT_ETA = ["0", "0", "1"]
FLAT_PHI = [["0", "-1", "0"], ["1", "0", "0"], ["0", "0", "0"]]

BUILTINS = {
    "heisenberg_sasakian": "classical Sasakian data on the Heisenberg chart (eta = dz - y dx) with g = dx^2 + dy^2 + eta^2",
    "flat_cokahler": "flat cosymplectic data on R^3 (eta = dz) with the flat metric",
    "contact_heisenberg": "the structure (0, pi; d eta, 0) built from the contact form dz - y dx",
    "real_line": "Phi = 0, E+ = dt, E- = d/dt on R with G = (0, 1; 1, 0)",
}


def metric_from_riemannian(chart: ChartSpec, g, g_inv) -> GenMetric:
    """G = (0, g^-1; g, 0)."""
    return GenMetric(gtb.endo_field(chart, P=g_inv, S=g, name="G"))


def builtin(name: str):
    """Return ``(structure, metric or None)`` for one of :data:`BUILTINS`."""
    if name == "heisenberg_sasakian":
        s = from_classical_almost_contact(HEISENBERG, HEIS_PHI, HEIS_XI, HEIS_ETA, name=name)
        return s, metric_from_riemannian(HEISENBERG, HEIS_G, HEIS_G_INV)
    if name == "flat_cokahler":
        eye = np.eye(3).astype(int).astype(str)
        s = from_classical_almost_contact(HEISENBERG, FLAT_PHI, HEIS_XI, FLAT_ETA, name=name)
        return s, metric_from_riemannian(HEISENBERG, eye, eye)
    if name == "contact_heisenberg":
        return from_contact(HEISENBERG, HEIS_ETA, name=name), None
    if name == "real_line":
        s = GenContactStructure(LINE, Field.zeros((2, 2), 1),
                                gtb.section_field(LINE, None, ["1"]),
                                gtb.section_field(LINE, ["1"], None), name)
        return s, metric_from_riemannian(LINE, [["1"]], [["1"]])
    raise UnknownBuiltinError(f"unknown builtin {name!r}; known: {', '.join(BUILTINS)}")


# ---------------------------------------------------------------------------
# identities


def _tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return gtb.tensor_endo(a, b)


def check_axioms(S: GenContactStructure, points=None, probes: int = 8, seed: int = 0,
                 tol: float = AXIOM_TOL) -> ResidualSet:
    """Residuals of Phi + Phi* = 0, Phi^2 = -1 + E+ (x) E- + E- (x) E+ and the pairing conditions.

    The last one is ``max(|<E+,E+>|, |<E-,E->|, |<E+,E-> - 1/2|)``.
    """
    pts = default_points(S.dim) if points is None else points
    n = 2 * S.dim
    eye = np.eye(n)

    def skew(p):
        return gtb.adjoint_defect(S.Phi.value(p), probes, rng=np.random.default_rng(seed))

    def square(p):
        F, ep, em = S.Phi.value(p), S.Eplus.value(p), S.Eminus.value(p)
        return np.abs(F @ F + eye - _tensor(ep, em) - _tensor(em, ep)).max()

    def pair(p):
        ep, em = S.Eplus.value(p), S.Eminus.value(p)
        return max(abs(gtb.pairing(ep, ep)), abs(gtb.pairing(em, em)), abs(gtb.pairing(ep, em) - 0.5))

    return ResidualSet([sup_over(pts, skew, "skew", tol), sup_over(pts, square, "square", tol),
                        sup_over(pts, pair, "pairing", tol)])


@dataclass
class MetricReport:
    residuals: ResidualSet
    positivity: float
    positivity_witness: tuple | None
    positivity_tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return self.residuals.ok and self.positivity > self.positivity_tol

    def as_dict(self) -> dict:
        return {**self.residuals.as_dict(),
                "positivity": {"min": self.positivity, "witness": _pt(self.positivity_witness),
                               "ok": self.positivity > self.positivity_tol}}


def _pt(p):
    return None if p is None else [float(v) for v in p]


def min_metric_form(G: np.ndarray) -> float:
    """min of <Gu, u> over real unit vectors u (smallest eigenvalue of the symmetrized form)."""
    d = G.shape[0] // 2
    q = gtb.neutral_form(d)
    form = np.real(0.5 * q @ G)
    return float(np.linalg.eigvalsh(0.5 * (form + form.T))[0])


def check_metric(S: GenContactStructure, G: GenMetric, points=None, probes: int = 8, seed: int = 0,
                 tol: float = AXIOM_TOL) -> MetricReport:
    """G^2 = 1, G* = G, positivity of <G., .> and -Phi G Phi = G - E+ (x) E+ - E- (x) E-."""
    pts = default_points(S.dim) if points is None else points
    n = 2 * S.dim
    eye = np.eye(n)

    def involution(p):
        g = G.G.value(p)
        return np.abs(g @ g - eye).max()

    def symmetric(p):
        return gtb.adjoint_defect(G.G.value(p), probes, symmetric=True, rng=np.random.default_rng(seed))

    def compat(p):
        g, F, ep, em = G.G.value(p), S.Phi.value(p), S.Eplus.value(p), S.Eminus.value(p)
        return np.abs(-F @ g @ F - g + _tensor(ep, ep) + _tensor(em, em)).max()

    res = ResidualSet([sup_over(pts, involution, "involution", tol), sup_over(pts, symmetric, "symmetric", tol),
                       sup_over(pts, compat, "compatibility", tol)])
    low, where = np.inf, None
    for p in pts:
        m = min_metric_form(G.G.value(p))
        if m < low:
            low, where = m, tuple(float(c) for c in p)
    return MetricReport(res, float(low), where)


# ---------------------------------------------------------------------------
# eigenbundles


def e10_span(S: GenContactStructure, points=None, check: bool = True) -> DiracSpanField:
    """Span of (1 - i Phi)/2 applied to the projections of the standard frame onto (E+ + E-)^perp."""
    d = S.dim
    n = 2 * d

    def fn(p):
        F = S.Phi.at(p)
        P = gtb.perp_projector(S.Eplus.at(p), S.Eminus.at(p))
        half = 0.5 * (Jet.const(np.eye(n), d) - 1j * F)
        return (half @ P).T

    span = DiracSpanField(Field(fn, (n, n), d, "E10"), d - 1, True, "E10")
    if check:
        span.check_rank(default_points(d) if points is None else points)
    return span


def _with_section(E: Field, span: DiracSpanField, name: str) -> DiracSpanField:
    n = E.shape[0]
    k = span.generators.shape[0]

    def fn(p):
        return jets.concatenate([E.at(p).reshape(1, n), span.at(p)])

    return DiracSpanField(Field(fn, (k + 1, n), E.dim, name), span.rank + 1, True, name)


def plus_span(S: GenContactStructure, points=None) -> DiracSpanField:
    """L+ = span(E+) + E^(1,0)."""
    return _with_section(S.Eplus, e10_span(S, points), "L+")


def minus_span(S: GenContactStructure, points=None) -> DiracSpanField:
    """L- = span(E-) + E^(1,0)."""
    return _with_section(S.Eminus, e10_span(S, points), "L-")


def obstruction_sup(L: DiracSpanField, points) -> Residual:
    """sup over points and generator triples of |<[[a, b]], c>|."""
    return sup_over(points, lambda p: np.abs(calculus.obstruction_table(L.at(p))).max(initial=0.0),
                    f"obstruction({L.name})", INTEGRABILITY_TOL)


@dataclass
class Integrability:
    verdict: str
    plus: Residual
    minus: Residual

    @property
    def strong(self) -> bool:
        return self.verdict == "strong"

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "plus": self.plus.as_dict(), "minus": self.minus.as_dict()}


def classify_integrability(S: GenContactStructure, points=None, tol: float = INTEGRABILITY_TOL) -> Integrability:
    """strong, contact_plus, contact_minus (only L+ or only L- closed) or none."""
    pts = default_points(S.dim) if points is None else points
    plus = obstruction_sup(plus_span(S, pts), pts)
    minus = obstruction_sup(minus_span(S, pts), pts)
    plus.tol = minus.tol = tol
    verdict = {(True, True): "strong", (True, False): "contact_plus",
               (False, True): "contact_minus", (False, False): "none"}[plus.ok, minus.ok]
    return Integrability(verdict, plus, minus)


@dataclass
class NormalVerdict:
    normal: bool
    integrability: Integrability
    bracket: Residual

    def as_dict(self) -> dict:
        return {"normal": self.normal, "integrability": self.integrability.as_dict(),
                "bracket": self.bracket.as_dict()}


def is_normal(S: GenContactStructure, points=None, tol: float = INTEGRABILITY_TOL) -> NormalVerdict:
    """Strong and [[E+, E-]] = 0."""
    pts = default_points(S.dim) if points is None else points
    integ = classify_integrability(S, pts, tol)
    br = sup_over(pts, lambda p: np.abs(calculus.courant_bracket(S.Eplus.at(p), S.Eminus.at(p)).val).max(),
                  "[[E+,E-]]", tol)
    return NormalVerdict(integ.strong and br.ok, integ, br)


def metric_partner(S: GenContactStructure, G: GenMetric) -> GenContactStructure:
    """The triple (G Phi, G E+, G E-)."""
    GPhi = Field.combine(lambda g, f: g @ f, [G.G, S.Phi], S.Phi.shape, "GPhi")
    Gp = Field.combine(lambda g, e: g @ e, [G.G, S.Eplus], S.Eplus.shape, "GE+")
    Gm = Field.combine(lambda g, e: g @ e, [G.G, S.Eminus], S.Eminus.shape, "GE-")
    return GenContactStructure(S.chart, GPhi, Gp, Gm, f"G*{S.name}")


@dataclass
class CoKahlerVerdict:
    cokahler: bool
    metric: MetricReport
    normal: NormalVerdict
    partner: Integrability

    def as_dict(self) -> dict:
        return {"cokahler": self.cokahler, "metric": self.metric.as_dict(), "normal": self.normal.as_dict(),
                "partner": self.partner.as_dict()}


def is_cokahler(S: GenContactStructure, G: GenMetric, points=None, tol: float = INTEGRABILITY_TOL) -> CoKahlerVerdict:
    """Normal, a compatible generalized metric, and G Phi strong as well."""
    pts = default_points(S.dim) if points is None else points
    met = check_metric(S, G, pts)
    normal = is_normal(S, pts, tol)
    partner = classify_integrability(metric_partner(S, G), pts, tol)
    return CoKahlerVerdict(met.ok and normal.normal and partner.strong, met, normal, partner)


# ---------------------------------------------------------------------------
# even-dimensional prototypes and reconstruction from an eigenbundle


def complex_type_endo(J) -> np.ndarray:
    """(-J, 0; 0, J*) for a complex structure J on the tangent space."""
    J = np.asarray(J, dtype=complex)
    z = np.zeros_like(J)
    return np.block([[-J, z], [z, J.T]])


def symplectic_type_endo(omega) -> np.ndarray:
    """(0, -omega^-1; omega, 0) with omega acting on vectors by X -> i_X omega."""
    w = np.asarray(omega, dtype=complex).T
    z = np.zeros_like(w)
    return np.block([[z, -np.linalg.inv(w)], [w, z]])


def eigenbundle(E: np.ndarray, eigenvalue: complex = 1j) -> np.ndarray:
    """Orthonormal rows spanning ker(E - eigenvalue)."""
    E = np.asarray(E, dtype=complex)
    return subspace.nullspace(E - eigenvalue * np.eye(E.shape[0]))


def symplectic_span(omega) -> np.ndarray:
    """Rows X - i i_X omega over the coordinate vectors X."""
    w = np.asarray(omega, dtype=complex)
    d = w.shape[0]
    return np.concatenate([np.eye(d), -1j * w], axis=1)


def complex_structure_from_span(L, tol: float = subspace.RTOL) -> np.ndarray:
    """J = i(P_L - P_Lbar) for the splitting L + conj(L); requires L maximal isotropic and transverse."""
    q = subspace.basis(L, tol)
    n = np.asarray(L).shape[1]
    if q.shape[0] != n // 2:
        raise NonTransverseError(f"span has rank {q.shape[0]}, expected {n // 2}")
    V = np.concatenate([q, q.conj()]).T
    if subspace.rank(V.T, tol) < n:
        raise NonTransverseError("L meets its conjugate")
    D = np.diag(np.concatenate([np.full(n // 2, 1j), np.full(n // 2, -1j)]))
    return V @ D @ np.linalg.inv(V)


def structure_from_eigenbundle(L) -> Callable[[np.ndarray], np.ndarray]:
    """Pointwise generalized almost complex structure whose +i eigenbundle is ``L``.

    ``L`` is a :class:`DiracSpanField` or a constant array of spanning rows.
    """
    if isinstance(L, DiracSpanField):
        return lambda p: complex_structure_from_span(L.value(p))
    rows = np.asarray(L, dtype=complex)
    J = complex_structure_from_span(rows)
    return lambda p=None: J
