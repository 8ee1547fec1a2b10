"""Products of two structures, the cone M x R, and the Dirac-structure tests
of generalized Kaehler pairs.

On a product chart sections are laid out as
``(X1, X2, a1, a2)``: tangent parts of both factors, then cotangent parts.
The pointwise Dirac algebra (sum, scaling, conjugation, graphs) works on
plain arrays of spanning rows; see :mod:`gencontact.subspace`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import calculus, gtb, jets, subspace
from .fields import ChartSpec, Field
from .jets import Jet
from .poisson import canonical_piM, covector_map, deta_field, eta_of
from .report import Residual, sup_over
from .sampling import default_points
from .structures import (LINE, DiracSpanField, GenContactStructure, GenMetric, NonTransverseError,
                         RankDeficiencyError, builtin, complex_type_endo, e10_span, eigenbundle,
                         symplectic_span)

KAHLER_TOL = 1e-9


class TangentIntersectionError(ValueError):
    """The span meets the tangent bundle, so it is not the graph of a bivector."""


class NonRealError(ValueError):
    pass


# ---------------------------------------------------------------------------
# products


def _slot_matrix(d1: int, d2: int, first: bool) -> np.ndarray:
    """Matrix embedding a factor section into the product layout."""
    D = d1 + d2
    d, off = (d1, 0) if first else (d2, d1)
    E = np.zeros((2 * D, 2 * d))
    E[off:off + d, :d] = np.eye(d)
    E[D + off:D + off + d, d:] = np.eye(d)
    return E


@dataclass(frozen=True)
class ProductData:
    S1: GenContactStructure
    S2: GenContactStructure
    chart: ChartSpec = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "chart", self.S1.chart.product(self.S2.chart))
        if self.dim % 2:
            raise ValueError("product of the two factors is not even-dimensional")

    @property
    def dim(self) -> int:
        return self.S1.dim + self.S2.dim

    def lift_rows(self, f: Field, first: bool) -> Field:
        """Rows (or a single section) of a factor field placed in the product layout."""
        d1, d2 = self.S1.dim, self.S2.dim
        E = _slot_matrix(d1, d2, first)
        lifted = f.lift(self.dim, 0 if first else d1)
        shape = f.shape[:-1] + (2 * self.dim,)
        return lifted.map(lambda u: u @ Jet.const(E.T, self.dim), shape)

    def lift_endo(self, f: Field, first: bool) -> Field:
        d1, d2 = self.S1.dim, self.S2.dim
        E = Jet.const(_slot_matrix(d1, d2, first), self.dim)
        lifted = f.lift(self.dim, 0 if first else d1)
        n = 2 * self.dim
        return lifted.map(lambda F: E @ F @ E.T, (n, n))


def product_L0(S1: GenContactStructure, S2: GenContactStructure, points=None) -> DiracSpanField:
    """E1^(1,0) + E2^(1,0) + span{E+1 - i E+2, E-1 - i E-2}."""
    prod = ProductData(S1, S2)
    D = prod.dim
    parts = []
    for S, first in ((S1, True), (S2, False)):
        e10 = e10_span(S, check=False)
        if e10.generators.shape[0]:
            parts.append(prod.lift_rows(e10.generators, first))
    plus = Field.combine(lambda a, b: a - 1j * b, [prod.lift_rows(S1.Eplus, True), prod.lift_rows(S2.Eplus, False)],
                         (2 * D,))
    minus = Field.combine(lambda a, b: a - 1j * b, [prod.lift_rows(S1.Eminus, True), prod.lift_rows(S2.Eminus, False)],
                          (2 * D,))
    pieces = parts + [plus.map(lambda u: u.reshape(1, 2 * D), (1, 2 * D)),
                      minus.map(lambda u: u.reshape(1, 2 * D), (1, 2 * D))]
    k = sum(f.shape[0] for f in pieces)
    gens = Field.combine(lambda *rows: jets.concatenate(rows), pieces, (k, 2 * D), "L0")
    span = DiracSpanField(gens, D, True, "L0")
    span.check_rank(default_points(D) if points is None else points)
    return span


def cone_chart(S: GenContactStructure) -> ChartSpec:
    return S.chart.product(LINE)


def cone(S: GenContactStructure) -> ProductData:
    return ProductData(S, builtin("real_line")[0])


def cone_B(S: GenContactStructure) -> Field:
    """B = d(e^t eta) on the cone chart (t is the last coordinate)."""
    chart = cone_chart(S)
    D = chart.dim
    d = S.dim
    eta = eta_of(S).lift(D, 0)
    et = Field.from_exprs(f"exp({chart.names[-1]})", chart)
    zero = Jet.const(np.zeros(1), D)

    def fn(p):
        form = jets.concatenate([eta.at(p), zero]) * et.at(p)
        return calculus.d_oneform(form)

    return Field(fn, (D, D), D, "B")


def closedness(B: Field, points) -> Residual:
    return sup_over(points, lambda p: np.abs(calculus.d_twoform(B.at(p)).val).max(), "dB", 1e-10)


def cone_pi(S: GenContactStructure, route: str = "g_phi", G: GenMetric | None = None) -> Field:
    """pi_M on the M-slots, zero on the t-slot."""
    d = S.dim
    D = d + 1
    pm = canonical_piM(S, route, G).lift(D, 0)

    def fn(p):
        P = pm.at(p)
        z = Jet.const(np.zeros((d, 1)), D)
        c = Jet.const(np.zeros((1, D)), D)
        return jets.concatenate([jets.concatenate([P, z], axis=1), c])

    return Field(fn, (D, D), D, "pi")


def invertibility_on_cone(pi: Field, B: Field, point, tol: float = 1e-10):
    """(invertible, det) for the covector map 1 + B pi at a cone point ``(p, t)``."""
    Bv, pv = B.value(point), pi.value(point)
    det = complex(np.linalg.det(np.eye(Bv.shape[0]) + covector_map(Bv, pv)))
    return abs(det) > tol, det


def reduced_invertibility(S: GenContactStructure, route: str, G: GenMetric | None, p, t: float,
                          tol: float = 1e-10):
    """(invertible, det) for 1 + e^t (d eta) pi_M on M at ``p``."""
    A = covector_map(deta_field(S).value(p), canonical_piM(S, route, G).value(p))
    det = complex(np.linalg.det(np.eye(A.shape[0]) + np.exp(t) * A))
    return abs(det) > tol, det


def bfield_span(B: Field, L: DiracSpanField, scale: complex = 1.0) -> DiracSpanField:
    """Generators X + a mapped to X + a + i_X(scale * B)."""
    shape = L.generators.shape

    def fn(p):
        M = gtb.bfield_matrix(scale * B.at(p))
        return L.at(p) @ M.T

    return DiracSpanField(Field(fn, shape, L.dim, f"e^B {L.name}"), L.rank, L.isotropic, f"e^B {L.name}")


# ---------------------------------------------------------------------------
# pointwise Dirac algebra


def _split(L):
    L = np.asarray(L, dtype=complex)
    d = L.shape[1] // 2
    return L[:, :d], L[:, d:]


def transversality_margin(L1, L2) -> float:
    X1, _ = _split(L1)
    X2, _ = _split(L2)
    return subspace.rank_margin(np.concatenate([X1, X2]), X1.shape[1])


def dirac_sum(L1, L2, tol: float = subspace.RTOL) -> np.ndarray:
    """{X + a + b : X + a in L1, X + b in L2}; needs pr(L1) + pr(L2) to be the whole tangent space."""
    X1, A1 = _split(L1)
    X2, A2 = _split(L2)
    d = X1.shape[1]
    if subspace.rank(np.concatenate([X1, X2]), tol) < d:
        raise NonTransverseError("tangent projections do not span the tangent space")
    null = subspace.nullspace(np.concatenate([X1.T, -X2.T], axis=1), tol)
    c1, c2 = null[:, :X1.shape[0]], null[:, X1.shape[0]:]
    return subspace.basis(np.concatenate([c1 @ X1, c1 @ A1 + c2 @ A2], axis=1), tol)


def dirac_scale(lam: complex, L) -> np.ndarray:
    """{X + lam a : X + a in L}."""
    X, A = _split(L)
    return np.concatenate([X, lam * A], axis=1)


def dirac_conjugate(L) -> np.ndarray:
    return np.conj(np.asarray(L, dtype=complex))


def dirac_difference(L1, L2, tol: float = subspace.RTOL) -> np.ndarray:
    """L1 - L2 = L1 + (-1) L2."""
    return dirac_sum(L1, dirac_scale(-1.0, L2), tol)


def half_imaginary_difference(L1, L2, tol: float = subspace.RTOL) -> np.ndarray:
    """(L1 - L2) / 2i, the scaling acting on cotangent parts."""
    return dirac_scale(1 / 2j, dirac_difference(L1, L2, tol))


def graph_extract(L, tol: float = 1e-9) -> np.ndarray:
    """The real bivector pi with span(L) = {pi(xi) + xi}."""
    q = subspace.basis(L)
    X, A = _split(q)
    d = X.shape[1]
    if q.shape[0] != d:
        raise ValueError(f"span has rank {q.shape[0]}, a graph has rank {d}")
    if subspace.rank(A) < d:
        raise TangentIntersectionError("span contains a nonzero tangent vector")
    pi = np.linalg.solve(A, X).T  # rows satisfy X_r = pi A_r
    if np.abs(pi.imag).max() > tol * max(1.0, np.abs(pi).max()):
        raise NonRealError(f"bivector has imaginary part {np.abs(pi.imag).max():.3e}")
    return pi.real


def tangent_intersection(L) -> np.ndarray:
    """Basis of span(L) meet the (complexified) tangent space, as tangent vectors."""
    X, A = _split(subspace.basis(L))
    if X.shape[0] == 0:
        return X
    c = subspace.nullspace(A.T)
    return subspace.basis(c @ X)


def hermitian_form(U) -> np.ndarray:
    """H_ab = <u_a, conj(u_b)>."""
    U = np.asarray(U, dtype=complex)
    d = U.shape[1] // 2
    Ub = U.conj()
    return 0.5 * (U[:, :d] @ Ub[:, d:].T + U[:, d:] @ Ub[:, :d].T)


# ---------------------------------------------------------------------------
# generalized Kaehler conditions

CONDITIONS = {
    1: "L0 transverse to conj(L0) and L1 transverse to conj(L1)",
    2: "(L0 - conj L0)/2i and (L1 - conj L1)/2i are graphs of real bivectors",
    3: "(L0 - L1)/2i and (L0 - conj L1)/2i split T_C as (L cap T_C) + conj(L cap T_C)",
    4: "<u, conj u> > 0 on L0 cap L1",
}


def _condition1(L0, L1):
    margins = [transversality_margin(L, dirac_conjugate(L)) for L in (L0, L1)]
    ok = all(subspace.rank(np.concatenate([_split(L)[0], _split(L)[0].conj()])) == L.shape[1] // 2
             for L in (L0, L1))
    return ok, min(margins), "" if ok else "tangent projections of L and conj(L) do not span"


def _condition2(L0, L1):
    worst, why, pis = 1.0, "", []
    for label, L in (("L0", L0), ("L1", L1)):
        Lb = dirac_conjugate(L)
        worst = min(worst, transversality_margin(L, Lb))
        try:
            G = half_imaginary_difference(L, Lb)
            worst = min(worst, subspace.rank_margin(_split(G)[1], L.shape[1] // 2))
            pis.append(graph_extract(G))
        except (NonTransverseError, TangentIntersectionError, NonRealError, ValueError) as exc:
            return False, 0.0, f"{label}: {exc}", pis
    return True, worst, why, pis


def _condition3(L0, L1):
    d = L0.shape[1] // 2
    worst = 1.0
    for label, other in (("sigma+", L1), ("sigma-", dirac_conjugate(L1))):
        m = transversality_margin(L0, other)
        worst = min(worst, m)
        try:
            Ls = half_imaginary_difference(L0, other)
        except NonTransverseError:
            return False, m, f"{label}: L0 and the second structure are not transverse (margin {m:.2e})"
        T = tangent_intersection(Ls)
        both = np.concatenate([T, T.conj()]) if T.shape[0] else T
        if T.shape[0] * 2 != d or subspace.rank(both) != d:
            return False, subspace.rank_margin(both, d) if both.shape[0] else 0.0, \
                f"{label}: L cap T_C has dimension {T.shape[0]}, no splitting of T_C"
        worst = min(worst, subspace.rank_margin(both, d))
    return True, worst, ""


def _condition4(L0, L1, tol):
    I = subspace.intersect(L0, L1)
    if I.shape[0] == 0:
        return True, float("inf"), "L0 cap L1 = 0", 0
    lam = float(np.linalg.eigvalsh(hermitian_form(I))[0])
    ok = lam > tol
    return ok, lam, "" if ok else f"<u, conj u> has eigenvalue {lam:.3e} on L0 cap L1", I.shape[0]


def kahler_conditions(L0, L1, tol: float = KAHLER_TOL) -> dict:
    """Verdicts of the four conditions for constant spanning rows ``L0``, ``L1``."""
    L0, L1 = np.asarray(L0, dtype=complex), np.asarray(L1, dtype=complex)
    ok1, m1, w1 = _condition1(L0, L1)
    ok2, m2, w2, _ = _condition2(L0, L1)
    ok3, m3, w3 = _condition3(L0, L1)
    ok4, m4, w4, k = _condition4(L0, L1, tol)
    return {1: (ok1, m1, w1), 2: (ok2, m2, w2), 3: (ok3, m3, w3), 4: (ok4, m4, w4)}


@dataclass
class ConditionVerdict:
    index: int
    passed: bool = True
    margin: float = float("inf")
    witness: tuple | None = None
    reason: str = ""
    failures: int = 0

    def as_dict(self) -> dict:
        return {"index": self.index, "description": CONDITIONS[self.index], "passed": self.passed,
                "margin": self.margin, "failures": self.failures,
                "witness": None if self.witness is None else list(self.witness), "reason": self.reason}


@dataclass
class KahlerReport:
    conditions: dict
    points: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    @property
    def failing(self) -> list:
        return [i for i, c in sorted(self.conditions.items()) if not c.passed]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "failing_conditions": self.failing, "points": self.points,
                "conditions": [c.as_dict() for _, c in sorted(self.conditions.items())]}


def kahler_check(L0: DiracSpanField, L1: DiracSpanField, points=None, tol: float = KAHLER_TOL) -> KahlerReport:
    """The four generalized Kaehler conditions at every sample point."""
    pts = default_points(L0.dim) if points is None else points
    verdicts = {i: ConditionVerdict(i) for i in CONDITIONS}
    for p in pts:
        for i, (ok, margin, why) in kahler_conditions(L0.value(p), L1.value(p), tol).items():
            v = verdicts[i]
            if not ok:
                v.failures += 1
                if v.passed:
                    v.passed, v.witness, v.reason = False, tuple(float(c) for c in p), why
            if margin < v.margin:
                v.margin = margin
    return KahlerReport(verdicts, len(pts))


def cone_pair(S: GenContactStructure, scale: complex = 1.0):
    """(L0, e^B L0) on the cone with B = d(e^t eta)."""
    prod = cone(S)
    L0 = product_L0(S, prod.S2)
    return L0, bfield_span(cone_B(S), L0, scale)


def product_pair(S1: GenContactStructure, S2: GenContactStructure, B: Field):
    """(L0, e^B L0) on M1 x M2 for a user-supplied two-form ``B`` on the product chart."""
    L0 = product_L0(S1, S2)
    if B.dim != L0.dim or B.shape != (L0.dim, L0.dim):
        raise gtb.DimensionError("two-form does not live on the product chart")
    return L0, bfield_span(B, L0)


# ---------------------------------------------------------------------------
# the flat Kaehler plane


def kahler_form(g, J) -> np.ndarray:
    """omega with -J_J J_omega = (0, g^-1; g, 0), i.e. omega(X, Y) = g(X, JY)."""
    return np.asarray(g, dtype=float) @ np.asarray(J, dtype=float)


PLANE = ChartSpec(("x", "y"))
PLANE_J = np.array([[0.0, -1.0], [1.0, 0.0]])  # J d/dx = d/dy


def kahler_plane(g=None, J=None):
    """Constant spans (L_J, L_omega) of the complex and symplectic prototypes on R^2."""
    g = np.eye(2) if g is None else np.asarray(g, float)
    J = PLANE_J if J is None else np.asarray(J, float)
    LJ = eigenbundle(complex_type_endo(J))
    Lw = symplectic_span(kahler_form(g, J))
    mk = lambda rows, name: DiracSpanField(Field.constant(rows, 2, name), 2, True, name)
    return mk(LJ, "L_J"), mk(Lw, "L_omega")
