"""The canonical bivector of a normal structure, gauge transformations of
bivectors, and the pointwise spectral form of the Sasakian invertibility test.

Bivectors are ``d x d`` antisymmetric fields with ``pi[a, b] = pi(dx^a, dx^b)``.
As covector-to-vector maps they act by ``alpha -> pi(., alpha)`` (the matrix
itself); two-forms act on vectors through ``B.T``.  Hence the covector map
``alpha -> i_{pi(alpha)} B`` has matrix ``B.T @ pi``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import calculus, gtb, jets, subspace
from .fields import Field
from .jets import Jet
from .report import Residual, sup_over
from .sampling import default_points
from .structures import GenContactStructure, GenMetric, is_normal

ROUTES = ("phi", "g_phi")
EIG_TOL = 1e-9
SASAKIAN, FAIL_DETA_ZERO, FAIL_SPECTRUM = "SASAKIAN", "FAIL_DETA_ZERO", "FAIL_SPECTRUM"


class GaugeSingularityError(ArithmeticError):
    def __init__(self, message: str, point=None):
        super().__init__(message if point is None else f"{message} at {tuple(np.round(point, 6))}")
        self.point = point


class MissingMetricError(ValueError):
    pass


def wedge(a, b):
    """(a ^ b)^ij = a^i b^j - a^j b^i."""
    if isinstance(a, Jet) or isinstance(b, Jet):
        ab = jets.einsum("i,j->ij", a, b)
        return ab - ab.T
    a, b = np.asarray(a), np.asarray(b)
    return np.outer(a, b) - np.outer(b, a)


def eta_of(S: GenContactStructure) -> Field:
    """Sum of the cotangent parts of E+ and E-."""
    d = S.dim
    return Field.combine(lambda p, m: p[d:] + m[d:], [S.Eplus, S.Eminus], (d,), "eta")


def e_projections(S: GenContactStructure):
    """Tangent parts e+ and e- and the bivector e+ ^ e-."""
    d = S.dim
    ep = S.Eplus.map(lambda u: u[:d], (d,), "e+")
    em = S.Eminus.map(lambda u: u[:d], (d,), "e-")
    return ep, em, Field.combine(wedge, [ep, em], (d, d), "e+^e-")


def _route_endo(S: GenContactStructure, route: str, G: GenMetric | None) -> Field:
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}, got {route!r}")
    if route == "phi":
        return S.Phi
    if G is None:
        raise MissingMetricError("route g_phi needs a generalized metric")
    return Field.combine(lambda g, f: g @ f, [G.G, S.Phi], S.Phi.shape, "GPhi")


def canonical_pi0(S: GenContactStructure, route: str = "phi", G: GenMetric | None = None) -> Field:
    """pi0(a, b) = 2 <Phi'(P(a)), b> with Phi' = Phi or G Phi and P the projector onto (E+ + E-)^perp."""
    d = S.dim
    F = _route_endo(S, route, G)

    def fn(p):
        P = gtb.perp_projector(S.Eplus.at(p), S.Eminus.at(p))
        K = (F.at(p) @ P)[:d, d:]  # tangent part of Phi'(P(0, a)) is K a
        return K.T

    return Field(fn, (d, d), d, f"pi0[{route}]")


def canonical_piM(S: GenContactStructure, route: str = "phi", G: GenMetric | None = None,
                  points=None) -> Field:
    """pi_M = pi0 + e+ ^ e-.  With ``points`` the structure is tested for normality first."""
    if points is not None and not is_normal(S, points).normal:
        warnings.warn(f"structure {S.name or '?'} is not normal; pi_M need not be Poisson", stacklevel=2)
    pi0 = canonical_pi0(S, route, G)
    _, _, w = e_projections(S)
    return Field.combine(lambda a, b: a + b, [pi0, w], pi0.shape, f"piM[{route}]")


@dataclass
class BivectorReport:
    jacobi: Residual
    antisymmetry: Residual
    eta_slot: Residual  # |pi(eta, .)|
    components: dict = field(default_factory=dict)  # R^ijk at the Jacobi witness

    def as_dict(self) -> dict:
        return {"jacobi": self.jacobi.as_dict(), "antisymmetry": self.antisymmetry.as_dict(),
                "eta_slot": self.eta_slot.as_dict(),
                "jacobi_components": {"".join(map(str, k)): [v.real, v.imag] for k, v in self.components.items()}}


def bivector_report(pi: Field, eta: Field | None, points, tol: float = 1e-8) -> BivectorReport:
    """Jacobi residual (max |R^ijk|), antisymmetry and the pi(eta, .) residual over ``points``."""
    jac = sup_over(points, lambda p: np.abs(calculus.jacobi_residual(pi.at(p))).max(initial=0.0), "jacobi", tol)
    anti = sup_over(points, lambda p: np.abs(pi.value(p) + pi.value(p).T).max(), "antisymmetry", 1e-12)
    if eta is None:
        slot = Residual("eta_slot", 0.0, None, 1e-10)
    else:
        slot = sup_over(points, lambda p: np.abs(eta.value(p) @ pi.value(p)).max(), "eta_slot", 1e-10)
    comps = {}
    if jac.witness is not None:
        comps = calculus.trivector_components(calculus.jacobi_residual(pi.at(np.array(jac.witness))))
    return BivectorReport(jac, anti, slot, comps)


# ---------------------------------------------------------------------------
# Sasakian criterion


def covector_map(B, pi):
    """Matrix of alpha -> i_{pi(alpha)} B, i.e. B.T @ pi."""
    return B.T @ pi


def negative_axis_eigenvalue(A: np.ndarray, eig_tol: float = EIG_TOL):
    """An eigenvalue of ``A`` on the open negative real axis, or None.

    ``det(1 + sA) = prod(1 + s lambda_i)`` vanishes for some ``s > 0`` exactly
    when some eigenvalue is real and negative.
    """
    for lam in np.linalg.eigvals(np.asarray(A, dtype=complex)):
        if abs(lam.imag) < eig_tol and lam.real < -eig_tol:
            return complex(lam)
    return None


@dataclass
class SasakianVerdict:
    status: str
    witness: tuple | None = None
    eigenvalue: complex | None = None
    max_deta: float = 0.0
    spectra: list = field(default_factory=list)

    @property
    def sasakian(self) -> bool:
        return self.status == SASAKIAN

    def as_dict(self) -> dict:
        d = {"status": self.status, "max_deta": self.max_deta,
             "witness": None if self.witness is None else list(self.witness)}
        if self.eigenvalue is not None:
            d["eigenvalue"] = [self.eigenvalue.real, self.eigenvalue.imag]
        return d


def deta_field(S: GenContactStructure) -> Field:
    d = S.dim
    return eta_of(S).map(calculus.d_oneform, (d, d), "d eta")


def sasakian_criterion(S: GenContactStructure, route: str = "g_phi", G: GenMetric | None = None, points=None,
                       tol: float = 1e-8, eig_tol: float = EIG_TOL) -> SasakianVerdict:
    """SASAKIAN iff d eta is not identically zero and 1 + s (d eta) pi_M is invertible for every s > 0."""
    pts = default_points(S.dim) if points is None else points
    om = deta_field(S)
    big = max(np.abs(om.value(p)).max() for p in pts)
    if big < tol:
        return SasakianVerdict(FAIL_DETA_ZERO, max_deta=float(big))
    piM = canonical_piM(S, route, G)
    spectra = []
    for p in pts:
        A = covector_map(om.value(p), piM.value(p))
        spectra.append(np.sort_complex(np.linalg.eigvals(A)))
        lam = negative_axis_eigenvalue(A, eig_tol)
        if lam is not None:
            return SasakianVerdict(FAIL_SPECTRUM, tuple(float(c) for c in p), lam, float(big), spectra)
    return SasakianVerdict(SASAKIAN, max_deta=float(big), spectra=spectra)


# ---------------------------------------------------------------------------
# gauge transformations


def gauge_transform(pi, B, p=None, tol: float = 1e-12):
    """pi (1 + B pi)^-1, where B pi is the covector map alpha -> i_{pi(alpha)} B.

    ``pi`` and ``B`` may be fields (evaluated at ``p`` to jets), jets or arrays.
    """
    if isinstance(pi, Field):
        pi = pi.at(p)
    if isinstance(B, Field):
        B = B.at(p)
    d = (pi.shape if not isinstance(pi, Jet) else pi.shape)[-1]
    jet_mode = isinstance(pi, Jet) or isinstance(B, Jet)
    if jet_mode:
        pi, B = gtb._jet_pair(pi, B)
        M = Jet.const(np.eye(d), pi.dim) + covector_map(B, pi)
        det = np.linalg.det(M.val)
    else:
        pi, B = np.asarray(pi, dtype=complex), np.asarray(B, dtype=complex)
        M = np.eye(d) + covector_map(B, pi)
        det = np.linalg.det(M)
    if abs(det) < tol:
        raise GaugeSingularityError(f"1 + B pi is singular (|det| = {abs(det):.3e})", p)
    if jet_mode:
        return pi @ jets.inv(M)
    return pi @ np.linalg.inv(M)


def gauge_graph_residual(pi0, pi1, B, probes: int = 16, rng=None) -> float:
    """max over unit covectors xi of |pi0 xi - pi1 zeta| with zeta = (1 + B pi0) xi.

    e^B maps pi0 xi + xi to pi0 xi + zeta, which lies on the graph of pi1
    exactly when its tangent part equals pi1 zeta.
    """
    pi0, pi1, B = (np.asarray(m, dtype=complex) for m in (pi0, pi1, B))
    rng = np.random.default_rng(0) if rng is None else rng
    d = pi0.shape[0]
    worst = 0.0
    for _ in range(probes):
        xi = rng.standard_normal(d)
        xi /= np.linalg.norm(xi)
        X = pi0 @ xi
        u = gtb.bfield_apply(B, np.concatenate([X, xi]))
        zeta = u[d:]
        worst = max(worst, float(np.linalg.norm(u[:d] - pi1 @ zeta)))
    return worst


def gauge_graph_verify(pi0: Field, pi1: Field, B: Field, points, probes: int = 16, seed: int = 0) -> Residual:
    return sup_over(points, lambda p: gauge_graph_residual(pi0.value(p), pi1.value(p), B.value(p), probes,
                                                           np.random.default_rng(seed)),
                    "gauge_graph", 1e-10)


def gauge_field(pi: Field, B: Field) -> Field:
    """The gauge-transformed bivector as a field (jets carry its first derivatives)."""
    return Field.combine(lambda a, b: gauge_transform(a, b), [pi, B], pi.shape, "pi1")


def graph_span(pi) -> np.ndarray:
    """Rows pi(xi) + xi over the coordinate covectors xi."""
    pi = np.asarray(pi, dtype=complex)
    return np.concatenate([pi.T, np.eye(pi.shape[0])], axis=1)


def graph_distance(pi0, pi1, B) -> float:
    """Subspace distance between e^B Gamma_pi0 and Gamma_pi1."""
    up = graph_span(pi0) @ gtb.bfield_matrix(np.asarray(B, dtype=complex)).T
    return max(subspace.span_distance(up, graph_span(pi1)), subspace.span_distance(graph_span(pi1), up))
