"""Pointwise algebra on the generalized tangent bundle TM + T*M.

Sections are length-``2d`` vectors laid out as ``(X^1..X^d, a_1..a_d)``;
endomorphisms are ``2d x 2d`` matrices in block form ``[[A, P], [S, D]]``
(``P`` takes covectors to vectors, ``S`` vectors to covectors).  Every
function accepts plain ``ndarray`` values or :class:`~gencontact.jets.Jet`
values, so the same code yields derivatives when fed jets.

Sign conventions (fixed throughout the package):

* two-form components ``B_ij = B(d_i, d_j)``; interior product
  ``(i_X B)_j = X^i B_ij``, so a two-form acts on vectors by ``B.T``;
* bivector components ``pi^ab = pi(dx^a, dx^b)``; as a covector-to-vector map
  a bivector acts by ``alpha -> pi(., alpha)``, i.e. by the matrix ``pi``;
* the upper-right block of an endomorphism built from a bivector stores
  ``alpha -> pi(alpha, .)``, i.e. ``pi.T``.
"""
from __future__ import annotations

import numpy as np

from . import jets
from .fields import ChartSpec, Field
from .jets import Jet


class DimensionError(ValueError):
    pass


class DegeneratePairError(ValueError):
    """E+ and E- do not satisfy the null/normalization conditions."""


def neutral_form(d: int) -> np.ndarray:
    """Matrix Q with <u, v> = u^T Q v / 2."""
    q = np.zeros((2 * d, 2 * d))
    q[:d, d:] = np.eye(d)
    q[d:, :d] = np.eye(d)
    return q


def section(tangent, cotangent) -> np.ndarray:
    t = np.asarray(tangent, dtype=complex)
    c = np.asarray(cotangent, dtype=complex)
    if t.shape != c.shape:
        raise DimensionError(f"tangent {t.shape} and cotangent {c.shape} parts differ")
    return np.concatenate([t, c])


def tangent(u):
    return u[: u.shape[-1] // 2] if not isinstance(u, Jet) else u[..., : u.shape[-1] // 2]


def cotangent(u):
    return u[u.shape[-1] // 2:] if not isinstance(u, Jet) else u[..., u.shape[-1] // 2:]


def _dim_of(u) -> int:
    n = u.shape[-1]
    if n % 2:
        raise DimensionError(f"section length {n} is odd")
    return n // 2


def _jet_pair(a, b):
    """Promote the non-jet operand (if any) to a constant jet on the same chart."""
    dim = a.dim if isinstance(a, Jet) else b.dim
    return tuple(v if isinstance(v, Jet) else Jet.const(v, dim) for v in (a, b))


def pairing(a, b):
    """<X + alpha, Y + beta> = (beta(X) + alpha(Y)) / 2 (bilinear, no conjugation)."""
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"pairing of sections of length {a.shape[-1]} and {b.shape[-1]}")
    d = _dim_of(a)
    if isinstance(a, Jet) or isinstance(b, Jet):
        a, b = _jet_pair(a, b)
        return 0.5 * (jets.einsum("i,i->", a[:d], b[d:]) + jets.einsum("i,i->", a[d:], b[:d]))
    return 0.5 * (a[..., :d] @ b[..., d:] + a[..., d:] @ b[..., :d])


def tensor_endo(a, b):
    """Matrix of u -> 2<b, u> a."""
    d = _dim_of(a)
    q = neutral_form(d)
    if isinstance(a, Jet) or isinstance(b, Jet):
        a, b = _jet_pair(a, b)
        return jets.einsum("i,j->ij", a, b @ q)
    return np.outer(a, q @ b)


def endo_apply(E, a):
    if E.shape[-1] != a.shape[-1]:
        raise DimensionError(f"endomorphism of size {E.shape[-1]} applied to section of length {a.shape[-1]}")
    return E @ a


def adjoint(E):
    """Adjoint with respect to the neutral pairing: Q E^T Q."""
    d = E.shape[-1] // 2
    q = neutral_form(d)
    if isinstance(E, Jet):
        qj = Jet.const(q, E.dim)
        return qj @ E.T @ qj
    return q @ E.T @ q


def adjoint_defect(E: np.ndarray, trials: int = 16, symmetric: bool = False, rng=None) -> float:
    """max |<Ea, b> + <a, Eb>| (skew test) or |<Ea, b> - <a, Eb>| (symmetric test) over random probes."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(0) if rng is None else rng
    E = np.asarray(E)
    n = E.shape[-1]
    sign = -1.0 if symmetric else 1.0
    worst = 0.0
    for _ in range(trials):
        a = rng.standard_normal(n)
        b = rng.standard_normal(n)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        worst = max(worst, abs(pairing(E @ a, b) + sign * pairing(a, E @ b)))
    return float(worst)


def bfield_matrix(B):
    """e^B = [[1, 0], [B, 1]] with the lower block acting by X -> i_X B (= B.T X)."""
    d = B.shape[-1]
    if isinstance(B, Jet):
        eye = Jet.const(np.eye(d), B.dim)
        zero = Jet.const(np.zeros((d, d)), B.dim)
        return jets.block([[eye, zero], [B.T, eye]])
    m = np.eye(2 * d, dtype=complex)
    m[d:, :d] = np.asarray(B).T
    return m


def bfield_apply(B, a):
    if B.shape[-1] * 2 != a.shape[-1]:
        raise DimensionError("two-form and section dimensions differ")
    return bfield_matrix(B) @ a


def interior(X, B):
    """i_X B for a vector X and two-form matrix B."""
    if isinstance(X, Jet) or isinstance(B, Jet):
        return jets.einsum("i,ij->j", *_jet_pair(X, B))
    return np.asarray(X) @ np.asarray(B)


def contract(X, alpha):
    """alpha(X) for a vector and a one-form."""
    if isinstance(X, Jet) or isinstance(alpha, Jet):
        return jets.einsum("i,i->", *_jet_pair(X, alpha))
    return np.asarray(X) @ np.asarray(alpha)


def perp_projector(Ep, Em, tol: float = 1e-9):
    """Matrix of P(u) = u - 2<u, E->E+ - 2<u, E+>E-, the projector onto (E+ + E-)^perp."""
    _check_pair(Ep, Em, tol)
    n = Ep.shape[-1]
    eye = np.eye(n)
    if isinstance(Ep, Jet):
        return Jet.const(eye, Ep.dim) - tensor_endo(Ep, Em) - tensor_endo(Em, Ep)
    return eye - tensor_endo(Ep, Em) - tensor_endo(Em, Ep)


def perp_project(u, Ep, Em, tol: float = 1e-9):
    return perp_projector(Ep, Em, tol) @ u


def _check_pair(Ep, Em, tol):
    ep = Ep.val if isinstance(Ep, Jet) else np.asarray(Ep)
    em = Em.val if isinstance(Em, Jet) else np.asarray(Em)
    res = max(abs(pairing(ep, ep)), abs(pairing(em, em)), abs(pairing(ep, em) - 0.5))
    if res > tol:
        raise DegeneratePairError(f"E+/E- pairing residual {res:.3e} exceeds {tol:.1e}")


def gram_spectrum(d: int) -> np.ndarray:
    """Eigenvalues of the pairing's Gram matrix in the standard frame."""
    return np.linalg.eigvalsh(0.5 * neutral_form(d))


# ---------------------------------------------------------------------------
# field-level constructors


def endo_field(chart: ChartSpec, A=None, P=None, S=None, D=None, name: str = "") -> Field:
    """GEndoField from the four d x d blocks, each an expression array, a Field, or None (zero)."""
    d = chart.dim
    blocks = []
    for blk in (A, P, S, D):
        if blk is None:
            blocks.append(Field.zeros((d, d), d))
        elif isinstance(blk, Field):
            blocks.append(blk)
        else:
            blocks.append(Field.from_exprs(blk, chart))
    for b in blocks:
        if b.shape != (d, d):
            raise DimensionError(f"endomorphism block has shape {b.shape}, expected {(d, d)}")
    return Field.combine(lambda a, p, s, dd: jets.block([[a, p], [s, dd]]), blocks, (2 * d, 2 * d), name)


def section_field(chart: ChartSpec, tangent_part=None, cotangent_part=None, name: str = "") -> Field:
    d = chart.dim
    parts = []
    for part in (tangent_part, cotangent_part):
        if part is None:
            parts.append(Field.zeros((d,), d))
        elif isinstance(part, Field):
            parts.append(part)
        else:
            parts.append(Field.from_exprs(part, chart))
    return Field.combine(lambda t, c: jets.concatenate([t, c]), parts, (2 * d,), name)


def identity_endo(d: int) -> Field:
    return Field.constant(np.eye(2 * d), d, "Id")


def frame_sections(d: int) -> np.ndarray:
    """The standard frame d_1..d_d, dx^1..dx^d as rows."""
    return np.eye(2 * d, dtype=complex)
