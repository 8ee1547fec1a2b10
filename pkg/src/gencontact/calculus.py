"""Exterior derivative, Lie bracket, Courant bracket and Jacobi residuals.

All operators act on jets evaluated at a single point and return jets one
order lower (the pointwise value needs first derivatives of the inputs).
The exterior derivative uses ``(d alpha)_ij = d_i alpha_j - d_j alpha_i``.
"""
from __future__ import annotations

import numpy as np

from . import gtb
from .jets import Jet, concatenate


class IsotropyError(ValueError):
    """Arguments of the obstruction tensor do not span an isotropic subspace."""


def d_function(f: Jet) -> Jet:
    return f.deriv()


def d_oneform(alpha: Jet) -> Jet:
    """(d alpha)_ij = d_i alpha_j - d_j alpha_i."""
    D = alpha.deriv()  # D[j, i] = d_i alpha_j
    return D.T - D


def d_twoform(B: Jet) -> Jet:
    """(dB)_ijk = d_i B_jk + d_j B_ki + d_k B_ij."""
    D = B.deriv()  # D[j, k, i] = d_i B_jk
    return D.transpose(2, 0, 1) + D.transpose(1, 2, 0) + D


def lie_bracket(X: Jet, Y: Jet) -> Jet:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i."""
    return Y.deriv() @ X - X.deriv() @ Y


def lie_derivative_form(X: Jet, beta: Jet) -> Jet:
    """L_X beta = i_X d beta + d(i_X beta)."""
    return gtb.interior(X, d_oneform(beta)) + gtb.contract(X, beta).deriv()


def courant_bracket(a: Jet, b: Jet) -> Jet:
    """[[X+alpha, Y+beta]] = [X,Y] + L_X beta - L_Y alpha - 1/2 d(i_X beta - i_Y alpha)."""
    d = a.shape[-1] // 2
    X, alpha = a[:d], a[d:]
    Y, beta = b[:d], b[d:]
    vec = lie_bracket(X, Y)
    form = (lie_derivative_form(X, beta) - lie_derivative_form(Y, alpha)
            - 0.5 * (gtb.contract(X, beta) - gtb.contract(Y, alpha)).deriv())
    return concatenate([vec, form])


def courant_table(U: Jet) -> np.ndarray:
    """Values of [[u_a, u_b]] for every ordered pair of rows of ``U`` (shape ``(k, 2d)``).

    Vectorised form of :func:`courant_bracket`; returns an array ``(k, k, 2d)``.
    """
    V = U.val
    G = U.gradient()  # G[l, a, :] = d_l u_a
    d = V.shape[-1] // 2
    X, al = V[:, :d], V[:, d:]
    dX, dal = G[:, :, :d], G[:, :, d:]  # dX[l, a, i] = d_l X_a^i
    lie = np.einsum("al,lbi->abi", X, dX) - np.einsum("bl,lai->abi", X, dX)
    # i_{X_a} d(alpha_b): X_a^l (d_l alpha_bj - d_j alpha_bl)
    ix_d = np.einsum("al,lbj->abj", X, dal) - np.einsum("al,jbl->abj", X, dal)
    # d(i_{X_a} alpha_b)_j = d_j X_a^l alpha_bl + X_a^l d_j alpha_bl
    d_ix = np.einsum("jal,bl->abj", dX, al) + np.einsum("al,jbl->abj", X, dal)
    form = (ix_d + d_ix) - (ix_d + d_ix).transpose(1, 0, 2) - 0.5 * (d_ix - d_ix.transpose(1, 0, 2))
    return np.concatenate([lie, form], axis=-1)


def obstruction_table(U: Jet) -> np.ndarray:
    """T[a, b, c] = <[[u_a, u_b]], u_c> for the rows of ``U``."""
    C = courant_table(U)
    V = U.val
    d = V.shape[-1] // 2
    return 0.5 * (np.einsum("abi,ci->abc", C[..., :d], V[:, d:]) + np.einsum("abi,ci->abc", C[..., d:], V[:, :d]))


def courant_obstruction(a: Jet, b: Jet, c: Jet, tol: float = 1e-9) -> complex:
    """<[[a, b]], c>; the three sections must be mutually isotropic at the point."""
    vals = [a.val, b.val, c.val]
    worst = max(abs(gtb.pairing(u, v)) for i, u in enumerate(vals) for v in vals[i:])
    if worst > tol:
        raise IsotropyError(f"sections are not isotropic (max pairing {worst:.3e})")
    return complex(gtb.pairing(courant_bracket(a, b).val, c.val))


def jacobi_residual(pi: Jet) -> np.ndarray:
    """R^ijk = sum_l pi^il d_l pi^jk + pi^jl d_l pi^ki + pi^kl d_l pi^ij (cyclic Jacobiator).

    Equals the Jacobiator {x^i,{x^j,x^k}} + cyclic of the bracket
    {f, g} = pi^ab d_a f d_b g on coordinate functions.
    """
    P = pi.val
    D = pi.gradient()  # D[l, j, k] = d_l pi^jk
    return (np.einsum("il,ljk->ijk", P, D) + np.einsum("jl,lki->ijk", P, D)
            + np.einsum("kl,lij->ijk", P, D))


def trivector_components(R: np.ndarray) -> dict:
    d = R.shape[0]
    return {(i, j, k): complex(R[i, j, k]) for i in range(d) for j in range(i + 1, d) for k in range(j + 1, d)}
