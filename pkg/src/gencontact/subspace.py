"""Complex subspaces given by spanning rows.

Every subspace is an ``(k, n)`` array whose rows span it.  Rank decisions
use the SVD with a singular-value threshold relative to the largest
singular value, so results do not depend on how the rows are scaled.
"""
from __future__ import annotations

import numpy as np

RTOL = 1e-9
ATOL = 1e-12


def _rows(A, n=None) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A[None, :] if A.size else A.reshape(0, n or 0)
    return A


def singular_values(A) -> np.ndarray:
    A = _rows(A)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def rank(A, rtol: float = RTOL, atol: float = ATOL) -> int:
    s = singular_values(A)
    if s.size == 0 or s[0] <= atol:
        return 0
    return int(np.sum(s > rtol * s[0]))


def rank_margin(A, expected: int, rtol: float = RTOL) -> float:
    """Relative size of the ``expected``-th singular value (0 if missing)."""
    s = singular_values(A)
    if expected == 0:
        return 1.0
    if s.size < expected or s[0] == 0:
        return 0.0
    return float(s[expected - 1] / s[0])


def basis(A, rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Orthonormal rows spanning the row space of ``A``."""
    A = _rows(A)
    if A.shape[0] == 0:
        return A.copy()
    _, s, vh = np.linalg.svd(A, full_matrices=False)
    r = 0 if s[0] <= atol else int(np.sum(s > rtol * s[0]))
    return vh[:r]


def nullspace(M, rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Rows ``c`` with ``M @ c = 0``, orthonormal."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    r = 0 if s.size == 0 or s[0] <= atol else int(np.sum(s > rtol * s[0]))
    return vh[r:].conj()


def intersect(A, B, rtol: float = RTOL) -> np.ndarray:
    """Orthonormal rows spanning span(A) intersected with span(B)."""
    qa, qb = basis(A, rtol), basis(B, rtol)
    n = _rows(A).shape[1]
    if qa.shape[0] == 0 or qb.shape[0] == 0:
        return np.zeros((0, n), complex)
    # c qa = d qb  <=>  [qa^T, -qb^T] (c, d) = 0
    null = nullspace(np.concatenate([qa.T, -qb.T], axis=1), rtol)
    return basis(null[:, :qa.shape[0]] @ qa, rtol)


def same_span(A, B, rtol: float = RTOL) -> bool:
    ra, rb = rank(A, rtol), rank(B, rtol)
    return ra == rb == rank(np.concatenate([_rows(A), _rows(B)]), rtol)


def distance_to_span(v, A) -> float:
    """Euclidean distance from ``v`` to span(A)."""
    v = np.asarray(v, dtype=complex)
    q = basis(A)
    return float(np.linalg.norm(v - (q.conj() @ v) @ q))


def span_distance(A, B) -> float:
    """Largest distance of a unit vector of span(A) from span(B), over a basis of A."""
    qa = basis(A)
    if qa.shape[0] == 0:
        return 0.0
    return max(distance_to_span(v, B) for v in qa)
