"""Independent oracles and random generators shared by the test modules.

Nothing here goes through the jet machinery: oracles evaluate plain numpy
expressions and differentiate them by central differences.
"""
import numpy as np

from gencontact import structures

# component expressions of the built-in structures, on the (x, y, z) chart
BUILTIN_EXPRS = sorted({e for block in (structures.HEIS_ETA, structures.HEIS_XI, structures.FLAT_ETA)
                        for e in block}
                       | {e for m in (structures.HEIS_PHI, structures.HEIS_G, structures.HEIS_G_INV,
                                      structures.FLAT_PHI) for row in m for e in row})

NAMES = ("x", "y", "z")


def random_expression(rng, names=NAMES, depth=3) -> str:
    """A random pole-free expression over ``names`` (denominators stay >= 1 on [-1, 1]^n)."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return str(rng.choice(names))
        return str(rng.choice(["1", "2", "0.5", "3", "1.25"]))
    kind = rng.integers(0, 7)
    a = random_expression(rng, names, depth - 1)
    b = random_expression(rng, names, depth - 1)
    if kind == 0:
        return f"({a}) + ({b})"
    if kind == 1:
        return f"({a}) - ({b})"
    if kind == 2:
        return f"({a}) * ({b})"
    if kind == 3:
        return f"({a}) / (2 + ({rng.choice(names)})^2)"
    if kind == 4:
        return f"({a})^{rng.integers(0, 4)}"
    func = rng.choice(["sin", "cos", "exp"])
    if func == "exp":
        return f"exp(0.5 * ({a}) / (1 + ({a})^2))"
    return f"{func}({a})"


def corpus(rng, count):
    """Built-in corpus expressions first, then random ones, ``count`` in total."""
    out = list(BUILTIN_EXPRS)
    while len(out) < count:
        out.append(random_expression(rng))
    return out[:count]


def central_gradient(fn, p, h=1e-5):
    p = np.asarray(p, dtype=float)
    g = []
    for k in range(len(p)):
        e = np.zeros_like(p)
        e[k] = h
        g.append((fn(p + e) - fn(p - e)) / (2 * h))
    return np.array(g)


# --- random polynomial bivectors and the brute-force Jacobiator -----------------

def random_poly(rng, dim=3, degree=2):
    """(source text, numpy callable) of a random polynomial of total degree <= ``degree``."""
    monos = [(i, j) for i in range(-1, dim) for j in range(i, dim)] if degree >= 2 else [(-1, j) for j in range(-1, dim)]
    terms, parts = [], []
    for i, j in monos:
        c = round(float(rng.uniform(-1, 1)), 3)
        if abs(c) < 1e-3:
            continue
        vars_ = [k for k in (i, j) if k >= 0]
        terms.append((c, vars_))
        parts.append(f"{c} * " + " * ".join(NAMES[k] for k in vars_) if vars_ else f"({c})")

    def fn(p):
        return sum(c * np.prod([p[k] for k in vs]) for c, vs in terms) if terms else 0.0

    return (" + ".join(f"({s})" for s in parts) or "0"), fn


def random_bivector(rng, dim=3, degree=2):
    """Upper-triangular polynomial entries; returns (matrix of sources, numpy callable p -> matrix)."""
    src = [["0"] * dim for _ in range(dim)]
    fns = {}
    for a in range(dim):
        for b in range(a + 1, dim):
            s, f = random_poly(rng, dim, degree)
            src[a][b], src[b][a] = s, f"-({s})"
            fns[a, b] = f

    def value(p):
        m = np.zeros((dim, dim))
        for (a, b), f in fns.items():
            m[a, b] = f(p)
            m[b, a] = -m[a, b]
        return m

    return src, value


def brute_force_jacobiator(pi, p, h=1e-5):
    """{x^i, {x^j, x^k}} + cyclic from the Poisson bracket {f, g} = pi^ab d_a f d_b g.

    With coordinate functions, {x^j, x^k} = pi^jk and {x^i, F} = pi^il d_l F; the
    derivative of pi^jk is taken by central differences of ``pi``.
    """
    d = len(p)
    P = pi(p)
    dP = central_gradient(pi, p, h)  # dP[l, j, k] = d_l pi^jk

    def outer(i, j, k):
        return sum(P[i, l] * dP[l, j, k] for l in range(d))

    R = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            for k in range(d):
                R[i, j, k] = outer(i, j, k) + outer(j, k, i) + outer(k, i, j)
    return R


# --- determinant scan for the invertibility test ---------------------------------

def det_scan_singular(A, rel_tol=1e-8):
    """True when det(1 + s A) vanishes for some s > 0, found by scanning s over decades.

    A coarse scan on s in {10^k : k = -3..3} is refined on a log grid between
    consecutive scan points.  A sign change proves a root.  Near-zero local
    minima of |det| (double roots do not change sign) are polished by a bounded
    scalar search.  Roots with s outside [1e-3, 1e3] are invisible, so callers
    keep their cases inside that window.
    """
    from scipy.optimize import minimize_scalar

    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    scale = max(1.0, np.abs(A).max()) ** n

    def det(log_s):
        return float(np.linalg.det(np.eye(n) + 10.0 ** log_s * A))

    coarse = np.arange(-3, 4)
    grid = np.unique(np.concatenate([np.linspace(a, a + 1, 41) for a in coarse[:-1]]))
    vals = np.array([det(k) for k in grid])
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0 or fa * fb < 0:
            return True
        if fb == 0:
            return True
    mags = np.abs(vals)
    for k in range(1, len(grid) - 1):
        if mags[k] <= mags[k - 1] and mags[k] <= mags[k + 1]:
            res = minimize_scalar(lambda ls: abs(det(ls)), bounds=(grid[k - 1], grid[k + 1]), method="bounded",
                                  options={"xatol": 1e-12})
            if abs(det(res.x)) < rel_tol * scale:
                return True
    return False
